// Typed client for the three service endpoints. `fetch` is injectable so
// unit tests can fake the transport; the live integration test uses the
// real one against a running server.

import type { CounterfactualPayload } from "./encoding.js";

export interface OutcomeInfo {
  name: string;
  transform: string;
  numeraire: boolean;
  bad: boolean;
  units: string;
}

export interface Summary {
  n: number;
  k_default: number;
  welfare_covariates: string[];
  outcomes: OutcomeInfo[];
  fitted_increments: Record<string, number> | null;
  survey_increments: Record<string, number> | null;
  fingerprint: string;
}

export interface CounterfactualResponse {
  implied_priorities: Record<string, number>;
  expected_outcomes: Record<string, number>;
  expected_impacts: Record<string, number>;
  top_households: { id: string; score: number }[];
  k: number;
  echo: CounterfactualPayload;
  fingerprint: string;
}

export interface FrontierPoint {
  direction: number[];
  impacts: number[];
  on_hull: boolean;
}

export interface Frontier {
  weighting: string;
  k: number;
  outcomes: string[];
  points: FrontierPoint[];
  hull_vertices: number[];
  fingerprint: string;
}

export interface ApiError {
  status: number;
  message: string;
  fields?: Record<string, string>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw { status: 0, message: `service unreachable: ${String(err)}` } satisfies ApiError;
    }
    const body = await res.json().catch(() => ({}));
    if (!res.ok) {
      throw {
        status: res.status,
        message: (body as { error?: string }).error ?? `HTTP ${res.status}`,
        fields: (body as { fields?: Record<string, string> }).fields,
      } satisfies ApiError;
    }
    return body as T;
  }

  summary(): Promise<Summary> {
    return this.request<Summary>("/summary");
  }

  counterfactual(payload: CounterfactualPayload): Promise<CounterfactualResponse> {
    return this.request<CounterfactualResponse>("/counterfactual", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  frontier(weighting: "raw" | "welfare" | "survey" = "raw"): Promise<Frontier> {
    return this.request<Frontier>(`/frontier?weighting=${weighting}`);
  }
}
