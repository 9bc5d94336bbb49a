// UI state and the apply-preferences step. The state only ever displays
// numbers the service returned: sliders feed the payload, the last
// acknowledged response feeds the tables and the plotted point. A stale
// response (an older in-flight request resolving late) never overwrites a
// newer one; the request gate decides.

import type { Client, CounterfactualResponse, Frontier, Summary } from "./api.js";
import { encodePayload, type SliderValues } from "./encoding.js";
import type { RequestGate } from "./requestGate.js";

export interface SliderBounds {
  min: number;
  max: number;
}

export interface UiState {
  sliders: SliderValues;
  bounds: SliderBounds;
  lastResponse: CounterfactualResponse | null;
  frontier: Frontier | null;
  error: string | null;
  pending: boolean;
}

export const DEFAULT_BOUNDS: SliderBounds = { min: -250, max: 250 };

export function initialState(summary: Summary, bounds: SliderBounds = DEFAULT_BOUNDS): UiState {
  const omegaIncrements: Record<string, number> = {};
  for (const c of summary.welfare_covariates) omegaIncrements[c] = 0;
  const lambda: Record<string, number> = {};
  for (const o of summary.outcomes) if (!o.numeraire) lambda[o.name] = 0;
  return {
    sliders: { omegaIncrements, lambda, C: 0, k: summary.k_default },
    bounds,
    lastResponse: null,
    frontier: null,
    error: null,
    pending: false,
  };
}

function clamp(v: number, b: SliderBounds): number {
  return Math.min(b.max, Math.max(b.min, v));
}

export function setOmegaSlider(state: UiState, covariate: string, value: number): UiState {
  if (!(covariate in state.sliders.omegaIncrements)) return state;
  return {
    ...state,
    sliders: {
      ...state.sliders,
      omegaIncrements: {
        ...state.sliders.omegaIncrements,
        [covariate]: clamp(value, state.bounds),
      },
    },
  };
}

export function setLambdaSlider(state: UiState, outcome: string, value: number): UiState {
  if (!(outcome in state.sliders.lambda)) return state;
  return {
    ...state,
    sliders: {
      ...state.sliders,
      lambda: { ...state.sliders.lambda, [outcome]: clamp(value, state.bounds) },
    },
  };
}

export function setC(state: UiState, value: number): UiState {
  return { ...state, sliders: { ...state.sliders, C: clamp(value, state.bounds) } };
}

export function setK(state: UiState, value: number, n: number): UiState {
  const k = Math.max(1, Math.min(n, Math.round(value)));
  return { ...state, sliders: { ...state.sliders, k } };
}

/**
 * POST the current sliders; resolve to the updated state. A response that is
 * no longer the latest is discarded (the returned state keeps whatever a
 * newer commit produced). Errors set the banner and leave the rest of the
 * state untouched, sliders included.
 */
export async function applyPreferences(
  state: UiState,
  client: Client,
  gate: RequestGate,
): Promise<UiState> {
  const token = gate.next();
  const payload = encodePayload(state.sliders);
  try {
    const response = await client.counterfactual(payload);
    if (!gate.isLatest(token)) return state; // stale: a newer commit superseded it
    return { ...state, lastResponse: response, error: null, pending: false };
  } catch (err) {
    if (!gate.isLatest(token)) return state;
    const message =
      typeof err === "object" && err !== null && "message" in err
        ? String((err as { message: unknown }).message)
        : String(err);
    return { ...state, error: message, pending: false };
  }
}

export async function loadFrontier(state: UiState, client: Client,
                                   weighting: "raw" | "welfare" | "survey" = "raw"): Promise<UiState> {
  try {
    const frontier = await client.frontier(weighting);
    return { ...state, frontier, error: null };
  } catch (err) {
    const message =
      typeof err === "object" && err !== null && "message" in err
        ? String((err as { message: unknown }).message)
        : String(err);
    return { ...state, error: message };
  }
}

/**
 * The plotted point for the current response, in the frontier's
 * average-impact coordinates. The service computes these (levels minus the
 * empty-selection baseline); the UI just picks them out in outcome order.
 */
export function plottedImpacts(response: CounterfactualResponse, outcomes: string[]): number[] | null {
  const point: number[] = [];
  for (const o of outcomes) {
    const v = response.expected_impacts[o];
    if (v === undefined) return null;
    point.push(v);
  }
  return point;
}
