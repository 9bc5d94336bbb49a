import { describe, expect, it } from "vitest";

import { Client, type CounterfactualResponse, type Summary } from "../src/api.js";
import { createRequestGate } from "../src/requestGate.js";
import {
  applyPreferences,
  initialState,
  plottedImpacts,
  setK,
  setLambdaSlider,
  setOmegaSlider,
} from "../src/state.js";

const SUMMARY: Summary = {
  n: 100,
  k_default: 40,
  welfare_covariates: ["group", "income"],
  outcomes: [
    { name: "cons", transform: "log", numeraire: true, bad: false, units: "" },
    { name: "sick", transform: "linear", numeraire: false, bad: true, units: "days" },
  ],
  fitted_increments: null,
  survey_increments: null,
  fingerprint: "f00",
};

function fakeResponse(tag: number): CounterfactualResponse {
  return {
    implied_priorities: { group: tag },
    expected_outcomes: { cons: 5, sick: 0.5 },
    expected_impacts: { cons: 0.1, sick: -0.05 },
    top_households: [],
    k: 40,
    echo: { omega: {}, lambda: {}, C: 0, k: 40 },
    fingerprint: "f00",
  };
}

function clientFromJson(handler: (url: string, init?: RequestInit) => Promise<unknown>): Client {
  return new Client("http://test", async (url, init) => {
    const body = await handler(url, init);
    return new Response(JSON.stringify(body), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  });
}

describe("ui state", () => {
  it("starts neutral: all sliders zero, k at the server default", () => {
    const state = initialState(SUMMARY);
    expect(state.sliders.omegaIncrements).toEqual({ group: 0, income: 0 });
    expect(state.sliders.lambda).toEqual({ sick: 0 });
    expect(state.sliders.C).toBe(0);
    expect(state.sliders.k).toBe(40);
    expect(state.lastResponse).toBeNull();
  });

  it("clamps sliders to bounds and k to 1..n", () => {
    let state = initialState(SUMMARY);
    state = setOmegaSlider(state, "group", 10_000);
    expect(state.sliders.omegaIncrements.group).toBe(state.bounds.max);
    state = setLambdaSlider(state, "sick", -10_000);
    expect(state.sliders.lambda.sick).toBe(state.bounds.min);
    state = setK(state, 10_000, SUMMARY.n);
    expect(state.sliders.k).toBe(100);
    state = setK(state, -3, SUMMARY.n);
    expect(state.sliders.k).toBe(1);
  });

  it("ignores sliders for unknown names", () => {
    const state = initialState(SUMMARY);
    expect(setOmegaSlider(state, "nope", 5)).toBe(state);
    expect(setLambdaSlider(state, "nope", 5)).toBe(state);
  });

  it("applyPreferences stores the acknowledged response", async () => {
    const client = clientFromJson(async () => fakeResponse(1));
    const state = await applyPreferences(initialState(SUMMARY), client, createRequestGate());
    expect(state.lastResponse?.implied_priorities.group).toBe(1);
    expect(state.error).toBeNull();
  });

  it("a stale response never overwrites a newer one", async () => {
    let release: (() => void) | null = null;
    let call = 0;
    const client = clientFromJson(async () => {
      call += 1;
      if (call === 1) {
        // first request resolves only after the second one finished
        await new Promise<void>((resolve) => {
          release = resolve;
        });
        return fakeResponse(1);
      }
      return fakeResponse(2);
    });
    const gate = createRequestGate();
    const base = initialState(SUMMARY);
    const first = applyPreferences(base, client, gate);
    const second = await applyPreferences(base, client, gate);
    expect(second.lastResponse?.implied_priorities.group).toBe(2);
    release!();
    const firstResolved = await first;
    // the stale call returns the state unchanged instead of applying tag 1
    expect(firstResolved.lastResponse).toBeNull();
  });

  it("errors set the banner and leave everything else unchanged", async () => {
    const client = new Client("http://test", async () =>
      new Response(JSON.stringify({ error: "invalid counterfactual request", fields: { k: "bad" } }), {
        status: 400,
      }),
    );
    let state = initialState(SUMMARY);
    state = setOmegaSlider(state, "group", 7);
    const after = await applyPreferences(state, client, createRequestGate());
    expect(after.error).toContain("invalid");
    expect(after.sliders).toEqual(state.sliders);
    expect(after.lastResponse).toBeNull();
  });

  it("network failure is an error banner, not a crash", async () => {
    const client = new Client("http://test", async () => {
      throw new Error("connection refused");
    });
    const after = await applyPreferences(initialState(SUMMARY), client, createRequestGate());
    expect(after.error).toContain("unreachable");
  });

  it("plottedImpacts picks service-computed impacts in outcome order", () => {
    const point = plottedImpacts(fakeResponse(1), ["cons", "sick"]);
    expect(point).toEqual([0.1, -0.05]);
    expect(plottedImpacts(fakeResponse(1), ["cons", "unknown"])).toBeNull();
  });
});
