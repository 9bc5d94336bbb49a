import { describe, expect, it } from "vitest";

import { echoMatches, encodePayload, incrementsToWeight } from "../src/encoding.js";

describe("payload encoding", () => {
  it("passes slider increments through untouched", () => {
    const payload = encodePayload({
      omegaIncrements: { group: -12.4, income: 3 },
      lambda: { sick: -0.25 },
      C: 0.47,
      k: 100,
    });
    expect(payload).toEqual({
      omega: { group: -12.4, income: 3 },
      lambda: { sick: -0.25 },
      C: 0.47,
      k: 100,
    });
  });

  it("copies rather than aliases the slider maps", () => {
    const sliders = { omegaIncrements: { a: 1 }, lambda: { b: 2 }, C: 0, k: 5 };
    const payload = encodePayload(sliders);
    payload.omega.a = 99;
    expect(sliders.omegaIncrements.a).toBe(1);
  });

  it("a slider value v stands for the weight 1.01^v", () => {
    expect(incrementsToWeight(0)).toBe(1);
    expect(incrementsToWeight(1)).toBeCloseTo(1.01, 12);
    expect(incrementsToWeight(-12.4)).toBeCloseTo(Math.pow(1.01, -12.4), 15);
  });

  it("echo matching is exact, not approximate", () => {
    const p = encodePayload({ omegaIncrements: { a: 0.1 }, lambda: {}, C: 0, k: 3 });
    expect(echoMatches(p, { omega: { a: 0.1 }, lambda: {}, C: 0, k: 3 })).toBe(true);
    expect(echoMatches(p, { omega: { a: 0.1 + 1e-12 }, lambda: {}, C: 0, k: 3 })).toBe(false);
    expect(echoMatches(p, { omega: { a: 0.1, b: 0 }, lambda: {}, C: 0, k: 3 })).toBe(false);
  });
});
