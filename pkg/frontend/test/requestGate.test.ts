import { describe, expect, it } from "vitest";

import { createRequestGate } from "../src/requestGate.js";

describe("request gate", () => {
  it("only the newest token is latest", () => {
    const gate = createRequestGate();
    const a = gate.next();
    expect(gate.isLatest(a)).toBe(true);
    const b = gate.next();
    expect(gate.isLatest(a)).toBe(false);
    expect(gate.isLatest(b)).toBe(true);
  });

  it("invalidate retires the current token", () => {
    const gate = createRequestGate();
    const a = gate.next();
    gate.invalidate();
    expect(gate.isLatest(a)).toBe(false);
  });
});
