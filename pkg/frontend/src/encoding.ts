// Slider-to-payload encoding. Sliders move in 1%-increment units: a slider
// value v means a welfare weight of 1.01^v per covariate unit, and the
// service takes exactly those increment values. The UI does no other welfare
// math; everything displayed comes back from the service.

export interface SliderValues {
  omegaIncrements: Record<string, number>;
  lambda: Record<string, number>;
  C: number;
  k: number;
}

export interface CounterfactualPayload {
  omega: Record<string, number>;
  lambda: Record<string, number>;
  C: number;
  k: number;
}

export function encodePayload(sliders: SliderValues): CounterfactualPayload {
  return {
    omega: { ...sliders.omegaIncrements },
    lambda: { ...sliders.lambda },
    C: sliders.C,
    k: sliders.k,
  };
}

/** The multiplicative weight a slider value stands for (display only). */
export function incrementsToWeight(v: number): number {
  return Math.pow(1.01, v);
}

/** Exact equality check for the server's payload echo. */
export function echoMatches(payload: CounterfactualPayload, echo: CounterfactualPayload): boolean {
  const sameMap = (a: Record<string, number>, b: Record<string, number>) => {
    const ak = Object.keys(a).sort();
    const bk = Object.keys(b).sort();
    return ak.length === bk.length && ak.every((k, i) => k === bk[i] && a[k] === b[k]);
  };
  return (
    sameMap(payload.omega, echo.omega) &&
    sameMap(payload.lambda, echo.lambda) &&
    payload.C === echo.C &&
    payload.k === echo.k
  );
}
