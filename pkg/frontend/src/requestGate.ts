// Single in-flight request discipline: each commit takes a fresh token and
// only the latest token's response may be applied; anything older is stale
// and dropped.

export interface RequestGate {
  next(): number;
  isLatest(token: number): boolean;
  invalidate(): void;
}

export function createRequestGate(): RequestGate {
  let current = 0;
  return {
    next() {
      current += 1;
      return current;
    },
    isLatest(token: number) {
      return token === current;
    },
    invalidate() {
      current += 1;
    },
  };
}
