// Table rendering for the implied-priorities and expected-outcomes blocks.
// Values are passed through as received; only formatting happens here.

export function fmt(v: number, digits = 2): string {
  return Number.isFinite(v) ? v.toFixed(digits) : "n/a";
}

export function prioritiesRows(priorities: Record<string, number>): string {
  return Object.entries(priorities)
    .map(
      ([c, v]) =>
        `<tr><td>${c}</td><td class="num">${fmt(v, 1)}</td></tr>`,
    )
    .join("");
}

export function outcomesRows(
  outcomes: Record<string, number>,
  impacts: Record<string, number>,
): string {
  return Object.keys(outcomes)
    .map(
      (o) =>
        `<tr><td>${o}</td><td class="num">${fmt(outcomes[o]!, 3)}</td>` +
        `<td class="num">${fmt(impacts[o] ?? NaN, 3)}</td></tr>`,
    )
    .join("");
}

export function topHouseholdRows(top: { id: string; score: number }[], limit = 15): string {
  return top
    .slice(0, limit)
    .map((h) => `<tr><td>${h.id}</td><td class="num">${fmt(h.score, 4)}</td></tr>`)
    .join("");
}
