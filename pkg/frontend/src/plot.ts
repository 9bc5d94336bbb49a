// Pairwise 2-D scatter panels of the frontier (three projections of the
// 3-outcome impact space) with the current allocation's point highlighted.
// Plain SVG, built as strings so the layout logic is unit-testable.

import type { Frontier } from "./api.js";

export interface PanelSpec {
  xIndex: number;
  yIndex: number;
  xLabel: string;
  yLabel: string;
}

export function panelPairs(outcomes: string[]): PanelSpec[] {
  const pairs: PanelSpec[] = [];
  for (let i = 0; i < outcomes.length; i++) {
    for (let j = i + 1; j < outcomes.length; j++) {
      pairs.push({ xIndex: i, yIndex: j, xLabel: outcomes[i]!, yLabel: outcomes[j]! });
    }
  }
  return pairs;
}

export interface Scale {
  min: number;
  max: number;
  px(v: number): number;
}

export function makeScale(values: number[], sizePx: number, pad = 0.08): Scale {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (!(isFinite(min) && isFinite(max))) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const span = max - min;
  min -= span * pad;
  max += span * pad;
  return {
    min,
    max,
    px: (v: number) => ((v - min) / (max - min)) * sizePx,
  };
}

const SIZE = 260;
const MARGIN = 36;

export function renderPanel(frontier: Frontier, spec: PanelSpec, current: number[] | null): string {
  const xs = frontier.points.map((p) => p.impacts[spec.xIndex]!);
  const ys = frontier.points.map((p) => p.impacts[spec.yIndex]!);
  if (current) {
    xs.push(current[spec.xIndex]!);
    ys.push(current[spec.yIndex]!);
  }
  const sx = makeScale(xs, SIZE);
  const sy = makeScale(ys, SIZE);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${SIZE + MARGIN} ${SIZE + MARGIN}" class="panel" role="img" ` +
      `aria-label="${spec.xLabel} vs ${spec.yLabel}">`,
  );
  parts.push(`<g transform="translate(${MARGIN},8)">`);
  parts.push(`<rect width="${SIZE}" height="${SIZE}" class="panel-bg"/>`);
  for (const p of frontier.points) {
    const cx = sx.px(p.impacts[spec.xIndex]!);
    const cy = SIZE - sy.px(p.impacts[spec.yIndex]!);
    const cls = p.on_hull ? "pt hull" : "pt";
    parts.push(`<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="${p.on_hull ? 3 : 1.5}" class="${cls}"/>`);
  }
  if (current) {
    const cx = sx.px(current[spec.xIndex]!);
    const cy = SIZE - sy.px(current[spec.yIndex]!);
    parts.push(`<circle cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="6" class="pt current"/>`);
  }
  parts.push(`<text x="${SIZE / 2}" y="${SIZE + 24}" class="axis">${spec.xLabel}</text>`);
  parts.push(
    `<text x="-10" y="${SIZE / 2}" class="axis" transform="rotate(-90 -10 ${SIZE / 2})">${spec.yLabel}</text>`,
  );
  parts.push("</g></svg>");
  return parts.join("");
}

export function renderPanels(frontier: Frontier, current: number[] | null): string {
  return panelPairs(frontier.outcomes)
    .map((spec) => renderPanel(frontier, spec, current))
    .join("\n");
}
