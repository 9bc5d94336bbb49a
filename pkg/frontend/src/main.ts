// DOM wiring: sliders -> debounce -> POST -> tables + plotted point.
// All logic lives in the imported modules; this file only touches the DOM.

import { Client } from "./api.js";
import { createRequestGate } from "./requestGate.js";
import {
  applyPreferences,
  initialState,
  loadFrontier,
  plottedImpacts,
  setC,
  setK,
  setLambdaSlider,
  setOmegaSlider,
  type UiState,
} from "./state.js";
import { renderPanels } from "./plot.js";
import { outcomesRows, prioritiesRows, topHouseholdRows, fmt } from "./table.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8571";

const client = new Client(SERVICE_URL);
const gate = createRequestGate();
let state: UiState | null = null;
let summaryN = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string | null) {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function render() {
  if (!state) return;
  showError(state.error);
  const r = state.lastResponse;
  el<HTMLTableSectionElement>("priorities").innerHTML = r
    ? prioritiesRows(r.implied_priorities)
    : "";
  el<HTMLTableSectionElement>("outcomes").innerHTML = r
    ? outcomesRows(r.expected_outcomes, r.expected_impacts)
    : "";
  el<HTMLTableSectionElement>("top").innerHTML = r ? topHouseholdRows(r.top_households) : "";
  if (state.frontier) {
    const current = r ? plottedImpacts(r, state.frontier.outcomes) : null;
    el<HTMLDivElement>("panels").innerHTML = renderPanels(state.frontier, current);
  }
}

let timer: number | undefined;
function commit() {
  window.clearTimeout(timer);
  timer = window.setTimeout(async () => {
    if (!state) return;
    state = { ...state, pending: true };
    state = await applyPreferences(state, client, gate);
    render();
  }, 150);
}

function sliderRow(
  label: string,
  min: number,
  max: number,
  step: number,
  value: number,
  onInput: (v: number) => void,
): HTMLDivElement {
  const row = document.createElement("div");
  row.className = "slider-row";
  const name = document.createElement("label");
  name.textContent = label;
  const input = document.createElement("input");
  input.type = "range";
  input.min = String(min);
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  const readout = document.createElement("span");
  readout.className = "readout num";
  readout.textContent = fmt(value, step < 0.1 ? 2 : 1);
  input.addEventListener("input", () => {
    const v = Number(input.value);
    readout.textContent = fmt(v, step < 0.1 ? 2 : 1);
    onInput(v);
    commit();
  });
  row.append(name, input, readout);
  return row;
}

async function boot() {
  try {
    const summary = await client.summary();
    summaryN = summary.n;
    state = initialState(summary);
    el<HTMLSpanElement>("meta").textContent =
      `${summary.n} households, fingerprint ${summary.fingerprint}`;

    const weights = el<HTMLDivElement>("weight-sliders");
    for (const c of summary.welfare_covariates) {
      weights.append(
        sliderRow(c, -100, 100, 1, 0, (v) => {
          if (state) state = setOmegaSlider(state, c, v);
        }),
      );
    }
    const impacts = el<HTMLDivElement>("impact-sliders");
    for (const o of summary.outcomes) {
      if (o.numeraire) continue;
      impacts.append(
        sliderRow(`lambda: ${o.name}`, -2, 2, 0.01, 0, (v) => {
          if (state) state = setLambdaSlider(state, o.name, v);
        }),
      );
    }
    impacts.append(
      sliderRow("intrinsic value C", -2, 2, 0.01, 0, (v) => {
        if (state) state = setC(state, v);
      }),
    );
    impacts.append(
      sliderRow("treated households K", 1, summary.n, 1, summary.k_default, (v) => {
        if (state) state = setK(state, v, summaryN);
      }),
    );

    state = await loadFrontier(state, client);
    state = await applyPreferences(state, client, gate);
    render();
  } catch (err) {
    showError(
      typeof err === "object" && err !== null && "message" in err
        ? String((err as { message: unknown }).message)
        : String(err),
    );
  }
}

boot();
