"""Read-only HTTP service backing the what-if explorer.

Endpoints over a loaded run (dataset + treatment effects, immutable):

  GET  /summary                     sample size, covariates, outcomes, fitted params
  POST /counterfactual              {omega: {cov: increments}, lambda, C, k}
                                    -> implied priorities, expected outcomes, top 50
  GET  /frontier?weighting=raw|welfare|survey

Every response carries the run's config fingerprint. Malformed bodies get
400 with per-field errors; requests needing state that is not loaded
(fitted or survey weights, respectively) get 409. Handlers share immutable
state, so the threading server needs no locks; identical requests produce
identical responses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import reports
from .counterfactual import counterfactual_allocation, frontier
from .data import Dataset
from .dataio import RunConfig, load_dataset
from .errors import WelfarerankError
from .hte import build_te_matrix, load_te_csv
from .inference import EstimateConfig
from .model import PreferenceParams, TreatmentEffectMatrix, from_increments

WEIGHTING_ALIASES = {"raw": "raw", "welfare": "welfare_weighted", "survey": "survey_weighted"}


@dataclass
class ServeState:
    config: RunConfig
    dataset: Dataset
    te: TreatmentEffectMatrix
    fingerprint: str
    fitted_increments: dict | None = None
    survey_increments: dict | None = None
    k_default: int = 0
    _frontier_cache: dict = None
    baseline_levels: dict = None   # expected outcomes of the empty selection

    def __post_init__(self):
        from .counterfactual import expected_outcomes

        self._frontier_cache = {}
        if self.baseline_levels is None:
            self.baseline_levels = expected_outcomes(set(), self.te, self.dataset)

    def mu_from_increments(self, increments: dict) -> np.ndarray:
        theta = np.array(
            [increments.get(c, 0.0) * np.log(1.01) for c in self.dataset.welfare_covariates]
        )
        pos = {h: i for i, h in enumerate(self.dataset.ids)}
        rows = [pos[h] for h in self.te.ids]
        return np.exp(self.dataset.x[rows] @ theta)

    def frontier_for(self, weighting: str) -> dict:
        if weighting not in self._frontier_cache:
            mu = None
            if weighting == "welfare_weighted":
                if self.fitted_increments is None:
                    raise StateMissing("no fitted preferences loaded; pass --estimate to serve")
                mu = self.mu_from_increments(self.fitted_increments)
            elif weighting == "survey_weighted":
                if self.survey_increments is None:
                    raise StateMissing("no survey preferences loaded; pass --survey to serve")
                mu = self.mu_from_increments(self.survey_increments)
            result = frontier(
                self.te,
                self.dataset,
                k=self.k_default,
                n_directions=self.config.frontier.n_directions,
                weighting=weighting,
                seed=self.config.frontier.seed,
                mu=mu,
            )
            self._frontier_cache[weighting] = reports.frontier_report(
                result, self.k_default, fingerprint=self.fingerprint
            )
        return self._frontier_cache[weighting]


class StateMissing(WelfarerankError):
    """Request needs state the server was not started with (-> 409)."""


class BadRequest(WelfarerankError):
    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = fields or {}


def build_state(config_path, estimate=None, survey=None) -> ServeState:
    from .cli import _resolve

    config = RunConfig.load(config_path)
    households = config.paths.get("households")
    if not households:
        raise WelfarerankError("config needs paths.households to serve")
    dataset, _ = load_dataset(_resolve(config_path, households), config)
    te_path = config.paths.get("te")
    if te_path:
        external = load_te_csv(_resolve(config_path, te_path))
        te, _ = build_te_matrix(dataset, {"*": "external"}, external=external)
    else:
        te, _ = build_te_matrix(dataset, config.estimators, forest_config=config.forest)

    def increments_from_report(path):
        with open(path) as f:
            rep = json.load(f)
        return {w["covariate"]: float(w["increments"]) for w in rep["welfare_weights"]}

    return ServeState(
        config=config,
        dataset=dataset,
        te=te,
        fingerprint=config.fingerprint(dataset),
        fitted_increments=increments_from_report(estimate) if estimate else None,
        survey_increments=increments_from_report(survey) if survey else None,
        k_default=int(np.sum(dataset.treated)) or dataset.n // 2,
    )


def summary_payload(state: ServeState) -> dict:
    return {
        "n": state.dataset.n,
        "k_default": state.k_default,
        "welfare_covariates": list(state.dataset.welfare_covariates),
        "outcomes": [
            {
                "name": o.name,
                "transform": o.transform,
                "numeraire": o.is_numeraire,
                "bad": o.bad,
                "units": o.units,
            }
            for o in state.dataset.outcomes
        ],
        "fitted_increments": state.fitted_increments,
        "survey_increments": state.survey_increments,
        "fingerprint": state.fingerprint,
    }


def counterfactual_payload(state: ServeState, body: dict) -> dict:
    fields = {}
    if not isinstance(body, dict):
        raise BadRequest("body must be a JSON object")
    omega_inc = body.get("omega", {})
    lam = body.get("lambda", {})
    if not isinstance(omega_inc, dict):
        fields["omega"] = "must be an object of covariate -> increments"
        omega_inc = {}
    if not isinstance(lam, dict):
        fields["lambda"] = "must be an object of outcome -> weight"
        lam = {}
    unknown = set(omega_inc) - set(state.dataset.welfare_covariates)
    if unknown:
        fields["omega"] = f"unknown covariates: {sorted(unknown)}"
    rest = [o.name for o in state.dataset.outcomes if not o.is_numeraire]
    unknown_lam = set(lam) - set(rest)
    if unknown_lam:
        fields["lambda"] = f"unknown outcomes: {sorted(unknown_lam)}"
    for name, val in list(omega_inc.items()) + list(lam.items()) + [("C", body.get("C", 0.0))]:
        if not isinstance(val, (int, float)) or not np.isfinite(val):
            fields[str(name)] = "must be a finite number"
    k = body.get("k", state.k_default)
    if not isinstance(k, int) or not (0 < k <= state.dataset.n):
        fields["k"] = f"must be an integer in 1..{state.dataset.n}"
    if fields:
        raise BadRequest("invalid counterfactual request", fields)

    params = PreferenceParams(
        omega={c: from_increments(float(omega_inc.get(c, 0.0))) for c in state.dataset.welfare_covariates},
        lam={o: float(lam.get(o, 0.0)) for o in rest},
        C=float(body.get("C", 0.0)),
        sigma=1.0,
    )
    # deterministic fit per request: seeded from the immutable config
    result = counterfactual_allocation(
        params, state.te, state.dataset, k,
        EstimateConfig(n_starts=2, seed=state.config.optimizer.seed),
    )
    rep = reports.counterfactual_report(result, fingerprint=state.fingerprint)
    return {
        "implied_priorities": rep["implied_priorities"],
        "expected_outcomes": rep["expected_outcomes"],
        # levels minus the empty-selection baseline: directly comparable to
        # the frontier's average-impact coordinates
        "expected_impacts": {
            o: v - state.baseline_levels[o] for o, v in rep["expected_outcomes"].items()
        },
        "top_households": rep["top_households"],
        "k": k,
        # clients verify their payload encoding against this echo
        "echo": {"omega": dict(omega_inc), "lambda": dict(lam), "C": body.get("C", 0.0), "k": k},
        "fingerprint": state.fingerprint,
    }


class Handler(BaseHTTPRequestHandler):
    state: ServeState = None  # injected by serve()

    def log_message(self, fmt, *args):  # quiet by default; tests assert on bodies
        pass

    def _send(self, code: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):
        self._send(204, {})

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/summary":
            self._send(200, summary_payload(self.state))
        elif url.path == "/frontier":
            raw = parse_qs(url.query).get("weighting", ["raw"])[0]
            if raw not in WEIGHTING_ALIASES:
                self._send(400, {"error": f"weighting must be one of {sorted(WEIGHTING_ALIASES)}"})
                return
            try:
                self._send(200, self.state.frontier_for(WEIGHTING_ALIASES[raw]))
            except StateMissing as exc:
                self._send(409, {"error": str(exc)})
        else:
            self._send(404, {"error": f"unknown path {url.path}"})

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/counterfactual":
            self._send(404, {"error": f"unknown path {url.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError) as exc:
            self._send(400, {"error": f"invalid JSON body: {exc}"})
            return
        try:
            self._send(200, counterfactual_payload(self.state, body))
        except BadRequest as exc:
            self._send(400, {"error": str(exc), "fields": exc.fields})
        except StateMissing as exc:
            self._send(409, {"error": str(exc)})


def make_server(state: ServeState, host="127.0.0.1", port=0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (Handler,), {"state": state})
    return ThreadingHTTPServer((host, port), handler)


def serve(state: ServeState, host="127.0.0.1", port=8571):
    server = make_server(state, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
