"""Command-line surface.

Subcommands: simulate, fit-te, characterize, infer, bootstrap,
counterfactual, frontier, survey, serve. Each reads a JSON run config,
writes JSON reports (plus aligned text where a table makes sense), and takes
--seed where randomness is involved. Exit codes: 0 success, 1 data/config
error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import reports
from .counterfactual import counterfactual_allocation, frontier, score_households
from .dataio import RunConfig, load_dataset, save_dataset
from .errors import NonConvergenceError, WelfarerankError
from .hte import build_te_matrix, load_te_csv, save_te_csv
from .inference import (
    PipelineConfig,
    bootstrap,
    characterize_bootstrap,
    characterize_decision_rule,
    estimate_preferences,
)
from .model import PreferenceParams, from_increments
from .simulate import SimConfig, simulate
from .survey import MplResponse, MplRow, aggregate


def _resolve(config_path: str, p: str) -> Path:
    p = Path(p)
    return p if p.is_absolute() else Path(config_path).parent / p


def _load_run(args):
    config = RunConfig.load(args.config)
    households = getattr(args, "households", None) or config.paths.get("households")
    if not households:
        raise WelfarerankError("no households file: set paths.households in the config or pass --households")
    dataset, filter_report = load_dataset(_resolve(args.config, households), config)
    return config, dataset, filter_report


def _te_for(args, config, dataset):
    te_path = getattr(args, "te", None) or config.paths.get("te")
    if te_path:
        external = load_te_csv(_resolve(args.config, te_path))
        te, _ = build_te_matrix(dataset, {"*": "external"}, external=external)
        return te
    te, _ = build_te_matrix(dataset, config.estimators, forest_config=config.forest)
    return te


def _params_from_file(path) -> PreferenceParams:
    with open(path) as f:
        d = json.load(f)
    if "omega_increments" in d:
        omega = {k: from_increments(v) for k, v in d["omega_increments"].items()}
    else:
        omega = {k: float(v) for k, v in d.get("omega", {}).items()}
    return PreferenceParams(
        omega=omega,
        lam={k: float(v) for k, v in d.get("lambda", {}).items()},
        C=float(d.get("C", 0.0)),
        sigma=float(d.get("sigma", 1.0)),
    )


def cmd_simulate(args) -> int:
    cfg = SimConfig(
        n=args.n,
        seed=args.seed,
        sigma=args.sigma,
        binary_tiers=args.binary_tiers,
        missing_endline_rate=args.missing_rate,
    )
    run = simulate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(run.dataset, out / "households.csv")
    save_te_csv(run.te_true, out / "te_true.csv")
    truth = {
        "omega_increments": run.truth.omega_increments(),
        "lambda": run.truth.lam,
        "C": run.truth.C,
        "sigma": run.truth.sigma,
    }
    with open(out / "truth.json", "w") as f:
        json.dump(truth, f, indent=2, sort_keys=True)
        f.write("\n")
    run_config = RunConfig(
        outcomes=run.dataset.outcomes,
        welfare_covariates=run.dataset.welfare_covariates,
        het_covariates=run.dataset.het_covariates,
        estimators={"*": "ols"},
        paths={"households": "households.csv", "te": "te_true.csv"},
    )
    run_config.save(out / "config.json")
    print(f"wrote {run.dataset.n} households to {out}")
    return 0


def cmd_fit_te(args) -> int:
    config, dataset, _ = _load_run(args)
    te, models = build_te_matrix(dataset, config.estimators, forest_config=config.forest)
    save_te_csv(te, args.out)
    meta = {"source": te.source, "average_te": te.average_te(), "n": len(te.ids)}
    for name, model in models.items():
        if hasattr(model, "r2"):
            meta.setdefault("ols", {})[name] = {"r2": model.r2, "n": model.n}
        else:
            meta.setdefault("forest", {})[name] = {
                "n_trees": model.config.n_trees,
                "min_leaf": model.config.min_leaf,
                "subsample_fraction": model.config.subsample_fraction,
                "max_depth": model.config.max_depth,
                "rng_seed": model.config.rng_seed,
            }
    with open(str(args.out) + ".meta.json", "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote treatment effects for {len(te.ids)} households to {args.out}")
    return 0


def cmd_characterize(args) -> int:
    config, dataset, _ = _load_run(args)
    cfg = config.optimizer
    if args.seed is not None:
        cfg.seed = args.seed
    boot = None
    if args.draws:
        boot = characterize_bootstrap(dataset, cfg, B=args.draws, seed=cfg.seed)
        result = boot.point
    else:
        result = characterize_decision_rule(dataset, cfg)
    report = reports.estimate_report(
        result, boot, label="Decision rule (prioritization)",
        fingerprint=config.fingerprint(dataset),
    )
    reports.write_report(report, args.out, reports.estimate_text(report))
    print(reports.estimate_text(report), end="")
    return 0 if result.converged else 2


def cmd_infer(args) -> int:
    config, dataset, _ = _load_run(args)
    cfg = config.optimizer
    if args.seed is not None:
        cfg.seed = args.seed
    te = _te_for(args, config, dataset)
    result = estimate_preferences(dataset, te, cfg)
    report = reports.estimate_report(
        result, None, label="Implied preferences", fingerprint=config.fingerprint(dataset)
    )
    reports.write_report(report, args.out, reports.estimate_text(report))
    print(reports.estimate_text(report), end="")
    return 0 if result.converged else 2


def cmd_bootstrap(args) -> int:
    config, dataset, _ = _load_run(args)
    seed = args.seed if args.seed is not None else config.bootstrap.seed
    external = None
    te_path = getattr(args, "te", None) or config.paths.get("te")
    estimators = config.estimators
    if te_path and any(v == "external" for v in estimators.values()):
        external = load_te_csv(_resolve(args.config, te_path))
    pipeline = PipelineConfig(
        estimators=estimators,
        forest=config.forest,
        estimate=config.optimizer,
        external_te=external,
        bootstrap_starts=config.bootstrap.starts,
        cluster_covariate=config.bootstrap.cluster_covariate,
    )
    B = args.draws or config.bootstrap.n_draws
    boot = bootstrap(dataset, pipeline, B=B, seed=seed)
    report = reports.estimate_report(
        boot.point, boot, label="Implied preferences (bootstrap SEs)",
        fingerprint=config.fingerprint(dataset),
    )
    reports.write_report(report, args.out, reports.estimate_text(report))
    print(reports.estimate_text(report), end="")
    return 0 if boot.point.converged else 2


def cmd_counterfactual(args) -> int:
    config, dataset, _ = _load_run(args)
    te = _te_for(args, config, dataset)
    params = _params_from_file(args.params)
    k = args.k or int(np.sum(dataset.treated))
    result = counterfactual_allocation(params, te, dataset, k, config.optimizer)
    report = reports.counterfactual_report(result, fingerprint=config.fingerprint(dataset))
    reports.write_report(report, args.out, reports.counterfactual_text(report))
    print(reports.counterfactual_text(report), end="")
    return 0


def cmd_frontier(args) -> int:
    config, dataset, _ = _load_run(args)
    te = _te_for(args, config, dataset)
    k = args.k or int(np.sum(dataset.treated))
    weighting = args.weighting or config.frontier.weighting
    seed = args.seed if args.seed is not None else config.frontier.seed
    n_directions = args.directions or config.frontier.n_directions
    mu = None
    if weighting != "raw":
        if not args.params:
            raise WelfarerankError(f"{weighting} frontier needs --params for the welfare weights")
        params = _params_from_file(args.params)
        theta = np.array([np.log(params.omega[c]) for c in dataset.welfare_covariates])
        pos = {h: i for i, h in enumerate(dataset.ids)}
        mu = np.exp(dataset.x[[pos[h] for h in te.ids]] @ theta)
    result = frontier(te, dataset, k=k, n_directions=n_directions,
                      weighting=weighting, seed=seed, mu=mu)
    report = reports.frontier_report(result, k, fingerprint=config.fingerprint(dataset))
    reports.write_report(report, args.out)
    reports.frontier_csv(result, str(args.out) + ".csv")
    print(f"frontier: {len(result.points)} points, {len(result.hull_vertices)} hull vertices")
    return 0


def load_survey_csv(path):
    """Rows: respondent_id,focal,kind,x_delta,row_index,amount_a,amount_b,chose_a
    (one price list per respondent and focal attribute)."""
    groups = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"respondent_id", "focal", "kind", "x_delta", "row_index",
                    "amount_a", "amount_b", "chose_a"}
        if reader.fieldnames is None or required - set(reader.fieldnames):
            raise WelfarerankError(
                f"{path}: expected columns {sorted(required)}, got {reader.fieldnames}"
            )
        for ln, row in enumerate(reader, start=2):
            try:
                key = (row["respondent_id"], row["focal"], row["kind"], float(row["x_delta"]))
                groups.setdefault(key, []).append(
                    (
                        int(row["row_index"]),
                        MplRow(
                            amount_a=float(row["amount_a"]),
                            amount_b=float(row["amount_b"]),
                            chose_a=row["chose_a"].strip().lower() in ("1", "true"),
                        ),
                    )
                )
            except ValueError as exc:
                raise WelfarerankError(f"{path}:{ln}: {exc}") from None
    responses = []
    for (rid, focal, kind, x_delta), rows in groups.items():
        rows.sort(key=lambda r: r[0])
        responses.append(
            MplResponse(
                respondent_id=rid,
                focal_attribute=focal,
                kind=kind,
                rows=[r[1] for r in rows],
                x_delta=x_delta,
            )
        )
    return responses


def cmd_survey(args) -> int:
    responses = load_survey_csv(args.responses)
    est = aggregate(responses, seed=args.seed or 0)
    report = reports.survey_report(est)
    reports.write_report(report, args.out, reports.survey_text(report))
    print(reports.survey_text(report), end="")
    return 0


def cmd_serve(args) -> int:
    from .server import build_state, serve

    state = build_state(args.config, estimate=args.estimate, survey=args.survey)
    print(f"serving on {args.host}:{args.port} (fingerprint {state.fingerprint})")
    serve(state, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="welfarerank",
        description="Infer the preferences consistent with an observed allocation "
        "ranking, and run counterfactual allocations from preferences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic run directory")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--binary-tiers", action="store_true")
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    def common(p, te=False, seed=True):
        p.add_argument("--config", required=True)
        p.add_argument("--households", help="override paths.households")
        p.add_argument("--out", required=True, help="output path prefix")
        if te:
            p.add_argument("--te", help="external treatment-effect CSV (overrides config)")
        if seed:
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("fit-te", help="fit treatment effects and write the CSV")
    common(p)
    p.set_defaults(func=cmd_fit_te)

    p = sub.add_parser("characterize", help="constrained decision-rule characterization")
    common(p)
    p.add_argument("--draws", type=int, default=0, help="bootstrap draws for SEs")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("infer", help="estimate preferences by maximum likelihood")
    common(p, te=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bootstrap", help="two-step bootstrap standard errors")
    common(p, te=True)
    p.add_argument("--draws", type=int, default=0, help="override bootstrap.n_draws")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("counterfactual", help="allocation implied by given preferences")
    common(p, te=True)
    p.add_argument("--params", required=True, help="preference JSON (omega_increments, lambda, C)")
    p.add_argument("--k", type=int, default=0, help="households to treat (default: observed count)")
    p.set_defaults(func=cmd_counterfactual)

    p = sub.add_parser("frontier", help="attainable outcome frontier")
    common(p, te=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--directions", type=int, default=0)
    p.add_argument("--weighting", choices=["raw", "welfare_weighted", "survey_weighted"])
    p.add_argument("--params", help="preference JSON for weighted frontiers")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("survey", help="stated preferences from price-list responses")
    p.add_argument("--responses", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("serve", help="HTTP service backing the what-if explorer")
    p.add_argument("--config", required=True)
    p.add_argument("--estimate", help="estimate report JSON with fitted preferences")
    p.add_argument("--survey", help="survey report JSON with stated preferences")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WelfarerankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
