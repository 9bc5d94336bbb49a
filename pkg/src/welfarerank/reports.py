"""Report emission: JSON documents (schema-validated in tests) plus aligned
text tables. Welfare weights print in 1%-increment units with bootstrap SEs
in parentheses; impact weights in numeraire utility units."""

from __future__ import annotations

import csv
import json
from importlib import resources

from .counterfactual import CounterfactualResult, FrontierResult
from .inference import BootstrapResult, CommonWeightsTest, EstimateResult
from .survey import SurveyEstimate

SCHEMA_FILES = {
    "estimate_report": "estimate_report.schema.json",
    "counterfactual_report": "counterfactual_report.schema.json",
    "frontier_report": "frontier_report.schema.json",
    "survey_report": "survey_report.schema.json",
    "common_weights_report": "common_weights_report.schema.json",
}


def load_schema(kind: str) -> dict:
    with resources.files("welfarerank.schemas").joinpath(SCHEMA_FILES[kind]).open() as f:
        return json.load(f)


def estimate_report(result: EstimateResult, boot: BootstrapResult | None = None,
                    label: str = "", fingerprint: str = "") -> dict:
    se = boot.se if boot is not None else {}
    inc_se = boot.se_increments() if boot is not None else {}
    constrained = "ln_sigma" not in result.param_names
    weights = [
        {
            "covariate": c,
            "increments": inc,
            "se": inc_se.get(c),
            "corner": c in result.corner_flags,
        }
        for c, inc in result.params.omega_increments().items()
    ]
    impacts = [] if constrained else [
        {"outcome": o, "value": lam, "se": se.get(f"lambda:{o}")}
        for o, lam in result.params.lam.items()
    ]
    report = {
        "kind": "estimate_report",
        "label": label,
        "model": "decision_rule" if constrained else "preferences",
        "n": result.n_households,
        "welfare_weights": weights,
        "impact_weights": impacts,
        "intrinsic_value": None if constrained else {"value": result.params.C, "se": se.get("C")},
        "sigma": None if constrained else {
            "value": result.params.sigma,
            "se": boot.sigma_se if boot is not None else None,
        },
        "loglik": result.loglik,
        "converged": result.converged,
        "n_iterations": result.n_iterations,
        "gradient_norm": result.gradient_norm,
        "bootstrap": None if boot is None else {
            "n_requested": boot.n_requested,
            "n_retained": len(boot.draws),
            "n_excluded_corner": boot.n_excluded_corner,
        },
        "fingerprint": fingerprint,
    }
    return report


def _num(v, digits=2, width=9):
    if v is None:
        return " " * width
    return f"{v:{width}.{digits}f}"


def _se(v, digits=2):
    return "" if v is None else f" ({v:.{digits}f})"


def estimate_text(report: dict) -> str:
    lines = []
    title = report["label"] or (
        "Decision rule (prioritization)" if report["model"] == "decision_rule"
        else "Implied preferences"
    )
    lines.append(title)
    lines.append("=" * len(title))
    lines.append("Welfare weights log_1.01(omega)  (number of 1% increments)")
    for w in report["welfare_weights"]:
        corner = "  [corner]" if w["corner"] else ""
        lines.append(f"  {w['covariate']:<24s}{_num(w['increments'])}{_se(w['se'])}{corner}")
    if report["impact_weights"]:
        lines.append("Impact weights  (numeraire utility units)")
        for w in report["impact_weights"]:
            lines.append(f"  {w['outcome']:<24s}{_num(w['value'], 3)}{_se(w['se'], 3)}")
    if report["intrinsic_value"] is not None:
        c = report["intrinsic_value"]
        lines.append(f"  {'value regardless of impact':<24s}{_num(c['value'], 3)}{_se(c['se'], 3)}")
    if report["sigma"] is not None:
        s = report["sigma"]
        lines.append(f"  {'sigma':<24s}{_num(s['value'], 3)}{_se(s['se'], 3)}")
    lines.append(f"N = {report['n']}")
    if report["bootstrap"]:
        b = report["bootstrap"]
        lines.append(
            f"bootstrap: {b['n_retained']} of {b['n_requested']} draws retained "
            f"({b['n_excluded_corner']} corner draws excluded)"
        )
    if not report["converged"]:
        lines.append("warning: optimizer did not reach the convergence tolerance")
    return "\n".join(lines) + "\n"


def counterfactual_report(result: CounterfactualResult, fingerprint: str = "",
                          top_n: int = 50) -> dict:
    order = sorted(
        range(len(result.scores.ids)),
        key=lambda i: (-result.scores.values[i], str(result.scores.ids[i])),
    )
    return {
        "kind": "counterfactual_report",
        "k": result.k,
        "n": len(result.scores.ids),
        "implied_priorities": result.implied_priorities,
        "expected_outcomes": result.expected_outcomes,
        "selected": sorted(map(str, result.selected)),
        "top_households": [
            {"id": str(result.scores.ids[i]), "score": float(result.scores.values[i])}
            for i in order[:top_n]
        ],
        "fingerprint": fingerprint,
    }


def counterfactual_text(report: dict) -> str:
    lines = [
        f"Counterfactual allocation (K = {report['k']} of {report['n']})",
        "Implied priorities (1% increments):",
    ]
    for c, v in report["implied_priorities"].items():
        lines.append(f"  {c:<24s}{_num(v, 1)}")
    lines.append("Expected average outcomes:")
    for o, v in report["expected_outcomes"].items():
        lines.append(f"  {o:<24s}{_num(v, 3)}")
    return "\n".join(lines) + "\n"


def frontier_report(result: FrontierResult, k: int, fingerprint: str = "") -> dict:
    return {
        "kind": "frontier_report",
        "weighting": result.weighting,
        "k": k,
        "outcomes": list(result.outcomes),
        "degenerate": result.degenerate,
        "points": [
            {
                "direction": list(p.direction),
                "impacts": list(p.impacts),
                "on_hull": p.on_hull,
            }
            for p in result.points
        ],
        "hull_vertices": list(result.hull_vertices),
        "fingerprint": fingerprint,
    }


def frontier_csv(result: FrontierResult, path):
    """Plot-data emitter: one row per sampled direction."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            [f"direction_{o}" for o in result.outcomes]
            + [f"impact_{o}" for o in result.outcomes]
            + ["on_hull"]
        )
        for p in result.points:
            w.writerow(
                [repr(v) for v in p.direction]
                + [repr(v) for v in p.impacts]
                + [int(p.on_hull)]
            )


def survey_report(est: SurveyEstimate, fingerprint: str = "") -> dict:
    return {
        "kind": "survey_report",
        "n_respondents": est.n_respondents,
        "n_invalid_responses": est.n_invalid,
        "welfare_weights": [
            {
                "covariate": c,
                "increments": inc,
                "se": est.se.get(f"omega:{c}"),
                "n_valid": est.n_valid.get(f"omega:{c}", 0),
            }
            for c, inc in est.omega_increments().items()
        ],
        "impact_weights": [
            {
                "outcome": o,
                "value": v,
                "se": est.se.get(f"lambda:{o}"),
                "n_valid": est.n_valid.get(f"lambda:{o}", 0),
            }
            for o, v in est.lambda_median.items()
        ],
        "fingerprint": fingerprint,
    }


def survey_text(report: dict) -> str:
    lines = ["Stated preferences (survey medians)", "==================================="]
    lines.append("Welfare weights log_1.01(omega)  (number of 1% increments)")
    for w in report["welfare_weights"]:
        lines.append(f"  {w['covariate']:<24s}{_num(w['increments'], 1)}{_se(w['se'], 1)}")
    lines.append("Impact weights  (numeraire units)")
    for w in report["impact_weights"]:
        lines.append(f"  {w['outcome']:<24s}{_num(w['value'], 3)}{_se(w['se'], 3)}")
    lines.append(f"N = {report['n_respondents']} respondents "
                 f"({report['n_invalid_responses']} invalid price lists dropped)")
    return "\n".join(lines) + "\n"


def common_weights_report(test: CommonWeightsTest, fingerprint: str = "") -> dict:
    return {
        "kind": "common_weights_report",
        "statistic": test.statistic,
        "dof": test.dof,
        "p_value": test.p_value,
        "loglik_a": test.loglik_a,
        "loglik_b": test.loglik_b,
        "loglik_restricted": test.loglik_restricted,
        "fingerprint": fingerprint,
    }


def write_report(report: dict, prefix, text: str | None = None):
    """Write <prefix>.json (and <prefix>.txt when text is given)."""
    with open(f"{prefix}.json", "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    if text is not None:
        with open(f"{prefix}.txt", "w") as f:
            f.write(text)
