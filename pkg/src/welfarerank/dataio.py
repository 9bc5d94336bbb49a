"""Run configuration, dataset CSV ingestion, and filtering.

The households CSV carries one row per household:

    household_id, tier, treated, <welfare covariates...>,
    <extra heterogeneity covariates...>, <outcome>_baseline, <outcome>_endline

Cells are plain `.`-decimal numbers; empty outcome cells mean missing.
Config files are JSON, shaped by :class:`RunConfig`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .counterfactual import WEIGHTINGS
from .data import Dataset
from .errors import ConfigError, DataError
from .hte import ForestConfig
from .inference import EstimateConfig
from .model import OutcomeSpec, validate_outcomes

FILTER_OPS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
}


@dataclass
class Filter:
    column: str
    op: str
    value: float

    def __post_init__(self):
        if self.op not in FILTER_OPS:
            raise ConfigError(f"unknown filter op {self.op!r}; use one of {sorted(FILTER_OPS)}")


@dataclass
class BootstrapSettings:
    n_draws: int = 50
    seed: int = 0
    starts: int = 2
    cluster_covariate: str | None = None


@dataclass
class FrontierSettings:
    n_directions: int = 2048
    seed: int = 0
    k: int | None = None
    weighting: str = "raw"

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"frontier weighting must be one of {WEIGHTINGS}")


@dataclass
class RunConfig:
    outcomes: list
    welfare_covariates: list
    het_covariates: list
    estimators: dict = field(default_factory=lambda: {"*": "ols"})
    optimizer: EstimateConfig = field(default_factory=EstimateConfig)
    bootstrap: BootstrapSettings = field(default_factory=BootstrapSettings)
    forest: ForestConfig = field(default_factory=ForestConfig)
    frontier: FrontierSettings = field(default_factory=FrontierSettings)
    filters: list = field(default_factory=list)
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_outcomes(self.outcomes)
        missing = set(self.welfare_covariates) - set(self.het_covariates)
        if missing:
            # welfare covariates need not drive heterogeneity, but they must
            # exist as columns; keep one source of truth for column lists
            self.het_covariates = list(self.het_covariates) + sorted(missing)

    @property
    def outcome_names(self):
        return [o.name for o in self.outcomes]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outcomes"] = [
            {
                "name": o.name,
                "transform": o.transform,
                "numeraire": o.is_numeraire,
                "bad": o.bad,
                "units": o.units,
            }
            for o in self.outcomes
        ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            outcomes = [
                OutcomeSpec(
                    name=o["name"],
                    transform=o.get("transform", "linear"),
                    is_numeraire=o.get("numeraire", False),
                    bad=o.get("bad", False),
                    units=o.get("units", ""),
                )
                for o in d["outcomes"]
            ]
            return cls(
                outcomes=outcomes,
                welfare_covariates=list(d["welfare_covariates"]),
                het_covariates=list(d.get("het_covariates", d["welfare_covariates"])),
                estimators=dict(d.get("estimators", {"*": "ols"})),
                optimizer=EstimateConfig(**d.get("optimizer", {})),
                bootstrap=BootstrapSettings(**d.get("bootstrap", {})),
                forest=ForestConfig(**d.get("forest", {})),
                frontier=FrontierSettings(**d.get("frontier", {})),
                filters=[Filter(**f) for f in d.get("filters", [])],
                paths=dict(d.get("paths", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad run config: {exc}") from None

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as f:
                return cls.from_dict(json.load(f))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def fingerprint(self, dataset: Dataset | None = None) -> str:
        """Stable digest of the configuration (and, if given, the sample)."""
        h = hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode())
        if dataset is not None:
            h.update(",".join(map(str, dataset.ids)).encode())
            h.update(np.ascontiguousarray(dataset.tier).tobytes())
        return h.hexdigest()[:16]


def expected_columns(config: RunConfig) -> list:
    cols = ["household_id", "tier", "treated"]
    cols += list(dict.fromkeys(list(config.welfare_covariates) + list(config.het_covariates)))
    for name in config.outcome_names:
        cols += [f"{name}_baseline", f"{name}_endline"]
    return cols


def _numeric(frame: pd.DataFrame, column: str, path, allow_missing=False) -> np.ndarray:
    # numpy's strtod keeps full float precision (pd.to_numeric can drop a ulp)
    raw = frame[column].astype(str).str.strip()
    blank = (raw == "").to_numpy()
    out = np.full(len(raw), np.nan)
    values = raw.to_numpy()[~blank]
    try:
        out[~blank] = values.astype(float)
    except ValueError:
        for pos, v in zip(np.where(~blank)[0], values):
            try:
                float(v)
            except ValueError:
                raise DataError(
                    f"{path}:{pos + 2}: column {column!r}: cannot parse {v!r}"
                ) from None
    if not allow_missing and blank.any():
        row = int(np.where(blank)[0][0]) + 2  # header is line 1
        raise DataError(f"{path}:{row}: column {column!r}: missing value")
    return out


def load_dataset(path, config: RunConfig) -> tuple[Dataset, dict]:
    """Typed dataset from a households CSV, plus a filter/count report."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"households file not found: {path}")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in expected_columns(config) if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")

    ids = frame["household_id"].astype(str)
    dup = ids[ids.duplicated()]
    if len(dup):
        raise DataError(f"{path}: duplicate household_id {dup.iloc[0]!r}")

    tier = _numeric(frame, "tier", path)
    treated_raw = frame["treated"].str.strip().str.lower()
    bad_treated = ~treated_raw.isin(["0", "1", "true", "false"])
    if bad_treated.any():
        row = int(np.where(bad_treated.to_numpy())[0][0]) + 2
        raise DataError(f"{path}:{row}: column 'treated': expected 0/1, got {frame['treated'][bad_treated].iloc[0]!r}")
    treated = treated_raw.isin(["1", "true"]).to_numpy()

    het_cols = list(dict.fromkeys(list(config.welfare_covariates) + list(config.het_covariates)))
    covs = {c: _numeric(frame, c, path) for c in het_cols}
    y_base = np.column_stack(
        [_numeric(frame, f"{o}_baseline", path, allow_missing=True) for o in config.outcome_names]
    )
    y_end = np.column_stack(
        [_numeric(frame, f"{o}_endline", path, allow_missing=True) for o in config.outcome_names]
    )

    keep = np.ones(len(frame), dtype=bool)
    by_filter = {}
    for flt in config.filters:
        if flt.column not in covs:
            raise ConfigError(f"filter column {flt.column!r} is not a covariate")
        ok = FILTER_OPS[flt.op](covs[flt.column], flt.value)
        by_filter[f"{flt.column} {flt.op} {flt.value}"] = int((~ok & keep).sum())
        keep &= ok
    report = {
        "n_input": int(len(frame)),
        "n_kept": int(keep.sum()),
        "n_excluded": int((~keep).sum()),
        "by_filter": by_filter,
    }

    het_order = config.het_covariates
    dataset = Dataset(
        ids=[str(h) for h, k in zip(ids, keep) if k],
        outcomes=list(config.outcomes),
        welfare_covariates=list(config.welfare_covariates),
        het_covariates=list(het_order),
        x=np.column_stack([covs[c] for c in config.welfare_covariates])[keep],
        x_tilde=np.column_stack([covs[c] for c in het_order])[keep],
        y_baseline=y_base[keep],
        y_endline=y_end[keep],
        treated=treated[keep],
        tier=tier[keep],
    )
    return dataset, report


def save_dataset(dataset: Dataset, path):
    """Inverse of :func:`load_dataset` (round-trips all typed fields)."""
    cols = {"household_id": dataset.ids}
    cols["tier"] = [_fmt(t) for t in dataset.tier]
    cols["treated"] = dataset.treated.astype(int)
    for k, c in enumerate(dataset.het_covariates):
        cols[c] = [_fmt(v) for v in dataset.x_tilde[:, k]]
    for j, name in enumerate(dataset.outcome_names):
        cols[f"{name}_baseline"] = [_fmt(v) for v in dataset.y_baseline[:, j]]
        cols[f"{name}_endline"] = [_fmt(v) for v in dataset.y_endline[:, j]]
    pd.DataFrame(cols).to_csv(path, index=False)


def _fmt(v: float) -> str:
    if np.isnan(v):
        return ""
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))
