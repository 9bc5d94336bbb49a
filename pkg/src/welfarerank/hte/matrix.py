"""Assemble the per-household, per-outcome treatment-effect matrix."""

from __future__ import annotations

import csv
import warnings

import numpy as np

from ..data import Dataset
from ..errors import ConfigError, DataError
from ..model import TreatmentEffectMatrix
from .forest import ForestConfig, fit_causal_forest, predict_te_forest_matrix
from .ols import fit_ols_te, predict_te_ols_matrix

ESTIMATORS = ("ols", "forest", "external")


def build_te_matrix(
    dataset: Dataset,
    estimators: dict,
    covariates=None,
    forest_config: ForestConfig | None = None,
    external: TreatmentEffectMatrix | None = None,
) -> tuple[TreatmentEffectMatrix, dict]:
    """Fit (or ingest) one effect model per outcome and predict every household.

    ``estimators`` maps outcome name -> 'ols' | 'forest' | 'external'; the key
    '*' sets the default. Households missing any heterogeneity covariate
    cannot be predicted; they are dropped with a warning naming them.

    Returns (matrix, fitted_models); the models dict is keyed by outcome so
    hyperparameters can be recorded in run metadata.
    """
    complete = np.all(np.isfinite(dataset.x_tilde), axis=1)
    if not complete.all():
        dropped = [h for h, ok in zip(dataset.ids, complete) if not ok]
        warnings.warn(
            f"{len(dropped)} households missing heterogeneity covariates, "
            f"excluded from treatment effects: {dropped[:10]}",
            stacklevel=2,
        )
    ids = [h for h, ok in zip(dataset.ids, complete) if ok]
    x = dataset.x_tilde[complete]

    columns, source, models = [], {}, {}
    for spec in dataset.outcomes:
        choice = estimators.get(spec.name, estimators.get("*", "ols"))
        if choice not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {choice!r} for outcome {spec.name!r}")
        if choice == "ols":
            model = fit_ols_te(dataset, spec, covariates)
            col = predict_te_ols_matrix(model, x, dataset.het_covariates)
            models[spec.name] = model
        elif choice == "forest":
            model = fit_causal_forest(dataset, spec, covariates, forest_config)
            col = predict_te_forest_matrix(model, x, dataset.het_covariates)
            models[spec.name] = model
        else:
            if external is None:
                raise ConfigError(f"outcome {spec.name!r} wants external effects but none were given")
            if spec.name not in external.outcomes:
                raise ConfigError(f"external treatment effects missing outcome {spec.name!r}")
            pos = {h: i for i, h in enumerate(external.ids)}
            try:
                col = external.column(spec.name)[[pos[h] for h in ids]]
            except KeyError as exc:
                raise DataError(f"external effects missing household {exc.args[0]!r}") from None
        columns.append(col)
        source[spec.name] = choice
    matrix = TreatmentEffectMatrix(
        ids=ids, outcomes=dataset.outcome_names, delta=np.column_stack(columns), source=source
    )
    return matrix, models


def save_te_csv(matrix: TreatmentEffectMatrix, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["household_id", *matrix.outcomes])
        for i, h in enumerate(matrix.ids):
            w.writerow([h, *(repr(v) for v in matrix.delta[i].tolist())])


def load_te_csv(path) -> TreatmentEffectMatrix:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[0] != "household_id" or len(header) < 2:
            raise DataError(f"{path}: expected header 'household_id,<outcome>,...'")
        outcomes = header[1:]
        ids, rows = [], []
        for ln, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{ln}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{ln}: {exc}") from None
    return TreatmentEffectMatrix(
        ids=ids,
        outcomes=outcomes,
        delta=np.array(rows) if rows else np.zeros((0, len(outcomes))),
        source={o: "external" for o in outcomes},
    )
