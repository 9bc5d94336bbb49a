import numpy as np
import pytest

from welfarerank.data import Dataset
from welfarerank.errors import ConfigError, EstimationError, SingularDesignError
from welfarerank.hte import fit_ols_te, predict_te_ols
from welfarerank.hte.ols import OlsTeModel, predict_te_ols_matrix
from welfarerank.model import OutcomeSpec


def make_dataset(x, treated, y_end, covariates=None, transform="linear"):
    n, k = x.shape
    covariates = covariates or [f"c{j}" for j in range(k)]
    return Dataset(
        ids=[f"h{i}" for i in range(n)],
        outcomes=[OutcomeSpec("y", transform=transform, is_numeraire=True)],
        welfare_covariates=covariates,
        het_covariates=covariates,
        x=x,
        x_tilde=x,
        y_baseline=np.full((n, 1), np.nan),
        y_endline=y_end[:, None],
        treated=treated,
        tier=np.zeros(n),
    )


def normal_equations_oracle(x, treated, y):
    """Independent closed-form least squares: solve X'X b = X'y directly."""
    t = treated.astype(float)[:, None]
    design = np.hstack([np.ones((len(x), 1)), x, t, x * t])
    return np.linalg.solve(design.T @ design, design.T @ y)


def test_matches_normal_equations_on_random_designs():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(30, 201))
        k = int(rng.integers(1, 7))
        x = rng.normal(0, 1, (n, k))
        treated = rng.random(n) < 0.5
        if treated.sum() < k + 2 or (~treated).sum() < k + 2:
            treated[: k + 2] = True
            treated[k + 2 : 2 * (k + 2)] = False
        beta_true = rng.normal(0, 1, 2 * k + 2)
        t = treated.astype(float)[:, None]
        design = np.hstack([np.ones((n, 1)), x, t, x * t])
        y = design @ beta_true + rng.normal(0, 0.3, n)
        model = fit_ols_te(make_dataset(x, treated, y), "y")
        oracle = normal_equations_oracle(x, treated, y)
        fitted = np.array(
            [model.beta0]
            + [model.beta_x[c] for c in model.covariates]
            + [model.beta_T]
            + [model.beta_Tx[c] for c in model.covariates]
        )
        np.testing.assert_allclose(fitted, oracle, rtol=1e-8, atol=1e-10)


def test_no_interaction_truth_recovers_zero_interactions():
    rng = np.random.default_rng(7)
    n, k = 5000, 3
    x = rng.normal(0, 1, (n, k))
    treated = rng.random(n) < 0.5
    y = 1.0 + x @ np.array([0.5, -0.2, 0.1]) + 0.4 * treated + rng.normal(0, 0.1, n)
    model = fit_ols_te(make_dataset(x, treated, y), "y")
    # all interactions within 3 standard errors of zero
    design_cols = 2 * k + 2
    se_scale = np.sqrt(model.residual_variance)
    t = treated.astype(float)[:, None]
    design = np.hstack([np.ones((n, 1)), x, t, x * t])
    cov = np.linalg.inv(design.T @ design) * se_scale**2
    ses = np.sqrt(np.diag(cov))[k + 2 :]
    for c, se in zip(model.covariates, ses):
        assert abs(model.beta_Tx[c]) < 3 * se
    assert model.n == n
    assert design_cols == 8


def test_constant_effect_no_noise_is_exact():
    rng = np.random.default_rng(3)
    n, k = 80, 2
    x = rng.normal(0, 1, (n, k))
    treated = np.arange(n) % 2 == 0
    y = 2.0 + x @ np.array([1.0, -1.0]) + 0.5 * treated
    model = fit_ols_te(make_dataset(x, treated, y), "y")
    assert model.beta_T == pytest.approx(0.5, abs=1e-10)
    for c in model.covariates:
        assert model.beta_Tx[c] == pytest.approx(0.0, abs=1e-10)
    assert model.r2 == pytest.approx(1.0)
    # predictions equal tau everywhere
    assert predict_te_ols(model, {"c0": 3.3, "c1": -1.2}) == pytest.approx(0.5, abs=1e-9)


def test_duplicated_column_raises_singular_design():
    rng = np.random.default_rng(5)
    n = 60
    base = rng.normal(0, 1, n)
    x = np.column_stack([base, base])
    treated = np.arange(n) % 2 == 0
    y = rng.normal(0, 1, n)
    with pytest.raises(SingularDesignError) as err:
        fit_ols_te(make_dataset(x, treated, y, covariates=["a", "a_copy"]), "y")
    assert err.value.columns  # names the collinear columns


def test_too_few_rows():
    x = np.zeros((5, 2))
    with pytest.raises(EstimationError, match="need >="):
        fit_ols_te(make_dataset(x, np.array([1, 0, 1, 0, 1], bool), np.ones(5)), "y")


def test_log_transform_applied_before_fit():
    rng = np.random.default_rng(11)
    n = 400
    x = rng.normal(0, 1, (n, 1))
    treated = rng.random(n) < 0.5
    # multiplicative effect: log(y) jumps by exactly 0.3 under treatment
    y = np.exp(1.0 + 0.2 * x[:, 0] + 0.3 * treated)
    model = fit_ols_te(make_dataset(x, treated, y, transform="log"), "y")
    assert model.beta_T == pytest.approx(0.3, abs=1e-9)


class TestPredict:
    def test_constant_model(self):
        m = OlsTeModel("y", ["a"], 0.0, {"a": 0.0}, 0.1, {"a": 0.0}, 0.0, 0.0, 10)
        assert predict_te_ols(m, {"a": 123.0}) == pytest.approx(0.1)

    def test_interaction(self):
        m = OlsTeModel("y", ["a"], 0.0, {"a": 0.0}, 0.0, {"a": 2.0}, 0.0, 0.0, 10)
        assert predict_te_ols(m, {"a": 1.5}) == pytest.approx(3.0)

    def test_missing_covariate(self):
        m = OlsTeModel("y", ["a"], 0.0, {"a": 0.0}, 0.0, {"a": 2.0}, 0.0, 0.0, 10)
        with pytest.raises(ConfigError, match="'a'"):
            predict_te_ols(m, {"b": 1.0})

    def test_matrix_variant_matches_scalar(self):
        rng = np.random.default_rng(13)
        m = OlsTeModel("y", ["a", "b"], 0.0, {"a": 0, "b": 0}, 0.7, {"a": -1.0, "b": 0.25}, 0.0, 0.0, 10)
        x = rng.normal(0, 1, (20, 2))
        batch = predict_te_ols_matrix(m, x, ["a", "b"])
        for i in range(20):
            assert batch[i] == pytest.approx(predict_te_ols(m, {"a": x[i, 0], "b": x[i, 1]}))

    def test_mismatched_interaction_keys_rejected(self):
        with pytest.raises(ConfigError):
            OlsTeModel("y", ["a"], 0.0, {"a": 0.0}, 0.0, {"b": 1.0}, 0.0, 0.0, 10)
