"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: DataError -> 1, NonConvergenceError -> 2.
"""


class WelfarerankError(Exception):
    """Base class for all package errors."""


class ConfigError(WelfarerankError):
    """Invalid configuration: missing covariate, bad option, out-of-range K."""


class DataError(WelfarerankError):
    """Malformed or inconsistent input data (bad cell, duplicate id, non-finite value)."""


class DomainError(WelfarerankError):
    """Mathematical domain violation (log of non-positive value, omega <= 0)."""


class EstimationError(WelfarerankError):
    """Estimation cannot proceed (singular design, too few observations)."""


class SingularDesignError(EstimationError):
    """Rank-deficient regression design; carries the offending column names."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient; collinear columns: {self.columns}")


class NonConvergenceError(EstimationError):
    """No optimizer start reached a converged optimum."""


class DegenerateRankingError(DataError):
    """A ranking with fewer than two distinct priority levels."""


class IdentificationWarning(UserWarning):
    """Parameters are weakly or not separately identified in this sample."""
