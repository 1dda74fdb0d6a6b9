"""scikit-learn style wrappers around the spectrum and recovery functions."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_positive_int
from .exceptions import ConfigError
from .model import Basis, Support
from .recover import RecoveryConfig, RecoveryProblem, solve_fixed_support, solve_support_search
from .signal import measurement

SPECTRUM_KINDS = ("power", "autocorr", "b")


class SpectrumTransformer(TransformerMixin, BaseEstimator):
    """Map each row (a signal of length N) to its power spectrum, periodic
    autocorrelation or reduced measurement ``b``.

    Stateless apart from remembering N; complex rows are accepted for
    ``power`` and ``autocorr``.
    """

    def __init__(self, kind="power"):
        self.kind = kind

    def fit(self, X, y=None):
        if self.kind not in SPECTRUM_KINDS:
            raise ConfigError(f"kind must be one of {SPECTRUM_KINDS}, got {self.kind!r}")
        X = _as_rows(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _as_rows(X)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.stack([measurement(row, self.kind) for row in X])


class SparseSpectrumRecovery(BaseEstimator):
    """Recover M-sparse signals in a fixed basis from their measurements.

    ``fit`` only validates and stores the basis; ``predict`` maps rows of
    measurements (reduced ``b`` or full power spectra) to signals. Pass
    ``support`` to skip the support search.
    """

    def __init__(self, basis=None, m=1, field="real", support=None, n_starts=50,
                 accept_tol=1e-8, seed=0, enumeration_cap=5000, n_jobs=1):
        self.basis = basis
        self.m = m
        self.field = field
        self.support = support
        self.n_starts = n_starts
        self.accept_tol = accept_tol
        self.seed = seed
        self.enumeration_cap = enumeration_cap
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.basis is None:
            raise ConfigError("a basis is required")
        check_field(self.field)
        self.basis_ = self.basis if isinstance(self.basis, Basis) else Basis.from_matrix(self.basis)
        if self.field == "real" and self.basis_.field == "complex":
            raise ConfigError("a complex basis cannot carry real signals")
        m = check_positive_int(self.m, "m")
        if m > self.basis_.n:
            raise ConfigError(f"m={m} exceeds the dimension {self.basis_.n}")
        self.support_ = None if self.support is None else Support.of(self.support, self.basis_.n)
        self.n_features_in_ = self.basis_.n
        self.config_ = RecoveryConfig(starts=check_positive_int(self.n_starts, "n_starts"),
                                      accept_tol=self.accept_tol, seed=self.seed,
                                      enumeration_cap=self.enumeration_cap,
                                      workers=check_positive_int(self.n_jobs, "n_jobs"))
        return self

    def recover(self, target):
        """Full :class:`~sparsepr.recover.RecoveryResult` for one measurement vector."""
        check_is_fitted(self, "basis_")
        problem = RecoveryProblem.from_target(target, self.basis_, self.m, self.field)
        if self.support_ is not None:
            return solve_fixed_support(problem, self.support_, self.config_)
        return solve_support_search(problem, self.config_)

    def predict(self, X):
        X = _as_rows(X, dtype=float)
        return np.stack([self.recover(row).signal for row in X])


def _as_rows(X, dtype=None):
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] == 0:
        raise ConfigError(f"expected a 2-d array of signals, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ConfigError("input contains NaN or infinity")
    return X
