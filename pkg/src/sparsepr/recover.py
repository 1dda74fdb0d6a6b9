"""Recovery of sparse signals from power-spectrum measurements.

For a fixed support the measurement is a quadratic map of the M coefficients,
``c -> G |W c|^2``, with ``W`` the frame pushed through the (real) Fourier
transform and ``G`` the optional grouping of Fourier coordinates. It is
inverted by multistart Levenberg-Marquardt on the residual normalized by the
target's norm. Support search enumerates supports and keeps the best fit.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from . import _lm
from ._gauge import canonicalize, equivalent_up_to_phase
from ._validation import check_field, check_positive_int, check_signal
from .exceptions import ConfigError, GuardError
from .model import Basis, SparseVector, Support, embed
from .signal import (dft_matrix, grouping_matrix, power_spectrum, real_dft, real_dft_matrix,
                     reduced_b, reduced_length)


@dataclass(frozen=True)
class RecoveryConfig:
    starts: int = 50
    accept_tol: float = 1e-8
    separation_tol: float = 1e-4
    max_iter: int = 300
    seed: int = 0
    enumeration_cap: int = 5000
    workers: int = 1
    # extra rounds of ``starts`` starts, run only while no start has converged;
    # odd rounds fit amplitudes first
    restarts: int = 59
    # supports that get the restart rounds in a support search
    refine: int = 3


@dataclass(frozen=True)
class RecoveryProblem:
    """Measurements of an M-sparse signal together with the basis it lives in.

    ``measurement`` is ``"b"`` (grouped real-Fourier moduli, real field only)
    or ``"power"`` (full power spectrum).
    """

    target: np.ndarray
    basis: Basis
    m: int
    field: str = "real"
    measurement: str = "b"

    @classmethod
    def from_target(cls, target, basis, m, field="real"):
        check_field(field)
        m = check_positive_int(m, "m")
        n = basis.n
        if m > n:
            raise ConfigError(f"sparsity {m} exceeds dimension {n}")
        t = check_signal(target, "real", name="target")
        if np.any(t < -1e-12 * max(1.0, float(np.abs(t).max()))):
            raise ConfigError("measurements must be nonnegative")
        if field == "real" and t.size == reduced_length(n):
            kind = "b"
        elif t.size == n:
            kind = "power"
        elif field == "complex":
            raise ConfigError(f"complex recovery needs the full power spectrum (length {n}), "
                              f"got length {t.size}")
        else:
            raise ConfigError(f"target length {t.size} fits neither b ({reduced_length(n)}) "
                              f"nor the power spectrum ({n})")
        return cls(t, basis, m, field, kind)

    @classmethod
    def from_signal(cls, x, basis, m, field="real", measurement="b"):
        x = check_signal(x, field)
        if measurement == "b" and field == "real":
            target = reduced_b(real_dft(x))
        elif measurement == "power":
            target = power_spectrum(x)
        else:
            raise ConfigError(f"measurement {measurement!r} not available for field {field!r}")
        return cls(target, basis, m, field, measurement)

    @property
    def n(self):
        return self.basis.n

    def measure(self, x):
        """Apply this problem's measurement to a dense signal."""
        if self.measurement == "b":
            return reduced_b(real_dft(np.real(x)))
        return power_spectrum(x)


@dataclass
class RecoveryResult:
    coeffs: np.ndarray
    support: Support
    residual: float
    normalized_residual: float
    converged: bool
    canonical: bool = True
    ambiguity: Optional[SparseVector] = None
    signal: Optional[np.ndarray] = None

    @property
    def sparse_vector(self):
        return SparseVector(self.support, self.coeffs)


class QuadraticModel:
    """``c -> G |W c|^2`` for one support, with normalized residuals.

    Parameters are real: ``c`` itself for real signals, ``[Re c, Im c]`` for
    complex ones.
    """

    def __init__(self, problem, support):
        if support.m != problem.m or support.n != problem.n:
            raise ConfigError(f"support {support.indices} does not match the problem (m={problem.m})")
        rows = problem.basis.matrix[list(support.indices)]
        n = problem.n
        if problem.measurement == "b":
            self.w = real_dft_matrix(n) @ rows.T
            self.g = grouping_matrix(n)
        else:
            self.w = dft_matrix(n) @ rows.T
            self.g = None
        self.complex = problem.field == "complex"
        self.m = support.m
        self.target = problem.target
        self.scale = float(np.linalg.norm(problem.target))
        self.p = 2 * self.m if self.complex else self.m

    def coeffs(self, params):
        params = np.asarray(params)
        if self.complex:
            return params[..., : self.m] + 1j * params[..., self.m:]
        return params

    def params(self, coeffs):
        coeffs = np.asarray(coeffs)
        if self.complex:
            return np.concatenate([coeffs.real, coeffs.imag], axis=-1)
        return np.real(coeffs)

    def measure(self, params):
        u = self.coeffs(params) @ self.w.T
        out = np.abs(u) ** 2
        return out if self.g is None else out @ self.g.T

    def residual(self, params):
        """Normalized residuals ``(S, D)`` and Jacobians ``(S, D, p)``."""
        params = np.atleast_2d(params)
        c = self.coeffs(params)
        u = c @ self.w.T
        meas = np.abs(u) ** 2
        prod = np.conj(u)[:, :, None] * self.w[None, :, :]
        if self.complex:
            jac = np.concatenate([2 * prod.real, -2 * prod.imag], axis=2)
        else:
            jac = 2 * prod.real
        if self.g is not None:
            meas = meas @ self.g.T
            jac = np.einsum("dn,snp->sdp", self.g, jac)
        scale = self.scale if self.scale > 0 else 1.0
        return (meas - self.target) / scale, jac / scale

    def amplitude_residual(self, params):
        """Residuals ``sqrt(model) - sqrt(target)``, scaled like :meth:`residual`."""
        r, jac = self.residual(params)
        scale = self.scale if self.scale > 0 else 1.0
        root = np.sqrt(np.maximum(r + self.target / scale, 1e-30))
        return root - np.sqrt(np.maximum(self.target, 0.0) / scale), jac / (2 * root[:, :, None])

    def initial_points(self, starts, rng):
        w0 = rng.standard_normal((starts, self.p))
        meas = np.linalg.norm(self.measure(w0), axis=1)
        factor = np.sqrt(self.scale / np.maximum(meas, 1e-300))
        return w0 * factor[:, None]


def multistart(model, starts, seed, max_iter=300, init=None, amplitude=False):
    """Run LM from ``starts`` random points; return coefficients and residual norms.

    With ``amplitude=True`` each start is first fitted on the square-rooted
    measurements, which reaches different basins, then polished as usual.
    """
    rng = np.random.default_rng(seed)
    w0 = model.initial_points(starts, rng)
    if init is not None:
        w0 = np.vstack([np.atleast_2d(init), w0])
    if amplitude:
        w0, _, _, _ = _lm.levenberg_marquardt(model.amplitude_residual, w0, max_iter=max_iter)
    w, _, cost, _ = _lm.levenberg_marquardt(model.residual, w0, max_iter=max_iter,
                                            cost_floor=1e-30)
    return model.coeffs(w), np.sqrt(cost)


def _solve(problem, support, cfg, seed):
    n = problem.n
    if not np.any(problem.target):
        zero = np.zeros(support.m, dtype=complex if problem.field == "complex" else float)
        return RecoveryResult(zero, support, 0.0, 0.0, True, signal=np.zeros(n, zero.dtype))
    model = QuadraticModel(problem, support)
    entropy = seed.entropy if isinstance(seed, np.random.SeedSequence) else seed
    coeffs, res = [], []
    for k in range(cfg.restarts + 1):
        child = np.random.SeedSequence(entropy, spawn_key=(k,))
        c, r = multistart(model, cfg.starts, child, cfg.max_iter, amplitude=k % 2 == 1)
        coeffs.append(c)
        res.append(r)
        if r.min() < cfg.accept_tol:
            break
    coeffs, res = np.concatenate(coeffs), np.concatenate(res)
    best = int(np.argmin(res))
    c = canonicalize(coeffs[best], problem.field)
    x = embed(SparseVector(support, c), problem.basis)
    residual = float(np.linalg.norm(problem.measure(x) - problem.target))
    converged = bool(res[best] < cfg.accept_tol)
    ambiguity = None
    if converged:
        for k in np.flatnonzero(res < cfg.accept_tol):
            other = SparseVector(support, canonicalize(coeffs[k], problem.field))
            y = embed(other, problem.basis)
            if not equivalent_up_to_phase(x, y, cfg.separation_tol):
                ambiguity = other
                break
    return RecoveryResult(c, support, residual, float(res[best]), converged,
                          ambiguity=ambiguity, signal=x)


def support_seed(seed, support):
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFF, support.n, *support.indices])


def solve_fixed_support(problem, support, cfg=RecoveryConfig()):
    """Best LM fit on one support, canonicalized; ``converged`` flags acceptance.

    ``ambiguity`` holds a second accepted solution on the same support that is
    not sign/phase-equivalent to the returned one.
    """
    if not isinstance(support, Support):
        support = Support.of(support, problem.n)
    return _solve(problem, support, cfg, support_seed(cfg.seed, support))


def _solve_task(args):
    problem, support, cfg = args
    return solve_fixed_support(problem, support, cfg)


def solve_support_search(problem, cfg=RecoveryConfig()):
    """Enumerate all supports of size M (lexicographic) and keep the best fit.

    Every support gets one round of starts; if none converges, the
    ``cfg.refine`` best supports are re-solved with the full restart budget.

    Raises :class:`GuardError` when ``C(N, M)`` exceeds ``cfg.enumeration_cap``.
    """
    n, m = problem.n, problem.m
    total = comb(n, m)
    if total > cfg.enumeration_cap:
        raise GuardError(f"C({n},{m}) = {total} supports exceeds the enumeration cap "
                         f"{cfg.enumeration_cap}; use fixed-support or sampled recovery")
    supports = [Support(idx, n) for idx in combinations(range(n), m)]
    quick = replace(cfg, restarts=0)
    tasks = [(problem, s, quick) for s in supports]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_solve_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        results = [_solve_task(t) for t in tasks]

    def ranking():
        return sorted(range(len(results)),
                      key=lambda k: (results[k].normalized_residual, results[k].support.indices))

    order = ranking()
    if cfg.restarts and not results[order[0]].converged:
        for k in order[:cfg.refine]:
            results[k] = solve_fixed_support(problem, results[k].support, cfg)
        order = ranking()
    best = results[order[0]]
    if best.converged and best.ambiguity is None:
        for k in order[1:]:
            other = results[k]
            if not other.converged:
                break
            if not equivalent_up_to_phase(best.signal, other.signal, cfg.separation_tol):
                best.ambiguity = other.sparse_vector
                break
    return best
