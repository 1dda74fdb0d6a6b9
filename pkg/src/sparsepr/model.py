"""Bases, supports, sparse vectors and the frames they induce."""
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._validation import check_field, check_matrix, check_positive_int, infer_field
from .exceptions import ConfigError, SamplingError
from .signal import dft_matrix

DEFAULT_CONDITION_CAP = 1e6
MAX_RESAMPLES = 100


@dataclass(frozen=True)
class Basis:
    """Rows of ``matrix`` are the ordered basis vectors ``v_0 .. v_{N-1}``."""

    matrix: np.ndarray
    condition: float

    @classmethod
    def from_matrix(cls, matrix, condition_cap=DEFAULT_CONDITION_CAP):
        mat = check_matrix(matrix, "basis matrix", square=True)
        cond = float(np.linalg.cond(mat))
        if not np.isfinite(cond) or cond > condition_cap:
            raise ConfigError(f"basis is singular or too ill-conditioned (cond={cond:.3g})")
        mat.setflags(write=False)
        return cls(mat, cond)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def field(self):
        return infer_field(self.matrix)


@dataclass(frozen=True)
class Support:
    indices: tuple
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ConfigError("support must be non-empty")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ConfigError(f"support indices must be strictly increasing: {idx}")
        if idx[0] < 0 or idx[-1] >= self.n:
            raise ConfigError(f"support indices must lie in [0, {self.n - 1}]: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices, n):
        return cls(tuple(sorted(int(i) for i in indices)), n)

    @property
    def m(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class Frame:
    """M x N matrix; column n is the frame vector alpha_n.

    ``rows`` records which basis vectors produced each row, in frame order.
    """

    matrix: np.ndarray
    rows: tuple = ()

    def __post_init__(self):
        m, n = self.matrix.shape
        if m > n:
            raise ConfigError(f"frame has more rows than columns ({m} > {n})")

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]

    @property
    def field(self):
        return infer_field(self.matrix)

    def analysis(self, v):
        """``L(v)``: the signal in K^N synthesized from frame coefficients ``v``."""
        return self.matrix.T @ np.asarray(v)


@dataclass(frozen=True)
class OverlappingFramePair:
    """Two frames whose first ``s`` rows coincide."""

    first: Frame
    second: Frame
    s: int

    def swapped(self):
        return OverlappingFramePair(self.second, self.first, self.s)


@dataclass(frozen=True)
class SparseVector:
    support: Support
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.shape != (self.support.m,):
            raise ConfigError(f"expected {self.support.m} coefficients, got shape {c.shape}")


def sample_generic_basis(n, field="real", seed=None, condition_cap=DEFAULT_CONDITION_CAP):
    """Gaussian basis of K^n, redrawn while its condition number exceeds the cap."""
    n = check_positive_int(n, "n")
    check_field(field)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES):
        mat = rng.standard_normal((n, n))
        if field == "complex":
            mat = mat + 1j * rng.standard_normal((n, n))
        cond = float(np.linalg.cond(mat))
        if np.isfinite(cond) and cond <= condition_cap:
            mat.setflags(write=False)
            return Basis(mat, cond)
    raise SamplingError(f"no basis with condition <= {condition_cap:g} after {MAX_RESAMPLES} draws")


def embed(v, basis):
    """``sum_i coeffs_i v_{S_i}`` as a dense signal."""
    if v.support.n != basis.n:
        raise ConfigError(f"support lives in dimension {v.support.n}, basis in {basis.n}")
    return basis.matrix[list(v.support.indices)].T @ np.asarray(v.coeffs)


def frame_from_basis(basis, s):
    if s.n != basis.n:
        raise ConfigError(f"support lives in dimension {s.n}, basis in {basis.n}")
    mat = basis.matrix[list(s.indices)]
    if np.linalg.matrix_rank(mat) < s.m:
        raise RuntimeError("selected basis rows are rank deficient")
    return Frame(mat, s.indices)


def overlapping_pair_from_basis(basis, s1, s2):
    """Frames for two supports with the shared rows moved to the front of both."""
    if s1.m != s2.m:
        raise ConfigError(f"supports must have equal size, got {s1.m} and {s2.m}")
    shared = sorted(set(s1.indices) & set(s2.indices))
    order1 = tuple(shared + [i for i in s1.indices if i not in shared])
    order2 = tuple(shared + [i for i in s2.indices if i not in shared])
    first = Frame(basis.matrix[list(order1)], order1)
    second = Frame(basis.matrix[list(order2)], order2)
    return OverlappingFramePair(first, second, len(shared))


def dft_conjugate_frame(f):
    """The frame ``A F``; ``|(A F)^T v|^2`` is the power spectrum of ``A^T v``."""
    if f.field != "complex":
        raise ConfigError("DFT conjugation does not produce a real frame; pass a complex frame")
    return Frame(f.matrix @ dft_matrix(f.n), f.rows)


def sample_sparse_vector(s, field="real", seed=None):
    check_field(field)
    if s.m < 1:
        raise ConfigError("support must be non-empty")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(s.m)
    if field == "complex":
        c = c + 1j * rng.standard_normal(s.m)
    return SparseVector(s, c)


def coefficients_in_frame_order(v, frame):
    """Reorder a sparse vector's coefficients to match ``frame.rows``."""
    lookup = dict(zip(v.support.indices, np.asarray(v.coeffs)))
    try:
        return np.array([lookup[r] for r in frame.rows])
    except KeyError as exc:
        raise ConfigError(f"row {exc.args[0]} of the frame is not in the support") from None


def sparse_vector_from_frame(coeffs, frame, n):
    """Inverse of :func:`coefficients_in_frame_order`."""
    order = np.argsort(frame.rows)
    support = Support(tuple(np.asarray(frame.rows)[order]), n)
    return SparseVector(support, np.asarray(coeffs)[order])
