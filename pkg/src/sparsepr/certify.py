"""Lifted measurement operators and a refutation search for injectivity.

A quadratic measurement ``x -> (|<a_n, x>|^2)_n`` becomes linear in ``x x^*``.
Uniqueness up to a global sign/phase fails exactly when the lifted operator
annihilates some ``(x x^*, y y^*)`` with ``y`` off the orbit of ``x``; the
search below looks for such pairs by minimizing

    ||op(x x^*, y y^*)||^2 / ||x x^* - y y^*||_F^2

from many random starts. The denominator vanishes on the trivial orbit, so it
acts as a separation barrier, and the ratio is scale invariant. A
``presumed-pass`` verdict means no counterexample was found; it is not a proof.

Symmetric and Hermitian M x M matrices are stored in coordinates:
``[diag, Re upper, Im upper]`` (Hermitian) or ``[diag, upper]`` (symmetric),
upper entries in ``numpy.triu_indices(M, 1)`` order.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import _lm
from ._gauge import equivalent_up_to_phase, separation
from .exceptions import ConfigError, GuardError
from .model import (Basis, Frame, OverlappingFramePair, SparseVector, Support, dft_conjugate_frame,
                    embed, frame_from_basis, overlapping_pair_from_basis, sparse_vector_from_frame)
from .recover import QuadraticModel, RecoveryProblem, multistart
from .signal import grouping_matrix, power_spectrum, real_dft, real_dft_matrix, reduced_b

KINDS = ("complex-pair", "real-pair", "real-single")
# a start stops once its ratio improves by < 1e-6 (relative) five times running
STALL_RTOL = 1e-6
STALL_PATIENCE = 5
# operators searched together in one batched run
CHUNK = 32


# -- matrix coordinates -------------------------------------------------------

def symmetric_coords(a):
    a = np.asarray(a)
    iu, ju = np.triu_indices(a.shape[-1], 1)
    return np.concatenate([np.real(np.diagonal(a, axis1=-2, axis2=-1)), np.real(a[..., iu, ju])], axis=-1)


def symmetric_from_coords(v, m):
    v = np.asarray(v, dtype=float)
    iu, ju = np.triu_indices(m, 1)
    out = np.zeros(v.shape[:-1] + (m, m))
    out[..., np.arange(m), np.arange(m)] = v[..., :m]
    out[..., iu, ju] = v[..., m:]
    out[..., ju, iu] = v[..., m:]
    return out


def hermitian_coords(a):
    a = np.asarray(a)
    iu, ju = np.triu_indices(a.shape[-1], 1)
    upper = a[..., iu, ju]
    return np.concatenate([np.real(np.diagonal(a, axis1=-2, axis2=-1)), upper.real, upper.imag], axis=-1)


def hermitian_from_coords(v, m):
    v = np.asarray(v, dtype=float)
    iu, ju = np.triu_indices(m, 1)
    k = iu.size
    out = np.zeros(v.shape[:-1] + (m, m), dtype=complex)
    out[..., np.arange(m), np.arange(m)] = v[..., :m]
    upper = v[..., m:m + k] + 1j * v[..., m + k:]
    out[..., iu, ju] = upper
    out[..., ju, iu] = np.conj(upper)
    return out


def _lift_real(x):
    """Coordinates of ``x x^T`` and their Jacobian, batched over rows of ``x``."""
    s, m = x.shape
    iu, ju = np.triu_indices(m, 1)
    k = iu.size
    f = np.concatenate([x ** 2, x[:, iu] * x[:, ju]], axis=1)
    jac = np.zeros((s, m + k, m))
    ar = np.arange(m)
    jac[:, ar, ar] = 2 * x
    rows = m + np.arange(k)
    jac[:, rows, iu] = x[:, ju]
    jac[:, rows, ju] = x[:, iu]
    return f, jac


def _lift_complex(w):
    """Coordinates of ``x x^*`` for ``x = a + ib`` given as ``w = [a, b]``."""
    s, p = w.shape
    m = p // 2
    a, b = w[:, :m], w[:, m:]
    iu, ju = np.triu_indices(m, 1)
    k = iu.size
    f = np.concatenate([a ** 2 + b ** 2,
                        a[:, iu] * a[:, ju] + b[:, iu] * b[:, ju],
                        b[:, iu] * a[:, ju] - a[:, iu] * b[:, ju]], axis=1)
    jac = np.zeros((s, m + 2 * k, p))
    ar = np.arange(m)
    jac[:, ar, ar] = 2 * a
    jac[:, ar, m + ar] = 2 * b
    sym = m + np.arange(k)
    jac[:, sym, iu] = a[:, ju]
    jac[:, sym, ju] = a[:, iu]
    jac[:, sym, m + iu] = b[:, ju]
    jac[:, sym, m + ju] = b[:, iu]
    anti = m + k + np.arange(k)
    jac[:, anti, iu] = -b[:, ju]
    jac[:, anti, ju] = b[:, iu]
    jac[:, anti, m + iu] = a[:, ju]
    jac[:, anti, m + ju] = -a[:, iu]
    return f, jac


def lift(x):
    """Coordinates of ``x x^*`` (symmetric coordinates for real ``x``)."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return _lift_complex(np.concatenate([x.real, x.imag])[None])[0][0]
    return _lift_real(np.asarray(x, dtype=float)[None])[0][0]


# -- operators ---------------------------------------------------------------

def _real_rows(frame_matrix):
    """Row n maps symmetric coordinates of A to ``alpha_n^T A alpha_n``."""
    a = np.asarray(frame_matrix, dtype=float)
    iu, ju = np.triu_indices(a.shape[0], 1)
    return np.concatenate([a.T ** 2, 2 * a[iu].T * a[ju].T], axis=1)


def _complex_rows(frame_matrix):
    """Row n maps Hermitian coordinates of A to ``alpha_n^T A conj(alpha_n)``.

    With ``A = x x^*`` this is ``|sum_j alpha_jn x_j|^2``, the n-th squared
    modulus of the synthesized signal.
    """
    a = np.asarray(frame_matrix, dtype=complex)
    iu, ju = np.triu_indices(a.shape[0], 1)
    cross = a[iu] * np.conj(a[ju])
    return np.concatenate([np.abs(a.T) ** 2, 2 * cross.real.T, -2 * cross.imag.T], axis=1)


@dataclass(frozen=True)
class MeasurementOperator:
    """Explicit real matrix of a lifted measurement map.

    ``matrix`` acts on ``[coords(A), coords(B)]`` for the pair kinds and on
    ``coords(A)`` for ``real-single``.
    """

    kind: str
    n: int
    m: int
    matrix: np.ndarray = dc_field(repr=False)

    @property
    def field(self):
        return "complex" if self.kind == "complex-pair" else "real"

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def lift_dim(self):
        return self.m * self.m if self.field == "complex" else self.m * (self.m + 1) // 2

    def coords(self, a):
        return hermitian_coords(a) if self.field == "complex" else symmetric_coords(a)

    def evaluate(self, a, b=None):
        """Apply to matrices: ``(A, B)`` for pair kinds, ``A`` for ``real-single``."""
        if self.kind == "real-single":
            if b is not None:
                raise ConfigError("real-single operators act on one matrix")
            return self.matrix @ self.coords(a)
        if b is None:
            raise ConfigError(f"{self.kind} operators act on a pair of matrices")
        return self.matrix @ np.concatenate([self.coords(a), self.coords(b)])

    def split(self):
        """Blocks ``(P, Q)`` with ``op(x x^*, y y^*) = P lift(x) + Q lift(y)``."""
        if self.kind == "real-single":
            return self.matrix, -self.matrix
        d = self.lift_dim
        return self.matrix[:, :d], self.matrix[:, d:]

    def evaluate_rank_one(self, x, y):
        p, q = self.split()
        return p @ lift(x) + q @ lift(y)


def build_complex_pair_operator(pair):
    u, v = pair.first, pair.second
    if u.matrix.shape != v.matrix.shape:
        raise ConfigError(f"frame shapes differ: {u.matrix.shape} vs {v.matrix.shape}")
    mat = np.hstack([_complex_rows(u.matrix), -_complex_rows(v.matrix)])
    return MeasurementOperator("complex-pair", u.n, u.m, mat)


def build_real_pair_operator(pair):
    u, v = pair.first, pair.second
    if u.matrix.shape != v.matrix.shape:
        raise ConfigError(f"frame shapes differ: {u.matrix.shape} vs {v.matrix.shape}")
    if np.iscomplexobj(u.matrix) or np.iscomplexobj(v.matrix):
        raise ConfigError("real pair operator needs real frames")
    g = grouping_matrix(u.n)
    mat = np.hstack([g @ _real_rows(u.matrix), -(g @ _real_rows(v.matrix))])
    return MeasurementOperator("real-pair", u.n, u.m, mat)


def build_real_single_operator(f):
    if np.iscomplexobj(f.matrix):
        raise ConfigError("real single operator needs a real frame")
    return MeasurementOperator("real-single", f.n, f.m, grouping_matrix(f.n) @ _real_rows(f.matrix))


# -- refutation search --------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    starts: int = 200
    max_iter: int = 500
    tol_fail: float = 1e-18
    tol_sep: float = 1e-4
    seed: int = 0


@dataclass
class ViolationWitness:
    x: np.ndarray
    y: np.ndarray
    residual: float
    separation: float


@dataclass
class CertResult:
    verdict: str
    witness: Optional[ViolationWitness]
    starts: int
    best_residual: Optional[float]

    @property
    def passed(self):
        return self.verdict == "presumed-pass"


class _RatioObjective:
    """Residuals ``op(xx*, yy*) / ||xx* - yy*||_F`` over real parameters.

    Several operators of one shape can be stacked; ``owner[i]`` names the
    operator that batch row ``i`` belongs to.
    """

    def __init__(self, ops, owner=None):
        ops = [ops] if isinstance(ops, MeasurementOperator) else list(ops)
        first = ops[0]
        if any((o.kind, o.n, o.m, o.matrix.shape) != (first.kind, first.n, first.m, first.matrix.shape)
               for o in ops):
            raise ConfigError("stacked operators must share kind and shape")
        blocks = [o.split() for o in ops]
        self.p_blk = np.stack([b[0] for b in blocks])
        self.q_blk = np.stack([b[1] for b in blocks])
        self.owner = owner
        self.complex = first.field == "complex"
        self.m = first.m
        self.half = 2 * first.m if self.complex else first.m

    def unpack(self, w):
        x, y = w[:, : self.half], w[:, self.half:]
        if self.complex:
            m = self.m
            return x[:, :m] + 1j * x[:, m:], y[:, :m] + 1j * y[:, m:]
        return x, y

    def _blocks(self, rows):
        if self.owner is None:
            return self.p_blk[0], self.q_blk[0]
        k = self.owner[rows]
        return self.p_blk[k], self.q_blk[k]

    def raw(self, w, rows=None):
        lift_fn = _lift_complex if self.complex else _lift_real
        fx, jx = lift_fn(w[:, : self.half])
        fy, jy = lift_fn(w[:, self.half:])
        p_blk, q_blk = self._blocks(rows)
        if p_blk.ndim == 2:
            r = fx @ p_blk.T + fy @ q_blk.T
        else:
            r = (p_blk @ fx[..., None] + q_blk @ fy[..., None])[..., 0]
        jac = np.concatenate([np.matmul(p_blk, jx), np.matmul(q_blk, jy)], axis=2)
        return r, jac

    def denominator(self, w):
        """``||x||^4 + ||y||^4 - 2 |<x, y>|^2`` and its gradient."""
        h = self.half
        x, y = w[:, :h], w[:, h:]
        nx, ny = np.sum(x * x, axis=1), np.sum(y * y, axis=1)
        re = np.sum(x * y, axis=1)
        if self.complex:
            m = self.m
            ax, bx, ay, by = x[:, :m], x[:, m:], y[:, :m], y[:, m:]
            im = np.sum(bx * ay - ax * by, axis=1)
            g_inner_x = np.concatenate([re[:, None] * ay - im[:, None] * by,
                                        re[:, None] * by + im[:, None] * ay], axis=1)
            g_inner_y = np.concatenate([re[:, None] * ax + im[:, None] * bx,
                                        re[:, None] * bx - im[:, None] * ax], axis=1)
        else:
            im = np.zeros_like(re)
            g_inner_x, g_inner_y = re[:, None] * y, re[:, None] * x
        den = nx ** 2 + ny ** 2 - 2 * (re ** 2 + im ** 2)
        grad = np.concatenate([4 * nx[:, None] * x - 4 * g_inner_x,
                               4 * ny[:, None] * y - 4 * g_inner_y], axis=1)
        return den, grad

    def __call__(self, w, rows=None):
        r, jac = self.raw(w, rows)
        den, grad = self.denominator(w)
        den = np.maximum(den, 1e-200)
        root = np.sqrt(den)
        rho = r / root[:, None]
        jrho = jac / root[:, None, None] - r[:, :, None] * grad[:, None, :] / (2 * den * root)[:, None, None]
        return rho, jrho


def _gauge(w):
    """Scale onto ``||x||^2 + ||y||^2 = 2``."""
    norms = np.linalg.norm(w, axis=1, keepdims=True)
    return w * (np.sqrt(2.0) / np.maximum(norms, 1e-300))


def _starts(seed, count, p):
    if count == 0:
        return np.zeros((0, p))
    return np.stack([np.random.default_rng([seed & 0xFFFFFFFF, i]).standard_normal(p)
                     for i in range(count)])


def _row_separation(x, y):
    """Row-wise ``min_t ||x - t y|| / ||x||``, via ``||x||^2 + ||y||^2 - 2|<x, y>|``."""
    nx = np.sum(np.abs(x) ** 2, axis=1)
    ny = np.sum(np.abs(y) ** 2, axis=1)
    inner = np.abs(np.sum(np.conj(x) * y, axis=1))
    dist = np.sqrt(np.maximum(nx + ny - 2 * inner, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(nx > 0, dist / np.sqrt(nx), np.where(ny > 0, np.inf, 0.0))


def search_many(ops, seeds, cfg=SearchConfig(), inits=None, embeds=None):
    """Run the violation search for several operators of one shape in one batch.

    Operator ``j`` gets ``cfg.starts`` starts seeded from ``seeds[j]`` (start
    ``i`` uses ``SeedSequence([seed, i])``) plus the rows of ``inits[j]``.
    ``embeds[j] = (E_u, E_v)`` maps coefficients to signals (``x @ E_u``) so
    separation is measured between signals; without it coefficients are
    compared. Only separated rows count towards ``best_residual``.
    Results do not depend on how operators are grouped into batches.
    """
    ops = list(ops)
    if not ops:
        return []
    obj = _RatioObjective(ops, owner=np.zeros(0, dtype=int))
    p = 2 * obj.half
    blocks, owner = [], []
    for j, seed in enumerate(seeds):
        w0 = _starts(seed, cfg.starts, p)
        if inits is not None and inits[j] is not None:
            w0 = np.vstack([np.atleast_2d(np.asarray(inits[j], dtype=float)), w0])
        if w0.shape[0] == 0:
            raise ConfigError("search needs at least one start")
        blocks.append(w0)
        owner.append(np.full(w0.shape[0], j))
    obj.owner = np.concatenate(owner)
    w, _, cost, _ = _lm.levenberg_marquardt(obj, _gauge(np.vstack(blocks)), max_iter=cfg.max_iter,
                                            cost_floor=1e-32, project=_gauge, indexed=True,
                                            stall_rtol=STALL_RTOL, patience=STALL_PATIENCE)
    w = _gauge(w)
    raw, _ = obj.raw(w, np.arange(w.shape[0]))
    raw_sq = np.sum(raw * raw, axis=1)
    xs, ys = obj.unpack(w)
    out = []
    for j in range(len(ops)):
        rows = np.flatnonzero(obj.owner == j)
        if embeds is not None and embeds[j] is not None:
            eu, ev = embeds[j]
            seps = _row_separation(xs[rows] @ eu, ys[rows] @ ev)
        else:
            seps = _row_separation(xs[rows], ys[rows])
        apart = seps > cfg.tol_sep
        ok = rows[(raw_sq[rows] < cfg.tol_fail) & apart]
        best_residual = float(np.min(cost[rows][apart])) if apart.any() else None
        if ok.size:
            k = ok[np.argmin(raw_sq[ok])]
            witness = ViolationWitness(xs[k].copy(), ys[k].copy(), float(np.sqrt(raw_sq[k])),
                                       float(seps[np.searchsorted(rows, k)]))
            out.append(CertResult("fail", witness, rows.size, best_residual))
        else:
            out.append(CertResult("presumed-pass", None, rows.size, best_residual))
    return out


def search_rank_constrained_kernel(op, cfg=SearchConfig(), init=None):
    """Multistart search for ``(x, y)``, ``y`` off the orbit of ``x``, with
    ``op(x x^*, y y^*) = 0``.

    Start ``i`` draws its Gaussian initial point from ``SeedSequence([seed, i])``;
    ``init`` (rows of ``[x, y]`` in the real parametrization) is prepended.
    Returns the lowest-residual witness passing both tolerances, if any.
    """
    return search_many([op], [cfg.seed], cfg, None if init is None else [init])[0]


# -- rank <= 2 kernel probe ---------------------------------------------------

@dataclass(frozen=True)
class ProbeConfig:
    starts: int = 20
    seed: int = 0
    null_rtol: float = 1e-10
    sigma_tol: float = 1e-8
    polish_iter: int = 2000


@dataclass
class ProbeReport:
    null_dim: int
    min_sigma3: Optional[float]
    candidate: Optional[np.ndarray]


def _tail(a):
    """Third largest singular value of symmetric ``a`` relative to ``||a||_F``."""
    ev = np.linalg.eigvalsh(a)
    sv = np.sort(np.abs(ev))[::-1]
    return sv[2] / np.linalg.norm(a) if sv.size > 2 else 0.0


def kernel_low_rank_probe(op, cfg=ProbeConfig()):
    """Look for a rank <= 2 symmetric matrix in the kernel of a real-single operator.

    The numerical kernel comes from an SVD (threshold ``null_rtol * sigma_max``).
    Over its unit sphere the energy outside the two dominant eigenvalues is
    minimized from several starts, then polished by alternating projection
    between the kernel and the rank-2 matrices.
    """
    if op.kind != "real-single":
        raise ConfigError("the low-rank probe works on real-single operators")
    m = op.m
    sv = np.linalg.svd(op.matrix, compute_uv=False)
    _, _, vt = np.linalg.svd(op.matrix, full_matrices=True)
    rank = int(np.sum(sv > cfg.null_rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    null = vt[rank:]
    if null.shape[0] == 0:
        return ProbeReport(0, None, None)
    mats = symmetric_from_coords(null, m)
    # Frobenius-orthonormal kernel basis, so coefficients are isometric
    q, _ = np.linalg.qr(mats.reshape(len(mats), -1).T)
    basis = q.T.reshape(-1, m, m)
    k = basis.shape[0]
    if m <= 2:
        return ProbeReport(k, 0.0, basis[0])

    def build(c):
        return np.tensordot(c, basis, axes=1)

    def energy(c):
        a = build(c)
        ev, vec = np.linalg.eigh(a)
        order = np.argsort(np.abs(ev))[::-1]
        tail_idx = order[2:]
        total = c @ c
        tail = np.sum(ev[tail_idx] ** 2)
        dtail = (vec[:, tail_idx] * (2 * ev[tail_idx])) @ vec[:, tail_idx].T
        g_tail = np.einsum("kj,ckj->c", dtail, basis)
        return tail / total, (g_tail * total - tail * 2 * c) / total ** 2

    def polish(c):
        for _ in range(cfg.polish_iter):
            a = build(c)
            ev, vec = np.linalg.eigh(a)
            top = np.argsort(np.abs(ev))[::-1][:2]
            low = (vec[:, top] * ev[top]) @ vec[:, top].T
            c_new = np.einsum("kij,ij->k", basis, low)
            c_new /= np.linalg.norm(c_new)
            if np.linalg.norm(c_new - c) < 1e-15:
                return c_new
            c = c_new
        return c

    best_c, best_s = None, np.inf
    for i in range(cfg.starts):
        rng = np.random.default_rng([cfg.seed & 0xFFFFFFFF, i])
        c0 = rng.standard_normal(k)
        c0 /= np.linalg.norm(c0)
        if k > 1:
            res = minimize(energy, c0, jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 500})
            c0 = res.x / np.linalg.norm(res.x)
        c = polish(c0)
        s3 = _tail(build(c))
        if s3 < best_s:
            best_c, best_s = c, s3
        if best_s < cfg.sigma_tol * 1e-3:
            break
    candidate = build(best_c) if best_s < cfg.sigma_tol else None
    return ProbeReport(k, float(best_s), candidate)


# -- basis-level certification -----------------------------------------------

@dataclass(frozen=True)
class CertifyConfig:
    search: SearchConfig = SearchConfig()
    support_cap: int = 2000
    pair_cap: int = 5000
    allow_sampling: bool = True
    trials: int = 20
    recovery_starts: int = 50
    accept_tol: float = 1e-8
    seed: int = 0
    workers: int = 1


def fourier_frame(frame):
    """Push a frame through the transform that turns signals into measurements.

    Real frames are multiplied by the transposed real Fourier matrix, complex
    frames by the DFT matrix.
    """
    if frame.field == "complex":
        return dft_conjugate_frame(frame)
    return Frame(frame.matrix @ real_dft_matrix(frame.n).T, frame.rows)


def _measure(x, field):
    return power_spectrum(x) if field == "complex" else reduced_b(real_dft(np.real(x)))


def verify_witness(basis, v1, v2):
    """Direct check of a witness: measurement gap and signal separation in K^N.

    Bypasses the lifted operator: both sparse vectors are embedded and measured
    with the dense transforms.
    """
    x, y = embed(v1, basis), embed(v2, basis)
    gap = float(np.linalg.norm(_measure(x, basis.field) - _measure(y, basis.field)))
    return gap, separation(x, y)


def dihedral_witness(basis, v, g, tol=1e-9):
    """Coefficients of ``g . embed(v)`` in ``basis``, with negligible entries dropped."""
    from .signal import dihedral_act

    y = dihedral_act(g, embed(v, basis))
    coeffs = np.linalg.solve(basis.matrix.T, y)
    keep = np.flatnonzero(np.abs(coeffs) > tol * max(1.0, np.abs(coeffs).max()))
    return SparseVector(Support(tuple(keep), basis.n), coeffs[keep])


def _item_seed(seed, *parts):
    return int(np.random.SeedSequence([seed & 0xFFFFFFFF, *parts]).generate_state(1)[0])


def _witness_dict(w, frame_u, frame_v, n):
    v1 = sparse_vector_from_frame(w.x, frame_u, n)
    v2 = sparse_vector_from_frame(w.y, frame_v, n)
    return v1, v2


def _every_setup(basis, kind, s1, s2):
    """Operator, the two Fourier frames and the supports for one item."""
    if kind == "single":
        f = fourier_frame(frame_from_basis(basis, s1))
        if basis.field == "complex":
            op = build_complex_pair_operator(OverlappingFramePair(f, f, f.m))
        else:
            op = build_real_single_operator(f)
        return op, f, f
    pair = overlapping_pair_from_basis(basis, s1, s2)
    fu, fv = fourier_frame(pair.first), fourier_frame(pair.second)
    pair = OverlappingFramePair(fu, fv, pair.s)
    op = build_complex_pair_operator(pair) if basis.field == "complex" else build_real_pair_operator(pair)
    return op, fu, fv


def _item_key(kind, s1, s2):
    return (1, *s1.indices) if kind == "single" else (2, *s1.indices, *s2.indices)


def _every_chunk(args):
    basis, items, cfg = args
    setups = [_every_setup(basis, *item) for item in items]
    seeds = [_item_seed(cfg.seed, *_item_key(*item)) for item in items]
    embeds = [(basis.matrix[list(fu.rows)], basis.matrix[list(fv.rows)]) for _, fu, fv in setups]
    results = search_many([st[0] for st in setups], seeds, cfg.search, embeds=embeds)
    entries = []
    for (kind, s1, s2), (op, fu, fv), res in zip(items, setups, results):
        entry = {"kind": kind, "supports": [list(s1.indices)] + ([list(s2.indices)] if s2 else []),
                 "verdict": res.verdict, "best_residual": res.best_residual, "witness": None}
        if res.witness is not None:
            v1, v2 = _witness_dict(res.witness, fu, fv, basis.n)
            gap, sep = verify_witness(basis, v1, v2)
            entry["witness"] = {"x": v1, "y": v2, "residual": res.witness.residual,
                                "separation": res.witness.separation, "direct_gap": gap,
                                "direct_separation": sep}
        entries.append(entry)
    return entries


def _run(fn, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    return [fn(t) for t in tasks]


def certify_items(basis, items, cfg=CertifyConfig()):
    """Search items ``(kind, s1, s2)``; ``kind`` is ``"single"`` (``s2=None``) or ``"pair"``.

    Returns one report entry per item, in input order.
    """
    chunks, order = [], []
    for kind in ("single", "pair"):
        idx = [i for i, item in enumerate(items) if item[0] == kind]
        for i in range(0, len(idx), CHUNK):
            part = idx[i:i + CHUNK]
            chunks.append((basis, [items[k] for k in part], cfg))
            order.extend(part)
    flat = [e for group in _run(_every_chunk, chunks, cfg.workers) for e in group]
    out = [None] * len(items)
    for k, e in zip(order, flat):
        out[k] = e
    return out


def _generic_item(args):
    basis, s1, s2, trial, cfg = args
    field = basis.field
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFF, 3, trial])
    coeffs = rng.standard_normal(s1.m)
    if field == "complex":
        coeffs = coeffs + 1j * rng.standard_normal(s1.m)
    v1 = SparseVector(s1, coeffs)
    x = embed(v1, basis)
    problem = RecoveryProblem.from_signal(x, basis, s1.m, field,
                                          "power" if field == "complex" else "b")
    entries = []
    for kind, s in (("single", s1), ("pair", s2)):
        if s is None:
            continue
        model = QuadraticModel(problem, s)
        cands, res = multistart(model, cfg.recovery_starts, _item_seed(cfg.seed, 4, trial, *s.indices))
        entry = {"kind": kind, "supports": [list(s1.indices)] + ([list(s.indices)] if kind == "pair" else []),
                 "verdict": "presumed-pass", "best_residual": None, "witness": None}
        best = np.inf
        for c, r in zip(cands, res):
            y = embed(SparseVector(s, c), basis)
            if equivalent_up_to_phase(x, y, 1e-4):
                continue
            best = min(best, float(r))
            if r < cfg.accept_tol and entry["witness"] is None:
                v2 = SparseVector(s, c)
                gap, sep = verify_witness(basis, v1, v2)
                entry["verdict"] = "fail"
                entry["witness"] = {"x": v1, "y": v2, "residual": gap, "separation": sep,
                                    "direct_gap": gap, "direct_separation": sep}
        entry["best_residual"] = best if np.isfinite(best) else None
        entries.append(entry)
    return entries


def _enumerate_supports(n, m, cfg, rng):
    total = comb(n, m)
    if total <= cfg.support_cap:
        return [Support(idx, n) for idx in combinations(range(n), m)]
    if not cfg.allow_sampling:
        raise GuardError(f"C({n},{m}) = {total} supports exceeds the cap {cfg.support_cap}")
    chosen = set()
    while len(chosen) < cfg.support_cap:
        chosen.add(tuple(sorted(rng.choice(n, m, replace=False).tolist())))
    return [Support(idx, n) for idx in sorted(chosen)]


def _enumerate_pairs(supports, cfg, rng):
    total = comb(len(supports), 2)
    if total <= cfg.pair_cap:
        return list(combinations(supports, 2))
    if not cfg.allow_sampling:
        raise GuardError(f"{total} support pairs exceeds the cap {cfg.pair_cap}")
    chosen = set()
    while len(chosen) < cfg.pair_cap:
        i, j = sorted(rng.choice(len(supports), 2, replace=False).tolist())
        chosen.add((i, j))
    return [(supports[i], supports[j]) for i, j in sorted(chosen)]


@dataclass
class CertificationReport:
    field: str
    n: int
    m: int
    mode: str
    entries: list

    def _verdict(self, kind):
        items = [e for e in self.entries if e["kind"] == kind]
        if not items:
            return None
        return "fail" if any(e["verdict"] == "fail" for e in items) else "presumed-pass"

    @property
    def single_verdict(self):
        return self._verdict("single")

    @property
    def pair_verdict(self):
        return self._verdict("pair")

    @property
    def verdict(self):
        return "fail" if "fail" in (self.single_verdict, self.pair_verdict) else "presumed-pass"

    @property
    def best_residuals(self):
        return [e["best_residual"] for e in self.entries if e["best_residual"] is not None]

    def to_dict(self):
        def enc(v):
            return [[float(z.real), float(z.imag)] for z in v] if np.iscomplexobj(v) else [float(z) for z in v]

        entries = []
        for e in self.entries:
            d = dict(e)
            if e["witness"] is not None:
                w = dict(e["witness"])
                w["x_support"] = list(w["x"].support.indices)
                w["y_support"] = list(w["y"].support.indices)
                w["x"] = enc(w["x"].coeffs)
                w["y"] = enc(w["y"].coeffs)
                d["witness"] = w
            entries.append(d)
        cond1 = "sr1" if self.mode == "every" else "sr1g"
        cond2 = "sr2" if self.mode == "every" else "sr2g"
        return {"field": self.field, "n": self.n, "m": self.m, "mode": self.mode,
                "verdict": self.verdict, cond1: self.single_verdict, cond2: self.pair_verdict,
                "entries": entries}


def certify_basis(basis, m, mode="every", cfg=CertifyConfig()):
    """Certify the sparse uniqueness conditions of ``basis`` for sparsity ``m``.

    ``mode="every"`` searches the single-support operator of every support and
    the pair operator of every pair of distinct supports for violations.
    ``mode="generic"`` draws ``cfg.trials`` random supports, pairs and signals
    and checks by multistart recovery that no inequivalent signal on the same
    or on the paired support shares the measurements.
    """
    if not isinstance(basis, Basis):
        basis = Basis.from_matrix(basis)
    n = basis.n
    if not 1 <= m <= n:
        raise ConfigError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFF, 0xC0DE])
    if mode == "every":
        supports = _enumerate_supports(n, m, cfg, rng)
        pairs = _enumerate_pairs(supports, cfg, rng)
        items = [("single", s, None) for s in supports] + [("pair", a, b) for a, b in pairs]
        entries = certify_items(basis, items, cfg)
    elif mode == "generic":
        tasks = []
        for t in range(cfg.trials):
            s1 = Support.of(rng.choice(n, m, replace=False), n)
            s2 = None
            if comb(n, m) > 1:
                while True:
                    s2 = Support.of(rng.choice(n, m, replace=False), n)
                    if s2 != s1:
                        break
            tasks.append((basis, s1, s2, t, cfg))
        entries = [e for group in _run(_generic_item, tasks, cfg.workers) for e in group]
    else:
        raise ConfigError(f"mode must be 'every' or 'generic', got {mode!r}")
    return CertificationReport(basis.field, n, m, mode, entries)
