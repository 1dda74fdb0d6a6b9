"""Levenberg-Marquardt vectorized over a batch of independent starts.

Each row of the parameter array is an independent problem sharing the same
residual function; the batch is advanced in lockstep with per-row damping,
and rows drop out of the batch once they converge or stall.
"""
import numpy as np

LAMBDA_MAX = 1e14
STALL_RTOL = 1e-12
STALL_PATIENCE = 6


def levenberg_marquardt(fun, w0, *, max_iter=500, lam0=1e-3, cost_floor=1e-30,
                        project=None, stall_rtol=STALL_RTOL, patience=STALL_PATIENCE,
                        indexed=False):
    """Minimize ``||r(w)||^2`` for every row of ``w0``.

    Parameters
    ----------
    fun : callable
        ``fun(W) -> (R, J)`` with ``W`` of shape ``(S, p)``, residuals ``R`` of
        shape ``(S, D)`` and Jacobians ``J`` of shape ``(S, D, p)``.
    w0 : ndarray, shape (S, p)
    project : callable, optional
        Applied to accepted iterates, for example a renormalization onto a
        gauge sphere. Must leave the cost unchanged.
    stall_rtol, patience : float, int
        A row stops after ``patience`` consecutive steps with relative cost
        decrease below ``stall_rtol``.
    indexed : bool
        If true, ``fun`` is called as ``fun(W, rows)`` with the batch row
        indices of ``W``, for residuals that differ per row.

    Returns
    -------
    w, residuals, costs, iterations
    """
    w = np.array(w0, dtype=float, copy=True)
    n_starts, p = w.shape

    def call(v, rows):
        return fun(v, rows) if indexed else fun(v)

    r, jac = call(w, np.arange(n_starts))
    cost = np.einsum("sd,sd->s", r, r)
    lam = np.full(n_starts, lam0)
    stall = np.zeros(n_starts, dtype=int)
    iters = np.zeros(n_starts, dtype=int)
    active = cost > cost_floor
    eye = np.eye(p)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ja, ra = jac[idx], r[idx]
        jt = ja.transpose(0, 2, 1)
        jtj = jt @ ja
        grad = (jt @ ra[..., None])[..., 0]
        scale = np.trace(jtj, axis1=1, axis2=2) / p + 1e-300
        lhs = jtj + (lam[idx] * scale)[:, None, None] * eye
        try:
            step = -np.linalg.solve(lhs, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = -np.stack([np.linalg.lstsq(a, g, rcond=None)[0] for a, g in zip(lhs, grad)])
        trial = w[idx] + step
        if project is not None:
            trial = project(trial)
        r_new, jac_new = call(trial, idx)
        cost_new = np.einsum("sd,sd->s", r_new, r_new)
        ok = np.isfinite(cost_new) & (cost_new < cost[idx])
        iters[idx] += 1

        acc = idx[ok]
        gain = (cost[acc] - cost_new[ok]) / np.maximum(cost[acc], 1e-300)
        w[acc], r[acc], jac[acc], cost[acc] = trial[ok], r_new[ok], jac_new[ok], cost_new[ok]
        lam[acc] = np.maximum(lam[acc] / 3.0, 1e-12)
        stall[acc] = np.where(gain < stall_rtol, stall[acc] + 1, 0)

        rej = idx[~ok]
        lam[rej] *= 4.0
        stall[rej] += 1 * (lam[rej] > 1e6)

        active &= (cost > cost_floor) & (lam < LAMBDA_MAX) & (stall < patience)
    return w, r, cost, iters
