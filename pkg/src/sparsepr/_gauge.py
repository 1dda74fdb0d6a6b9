"""Global sign / phase gauge: canonical form, orbit distance, equivalence."""
import numpy as np

CANONICAL_TOL = 1e-10


def canonicalize(x, field=None, tol=CANONICAL_TOL):
    """Fix the global sign (real) or phase (complex) of ``x``.

    The first coordinate with modulus above ``tol`` becomes real positive.
    Zero vectors are returned unchanged.
    """
    x = np.asarray(x)
    if field is None:
        field = "complex" if np.iscomplexobj(x) else "real"
    mags = np.abs(x)
    nz = np.flatnonzero(mags > tol)
    if nz.size == 0:
        return x.copy()
    lead = x[nz[0]]
    if field == "real":
        return x * np.sign(lead.real)
    return x * (np.conj(lead) / abs(lead))


def best_phase(x, y):
    """The unit scalar ``t`` minimizing ``||x - t y||``."""
    x, y = np.asarray(x), np.asarray(y)
    c = np.vdot(y, x)
    if np.iscomplexobj(x) or np.iscomplexobj(y):
        return c / abs(c) if abs(c) > 0 else 1.0 + 0j
    return 1.0 if c >= 0 else -1.0


def orbit_distance(x, y):
    """``min_t ||x - t y||`` over admissible unit scalars t."""
    x, y = np.asarray(x), np.asarray(y)
    if np.iscomplexobj(x) or np.iscomplexobj(y):
        return float(np.linalg.norm(x - best_phase(x, y) * y))
    return float(min(np.linalg.norm(x - y), np.linalg.norm(x + y)))


def separation(x, y):
    """Orbit distance relative to ``||x||`` (infinite when ``x`` vanishes)."""
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0 if np.linalg.norm(y) == 0 else np.inf
    return float(orbit_distance(x, y) / nx)


def equivalent_up_to_phase(x, y, tol=1e-6):
    """True iff ``y`` is a unit-scalar multiple of ``x`` up to ``tol``.

    The comparison is relative to ``max(||x||, 1)``.
    """
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        return False
    return orbit_distance(x, y) <= tol * max(float(np.linalg.norm(x)), 1.0)
