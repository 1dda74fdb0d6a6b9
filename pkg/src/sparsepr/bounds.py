"""Sparsity thresholds and incidence-variety dimension counts.

Everything is exact integer arithmetic. Real-case formulas are written for
``h = N // 2``, the number of measurement slots minus one, which equals
``N/2`` for even N and ``(N-1)/2`` for odd N.
"""
from dataclasses import dataclass, asdict
from math import comb

from ._validation import check_field, check_positive_int
from .exceptions import ConfigError

CASES = ("complex-pair", "real-pair", "real-single")


@dataclass(frozen=True)
class GuaranteeVerdict:
    level: str
    sr1: bool
    sr2: bool
    sr1g: bool
    sr2g: bool
    dimension_count_feasible: bool

    def as_dict(self):
        return asdict(self)


def predicted_guarantee(n, m, field="real"):
    n = check_positive_int(n, "n")
    m = check_positive_int(m, "m")
    check_field(field)
    if m > n:
        raise ConfigError(f"need m <= n, got m={m}, n={n}")
    if field == "complex":
        sr1 = sr2 = n > 4 * m - 3
        generic = n > 2 * m - 1
    elif n % 2 == 0:
        sr1, sr2 = n > 4 * m - 6, n > 4 * m - 4
        generic = n > 2 * m - 2
    else:
        sr1, sr2 = n > 4 * m - 5, n > 4 * m - 3
        generic = n > 2 * m - 1
    if sr1 and sr2:
        level = "every-vector"
    elif generic:
        level = "generic-only"
    else:
        level = "no-guarantee"
    return GuaranteeVerdict(level, sr1, sr2, generic, generic, m <= n // 2)


def _check_case(m, n, s, case):
    m = check_positive_int(m, "m")
    n = check_positive_int(n, "n")
    if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s <= m:
        raise ConfigError(f"overlap must satisfy 0 <= s <= m, got s={s}")
    if case not in CASES:
        raise ConfigError(f"case must be one of {CASES} or ('sym-rank-locus', k), got {case!r}")
    return m, n


def sym_rank_locus_dimension(m, k):
    """Dimension of complex symmetric M x M matrices of rank at most k (k <= M - 2)."""
    m = check_positive_int(m, "m")
    if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= m - 2:
        raise ConfigError(f"rank bound must satisfy 0 <= k <= m - 2, got k={k}, m={m}")
    return k + comb(m, 2) - comb(m - k, 2)


def incidence_dimension(m, n, s=0, case="complex-pair"):
    """Dimension of the incidence variety of bad frames for ``case``.

    ``case`` may also be ``("sym-rank-locus", k)``.
    """
    if isinstance(case, tuple) and case and case[0] == "sym-rank-locus":
        return sym_rank_locus_dimension(m, case[1])
    m, n = _check_case(m, n, s, case)
    h = n // 2
    if case == "complex-pair":
        return 4 * m + 4 * m * n - n - 2 * s * n - 4
    if case == "real-pair":
        return 2 * m * n + 2 * m - h - s * n - 3
    return 2 * m + m * n - h - 4


def ambient_dimension(m, n, s=0, case="complex-pair"):
    """Dimension of the projectivized frame parameter space."""
    m, n = _check_case(m, n, s, case)
    if case == "complex-pair":
        return 4 * m * n - 2 * s * n - 1
    if case == "real-pair":
        return 2 * m * n - s * n - 1
    return m * n - 1


def dimension_gap(m, n, s=0, case="complex-pair"):
    """Ambient minus incidence dimension; positive means generic frames are good."""
    return ambient_dimension(m, n, s, case) - incidence_dimension(m, n, s, case)


def generic_fiber_gap(m, n, field="real"):
    """Rank-one locus dimension minus the generic fiber dimension.

    Positive exactly when a generic signal is determined by its measurements.
    """
    m = check_positive_int(m, "m")
    n = check_positive_int(n, "n")
    check_field(field)
    if field == "complex":
        return (2 * m - 2) - (4 * m - n - 3)
    return (m - 1) - (2 * m - n // 2 - 2)


def bounds_table(m_max, n_max, fields=("real", "complex")):
    """One row per (N, M, field) with the predicted verdict and dimension gaps."""
    rows = []
    for n in range(1, n_max + 1):
        for m in range(1, min(m_max, n) + 1):
            for field in fields:
                v = predicted_guarantee(n, m, field)
                if field == "complex":
                    gap1 = gap2 = dimension_gap(m, n, 0, "complex-pair")
                else:
                    gap1 = dimension_gap(m, n, 0, "real-single")
                    gap2 = dimension_gap(m, n, 0, "real-pair")
                rows.append({"n": n, "m": m, "field": field, "level": v.level,
                             "sr1": v.sr1, "sr2": v.sr2, "sr1g": v.sr1g, "sr2g": v.sr2g,
                             "dimension_count_feasible": v.dimension_count_feasible,
                             "gap_sr1": gap1, "gap_sr2": gap2,
                             "gap_generic": generic_fiber_gap(m, n, field)})
    return rows
