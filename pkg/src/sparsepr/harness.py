"""Monte Carlo scans over (N, M): recovery success and certification verdicts.

Every trial draws a fresh generic basis, support and signal from its own seed,
``SeedSequence([seed, n, m, trial])``, so results do not depend on execution
order or on the number of worker processes.
"""
import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from math import comb
from typing import Optional

import numpy as np

from ._gauge import equivalent_up_to_phase
from ._validation import check_field, check_positive_int
from .bounds import predicted_guarantee
from .certify import CertifyConfig, SearchConfig, certify_basis
from .exceptions import ConfigError, GuardError
from .model import SparseVector, Support, embed, sample_generic_basis
from .recover import RecoveryConfig, RecoveryProblem, solve_fixed_support, solve_support_search

MODES = ("recover", "certify-generic", "certify-every")
STRATEGIES = ("oracle", "enumerate")
COLUMNS = ("n", "m", "field", "mode", "successes", "trials", "rate", "mean_residual", "ms")
MAX_N = 64


@dataclass(frozen=True)
class ScanConfig:
    """Grid and per-trial settings of a scan.

    ``m_values=None`` scans ``1 .. N//2 + 2`` (capped at N) for each N.
    In recover mode the ``oracle`` strategy solves on the true support and on
    ``alt_supports`` random other supports; ``enumerate`` tries every support.
    """

    n_values: tuple
    m_values: Optional[tuple] = None
    field: str = "real"
    trials: int = 100
    seed: int = 0
    mode: str = "recover"
    starts: int = 50
    accept_tol: float = 1e-8
    separation_tol: float = 1e-4
    alt_supports: int = 2
    support_strategy: str = "oracle"
    enumeration_cap: int = 5000
    search_starts: int = 200
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        if not self.n_values:
            raise ConfigError("n_values must be nonempty")
        if self.m_values is not None and not self.m_values:
            raise ConfigError("m_values must be nonempty")
        check_field(self.field)
        check_positive_int(self.trials, "trials")
        check_positive_int(self.starts, "starts")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.support_strategy not in STRATEGIES:
            raise ConfigError(f"support_strategy must be one of {STRATEGIES}, got {self.support_strategy!r}")
        if self.alt_supports < 0:
            raise ConfigError("alt_supports must be >= 0")
        for n in self.n_values:
            check_positive_int(n, "n")

    def cells(self):
        out = []
        for n in sorted(set(self.n_values)):
            ms = self.m_values if self.m_values is not None else range(1, n // 2 + 3)
            out.extend((n, m) for m in sorted(set(ms)) if 1 <= m <= n)
        return out


@dataclass(frozen=True)
class ScanCell:
    n: int
    m: int
    field: str
    mode: str
    successes: int
    trials: int
    mean_residual: float
    ms: float = 0.0

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ConfigError(f"successes {self.successes} outside [0, {self.trials}]")

    @property
    def rate(self):
        return self.successes / self.trials if self.trials else 0.0

    def row(self):
        d = asdict(self)
        d["rate"] = self.rate
        return {k: d[k] for k in COLUMNS}


def trial_rng(seed, n, m, trial):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, n, m, trial]))


def _draw(cfg, n, m, trial):
    rng = trial_rng(cfg.seed, n, m, trial)
    basis_seed, solver_seed = (int(v) for v in rng.integers(0, 2 ** 32, size=2))
    basis = sample_generic_basis(n, cfg.field, basis_seed)
    support = Support.of(rng.choice(n, m, replace=False), n)
    coeffs = rng.standard_normal(m)
    if cfg.field == "complex":
        coeffs = coeffs + 1j * rng.standard_normal(m)
    return rng, basis, support, SparseVector(support, coeffs), solver_seed


def _alternatives(rng, n, m, truth, count):
    total = comb(n, m) - 1
    chosen = []
    while len(chosen) < min(count, total):
        s = Support.of(rng.choice(n, m, replace=False), n)
        if s != truth and s not in chosen:
            chosen.append(s)
    return chosen


def _recover_trial(cfg, n, m, trial):
    """(success, normalized residual) of one recovery experiment."""
    rng, basis, support, v, solver_seed = _draw(cfg, n, m, trial)
    x = embed(v, basis)
    kind = "power" if cfg.field == "complex" else "b"
    problem = RecoveryProblem.from_signal(x, basis, m, cfg.field, kind)
    rcfg = RecoveryConfig(starts=cfg.starts, accept_tol=cfg.accept_tol,
                          separation_tol=cfg.separation_tol, seed=solver_seed)
    if cfg.support_strategy == "enumerate":
        total = comb(n, m)
        if total > cfg.enumeration_cap:
            raise GuardError(f"C({n},{m}) = {total} supports exceeds the enumeration cap {cfg.enumeration_cap}")
        best = solve_support_search(problem, RecoveryConfig(**{**asdict(rcfg), "enumeration_cap": cfg.enumeration_cap}))
        ok = best.converged and best.ambiguity is None and equivalent_up_to_phase(x, best.signal, 1e-6)
        return bool(ok), best.normalized_residual
    best = solve_fixed_support(problem, support, rcfg)
    ok = best.converged and best.ambiguity is None and equivalent_up_to_phase(x, best.signal, 1e-6)
    if ok:
        probe = RecoveryConfig(**{**asdict(rcfg), "restarts": 0})
        for alt in _alternatives(rng, n, m, support, cfg.alt_supports):
            other = solve_fixed_support(problem, alt, probe)
            if other.converged and not equivalent_up_to_phase(x, other.signal, cfg.separation_tol):
                ok = False
                break
    return bool(ok), best.normalized_residual


def _certify_trial(cfg, n, m, trial):
    """Success means the verdict agrees with the predicted guarantee."""
    _, basis, _, _, solver_seed = _draw(cfg, n, m, trial)
    pred = predicted_guarantee(n, m, cfg.field)
    if cfg.mode == "certify-generic":
        ccfg = CertifyConfig(trials=1, recovery_starts=cfg.starts, accept_tol=cfg.accept_tol, seed=solver_seed)
        report = certify_basis(basis, m, "generic", ccfg)
        expected = pred.sr1g and pred.sr2g
    else:
        ccfg = CertifyConfig(search=SearchConfig(starts=cfg.search_starts, seed=solver_seed), seed=solver_seed)
        report = certify_basis(basis, m, "every", ccfg)
        expected = pred.sr1 and pred.sr2
    residuals = report.best_residuals
    residual = float(min(residuals)) if residuals else 0.0
    return (report.verdict == "presumed-pass") == expected, residual


def _run_cell(args):
    cfg, n, m = args
    start = time.perf_counter()
    trial_fn = _recover_trial if cfg.mode == "recover" else _certify_trial
    outcomes = [trial_fn(cfg, n, m, t) for t in range(cfg.trials)]
    elapsed = (time.perf_counter() - start) * 1e3 if cfg.timing else 0.0
    successes = sum(ok for ok, _ in outcomes)
    mean_residual = float(np.mean([r for _, r in outcomes]))
    return ScanCell(n, m, cfg.field, cfg.mode, successes, cfg.trials, mean_residual, elapsed)


def run_scan(cfg):
    """Run every (N, M) cell of ``cfg``; cells come back sorted by (n, m).

    Raises :class:`GuardError` for N above the desk-scale limit of 64.
    """
    if max(cfg.n_values) > MAX_N:
        raise GuardError(f"N = {max(cfg.n_values)} exceeds the desk-scale limit {MAX_N}")
    tasks = [(cfg, n, m) for n, m in cfg.cells()]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]
    return sorted(cells, key=lambda c: (c.n, c.m))


def format_report(cells, fmt="csv"):
    """Serialize cells; CSV columns are ``n,m,field,mode,successes,trials,rate,mean_residual,ms``."""
    rows = [c.row() for c in cells]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt != "csv":
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def emit_report(cells, path, fmt="csv"):
    text = format_report(cells, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def parse_report(text, fmt="csv"):
    if fmt == "json":
        rows = json.loads(text)
    elif fmt == "csv":
        rows = list(csv.DictReader(io.StringIO(text)))
    else:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return [ScanCell(int(r["n"]), int(r["m"]), r["field"], r["mode"], int(r["successes"]),
                     int(r["trials"]), float(r["mean_residual"]), float(r["ms"])) for r in rows]


def read_report(path, fmt=None):
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    with open(path, encoding="utf-8") as fh:
        return parse_report(fh.read(), fmt)
