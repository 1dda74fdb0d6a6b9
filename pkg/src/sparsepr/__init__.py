"""Sparse signals from power spectra: measurement, uniqueness certification, recovery."""
from .bounds import dimension_gap, incidence_dimension, predicted_guarantee
from .certify import certify_basis, kernel_low_rank_probe, search_rank_constrained_kernel
from .estimators import SparseSpectrumRecovery, SpectrumTransformer
from .exceptions import ConfigError, GuardError, SamplingError
from .harness import ScanConfig, emit_report, run_scan
from .model import Basis, SparseVector, Support, embed, sample_generic_basis
from .recover import (RecoveryConfig, RecoveryProblem, canonicalize, equivalent_up_to_phase,
                      solve_fixed_support, solve_support_search)
from .signal import (dft, dihedral_act, periodic_autocorrelation, power_spectrum, real_dft,
                     reduced_b, second_moment)

__version__ = "0.1.0"

__all__ = [
    "Basis", "ConfigError", "GuardError", "RecoveryConfig", "RecoveryProblem", "SamplingError",
    "ScanConfig", "SparseSpectrumRecovery", "SparseVector", "SpectrumTransformer", "Support",
    "canonicalize", "certify_basis", "dft", "dihedral_act", "dimension_gap", "embed",
    "emit_report", "equivalent_up_to_phase", "incidence_dimension", "kernel_low_rank_probe",
    "periodic_autocorrelation", "power_spectrum", "predicted_guarantee", "real_dft", "reduced_b",
    "run_scan", "sample_generic_basis", "search_rank_constrained_kernel", "second_moment",
    "solve_fixed_support", "solve_support_search",
]
