"""Noise model of an optomechanical force sensor with an intracavity
degenerate parametric amplifier.

The package computes the classical steady state, the linearized
frequency-domain response, the symmetrized added-force noise PSD with its
thermal/backaction/shot decomposition, the standard-quantum-limit
comparison, Routh-Hurwitz/eigenvalue stability, and parameter sweeps
behind the bundled figure datasets.  See the README for the CLI.
"""

from ._version import __version__
from .constants import HBAR, K_B
from .errors import (NoConvergence, NoStablePoint, ParametricThreshold,
                     SingularResponse, SqueezedComError, ZeroSignalGain)
from .params import (DerivedParams, SystemParams, ValidationReport, derived,
                     load_config, mean_phonon_number, reference_params,
                     validate)
from .response import (DriftMatrices, ResponseCoefficients, build_matrices,
                       output_quadratures, response_coefficients,
                       solve_fluctuations)
from .spectrum import (CouplingOptimum, ForceTransfer, SpectrumPoint,
                       backaction_suppression_phase,
                       broadband_spectrum_standard, force_transfer, g_opt_theta_zero,
                       g_sql, noise_spectrum, optimize_coupling,
                       rotated_output_quadrature, sql)
from .stability import StabilityReport, characteristic_coefficients, is_stable
from .steadystate import (SteadyState, intracavity_phase, output_phase_psi,
                          params_with_coupling, solve_effective_detuning,
                          solve_steady_state)
from .sweep import (Axis, SweepResult, SweepSpec, figure_dataset, run_sweep,
                    write_csv, write_json)

__all__ = [
    "__version__", "HBAR", "K_B",
    "SqueezedComError", "ParametricThreshold", "SingularResponse",
    "ZeroSignalGain", "NoConvergence", "NoStablePoint",
    "SystemParams", "DerivedParams", "ValidationReport", "derived",
    "validate", "mean_phonon_number", "load_config", "reference_params",
    "SteadyState", "solve_steady_state", "intracavity_phase",
    "output_phase_psi", "solve_effective_detuning", "params_with_coupling",
    "DriftMatrices", "ResponseCoefficients", "build_matrices",
    "response_coefficients", "solve_fluctuations", "output_quadratures",
    "ForceTransfer", "SpectrumPoint", "CouplingOptimum", "force_transfer",
    "noise_spectrum", "sql", "g_sql", "broadband_spectrum_standard",
    "g_opt_theta_zero", "optimize_coupling", "backaction_suppression_phase",
    "rotated_output_quadrature",
    "StabilityReport", "characteristic_coefficients", "is_stable",
    "Axis", "SweepSpec", "SweepResult", "run_sweep", "figure_dataset",
    "write_csv", "write_json",
]
