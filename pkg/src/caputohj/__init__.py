"""Numerical laboratory for Caputo-in-time Hamilton–Jacobi equations.

The package solves ``D_t^alpha u + H(x/eps, u_x) = 0`` on the periodic
line with a memory-aware monotone scheme, extracts the effective
Hamiltonian from discounted stationary problems, and measures how fast
the oscillatory solutions converge to the homogenized one.  Supporting
modules verify the sup-/inf-convolution envelope estimates that drive
the regularity theory.
"""

from .cell import (DiscountCheck, DiscountedSolution, EffectiveEstimate,
                   EffectiveTable, TorusGrid, cell_oracle_1d,
                   discount_uniformity_check, effective_hamiltonian,
                   solve_discounted)
from .envelopes import (ConvolvedFunction, EnvelopeReport, envelope_report,
                        envelope_error_constant, inf_convolve, sup_convolve)
from .fraccalc import (CaputoSplit, FracOrder, HistoryScalar, TimeGrid,
                       caputo_l1, caputo_power_oracle, caputo_split, gamma)
from .hamiltonian import HamiltonianSpec, InitialData, barrier_constant
from .homogenize import (RateReport, SweepConfig, fit_rate, rate_report_json,
                         run_sweep, sup_error, write_errors_csv,
                         write_rate_svg)
from .timestepper import (FieldHistory, SchemeParams, comparison_check, solve,
                          space_modulus_constant, step, strict_cfl_steps,
                          time_holder_seminorm)

__version__ = "0.1.0"

__all__ = [
    "CaputoSplit",
    "ConvolvedFunction",
    "DiscountCheck",
    "DiscountedSolution",
    "EffectiveEstimate",
    "EffectiveTable",
    "EnvelopeReport",
    "FieldHistory",
    "FracOrder",
    "HamiltonianSpec",
    "HistoryScalar",
    "InitialData",
    "RateReport",
    "SchemeParams",
    "SweepConfig",
    "TimeGrid",
    "TorusGrid",
    "barrier_constant",
    "caputo_l1",
    "caputo_power_oracle",
    "caputo_split",
    "cell_oracle_1d",
    "comparison_check",
    "discount_uniformity_check",
    "effective_hamiltonian",
    "envelope_error_constant",
    "envelope_report",
    "fit_rate",
    "gamma",
    "inf_convolve",
    "rate_report_json",
    "run_sweep",
    "solve",
    "solve_discounted",
    "space_modulus_constant",
    "step",
    "strict_cfl_steps",
    "sup_convolve",
    "sup_error",
    "time_holder_seminorm",
    "write_errors_csv",
    "write_rate_svg",
    "__version__",
]
