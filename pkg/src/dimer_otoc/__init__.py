"""Bose-Hubbard dimer scrambling toolkit.

Exact quantum OTOCs, classical mean-field/separatrix analytics, and
truncated-Wigner phase-space estimators for the dynamical transition between
the double-rate and single-rate exponential growth regimes around the
hyperbolic fixed point.
"""

from .hilbert import (DimerParams, StateVector, TridiagonalHamiltonian,
                      build_hamiltonian, coherent_state, number_operator_apply,
                      squeeze_by_backward_evolution)
from .propagate import OtocSeries, PropagationError, Propagator, evolve, make_propagator, otoc
from .meanfield import (FixedPointReport, PhasePoint, TangentFrame, Trajectory,
                        classical_energy, eom, find_fixed_points, integrate,
                        linearized_evolution, monodromy, stability_exponent)
from .separatrix import (TimeScales, classical_otoc, n_of_t, otoc_long_asymptote,
                         otoc_short_asymptote, regime_schedule, scale_a,
                         separatrix_z, time_scales)
from .phasespace import PhaseGrid, husimi, twa_otoc, wigner_sample
from .analysis import (FitResult, KinkResult, ScanRow, detect_kink, fit_exponent,
                       fit_windows, scan_to_csv, theta_scan)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
