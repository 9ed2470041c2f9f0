"""Variational time discretization of gradient flows in metric spaces.

Two implicit schemes driven by penalized minimization problems: the
classical one-step minimizing movement and a two-step scheme of the same
variational form with second-order accuracy on smooth flows.  Ships four
model spaces (a sphere, an obstacle-constrained reaction-diffusion grid,
one-dimensional probability measures via inverse CDFs, and the real line
with a ramp energy whose closed-form two-step solution caps at first
order), plus runtime inequality checks and a convergence-order harness.
"""

from .core import (EnergyModel, MetricSpaceModel, Trajectory, bdf2_step,
                   interpolate, mm_step, run_trajectory, startup_pair)
from .diagnostics import (CheckResult, OrderFit, check_energy_dissipation,
                          check_evi, check_mm_monotonicity, check_telescoped,
                          classical_bounds, fit_order, mean_error)
from .harness import (SPACE_IDS, ConvergenceResult, SpaceSetup,
                      default_witnesses, make_setup, run_convergence,
                      run_inequality_suite)
from .solver import SolveResult, SolveSpec, minimize, project_box

__version__ = "0.1.0"

__all__ = [
    "EnergyModel", "MetricSpaceModel", "Trajectory", "bdf2_step",
    "interpolate", "mm_step", "run_trajectory", "startup_pair",
    "CheckResult", "OrderFit", "check_energy_dissipation", "check_evi",
    "check_mm_monotonicity", "check_telescoped", "classical_bounds",
    "fit_order", "mean_error",
    "SPACE_IDS", "ConvergenceResult", "SpaceSetup", "default_witnesses",
    "make_setup", "run_convergence", "run_inequality_suite",
    "SolveResult", "SolveSpec", "minimize", "project_box",
    "__version__",
]
