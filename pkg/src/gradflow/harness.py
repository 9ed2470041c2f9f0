"""Experiment orchestration: space registry, convergence runs, check suites.

A setup bundles one of the built-in model problems with its initial datum
and default experiment parameters (step-size ladder, reference step,
comparison grid, horizon).  The convergence runner integrates both schemes
over the ladder, measures each run against a reference trajectory on the
coarse grid, and fits observed orders; the inequality suite applies every
check that is meaningful for a run's scheme.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import halfline, hilbert_rd, sphere, wasserstein_icdf
from .core import EnergyModel, MetricSpaceModel, Trajectory, run_trajectory
from .diagnostics import (check_energy_dissipation, check_evi,
                          check_mm_monotonicity, check_telescoped, fit_order,
                          mean_error)
from .errors import DegenerateInput

SPACE_IDS = ("sphere", "hilbert-rd", "wasserstein-icdf", "halfline")

SCHEMES = ("mm", "bdf2")


@dataclass(frozen=True)
class SpaceSetup:
    """A model problem plus its default experiment parameters."""
    space_id: str
    space: MetricSpaceModel
    energy: EnergyModel
    u0: object
    defaults: dict
    reference_kind: str = "bdf2"
    true_reference: object = None


@dataclass(frozen=True)
class ConvergenceResult:
    space_id: str
    schemes: tuple
    taus: tuple
    tau_coarse: float
    horizon: float
    reference: Trajectory
    trajectories: dict
    errors: dict
    fits: dict


def make_setup(space_id: str, k: int = None) -> SpaceSetup:
    """Build the named model problem; k sets the grid size where one exists."""
    if space_id == "sphere":
        if k is not None:
            raise ValueError("the sphere problem has no grid size")
        return SpaceSetup(
            space_id=space_id, space=sphere.sphere_space(),
            energy=sphere.sphere_energy_model(), u0=sphere.initial_datum(),
            defaults=dict(tau_ref=1e-5,
                          taus=(1.6e-3, 8e-4, 4e-4, 2e-4, 1e-4),
                          tau_coarse=1.6e-3, horizon=0.5))
    if space_id == "hilbert-rd":
        kk = 100 if k is None else int(k)
        return SpaceSetup(
            space_id=space_id, space=hilbert_rd.rd_space(kk),
            energy=hilbert_rd.rd_energy_model(), u0=hilbert_rd.rd_initial(kk),
            defaults=dict(tau_ref=2e-5,
                          taus=(1.28e-3, 6.4e-4, 3.2e-4, 1.6e-4, 8e-5),
                          tau_coarse=1.28e-3, horizon=0.05))
    if space_id == "wasserstein-icdf":
        kk = 50 if k is None else int(k)
        return SpaceSetup(
            space_id=space_id, space=wasserstein_icdf.icdf_space(kk),
            energy=wasserstein_icdf.icdf_energy_model(kk),
            u0=wasserstein_icdf.icdf_initial(kk),
            defaults=dict(tau_ref=2e-5,
                          taus=(1.28e-3, 6.4e-4, 3.2e-4, 1.6e-4, 8e-5),
                          tau_coarse=1.28e-3, horizon=0.05))
    if space_id == "halfline":
        if k is not None:
            raise ValueError("the half-line problem has no grid size")
        return SpaceSetup(
            space_id=space_id, space=halfline.line_space(),
            energy=halfline.halfline_energy(), u0=1.0,
            defaults=dict(tau_ref=1e-4, taus=(1e-2, 1e-3, 1e-4),
                          tau_coarse=0.04, horizon=2.0),
            reference_kind="true",
            true_reference=halfline.sampled_true_trajectory)
    raise ValueError(f"unknown space id {space_id!r}; "
                     f"choose one of {', '.join(SPACE_IDS)}")


def default_witnesses(space: MetricSpaceModel, n: int = 16, seed: int = 0):
    """Seeded panel of admissible comparison points for the EVI check."""
    rng = np.random.default_rng(seed)
    return [space.random_point(rng) for _ in range(n)]


def run_inequality_suite(traj: Trajectory, witnesses, slack: float = None,
                         lam: float = None):
    """All checks applicable to the run's scheme, as a list of CheckResults."""
    if traj.scheme == "bdf2":
        return [check_energy_dissipation(traj, slack=slack),
                check_telescoped(traj, slack=slack),
                check_evi(traj, witnesses, lam=lam, slack=slack)]
    if traj.scheme == "mm":
        return [check_mm_monotonicity(traj, slack=slack),
                check_telescoped(traj, slack=slack)]
    raise ValueError(f"unknown scheme {traj.scheme!r}")


def _reference_trajectory(setup: SpaceSetup, tau_ref: float, horizon: float,
                          reference: str) -> Trajectory:
    if reference == "true":
        if setup.true_reference is None:
            raise ValueError(
                f"no closed-form solution available for {setup.space_id!r}")
        return setup.true_reference(tau_ref, horizon)
    if reference == "bdf2":
        return run_trajectory(setup.space, setup.energy, "bdf2", tau_ref,
                              setup.u0, horizon)
    raise ValueError(f"unknown reference kind {reference!r}")


def run_convergence(setup: SpaceSetup, schemes=SCHEMES, taus=None,
                    tau_ref: float = None, tau_coarse: float = None,
                    horizon: float = None, jobs: int = 1,
                    reference: str = None) -> ConvergenceResult:
    """Integrate each scheme over the step ladder and fit observed orders.

    The reference is a fine-step bdf2 run (or the sampled closed-form
    solution where one exists); every run is compared against it with the
    mean distance on the tau_coarse grid.  Runs are independent, so jobs > 1
    spreads them over a thread pool without changing any result.
    """
    d = setup.defaults
    taus = tuple(d["taus"] if taus is None else taus)
    tau_ref = d["tau_ref"] if tau_ref is None else tau_ref
    tau_coarse = d["tau_coarse"] if tau_coarse is None else tau_coarse
    horizon = d["horizon"] if horizon is None else horizon
    reference = setup.reference_kind if reference is None else reference
    schemes = tuple(schemes)

    ref = _reference_trajectory(setup, tau_ref, horizon, reference)

    cases = [(scheme, tau) for scheme in schemes for tau in taus]

    def integrate(case):
        scheme, tau = case
        return run_trajectory(setup.space, setup.energy, scheme, tau,
                              setup.u0, horizon)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(integrate, cases))
    else:
        runs = [integrate(c) for c in cases]
    trajectories = dict(zip(cases, runs))

    errors = {scheme: tuple(
        mean_error(trajectories[(scheme, tau)], ref, tau_coarse, horizon)
        for tau in taus) for scheme in schemes}
    fits = {}
    for scheme in schemes:
        try:
            fits[scheme] = fit_order(taus, errors[scheme])
        except DegenerateInput:
            # errors at (or below) the solver floor admit no log-log fit
            fits[scheme] = None
    return ConvergenceResult(space_id=setup.space_id, schemes=schemes,
                             taus=taus, tau_coarse=tau_coarse,
                             horizon=horizon, reference=ref,
                             trajectories=trajectories, errors=errors,
                             fits=fits)
