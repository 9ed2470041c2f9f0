"""Scheme-level machinery: spaces, energies, the two implicit steps, trajectories.

A metric space enters through a `MetricSpaceModel` which, besides the distance,
provides a solver chart around any point: coordinates, decode/encode maps, the
feasible-set projection in coordinates, and the pullback of metric gradients
into the chart.  Flat spaces use the identity chart; the sphere uses the
tangent chart at the previous state.

The two schemes minimize the penalized functionals

    mm:    Phi(tau, v; w)   = d^2(v, w) / (2 tau)                      + E(w)
    bdf2:  Psi(tau, u, v; w) = d^2(v, w) / tau - d^2(u, w) / (4 tau)   + E(w)

over w, where v is the previous state and u the one before it.  Gradients are
assembled from the space's metric gradient of d^2(a, .) plus the energy's
metric gradient, pulled back to chart coordinates, and handed to the solver.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Tuple

import math

import numpy as np

from .errors import InnerSolveFailed, OutOfRange, StepTooLarge
from .solver import SolveSpec, SolveResult, minimize

#: base factor of the inner stationarity tolerance eps_inner = base * (1 + |E(x0)|)
INNER_TOL_BASE = 1e-10

#: slack factor for inequality diagnostics: slack = 10 * base * (1 + max |E|)
SLACK_FACTOR = 10.0 * INNER_TOL_BASE


@dataclass(frozen=True)
class Chart:
    """Solver coordinates around a center point.

    decode maps coordinates to a space point, encode the reverse; pullback
    maps a metric gradient at decode(x) into chart coordinates.  project is
    the feasible-set projection in coordinates (None if unconstrained);
    at_boundary, when given, reports whether a solution sits on the chart's
    own validity boundary (used by the sphere's capped tangent chart).
    """

    x0: np.ndarray
    decode: Callable[[np.ndarray], Any]
    encode: Callable[[Any], np.ndarray]
    pullback: Callable[[np.ndarray, np.ndarray], np.ndarray]
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None
    at_boundary: Optional[Callable[[np.ndarray], bool]] = None


@dataclass(frozen=True)
class MetricSpaceModel:
    """A metric space with the hooks the schemes need.

    weight is the scalar metric weight of chart coordinates (h for the grid,
    1/K for inverse CDFs, 1 otherwise); distance(a, b) the metric; dsq_grad(a,
    w) the metric gradient of w -> d^2(a, w); chart_at(v) the solver chart
    centered at v; random_point draws an admissible point for witnesses.
    """

    name: str
    dim: int
    weight: float
    distance: Callable[[Any, Any], float]
    dsq_grad: Callable[[Any, Any], np.ndarray]
    chart_at: Callable[[Any], Chart]
    base_point: Any
    random_point: Callable[[np.random.Generator], Any]


@dataclass(frozen=True)
class EnergyModel:
    """An energy functional over a space.

    value returns the extended-real energy (math.inf outside the domain);
    grad the metric gradient for solver use (None for non-smooth energies);
    admissible the domain predicate; lam a semiconvexity modulus (lam <= 0);
    tau_star the step-size horizon with (-lam) * tau_star <= 1/2.  A fully
    non-smooth energy may instead supply prox(point, t) = argmin_z E(z) +
    d^2(z, point)/(2 t); grad must then be None.
    """

    value: Callable[[Any], float]
    grad: Optional[Callable[[Any], np.ndarray]]
    admissible: Callable[[Any], bool]
    lam: float
    tau_star: float
    prox: Optional[Callable[[Any, float], Any]] = None


@dataclass(frozen=True)
class PenalizedProblem:
    """One inner problem: kind is "mm" (u is None) or "bdf2"."""

    kind: str
    tau: float
    v: Any
    u: Any
    energy: EnergyModel


@dataclass(frozen=True)
class Trajectory:
    """A discrete solution: states[k] approximates the flow at time k * tau.

    pre_initial holds u^-1 when the run was started from an explicit
    two-point history; generic BDF2 runs start from (u^0, u^1) with u^1 an
    implicit Euler step and leave it None.
    """

    scheme: str
    tau: float
    states: Tuple[Any, ...]
    horizon: float
    space: MetricSpaceModel
    energy: EnergyModel
    pre_initial: Any = None

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    def times(self) -> np.ndarray:
        return self.tau * np.arange(len(self.states))


def _check_tau(energy: EnergyModel, tau: float) -> None:
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError("tau must be a positive finite number")
    if tau >= energy.tau_star:
        raise StepTooLarge(
            f"tau = {tau!r} is not below the energy's horizon tau_star = {energy.tau_star!r}")


def penalized_value(space: MetricSpaceModel, problem: PenalizedProblem, w: Any) -> float:
    """Evaluate Phi (mm) or Psi (bdf2) at the point w."""
    tau = problem.tau
    dv = space.distance(problem.v, w)
    val = problem.energy.value(w)
    if problem.u is None:
        return dv * dv / (2.0 * tau) + val
    du = space.distance(problem.u, w)
    return dv * dv / tau - du * du / (4.0 * tau) + val


def _build_spec(space, problem, start):
    energy = problem.energy
    tau = problem.tau
    chart = space.chart_at(problem.v)
    x0 = chart.x0 if start is None else chart.encode(start)
    start_point = problem.v if start is None else start

    composite = energy.prox is not None
    v, u = problem.v, problem.u
    c_v = 0.5 / tau if u is None else 1.0 / tau
    c_u = None if u is None else 0.25 / tau
    dist = space.distance
    dsq_grad = space.dsq_grad
    decode = chart.decode

    def objective(x):
        w = decode(x)
        dv = dist(v, w)
        val = c_v * dv * dv
        if u is not None:
            du = dist(u, w)
            val -= c_u * du * du
        if not composite:
            val += energy.value(w)
        return val

    def gradient(x):
        w = decode(x)
        g = c_v * dsq_grad(v, w)
        if u is not None:
            g = g - c_u * dsq_grad(u, w)
        if not composite:
            g = g + energy.grad(w)
        return chart.pullback(x, g)

    nonsmooth = None
    nonsmooth_prox = None
    if composite:
        def nonsmooth(x):
            return energy.value(decode(x))

        def nonsmooth_prox(y, t):
            return chart.encode(energy.prox(decode(y), t))

    tol = INNER_TOL_BASE * (1.0 + abs(energy.value(start_point)))
    mu = (1.0 / tau if u is None else 1.5 / tau) + energy.lam
    spec = SolveSpec(
        objective=objective,
        gradient=gradient,
        x0=x0,
        tol=tol,
        project=None if composite else chart.project,
        nonsmooth=nonsmooth,
        nonsmooth_prox=nonsmooth_prox,
        mu_hint=mu if mu > 0 else None,
        weight=space.weight,
    )
    return spec, chart


def solve_penalized(space: MetricSpaceModel, problem: PenalizedProblem,
                    start: Any = None) -> Tuple[Any, SolveResult]:
    """Minimize the penalized functional; returns (point, solve result).

    start overrides the initial guess (default: the previous state v).
    """
    _check_tau(problem.energy, problem.tau)
    spec, chart = _build_spec(space, problem, start)
    result = minimize(spec)
    if not result.converged:
        raise InnerSolveFailed(
            f"inner solve for {problem.kind} step did not converge "
            f"(residual {result.residual:.3e} > tol {spec.tol:.3e})",
            residual=result.residual, iterations=result.iterations)
    if chart.at_boundary is not None and chart.at_boundary(result.x):
        from .errors import AntipodalPoint
        raise AntipodalPoint("inner solve reached the chart boundary")
    return chart.decode(result.x), result


def mm_step(space: MetricSpaceModel, energy: EnergyModel, tau: float, v: Any) -> Any:
    """One minimizing-movement (implicit Euler) step from v."""
    point, _ = solve_penalized(space, PenalizedProblem("mm", tau, v, None, energy))
    return point


def bdf2_step(space: MetricSpaceModel, energy: EnergyModel, tau: float,
              u: Any, v: Any) -> Any:
    """One variational BDF2 step; u is the state two steps back, v the previous."""
    point, _ = solve_penalized(space, PenalizedProblem("bdf2", tau, v, u, energy))
    return point


def startup_pair(space: MetricSpaceModel, energy: EnergyModel, tau: float,
                 u0: Any) -> Tuple[Any, Any]:
    """Initial two-point history (u^0, u^1) = (u0, mm_step(tau, u0))."""
    return u0, mm_step(space, energy, tau, u0)


def _step_count(tau: float, horizon: float) -> int:
    if horizon < tau:
        raise ValueError("horizon T must be at least one step tau")
    return int(math.floor(horizon / tau + 1e-9))


def run_trajectory(space: MetricSpaceModel, energy: EnergyModel, scheme: str,
                   tau: float, u0: Any, horizon: float) -> Trajectory:
    """Run N = floor(T/tau) steps of the scheme from u0 (partial tail dropped)."""
    _check_tau(energy, tau)
    n = _step_count(tau, horizon)
    if scheme == "mm":
        states = [u0]
        for k in range(1, n + 1):
            try:
                states.append(mm_step(space, energy, tau, states[-1]))
            except InnerSolveFailed as err:
                err.step_index = k
                raise
    elif scheme == "bdf2":
        try:
            states = list(startup_pair(space, energy, tau, u0))
        except InnerSolveFailed as err:
            err.step_index = 1
            raise
        for k in range(2, n + 1):
            try:
                states.append(bdf2_step(space, energy, tau, states[-2], states[-1]))
            except InnerSolveFailed as err:
                err.step_index = k
                raise
        states = states[:n + 1]
    else:
        raise ValueError(f"unknown scheme {scheme!r} (expected 'mm' or 'bdf2')")
    return Trajectory(scheme=scheme, tau=tau, states=tuple(states),
                      horizon=horizon, space=space, energy=energy)


def interpolate(traj: Trajectory, t: float):
    """Piecewise-constant evaluation: u(0) = u^0, u(t) = u^k on ((k-1)tau, k tau]."""
    if t < 0:
        raise OutOfRange(f"t = {t!r} is negative")
    n = traj.n_steps
    ratio = t / traj.tau
    k = int(math.ceil(ratio - 1e-6))
    if k < 0:
        k = 0
    if k > n:
        if ratio <= n * (1.0 + 1e-12) + 1e-12:
            k = n
        else:
            raise OutOfRange(
                f"t = {t!r} exceeds the covered interval [0, {n * traj.tau!r}]")
    return traj.states[k]
