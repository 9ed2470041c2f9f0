"""Runtime checks and error measurement for discrete gradient-flow runs.

The inequality checks recompute, step by step, estimates that exact
minimizers of the penalized objectives satisfy with residual <= 0:

* energy dissipation: each two-step update pays for its kinetic term,
  E(u^k) + d_k^2/(2 tau) <= E(u^{k-1}) + d_{k-1}^2/(4 tau);
* a telescoped form of the same bound over the whole run;
* monotone energy decay for the one-step scheme;
* a discrete evolution variational inequality tested against a panel of
  witness points, with the semiconvexity constant of the energy.

Inner solves stop at a finite tolerance, so every check allows a slack
proportional to that tolerance and to the energy scale of the run.

The measurement half provides the mean distance between two trajectories
sampled on a common coarse grid (grids must align exactly: step ratios are
validated as integers, never interpolated) and a log-log least-squares
order fit with an R^2 reliability flag.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import SLACK_FACTOR, Trajectory
from .errors import DegenerateInput, GridMismatch


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one inequality check: per-step residuals vs a slack."""
    name: str
    residuals: tuple
    slack: float
    passed: bool

    @property
    def worst(self) -> float:
        return max(self.residuals) if self.residuals else float("-inf")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Classical a-priori quantities of one run, with a finiteness verdict."""
    energies: tuple
    step_distances: tuple
    pre_distance: float
    kinetic_sum: float
    pre_kinetic: float
    max_abs_energy: float
    max_base_distance: float
    passed: bool


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    r_squared: float
    reliable: bool


def trajectory_energies(traj: Trajectory) -> tuple:
    return tuple(float(traj.energy.value(s)) for s in traj.states)


def default_slack(traj: Trajectory, energies: tuple = None) -> float:
    """Slack budget for one step: solver tolerance times the energy scale."""
    if energies is None:
        energies = trajectory_energies(traj)
    scale = max(abs(e) for e in energies)
    return SLACK_FACTOR * (1.0 + scale)


def _step_distances(traj: Trajectory):
    d = traj.space.distance
    s = traj.states
    return [d(s[k - 1], s[k]) for k in range(1, len(s))]


def _two_back(traj: Trajectory, k: int):
    """State two before index k, honoring a stored pre-initial history."""
    if k == 1:
        return traj.pre_initial
    return traj.states[k - 2]


def _bdf2_start(traj: Trajectory) -> int:
    """First index produced by a two-step update.

    Runs started from a plain initial datum take their first step with the
    one-step scheme, so the two-step inequalities apply from index 2; runs
    carrying an explicit pre-initial history apply them from index 1.
    """
    return 1 if traj.pre_initial is not None else 2


def check_energy_dissipation(traj: Trajectory, slack: float = None) -> CheckResult:
    """Per-step dissipation bound for two-step runs.

    residual_k = E(u^k) + d_k^2/(2 tau) - E(u^{k-1}) - d_{k-1}^2/(4 tau),
    where d_k is the k-th step distance; exact minimizers give residual <= 0.
    """
    if traj.scheme != "bdf2":
        raise ValueError("energy dissipation check applies to bdf2 runs; "
                         f"got scheme={traj.scheme!r}")
    energies = trajectory_energies(traj)
    if slack is None:
        slack = default_slack(traj, energies)
    d = traj.space.distance
    tau = traj.tau
    s = traj.states
    res = []
    for k in range(_bdf2_start(traj), len(s)):
        dk = d(s[k - 1], s[k])
        dkm1 = d(_two_back(traj, k), s[k - 1])
        res.append(energies[k] + dk * dk / (2.0 * tau)
                   - energies[k - 1] - dkm1 * dkm1 / (4.0 * tau))
    passed = all(r <= slack for r in res)
    return CheckResult("energy_dissipation", tuple(res), slack, passed)


def check_mm_monotonicity(traj: Trajectory, slack: float = None) -> CheckResult:
    """One-step runs must not increase the energy: E(u^k) <= E(u^{k-1})."""
    if traj.scheme != "mm":
        raise ValueError("monotonicity check applies to mm runs; "
                         f"got scheme={traj.scheme!r}")
    energies = trajectory_energies(traj)
    if slack is None:
        slack = default_slack(traj, energies)
    res = [energies[k] - energies[k - 1] for k in range(1, len(energies))]
    passed = all(r <= slack for r in res)
    return CheckResult("mm_monotonicity", tuple(res), slack, passed)


def check_telescoped(traj: Trajectory, slack: float = None) -> CheckResult:
    """Whole-run energy bound: final energy plus accumulated kinetic cost.

    E(u^N) + c/tau * sum_k d_k^2 <= E(u^0) + pre-history credit + N * slack,
    with c = 1/4 for the two-step scheme (credit d_0^2/(4 tau) when a
    pre-initial state is stored) and c = 1/2 for the one-step scheme.
    """
    energies = trajectory_energies(traj)
    if slack is None:
        slack = default_slack(traj, energies)
    n = len(traj.states) - 1
    tau = traj.tau
    quad = sum(dd * dd for dd in _step_distances(traj))
    if traj.scheme == "bdf2":
        coef = 1.0 / (4.0 * tau)
        pre_term = 0.0
        if traj.pre_initial is not None:
            d0 = traj.space.distance(traj.pre_initial, traj.states[0])
            pre_term = coef * d0 * d0
    elif traj.scheme == "mm":
        coef = 1.0 / (2.0 * tau)
        pre_term = 0.0
    else:
        raise ValueError(f"unknown scheme {traj.scheme!r}")
    residual = energies[n] + coef * quad - energies[0] - pre_term
    total = n * slack
    return CheckResult("telescoped_energy_bound", (residual,), total,
                       residual <= total)


def check_evi(traj: Trajectory, witnesses, lam: float = None,
              slack: float = None) -> CheckResult:
    """Discrete evolution variational inequality against witness points.

    For each two-step update and each witness w,

        (3/(4 tau) + lam/2) d^2(u^k, w) - d^2(u^{k-1}, w)/tau
            + d^2(u^{k-2}, w)/(4 tau)
        <= E(w) - E(u^k) - d^2(u^{k-1}, u^k)/tau + d^2(u^{k-2}, u^k)/(4 tau)

    where lam is a semiconvexity constant of the energy along geodesics
    (passing a smaller lam only weakens the test).  Residuals are reported
    per step as the worst violation over the witness panel.
    """
    if traj.scheme != "bdf2":
        raise ValueError("variational inequality check applies to bdf2 runs; "
                         f"got scheme={traj.scheme!r}")
    if lam is None:
        lam = traj.energy.lam
    energies = trajectory_energies(traj)
    if slack is None:
        slack = default_slack(traj, energies)
    d = traj.space.distance
    tau = traj.tau
    s = traj.states
    n = len(s) - 1
    witnesses = list(witnesses)
    if not witnesses:
        raise DegenerateInput("need at least one witness point")
    ew = [float(traj.energy.value(w)) for w in witnesses]
    dw = [[d(s[i], w) for w in witnesses] for i in range(n + 1)]
    dw_pre = None
    if traj.pre_initial is not None:
        dw_pre = [d(traj.pre_initial, w) for w in witnesses]
    res = []
    for k in range(_bdf2_start(traj), n + 1):
        ukm2 = _two_back(traj, k)
        row_km2 = dw_pre if k == 1 else dw[k - 2]
        dk = d(s[k - 1], s[k])
        dk2 = d(ukm2, s[k])
        fixed = -energies[k] - dk * dk / tau + dk2 * dk2 / (4.0 * tau)
        worst = -math.inf
        for j in range(len(witnesses)):
            lhs = ((0.75 / tau + 0.5 * lam) * dw[k][j] ** 2
                   - dw[k - 1][j] ** 2 / tau + row_km2[j] ** 2 / (4.0 * tau))
            worst = max(worst, lhs - (ew[j] + fixed))
        res.append(worst)
    passed = all(r <= slack for r in res)
    return CheckResult("evi", tuple(res), slack, passed)


def classical_bounds(traj: Trajectory, base_point=None) -> DiagnosticsRecord:
    """Collect energies, step distances, and kinetic sums; verify finiteness."""
    energies = trajectory_energies(traj)
    dists = _step_distances(traj)
    tau = traj.tau
    kinetic = sum(dd * dd for dd in dists) / (2.0 * tau)
    pre_d = 0.0
    pre_kinetic = 0.0
    if traj.pre_initial is not None:
        pre_d = traj.space.distance(traj.pre_initial, traj.states[0])
        pre_kinetic = pre_d * pre_d / (2.0 * tau)
    base = traj.space.base_point if base_point is None else base_point
    base_d = max(traj.space.distance(base, s) for s in traj.states)
    values = list(energies) + dists + [kinetic, pre_kinetic, base_d]
    passed = all(math.isfinite(v) for v in values)
    return DiagnosticsRecord(energies=energies, step_distances=tuple(dists),
                             pre_distance=pre_d, kinetic_sum=kinetic,
                             pre_kinetic=pre_kinetic,
                             max_abs_energy=max(abs(e) for e in energies),
                             max_base_distance=base_d, passed=passed)


def _coarse_ratio(tau_coarse: float, tau: float) -> int:
    ratio = tau_coarse / tau
    m = int(round(ratio))
    if m < 1 or abs(ratio - m) > 1e-6 * m:
        raise GridMismatch(
            f"coarse step {tau_coarse!r} is not an integer multiple "
            f"of step {tau!r}")
    return m


def mean_error(traj: Trajectory, ref: Trajectory, tau_coarse: float,
               horizon: float) -> float:
    """Mean distance between two runs on the coarse grid t_k = k tau_coarse.

    Both step sizes must divide tau_coarse exactly (up to 1e-6 relative),
    and both runs must cover the horizon; states are compared at matching
    integer indices, never interpolated in time.
    """
    if tau_coarse <= 0 or horizon <= 0:
        raise DegenerateInput("tau_coarse and horizon must be positive")
    r1 = _coarse_ratio(tau_coarse, traj.tau)
    r2 = _coarse_ratio(tau_coarse, ref.tau)
    m = int(math.floor(horizon / tau_coarse + 1e-9))
    if m < 1:
        raise DegenerateInput("horizon shorter than one coarse step")
    d = traj.space.distance
    total = 0.0
    for k in range(1, m + 1):
        i1, i2 = k * r1, k * r2
        if i1 >= len(traj.states) or i2 >= len(ref.states):
            raise GridMismatch(
                f"run too short for coarse index {k}: needs states "
                f"{i1} and {i2}")
        total += d(traj.states[i1], ref.states[i2])
    return total / m


def fit_order(taus, errors) -> OrderFit:
    """Least-squares slope of log(error) against log(tau), with R^2.

    Fits below R^2 = 0.99 are flagged unreliable.  Non-positive errors or
    step sizes, fewer than two points, or a constant tau list are rejected.
    """
    taus = [float(t) for t in taus]
    errors = [float(e) for e in errors]
    if len(taus) != len(errors):
        raise DegenerateInput("taus and errors must have equal length")
    if len(taus) < 2:
        raise DegenerateInput("need at least two points to fit a slope")
    if any(t <= 0.0 for t in taus):
        raise DegenerateInput("step sizes must be positive")
    if any(e <= 0.0 for e in errors):
        raise DegenerateInput("errors must be positive to fit on a log scale")
    x = np.log(np.asarray(taus))
    y = np.log(np.asarray(errors))
    vx = x - x.mean()
    sxx = float(vx @ vx)
    if sxx == 0.0:
        raise DegenerateInput("all step sizes equal; slope undetermined")
    slope = float(vx @ (y - y.mean())) / sxx
    intercept = float(y.mean()) - slope * float(x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float((y - y.mean()) @ (y - y.mean()))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return OrderFit(slope=slope, intercept=intercept, r_squared=r2,
                    reliable=r2 >= 0.99)
