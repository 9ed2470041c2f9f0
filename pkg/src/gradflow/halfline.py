"""Scalar flow of E(u) = max(u, 0) on the real line, with its exact BDF2 form.

The gradient flow from u(0) = 1 is u_*(t) = 1 - t until it reaches zero at
t = 1 and stays there.  The BDF2 minimizer admits a closed three-way case
split, which makes the scheme's behaviour at the kink fully computable:

    a   = (4 u^{k-1} - u^{k-2}) / 3
    u^k = a - (2/3) tau    if that value is positive,
          a                if a is negative,
          0                otherwise.

Started from the history (u^-1, u^0) = (1 + tau, 1) the recursion reproduces
1 - k tau exactly until the kink index N_tau; when the third case fires at
N_tau the subsequent states obey u^k = -(1/2) (1 - 3^{-(k - N_tau)}) u^{N_tau - 1},
an O(tau) offset from the rest state that caps the scheme at first order.

The module also exposes the line R as a metric space and E as an energy model
with a prox map, so the generic machinery can be run against the closed form.
"""

import math
from fractions import Fraction

import numpy as np

from .core import Chart, EnergyModel, MetricSpaceModel, Trajectory
from .errors import PreconditionViolated


def line_space(base: float = 0.0) -> MetricSpaceModel:
    def distance(a, b):
        return abs(float(a) - float(b))

    def dsq_grad(a, w):
        return np.array([2.0 * (float(w) - float(a))])

    def chart_at(v):
        def decode(x):
            return float(x[0])

        def encode(p):
            return np.array([float(p)])

        def pullback(x, g):
            return g

        return Chart(x0=np.array([float(v)]), decode=decode, encode=encode,
                     pullback=pullback, project=None)

    def random_point(rng):
        return float(rng.uniform(-2.0, 2.0))

    return MetricSpaceModel(name="halfline", dim=1, weight=1.0,
                            distance=distance, dsq_grad=dsq_grad,
                            chart_at=chart_at, base_point=float(base),
                            random_point=random_point)


def _ramp_prox(v: float, t: float) -> float:
    # prox of t * max(., 0): shrink positive inputs by t, zero on [0, t]
    v = float(v)
    if v > t:
        return v - t
    if v < 0.0:
        return v
    return 0.0


def halfline_energy() -> EnergyModel:
    return EnergyModel(value=lambda u: max(float(u), 0.0), grad=None,
                       admissible=lambda u: math.isfinite(float(u)),
                       lam=0.0, tau_star=1.0, prox=_ramp_prox)


def true_solution(t: float) -> float:
    """Exact flow from u(0) = 1: displacement at unit speed, then rest."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 1.0 - t if t < 1.0 else 0.0


def exact_bdf2_step(u: float, v: float, tau: float) -> float:
    """Closed-form BDF2 minimizer for E = max(., 0); u two back, v previous."""
    # fused numerator keeps the pre-kink states 1 - k tau exact to ~1 ulp
    lowered = (4.0 * v - u - 2.0 * tau) / 3.0
    if lowered > 0.0:
        return lowered
    a = (4.0 * v - u) / 3.0
    if a < 0.0:
        return a
    return 0.0


def exact_trajectory(tau: float, horizon: float) -> Trajectory:
    """Run the exact recursion from the history (u^-1, u^0) = (1 + tau, 1)."""
    if horizon < tau:
        raise ValueError("horizon T must be at least one step tau")
    n = int(math.floor(horizon / tau + 1e-9))
    pre = 1.0 + tau
    states = [1.0]
    prev2, prev1 = pre, 1.0
    for _ in range(n):
        nxt = exact_bdf2_step(prev2, prev1, tau)
        states.append(nxt)
        prev2, prev1 = prev1, nxt
    return Trajectory(scheme="bdf2", tau=tau, states=tuple(states),
                      horizon=horizon, space=line_space(),
                      energy=halfline_energy(), pre_initial=pre)


def sampled_true_trajectory(tau: float, horizon: float) -> Trajectory:
    """The exact solution sampled on a step-tau grid (for error measurement)."""
    n = int(math.floor(horizon / tau + 1e-9))
    states = tuple(true_solution(k * tau) for k in range(n + 1))
    return Trajectory(scheme="exact", tau=tau, states=states, horizon=horizon,
                      space=line_space(), energy=halfline_energy())


def kink_info(tau: float):
    """Run the recursion to the kink: (third_case_held, N_tau, u^{N_tau - 1}).

    N_tau is the first index whose step leaves the strictly positive branch;
    third_case_held reports whether that step landed exactly on the rest
    state rather than jumping below it.  The walk uses exact rational
    arithmetic on the binary value of tau, so the case classification is
    unambiguous even when the branch point falls within rounding error of
    zero (as it does for tau = 1/m).
    """
    t = Fraction(tau)
    prev2, prev1 = 1 + t, Fraction(1)
    k = 0
    while True:
        k += 1
        lowered = (4 * prev1 - prev2 - 2 * t) / 3
        if lowered <= 0:
            a = (4 * prev1 - prev2) / 3
            return (a >= 0, k, float(prev1))
        prev2, prev1 = prev1, lowered
        if k > 10_000_000:
            raise RuntimeError("kink not reached; tau too small to iterate")


def post_kink_asymptote(k: int, n_tau: int, u_pre: float, tau: float = None) -> float:
    """Rest-state offset u^k = -(1/2) (1 - 3^{-(k - n_tau)}) u_pre for k >= n_tau.

    u_pre is the last pre-kink state u^{N_tau - 1}.  When tau is given, the
    third-case precondition u_pre in [tau/3, tau] is verified.
    """
    if k < n_tau:
        raise PreconditionViolated(f"k = {k} is before the kink index {n_tau}")
    if tau is not None:
        if not (tau / 3.0 - 1e-12 <= u_pre <= tau + 1e-12):
            raise PreconditionViolated(
                f"u_pre = {u_pre!r} outside [tau/3, tau] for tau = {tau!r}")
    return -0.5 * (1.0 - 3.0 ** (-(k - n_tau))) * u_pre
