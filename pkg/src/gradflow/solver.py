"""Constrained strongly-convex minimization engine for the inner step problems.

The driver is projected gradient descent with Armijo backtracking (step
halving).  Two optional extensions cover everything the step problems need:

* a scalar metric ``weight`` w, so that gradients may be supplied in the
  weighted (L^2-style) inner product <a, b>_w = w * sum(a_i b_i); the line
  search model and the stationarity residual use that same inner product,
* an additive non-smooth term given through its value and proximal map,
  in which case the iteration is forward-backward splitting and reduces to
  plain projected gradient when the term is absent.

Stationarity is certified by the gradient-mapping norm at the accepted step
length: ||x - T_eta(x)||_w / eta <= tol, where T_eta applies the gradient
step followed by the projection (or the prox).  For an unconstrained smooth
problem this is exactly the w-norm of the gradient.

Acceptance is two-tier.  While the model change w <g, dx> + w |dx|^2 / (2
eta) is resolvable against floating-point noise in the objective, the test
is plain sufficient decrease, which bounds accepted step lengths by the
local curvature.  Once predicted changes drop below the noise floor the
objective can no longer certify progress, so steps are accepted when they
do not increase it beyond noise, and eta stops growing; the iteration then
contracts at fixed step length until the residual certificate is met.

The sub-noise tier needs one extra safeguard.  If eta sits just past the
stability bound of the fixed-step iteration, the iterate enters a slowly
diverging oscillation whose objective increase per step stays below the
noise floor, so the objective test alone would accept it indefinitely.
Divergence is detectable through the step lengths: a stable fixed-step
contraction never grows ||dx|| from one sub-noise acceptance to the next,
so when that happens eta is halved before the next iteration.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import math

import numpy as np

from .errors import NonFiniteObjective

_LS_MAX_HALVINGS = 200
_ETA_CAP = 1e12

#: relative floor below which objective differences count as rounding noise
_NOISE_FLOOR = 1e-13

#: comparison safety inside a resolvable Armijo test (well under the floor)
_ARMIJO_SLACK = 1e-15


@dataclass(frozen=True)
class SolveSpec:
    """One inner minimization problem.

    objective/gradient evaluate the smooth part at a coordinate vector.
    ``project`` is the feasible-set projection (identity if None); it must be
    idempotent.  ``nonsmooth``/``nonsmooth_prox`` describe an additive
    non-smooth term g by its value and by prox(y, t) = argmin_z g(z) +
    ||z - y||^2 / (2 t); at most one of project/nonsmooth_prox may be set.
    ``tol`` is the stationarity tolerance eps_inner, ``mu_hint`` a strong
    convexity lower bound used only to size the initial step.
    """

    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    x0: np.ndarray
    tol: float
    project: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nonsmooth: Optional[Callable[[np.ndarray], float]] = None
    nonsmooth_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    max_iter: int = 100_000
    mu_hint: Optional[float] = None
    weight: float = 1.0


@dataclass(frozen=True)
class SolveResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool


def project_box(x, lo, hi):
    """Euclidean projection onto the box [lo, hi]^n."""
    return np.clip(x, lo, hi)


def _check_projection_idempotent(project, x):
    p1 = project(x)
    p2 = project(p1)
    scale = 1.0 + float(np.linalg.norm(p1))
    if float(np.linalg.norm(p2 - p1)) > 1e-12 * scale:
        raise ValueError("projection callback is not idempotent")
    return p1


def minimize(spec: SolveSpec) -> SolveResult:
    """Run the descent loop until the stationarity residual drops below tol.

    Returns the best (last) iterate with ``converged`` reporting whether the
    residual certificate was reached within the iteration cap.  Raises
    NonFiniteObjective if the objective or gradient is NaN/inf at the initial
    point or at an accepted iterate; non-finite values at trial points are
    treated as line-search rejections (the barrier case).
    """
    if spec.tol <= 0:
        raise ValueError("tol must be positive")
    if spec.max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if spec.project is not None and spec.nonsmooth_prox is not None:
        raise ValueError("at most one of project/nonsmooth_prox may be set")
    if (spec.nonsmooth is None) != (spec.nonsmooth_prox is None):
        raise ValueError("nonsmooth value and prox must be given together")

    w = float(spec.weight)
    if not (w > 0 and math.isfinite(w)):
        raise ValueError("weight must be a positive finite scalar")
    sqrt_w = math.sqrt(w)

    x = np.asarray(spec.x0, dtype=float).copy()
    if spec.project is not None:
        x = _check_projection_idempotent(spec.project, x)

    f = spec.objective
    fx = float(f(x))
    total0 = fx + (float(spec.nonsmooth(x)) if spec.nonsmooth else 0.0)
    if not math.isfinite(total0):
        raise NonFiniteObjective("objective is not finite at the initial point")

    eta = 1.0 / spec.mu_hint if spec.mu_hint else 1.0
    eta = min(max(eta, 1e-300), _ETA_CAP)
    # effective prox step accounts for the metric weight: the w-metric prox
    # with parameter eta equals the Euclidean prox with parameter eta / w
    residual = math.inf
    grow = False
    shrink = False
    prev_sub_dx = None

    for it in range(1, spec.max_iter + 1):
        g = spec.gradient(x)
        if not np.all(np.isfinite(g)):
            raise NonFiniteObjective("gradient is not finite at a feasible point")

        if grow:
            eta = min(eta * 2.0, _ETA_CAP)
        elif shrink:
            eta = max(eta * 0.5, 1e-300)
        noise = _NOISE_FLOOR * (1.0 + abs(fx))
        safety = _ARMIJO_SLACK * (1.0 + abs(fx))
        accepted = False
        resolvable = False
        halved = False
        xt = x
        ft = fx
        dx = np.zeros_like(x)
        for _ in range(_LS_MAX_HALVINGS):
            y = x - eta * g
            if spec.nonsmooth_prox is not None:
                xt = spec.nonsmooth_prox(y, eta / w)
            elif spec.project is not None:
                xt = spec.project(y)
            else:
                xt = y
            dx = xt - x
            ft = float(f(xt))
            pd = (w * float(np.dot(g, dx))
                  + w * float(np.dot(dx, dx)) / (2.0 * eta))
            if abs(pd) > noise:
                # the model change is resolvable in floating point: demand
                # genuine sufficient decrease (this rejects any step beyond
                # the curvature-safe length, so eta cannot run away)
                if math.isfinite(ft) and ft <= fx + pd + safety:
                    accepted = True
                    resolvable = True
                    break
            else:
                # decrease is below rounding noise of the objective; accept
                # a non-increasing step but never grow eta from here
                if math.isfinite(ft) and ft <= fx + pd + noise:
                    accepted = True
                    break
            eta *= 0.5
            halved = True
        dxn = float(np.linalg.norm(dx))
        residual = sqrt_w * dxn / eta
        if residual <= spec.tol:
            return SolveResult(x=x, residual=residual, iterations=it, converged=True)
        if not accepted:
            # step length collapsed: the tiny-step gradient mapping above is
            # the conservative certificate; nothing further can be accepted
            return SolveResult(x=x, residual=residual, iterations=it, converged=False)
        grow = resolvable and not halved
        # growing steps across consecutive sub-noise acceptances mean eta
        # exceeds the stable fixed-step range even though the objective
        # cannot resolve the divergence; shrink it
        shrink = (not resolvable and not halved
                  and prev_sub_dx is not None and dxn > prev_sub_dx)
        prev_sub_dx = None if resolvable else dxn
        x, fx = xt, ft

    return SolveResult(x=x, residual=residual, iterations=spec.max_iter,
                       converged=residual <= spec.tol)
