"""The unit sphere S^2 with geodesic distance and a cubic polynomial energy.

Points are unit vectors in R^3.  The energy is E(u) = sum_i (u_i - 1/2) *
(u_i + 1/2)^2 restricted to the sphere; its Riemannian gradient is the
tangential projection of the ambient gradient 3 u^2 + u - 1/4.

The inner step problems are solved in the tangent chart at the previous
state v: coordinates are xi in T_v S^2 with w = exp_v(xi), constrained to
||xi|| <= pi - 0.1 so the chart stays injective; metric gradients at w are
pulled back through the adjoint differential of exp_v.

Scalar arithmetic on unpacked components is used internally: these functions
run millions of times in a reference trajectory and numpy overhead on
3-vectors dominates otherwise.
"""

import math

import numpy as np

from .core import Chart, EnergyModel, MetricSpaceModel
from .errors import AntipodalPoint

CHART_CAP = math.pi - 0.1


def sphere_distance(a, b) -> float:
    """Geodesic distance arccos(<a, b>) with the inner product clamped to [-1, 1].

    Evaluated through the chord length (2 asin(|a-b|/2), reflected for obtuse
    angles), which agrees with the arccos form but keeps full precision for
    nearby points.
    """
    a0, a1, a2 = float(a[0]), float(a[1]), float(a[2])
    b0, b1, b2 = float(b[0]), float(b[1]), float(b[2])
    dot = a0 * b0 + a1 * b1 + a2 * b2
    if dot >= 0.0:
        d0, d1, d2 = a0 - b0, a1 - b1, a2 - b2
        half = 0.5 * math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
        return 2.0 * math.asin(min(1.0, half))
    s0, s1, s2 = a0 + b0, a1 + b1, a2 + b2
    half = 0.5 * math.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
    return math.pi - 2.0 * math.asin(min(1.0, half))


def sphere_energy(u) -> float:
    """E(u) = sum_i (u_i - 1/2) (u_i + 1/2)^2."""
    total = 0.0
    for i in range(3):
        ui = float(u[i])
        p = ui + 0.5
        total += (ui - 0.5) * p * p
    return total


def sphere_grad(u) -> np.ndarray:
    """Riemannian gradient: tangential projection of (3 u_i^2 + u_i - 1/4)."""
    u0, u1, u2 = float(u[0]), float(u[1]), float(u[2])
    g0 = 3.0 * u0 * u0 + u0 - 0.25
    g1 = 3.0 * u1 * u1 + u1 - 0.25
    g2 = 3.0 * u2 * u2 + u2 - 0.25
    dot = g0 * u0 + g1 * u1 + g2 * u2
    return np.array([g0 - dot * u0, g1 - dot * u1, g2 - dot * u2])


def sphere_exp(u, xi) -> np.ndarray:
    """Exponential map exp_u(xi) = cos(|xi|) u + sin(|xi|) xi / |xi|."""
    x0, x1, x2 = float(xi[0]), float(xi[1]), float(xi[2])
    r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    u0, u1, u2 = float(u[0]), float(u[1]), float(u[2])
    if r < 1e-12:
        w0, w1, w2 = u0 + x0, u1 + x1, u2 + x2
    else:
        c = math.cos(r)
        s = math.sin(r) / r
        w0 = c * u0 + s * x0
        w1 = c * u1 + s * x1
        w2 = c * u2 + s * x2
    norm = math.sqrt(w0 * w0 + w1 * w1 + w2 * w2)
    return np.array([w0 / norm, w1 / norm, w2 / norm])


def sphere_log(u, w) -> np.ndarray:
    """Inverse of exp_u; raises AntipodalPoint when w is opposite to u."""
    u0, u1, u2 = float(u[0]), float(u[1]), float(u[2])
    w0, w1, w2 = float(w[0]), float(w[1]), float(w[2])
    dot = u0 * w0 + u1 * w1 + u2 * w2
    if dot <= -1.0 + 1e-12:
        raise AntipodalPoint("log map is undefined at the antipode")
    theta = sphere_distance(u, w)
    p0 = w0 - dot * u0
    p1 = w1 - dot * u1
    p2 = w2 - dot * u2
    pn = math.sqrt(p0 * p0 + p1 * p1 + p2 * p2)
    if pn < 1e-300:
        return np.zeros(3)
    f = theta / pn
    return np.array([f * p0, f * p1, f * p2])


def _dsq_grad(a, w) -> np.ndarray:
    # metric gradient of w -> d^2(a, w) is -2 log_w(a)
    g = sphere_log(w, a)
    return np.array([-2.0 * g[0], -2.0 * g[1], -2.0 * g[2]])


def _chart_at(v):
    v0, v1, v2 = float(v[0]), float(v[1]), float(v[2])
    vc = np.array([v0, v1, v2])

    def decode(x):
        return sphere_exp(vc, x)

    def encode(p):
        return sphere_log(vc, p)

    def project(x):
        x0, x1, x2 = float(x[0]), float(x[1]), float(x[2])
        dot = x0 * v0 + x1 * v1 + x2 * v2
        t0, t1, t2 = x0 - dot * v0, x1 - dot * v1, x2 - dot * v2
        r = math.sqrt(t0 * t0 + t1 * t1 + t2 * t2)
        if r > CHART_CAP:
            f = CHART_CAP / r
            t0, t1, t2 = f * t0, f * t1, f * t2
        return np.array([t0, t1, t2])

    def pullback(x, g):
        # adjoint of d exp_v at xi: radial component carries over along the
        # transported direction, orthogonal components scale by sin(r)/r
        x0, x1, x2 = float(x[0]), float(x[1]), float(x[2])
        r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
        g0, g1, g2 = float(g[0]), float(g[1]), float(g[2])
        if r < 1e-12:
            dot = g0 * v0 + g1 * v1 + g2 * v2
            return np.array([g0 - dot * v0, g1 - dot * v1, g2 - dot * v2])
        e0, e1, e2 = x0 / r, x1 / r, x2 / r
        sr, cr = math.sin(r), math.cos(r)
        t0 = -sr * v0 + cr * e0
        t1 = -sr * v1 + cr * e1
        t2 = -sr * v2 + cr * e2
        a = g0 * t0 + g1 * t1 + g2 * t2
        p0, p1, p2 = g0 - a * t0, g1 - a * t1, g2 - a * t2
        dv = p0 * v0 + p1 * v1 + p2 * v2
        p0, p1, p2 = p0 - dv * v0, p1 - dv * v1, p2 - dv * v2
        de = p0 * e0 + p1 * e1 + p2 * e2
        p0, p1, p2 = p0 - de * e0, p1 - de * e1, p2 - de * e2
        s = sr / r
        return np.array([a * e0 + s * p0, a * e1 + s * p1, a * e2 + s * p2])

    def at_boundary(x):
        return float(np.linalg.norm(x)) >= CHART_CAP - 1e-9

    return Chart(x0=np.zeros(3), decode=decode, encode=encode,
                 pullback=pullback, project=project, at_boundary=at_boundary)


def _random_point(rng: np.random.Generator) -> np.ndarray:
    while True:
        p = rng.normal(size=3)
        n = float(np.linalg.norm(p))
        if n > 1e-6:
            return p / n


def _admissible(u) -> bool:
    return abs(float(np.linalg.norm(np.asarray(u, dtype=float))) - 1.0) <= 1e-9


def initial_datum() -> np.ndarray:
    return np.array([1.0, 2.0, 5.0]) / math.sqrt(30.0)


def sphere_space() -> MetricSpaceModel:
    return MetricSpaceModel(
        name="sphere", dim=3, weight=1.0,
        distance=sphere_distance, dsq_grad=_dsq_grad, chart_at=_chart_at,
        base_point=initial_datum(), random_point=_random_point)


def sphere_energy_model() -> EnergyModel:
    # lambda = -10 is a deliberately conservative semiconvexity modulus for
    # slack scaling; tau_star keeps (-lam) * tau_star <= 1/2
    return EnergyModel(value=sphere_energy, grad=sphere_grad,
                       admissible=_admissible, lam=-10.0, tau_star=0.05)
