"""Reaction-diffusion obstacle problem on a uniform grid in L^2(0, 1).

States are vectors of K interior nodal values at x_i = i * h, h = 1/(K+1),
with homogeneous Neumann differences at the boundary (ghost values copy the
edge nodes).  The energy is

    E(u) = 1/2 sum (u_{i+1} - u_i)^2 / h - 15 h sum u_i^4,   |u_i| <= 1,

and +inf outside the obstacle box.  Its metric (L^2) gradient is the discrete
-Laplacian(u) - 60 u^3, so gradient descent is the lattice reaction-diffusion
law u_t = Laplacian(u) + 60 u^3 with the box constraint.
"""

import math

import numpy as np

from .core import Chart, EnergyModel, MetricSpaceModel
from .errors import DimensionMismatch
from .solver import project_box

_BOX_TOL = 1e-12


def grid_spacing(k: int) -> float:
    return 1.0 / (k + 1)


def l2_distance(a, b) -> float:
    """sqrt(h * sum (a_i - b_i)^2) with h the grid spacing."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"grid sizes differ: {a.shape} vs {b.shape}")
    d = a - b
    return math.sqrt(grid_spacing(a.size) * float(np.dot(d, d)))


def rd_energy(u) -> float:
    """Dirichlet part minus the quartic reaction well; +inf outside |u| <= 1."""
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0 + _BOX_TOL):
        return math.inf
    h = grid_spacing(u.size)
    slopes = np.diff(u)
    return 0.5 * float(np.dot(slopes, slopes)) / h - 15.0 * h * float(np.sum(u ** 4))


def rd_grad(u) -> np.ndarray:
    """Metric gradient -Laplacian(u) - 60 u^3 (Neumann differences at the ends)."""
    u = np.asarray(u, dtype=float)
    h = grid_spacing(u.size)
    lap = np.empty_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2])
    lap[0] = u[1] - u[0]
    lap[-1] = u[-2] - u[-1]
    lap /= h * h
    return -lap - 60.0 * u ** 3


def rd_initial(k: int) -> np.ndarray:
    """u0(x) = sin(2 pi x) / 2 + 1/4 sampled at the interior nodes."""
    x = grid_spacing(k) * np.arange(1, k + 1)
    return 0.5 * np.sin(2.0 * math.pi * x) + 0.25


def _flat_chart(v, project):
    x0 = np.asarray(v, dtype=float).copy()

    def decode(x):
        return x

    def encode(p):
        return np.asarray(p, dtype=float).copy()

    def pullback(x, g):
        return g

    return Chart(x0=x0, decode=decode, encode=encode, pullback=pullback,
                 project=project)


def _dsq_grad(a, w) -> np.ndarray:
    # metric gradient of w -> d^2(a, w) in the weighted norm is 2 (w - a)
    return 2.0 * (np.asarray(w, dtype=float) - np.asarray(a, dtype=float))


def _admissible(u) -> bool:
    return bool(np.all(np.abs(np.asarray(u, dtype=float)) <= 1.0 + _BOX_TOL))


def rd_space(k: int) -> MetricSpaceModel:
    def chart_at(v):
        return _flat_chart(v, lambda x: project_box(x, -1.0, 1.0))

    def random_point(rng):
        return rng.uniform(-1.0, 1.0, size=k)

    return MetricSpaceModel(
        name="hilbert-rd", dim=k, weight=grid_spacing(k),
        distance=l2_distance, dsq_grad=_dsq_grad, chart_at=chart_at,
        base_point=np.zeros(k), random_point=random_point)


def rd_energy_model() -> EnergyModel:
    # the quadratic form of the second variation is bounded below by -180
    # on the obstacle box; tau_star keeps (-lam) * tau_star <= 1/2
    return EnergyModel(value=rd_energy, grad=rd_grad, admissible=_admissible,
                       lam=-180.0, tau_star=1.0 / 360.0)
