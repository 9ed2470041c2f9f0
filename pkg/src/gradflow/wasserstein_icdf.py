"""1-D Wasserstein gradient flow through inverse distribution functions.

A probability measure on [-1, 1] is represented by its inverse CDF sampled at
the K midpoints xi_i = (i - 1/2)/K; the vector X must be strictly increasing,
and the L^2 norm of inverse CDFs (weight 1/K) is exactly the quadratic
Wasserstein distance.  The energy is entropy plus a pairwise interaction

    E(X) = -(1/(K-1)) sum_{i<K} log(K (X_{i+1} - X_i))
           + (1/(2 K^2)) sum_{i,j} W(X_i - X_j),     W(x) = 2 x^4 - x^2,

with +inf when monotonicity or the range bound fails.  The entropy barrier
keeps solver iterates strictly monotone; the cone projection (pool adjacent
violators, then clamping and a minimal gap) is kept as a second guard and is
rarely active.
"""

import math

import numpy as np

from .core import Chart, EnergyModel, MetricSpaceModel
from .errors import DimensionMismatch, InitialNotMonotone

DELTA_MIN = 1e-12
_RANGE_TOL = 1e-12


def w2_distance(xa, xb) -> float:
    """Quadratic Wasserstein distance sqrt((1/K) sum (Xa_i - Xb_i)^2)."""
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    if xa.shape != xb.shape:
        raise DimensionMismatch(f"sample counts differ: {xa.shape} vs {xb.shape}")
    d = xa - xb
    return math.sqrt(float(np.dot(d, d)) / xa.size)


def icdf_entropy(x) -> float:
    """Negative entropy term; +inf unless X is strictly increasing."""
    x = np.asarray(x, dtype=float)
    gaps = np.diff(x)
    if np.any(gaps <= 0.0):
        return math.inf
    k = x.size
    return -float(np.sum(np.log(k * gaps))) / (k - 1)


def icdf_interaction(x) -> float:
    """(1/(2 K^2)) sum_{i,j} W(X_i - X_j) with W(x) = 2 x^4 - x^2."""
    x = np.asarray(x, dtype=float)
    k = x.size
    diff = x[:, None] - x[None, :]
    sq = diff * diff
    return float(np.sum(2.0 * sq * sq - sq)) / (2.0 * k * k)


def icdf_energy(x) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _RANGE_TOL):
        return math.inf
    ent = icdf_entropy(x)
    if not math.isfinite(ent):
        return math.inf
    return ent + icdf_interaction(x)


def icdf_grad(x) -> np.ndarray:
    """Coordinate gradient of icdf_energy at a strictly monotone X."""
    x = np.asarray(x, dtype=float)
    k = x.size
    gaps = np.diff(x)
    inv = 1.0 / gaps / (k - 1)
    g = np.zeros(k)
    g[:-1] += inv
    g[1:] -= inv
    diff = x[:, None] - x[None, :]
    # W'(x) = 8 x^3 - 2 x
    g += np.sum(8.0 * diff ** 3 - 2.0 * diff, axis=1) / (k * k)
    return g


def icdf_initial(k: int) -> np.ndarray:
    """Perturbed affine inverse CDF at the K midpoints; strictly increasing."""
    xi = (np.arange(1, k + 1) - 0.5) / k
    x = 2.0 * xi - 1.0 + np.sin(8.0 * math.pi * xi) / (8.0 * math.pi) * (
        10.0 * xi * (xi - 0.5) * (xi - 1.0) + 1.0)
    if np.any(np.diff(x) <= 0.0):
        raise InitialNotMonotone(f"initial inverse CDF not increasing at K={k}")
    return x


def isotonic_increasing(y) -> np.ndarray:
    """Pool-adjacent-violators: least-squares nondecreasing fit (uniform weights)."""
    y = np.asarray(y, dtype=float)
    if np.all(np.diff(y) >= 0.0):
        return y.copy()
    vals = []
    wts = []
    for v in y:
        vals.append(float(v))
        wts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, w2 = vals.pop(), wts.pop()
            v1, w1 = vals.pop(), wts.pop()
            vals.append((v1 * w1 + v2 * w2) / (w1 + w2))
            wts.append(w1 + w2)
    return np.repeat(vals, wts)


def project_monotone(x, lo: float = -1.0, hi: float = 1.0,
                     delta: float = DELTA_MIN) -> np.ndarray:
    """Projection onto increasing vectors in [lo, hi] with gaps >= delta.

    PAV gives the cone projection, clamping adds the box; a final sweep
    enforces the minimal gap (negligible at delta = 1e-12 but keeps the
    entropy defined).  Idempotent.
    """
    z = isotonic_increasing(x)
    np.clip(z, lo, hi, out=z)
    gaps_ok = bool(np.all(np.diff(z) >= delta))
    if not gaps_ok:
        for i in range(1, z.size):
            lo_i = z[i - 1] + delta
            if z[i] < lo_i:
                z[i] = lo_i
        if z[-1] > hi:
            z[-1] = hi
            for i in range(z.size - 2, -1, -1):
                hi_i = z[i + 1] - delta
                if z[i] > hi_i:
                    z[i] = hi_i
    return z


def density_histogram(x):
    """Cell centers and densities of the measure (mass 1/K between samples)."""
    x = np.asarray(x, dtype=float)
    gaps = np.diff(x)
    centers = 0.5 * (x[1:] + x[:-1])
    return centers, 1.0 / (x.size * gaps)


def _dsq_grad(a, w) -> np.ndarray:
    return 2.0 * (np.asarray(w, dtype=float) - np.asarray(a, dtype=float))


def _flat_chart(v):
    x0 = np.asarray(v, dtype=float).copy()

    def decode(x):
        return x

    def encode(p):
        return np.asarray(p, dtype=float).copy()

    def pullback(x, g):
        return g

    return Chart(x0=x0, decode=decode, encode=encode, pullback=pullback,
                 project=project_monotone)


def _admissible(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.diff(x) > 0.0) and np.all(np.abs(x) <= 1.0 + _RANGE_TOL))


def icdf_space(k: int) -> MetricSpaceModel:
    def random_point(rng):
        return project_monotone(np.sort(rng.uniform(-1.0, 1.0, size=k)))

    return MetricSpaceModel(
        name="wasserstein-icdf", dim=k, weight=1.0 / k,
        distance=w2_distance, dsq_grad=_dsq_grad,
        chart_at=_flat_chart, base_point=icdf_initial(k),
        random_point=random_point)


def icdf_energy_model(k: int) -> EnergyModel:
    # entropy is convex along straight icdf lines; the interaction kernel has
    # W'' >= -2, giving modulus -4 in the 1/K-weighted norm
    def grad(x):
        return k * icdf_grad(x)

    return EnergyModel(value=icdf_energy, grad=grad, admissible=_admissible,
                       lam=-4.0, tau_star=0.125)
