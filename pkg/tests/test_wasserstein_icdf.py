"""Tests for the 1-D Wasserstein flow in inverse-CDF coordinates."""

import math

import numpy as np
import pytest

from gradflow.core import run_trajectory
from gradflow.errors import DimensionMismatch
from gradflow.wasserstein_icdf import (icdf_energy, icdf_energy_model,
                                       icdf_entropy, icdf_grad, icdf_initial,
                                       icdf_interaction, icdf_space,
                                       isotonic_increasing, project_monotone,
                                       w2_distance)


def uniform_icdf(k, lo=-1.0, hi=1.0):
    """Inverse CDF of the uniform measure on [lo, hi] at the K midpoints."""
    xi = (np.arange(1, k + 1) - 0.5) / k
    return lo + (hi - lo) * xi


def spread_monotone(rng, k, gap_lo=0.01, gap_hi=0.05):
    """Strictly increasing vector with gaps well above the FD step."""
    gaps = rng.uniform(gap_lo, gap_hi, size=k - 1)
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    x = x - x[-1] / 2.0
    return 0.9 * x / max(1.0, np.abs(x).max())


def test_w2_between_point_masses():
    k = 8
    a, b = np.full(k, 0.3), np.full(k, -0.45)
    assert abs(w2_distance(a, b) - 0.75) <= 1e-15
    with pytest.raises(DimensionMismatch):
        w2_distance(np.zeros(4), np.zeros(5))


def test_w2_triangle_inequality():
    rng = np.random.default_rng(20)
    k = 12
    for _ in range(300):
        a, b, c = (np.sort(rng.uniform(-1, 1, size=k)) for _ in range(3))
        assert w2_distance(a, c) <= (w2_distance(a, b)
                                     + w2_distance(b, c) + 1e-12)


def test_w2_translation_isometry():
    k = 64
    width = 0.8
    xa = uniform_icdf(k, -0.9, -0.9 + width)
    xb = uniform_icdf(k, 0.05, 0.05 + width)
    assert abs(w2_distance(xa, xb) - 0.95) <= 1e-12


def test_entropy_of_uniform():
    for k in (50, 200):
        assert abs(icdf_entropy(uniform_icdf(k)) + math.log(2.0)) <= 1e-13


def test_entropy_infinite_when_not_increasing():
    assert icdf_entropy(np.array([0.0, 0.0, 0.1])) == math.inf
    assert icdf_entropy(np.array([0.2, 0.1, 0.3])) == math.inf
    assert icdf_energy(np.array([0.2, 0.1, 0.3])) == math.inf


def test_energy_infinite_outside_range():
    x = np.array([-0.5, 0.2, 1.4])
    assert icdf_energy(x) == math.inf


def test_interaction_of_point_mass_is_zero():
    assert icdf_interaction(np.zeros(10)) == 0.0
    assert icdf_interaction(np.full(10, 0.7)) == 0.0


def test_interaction_against_naive_double_sum():
    rng = np.random.default_rng(21)
    k = 30
    x = np.sort(rng.uniform(-1, 1, size=k))
    total = 0.0
    for i in range(k):
        for j in range(k):
            d = x[i] - x[j]
            total += 2.0 * d ** 4 - d ** 2
    assert abs(icdf_interaction(x) - total / (2.0 * k * k)) <= 1e-13


def test_interaction_continuum_limit():
    # for the uniform measure on [-1, 1] the continuum value is 11/15
    assert abs(icdf_interaction(uniform_icdf(2000)) - 11.0 / 15.0) <= 1e-5


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(22)
    eps = 1e-6
    for k in (8, 21):
        for _ in range(10):
            x = spread_monotone(rng, k)
            g = icdf_grad(x)
            for i in range(k):
                up, dn = x.copy(), x.copy()
                up[i] += eps
                dn[i] -= eps
                fd = (icdf_energy(up) - icdf_energy(dn)) / (2.0 * eps)
                assert abs(fd - g[i]) <= 1e-6 * (1.0 + abs(fd))


def test_gradient_translation_invariance():
    rng = np.random.default_rng(23)
    x = spread_monotone(rng, 15)
    g = icdf_grad(x)
    # both energy terms depend only on differences, so the gradient has zero
    # mean and is unchanged by a rigid shift
    assert abs(float(np.sum(g))) <= 1e-10
    assert np.allclose(icdf_grad(x + 0.05), g, rtol=0, atol=1e-9)


def test_gradient_odd_symmetry():
    rng = np.random.default_rng(24)
    y = spread_monotone(rng, 14)
    x = 0.5 * (y - y[::-1])   # strictly increasing and odd: x_i = -x_{K+1-i}
    g = icdf_grad(x)
    assert np.allclose(g, -g[::-1], rtol=0, atol=1e-12)


def test_initial_datum():
    x = icdf_initial(51)
    assert abs(x[25]) <= 1e-14          # xi = 0.5 lands on the formula's zero
    big = icdf_initial(100_000)
    assert abs(big[0] + 1.0) <= 2e-5    # xi -> 0 limit is -1
    x = icdf_initial(1000)
    assert np.all(np.diff(x) > 0.0)
    assert x.min() > -1.0 and x.max() < 1.0


def test_isotonic_matches_sklearn():
    from sklearn.isotonic import IsotonicRegression
    rng = np.random.default_rng(25)
    iso = IsotonicRegression()
    t = np.arange(30, dtype=float)
    for _ in range(200):
        y = rng.normal(size=30)
        ours = isotonic_increasing(y)
        ref = iso.fit_transform(t, y)
        assert np.allclose(ours, ref, rtol=0, atol=1e-9)
        assert np.all(np.diff(ours) >= 0.0)


def test_project_monotone_examples():
    # two-point decreasing sequence pools to its mean
    raw = project_monotone(np.array([1.0, 0.0]), delta=0.0)
    assert np.array_equal(raw, np.array([0.5, 0.5]))
    out = project_monotone(np.array([1.0, 0.0]))
    assert np.allclose(out, 0.5, rtol=0, atol=1e-11)
    # the minimal gap holds up to one rounding of the 0.5-scale values
    assert np.all(np.diff(out) >= 1e-12 - 1e-15)
    # reversed sorted input pools to a constant at the mean
    z = np.linspace(0.8, -0.8, 9)
    pooled = project_monotone(z, delta=0.0)
    assert np.allclose(pooled, 0.0, rtol=0, atol=1e-15)
    # feasible input passes through unchanged
    x = np.array([-0.9, -0.2, 0.3, 0.8])
    assert np.array_equal(project_monotone(x), x)
    # out-of-box values clamp
    assert np.array_equal(project_monotone(np.array([-3.0, 2.0]), delta=0.0),
                          np.array([-1.0, 1.0]))


def test_project_monotone_idempotent():
    rng = np.random.default_rng(26)
    for _ in range(100):
        x = rng.uniform(-2.0, 2.0, size=20)
        p1 = project_monotone(x)
        p2 = project_monotone(p1)
        assert np.array_equal(p1, p2)


def test_model_constants():
    model = icdf_energy_model(50)
    assert model.lam == -4.0
    assert -model.lam * model.tau_star <= 0.5 + 1e-15
    space = icdf_space(50)
    assert space.weight == 1.0 / 50.0
    rng = np.random.default_rng(27)
    for _ in range(20):
        assert model.admissible(space.random_point(rng))


def test_metric_gradient_scales_coordinate_gradient():
    rng = np.random.default_rng(28)
    k = 12
    x = spread_monotone(rng, k)
    model = icdf_energy_model(k)
    assert np.allclose(model.grad(x), k * icdf_grad(x), rtol=0, atol=0)


def test_trajectories_stay_feasible():
    k = 16
    space = icdf_space(k)
    model = icdf_energy_model(k)
    x0 = icdf_initial(k)
    traj = run_trajectory(space, model, "bdf2", 1e-3, x0, 0.01)
    for s in traj.states:
        assert np.all(np.diff(s) > 0.0)
        assert np.max(np.abs(s)) <= 1.0 + 1e-12
    mm = run_trajectory(space, model, "mm", 1e-3, x0, 0.01)
    energies = [icdf_energy(s) for s in mm.states]
    slack = 1e-9 * (1.0 + max(abs(e) for e in energies))
    for prev, cur in zip(energies, energies[1:]):
        assert cur <= prev + slack
