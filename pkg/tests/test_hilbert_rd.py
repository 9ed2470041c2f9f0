"""Tests for the obstacle reaction-diffusion problem on the grid."""

import math

import numpy as np
import pytest

from gradflow.core import run_trajectory, startup_pair, bdf2_step
from gradflow.errors import DimensionMismatch
from gradflow.hilbert_rd import (grid_spacing, l2_distance, rd_energy,
                                 rd_energy_model, rd_grad, rd_initial,
                                 rd_space)


def test_grid_spacing():
    assert grid_spacing(99) == 0.01
    assert grid_spacing(3) == 0.25


def test_l2_distance_examples():
    k = 99
    h = grid_spacing(k)
    assert l2_distance(np.ones(k), np.ones(k)) == 0.0
    assert abs(l2_distance(np.ones(k), np.zeros(k)) - math.sqrt(h * k)) <= 1e-15
    a, b = np.full(k, 0.2), np.full(k, -0.7)
    assert l2_distance(a, b) == l2_distance(b, a)
    with pytest.raises(DimensionMismatch):
        l2_distance(np.zeros(5), np.zeros(6))


def test_energy_landmarks():
    assert rd_energy(np.zeros(50)) == 0.0
    k = 100
    # flat u = 1 has no Dirichlet cost; the reaction term integrates to
    # -15 h K = -15 K / (K+1)
    val = rd_energy(np.ones(k))
    assert abs(val + 15.0 * k / (k + 1.0)) <= 1e-12
    assert abs(val + 15.0) <= 15.0 / (k + 1.0) + 1e-12
    k = 1000
    assert abs(rd_energy(np.ones(k)) + 15.0) <= 15.0 / (k + 1.0) + 1e-12


def test_energy_infinite_outside_obstacle():
    u = np.zeros(20)
    u[7] = 1.5
    assert rd_energy(u) == math.inf
    assert rd_energy(-1.2 * np.ones(20)) == math.inf
    assert not rd_energy_model().admissible(u)


def test_gradient_on_constants():
    assert np.array_equal(rd_grad(np.zeros(30)), np.zeros(30))
    for c in (1.0, -0.5, 0.3):
        g = rd_grad(np.full(40, c))
        assert np.allclose(g, -60.0 * c ** 3, rtol=0, atol=1e-12)


def test_gradient_matches_divided_differences():
    # metric gradient g_i = (E(u + eps e_i) - E(u - eps e_i)) / (2 eps h)
    rng = np.random.default_rng(10)
    k = 17
    h = grid_spacing(k)
    eps = 1e-6
    for _ in range(20):
        u = rng.uniform(-0.8, 0.8, size=k)
        g = rd_grad(u)
        for i in range(k):
            up, dn = u.copy(), u.copy()
            up[i] += eps
            dn[i] -= eps
            fd = (rd_energy(up) - rd_energy(dn)) / (2.0 * eps * h)
            assert abs(fd - g[i]) <= 1e-6 * (1.0 + abs(fd))


def test_initial_datum_samples():
    u = rd_initial(99)
    assert abs(u[24] - 0.75) <= 1e-15   # x = 0.25
    assert abs(u[49] - 0.25) <= 1e-15   # x = 0.5
    assert u.min() >= -0.25 - 1e-15
    assert u.max() <= 0.75 + 1e-15
    assert rd_energy_model().admissible(u)


def test_straight_line_energy_identity():
    # along gamma_s = (1-s) g0 + s g1, the two-point penalty combination
    # ||.-v||^2 - (1/4)||.-u||^2 interpolates linearly minus (3/4) s(1-s)
    # times the squared segment length (all norms h-weighted)
    rng = np.random.default_rng(11)
    k = 10
    for _ in range(200):
        g0, g1, v, u = (rng.uniform(-1.0, 1.0, size=k) for _ in range(4))
        for s in (0.25, 0.5, 0.9):
            gs = (1.0 - s) * g0 + s * g1

            def f(w):
                return l2_distance(w, v) ** 2 - 0.25 * l2_distance(w, u) ** 2

            expect = ((1.0 - s) * f(g0) + s * f(g1)
                      - 0.75 * s * (1.0 - s) * l2_distance(g0, g1) ** 2)
            scale = abs(f(gs)) + abs(expect) + 1.0
            assert abs(f(gs) - expect) <= 1e-10 * scale


def test_second_variation_bounded_below():
    # D^2 E[u](phi, phi) = sum (diff phi)^2 / h - 180 h sum u^2 phi^2
    # >= -180 ||phi||_h^2 whenever |u| <= 1
    rng = np.random.default_rng(12)
    k = 25
    h = grid_spacing(k)
    for _ in range(50):
        u = rng.uniform(-0.9, 0.9, size=k)
        phi = rng.uniform(-1.0, 1.0, size=k)
        dphi = np.diff(phi)
        qform = float(np.dot(dphi, dphi)) / h \
            - 180.0 * h * float(np.sum(u * u * phi * phi))
        assert qform >= -180.0 * h * float(np.sum(phi * phi)) - 1e-12
        # and the quadratic form is the curvature of the energy itself
        eps = 1e-4
        fd = (rd_energy(u + eps * phi) - 2.0 * rd_energy(u)
              + rd_energy(u - eps * phi)) / (eps * eps)
        assert abs(fd - qform) <= 1e-4 * (1.0 + abs(qform))


def test_model_constants():
    model = rd_energy_model()
    assert model.lam == -180.0
    assert -model.lam * model.tau_star <= 0.5 + 1e-15
    space = rd_space(50)
    assert space.weight == grid_spacing(50)
    assert space.dim == 50
    rng = np.random.default_rng(13)
    for _ in range(20):
        assert model.admissible(space.random_point(rng))


def test_obstacle_activates_with_inward_gradients():
    # the reaction term drives the bump into the upper obstacle; where the
    # constraint is active the update's stationarity residual must point
    # inward (KKT sign), and must vanish on inactive nodes
    k = 50
    space = rd_space(k)
    energy = rd_energy_model()
    tau = 1e-3
    traj = run_trajectory(space, energy, "bdf2", tau, rd_initial(k), 0.03)
    w, v, u = traj.states[-1], traj.states[-2], traj.states[-3]
    upper = w >= 1.0 - 1e-9
    lower = w <= -1.0 + 1e-9
    assert upper.any()
    r = (3.0 * w - 4.0 * v + u) / (2.0 * tau) + rd_grad(w)
    interior = ~(upper | lower)
    assert np.all(r[upper] <= 1e-5)
    if lower.any():
        assert np.all(r[lower] >= -1e-5)
    assert np.max(np.abs(r[interior])) <= 1e-5
    for s in traj.states:
        assert energy.admissible(s)


def test_unconstrained_steps_satisfy_update_equation():
    # before the obstacle activates, (3w - 4v + u)/(2 tau) + grad E(w) = 0
    k = 32
    space = rd_space(k)
    energy = rd_energy_model()
    tau = 1e-3
    u0 = rd_initial(k)
    u, v = startup_pair(space, energy, tau, u0)
    w = bdf2_step(space, energy, tau, u, v)
    assert np.max(np.abs(w)) < 1.0 - 1e-6
    r = (3.0 * w - 4.0 * v + u) / (2.0 * tau) + rd_grad(w)
    eps = 1e-10 * (1.0 + abs(rd_energy(v)))
    assert np.linalg.norm(r) <= 100.0 * eps
