"""Tests for the scalar ramp-energy flow and its closed-form two-step scheme."""

import math

import numpy as np
import pytest

from gradflow.core import bdf2_step
from gradflow.errors import PreconditionViolated
from gradflow.halfline import (exact_bdf2_step, exact_trajectory,
                               halfline_energy, kink_info, line_space,
                               post_kink_asymptote, sampled_true_trajectory,
                               true_solution)


def test_recursion_three_cases():
    # positive branch: lower by (2/3) tau
    assert abs(exact_bdf2_step(1.01, 1.0, 0.01) - 0.99) <= 1e-15
    # negative branch: linear recursion without the slope term
    assert exact_bdf2_step(-1.0, -1.0, 0.01) == -1.0
    # middle branch: park at the rest state
    assert exact_bdf2_step(0.1, 0.05, 0.3) == 0.0
    assert exact_bdf2_step(0.0, 0.0, 0.1) == 0.0


def test_true_solution():
    assert true_solution(0.0) == 1.0
    assert true_solution(0.5) == 0.5
    assert true_solution(1.0) == 0.0
    assert true_solution(3.0) == 0.0
    with pytest.raises(ValueError):
        true_solution(-0.25)


def test_pre_kink_states_exact():
    tau = 0.01
    traj = exact_trajectory(tau, 0.99)
    assert traj.pre_initial == 1.0 + tau
    assert traj.states[0] == 1.0
    for k, s in enumerate(traj.states):
        assert abs(s - (1.0 - k * tau)) <= 1e-14


def test_trajectory_structure():
    traj = exact_trajectory(0.1, 2.0)
    assert traj.scheme == "bdf2"
    assert len(traj.states) == 21
    assert traj.horizon == 2.0
    with pytest.raises(ValueError):
        exact_trajectory(0.1, 0.05)


def test_sampled_true_trajectory():
    traj = sampled_true_trajectory(0.25, 2.0)
    assert traj.scheme == "exact"
    assert traj.states == (1.0, 0.75, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_kink_classification():
    held, n_tau, u_pre = kink_info(0.01)
    assert held and n_tau == 100
    assert abs(u_pre - 0.01) <= 1e-12
    held, n_tau, u_pre = kink_info(0.001)
    assert held and n_tau == 1000
    assert abs(u_pre - 0.001) <= 1e-12
    # binary-exact step: the kink lands on the rest state with no rounding
    held, n_tau, u_pre = kink_info(0.125)
    assert held and n_tau == 8 and u_pre == 0.125


def test_post_kink_formula_values():
    assert post_kink_asymptote(8, 8, 0.125) == 0.0
    tau = 0.01
    assert abs(post_kink_asymptote(101, 100, tau, tau=tau) + tau / 3.0) <= 1e-15
    # the geometric factor dies out: the offset settles at -u_pre / 2
    far = post_kink_asymptote(300, 100, tau, tau=tau)
    assert abs(far + tau / 2.0) <= 1e-15


def test_post_kink_preconditions():
    with pytest.raises(PreconditionViolated):
        post_kink_asymptote(99, 100, 0.01)
    with pytest.raises(PreconditionViolated):
        post_kink_asymptote(101, 100, 0.02, tau=0.01)
    with pytest.raises(PreconditionViolated):
        post_kink_asymptote(101, 100, 0.002, tau=0.01)


def test_post_kink_formula_matches_recursion():
    # tau = 1/8 is binary-exact, so the float recursion hits the kink with
    # no rounding ambiguity and the closed form must track it to 1e-14
    tau = 0.125
    held, n_tau, u_pre = kink_info(tau)
    assert held
    traj = exact_trajectory(tau, 5.0)
    for k in range(n_tau, len(traj.states)):
        predicted = post_kink_asymptote(k, n_tau, u_pre, tau=tau)
        assert abs(traj.states[k] - predicted) <= 1e-14


def test_generic_machinery_matches_closed_form():
    space = line_space()
    energy = halfline_energy()
    rng = np.random.default_rng(30)
    for _ in range(100):
        u = float(rng.uniform(-2.0, 2.0))
        v = float(rng.uniform(-2.0, 2.0))
        tau = float(rng.uniform(0.05, 0.5))
        got = bdf2_step(space, energy, tau, u, v)
        assert abs(got - exact_bdf2_step(u, v, tau)) <= 1e-8


def test_energy_model_shape():
    energy = halfline_energy()
    assert energy.value(2.5) == 2.5
    assert energy.value(-3.0) == 0.0
    assert energy.grad is None
    assert energy.prox is not None
    # prox of t * max(., 0) in closed form
    assert energy.prox(1.0, 0.3) == 0.7
    assert energy.prox(0.2, 0.3) == 0.0
    assert energy.prox(-0.4, 0.3) == -0.4
