import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdvi import (
    NonMonotoneTime,
    SegmentState,
    ZeroTimeStep,
    action_sum,
    barD12_matrix,
    builtin,
    discrete_energy,
    grad_blocks,
    midpoint_discretize,
)
from tdvi.discretization import action_gradient, is_degenerate, weighted_grad

from conftest import bare, random_segment


def seg(t0, q0, t1, q1):
    return SegmentState(t0, [q0] if np.isscalar(q0) else q0, t1, [q1] if np.isscalar(q1) else q1)


def test_midpoint_values(free, ho):
    assert midpoint_discretize(free.model)(0, [0], 1, [2]) == 2
    assert midpoint_discretize(ho.model)(0, [0], 1, [2]) == 1.5


@pytest.mark.parametrize("name", ["harmonic_oscillator", "td_oscillator", "central_force_2d"])
def test_equal_endpoints_reduce_to_zero_velocity(name, rng):
    p = builtin(name)
    Ld = midpoint_discretize(p.model)
    q = rng.uniform(0.5, 1.5, p.model.dim)
    assert Ld(0.2, q, 0.5, q) == p.model(0.35, q, np.zeros(p.model.dim))


def test_zero_time_step(ho_ld):
    with pytest.raises(ZeroTimeStep):
        ho_ld(1.0, [0], 1.0, [1])
    with pytest.raises(ZeroTimeStep):
        SegmentState(1.0, [0], 1.0, [1])
    with pytest.raises(NonMonotoneTime):
        SegmentState(1.0, [0], 0.5, [1])


def test_grad_blocks_free_particle(free):
    g = grad_blocks(midpoint_discretize(free.model), seg(0, 0, 1, 1))
    assert (g.d1, g.d2.tolist(), g.d3, g.d4.tolist()) == (1, [-1], -1, [1])
    np.testing.assert_array_equal(g.bar1, [1, -1])
    np.testing.assert_array_equal(g.bar2, [-1, 1])


def test_grad_blocks_harmonic_oscillator(ho_ld):
    # dL_d/dq1 = v/h - q_mid/2 with v = 2, q_mid = 1
    g = grad_blocks(ho_ld, seg(0, 0, 1, 2))
    assert g.d4[0] == pytest.approx(1.5, abs=1e-14)
    fd = grad_blocks(ho_ld, seg(0, 0, 1, 2), use_analytic=False)
    assert fd.d4[0] == pytest.approx(1.5, abs=1e-7)


def test_free_particle_position_blocks_antisymmetric(free, rng):
    Ld = midpoint_discretize(free.model)
    for _ in range(10):
        g = grad_blocks(Ld, random_segment(rng))
        assert g.d2[0] == pytest.approx(-g.d4[0], abs=1e-14)


def test_equal_endpoints_position_blocks_are_equal(ho_ld):
    # zero velocity: D2 = D4 = dL/dq / 2
    g = grad_blocks(ho_ld, seg(0, 0.8, 0.3, 0.8))
    assert g.d2[0] == pytest.approx(g.d4[0], abs=1e-15)
    assert g.d2[0] == pytest.approx(-0.4, abs=1e-15)


@pytest.mark.parametrize("name", ["harmonic_oscillator", "td_oscillator", "forced_particle", "two_body_1d"])
def test_analytic_blocks_match_fd(name, rng):
    p = builtin(name)
    Ld = midpoint_discretize(p.model)
    for _ in range(100):
        s = random_segment(rng, p.model.dim)
        a = np.concatenate(list(map(np.atleast_1d, grad_blocks(Ld, s))))
        f = np.concatenate(list(map(np.atleast_1d, grad_blocks(Ld, s, use_analytic=False))))
        assert np.max(np.abs(a - f) / np.maximum(1.0, np.abs(f))) <= 1e-6


def test_fd_only_model_discretizes(ho):
    Ld = midpoint_discretize(bare(ho.model))
    assert Ld.analytic_grad is None
    g = grad_blocks(Ld, seg(0, 0, 1, 2))
    assert g.d4[0] == pytest.approx(1.5, abs=1e-6)


def test_barD12_free_particle(free):
    M = barD12_matrix(midpoint_discretize(free.model), seg(0, 0, 1, 1))
    assert M[1, 1] == pytest.approx(-1.0, abs=1e-8)
    assert abs(np.linalg.det(M)) <= 1e-8
    assert is_degenerate(M)


def test_barD12_harmonic_oscillator(ho_ld):
    s = seg(0, 0, 1, 2)
    M = barD12_matrix(ho_ld, s)
    # (q0, q1) block of h L_d: -1/h - h k / 4, checked against double differencing of the value
    assert M[1, 1] == pytest.approx(-1.25, abs=1e-8)

    def F(q0, q1):
        return 1.0 * ho_ld(0, [q0], 1, [q1])

    e = 1e-4
    fd = (F(e, 2 + e) - F(e, 2 - e) - F(-e, 2 + e) + F(-e, 2 - e)) / (4 * e * e)
    assert M[1, 1] == pytest.approx(fd, abs=1e-6)
    assert not is_degenerate(M)


def test_discrete_energy_examples(free, ho_ld):
    assert discrete_energy(midpoint_discretize(free.model), 0, [0], 1, [2]) == 2
    assert discrete_energy(ho_ld, 0, [0], 1, [2]) == pytest.approx(2.5, abs=1e-15)
    with pytest.raises(NonMonotoneTime):
        discrete_energy(ho_ld, 0, [0], 0, [2])
    with pytest.raises(NonMonotoneTime):
        discrete_energy(ho_ld, 0, [0], -1, [2])


@pytest.mark.parametrize("h", [0.01, 0.3, 2.0])
def test_discrete_energy_zero_velocity(ho_ld, h):
    assert discrete_energy(ho_ld, 1.0, [0.7], h, [0.7]) == pytest.approx(-ho_ld.source(0, [0.7], [0]), abs=1e-15)


def test_discrete_energy_is_minus_h_derivative_of_weighted_lagrangian(td_ld, rng):
    for _ in range(100):
        s = random_segment(rng)
        e = 1e-6

        def wl(h):
            return h * td_ld.bar(s.t0, s.q0, h, s.q1)

        fd = -(wl(s.h + e) - wl(s.h - e)) / (2 * e)
        assert discrete_energy(td_ld, s.t0, s.q0, s.h, s.q1) == pytest.approx(fd, abs=1e-6)


def test_action_sum_examples(free):
    Ld = midpoint_discretize(free.model)
    assert action_sum(Ld, [(0, [0]), (1, [1]), (2, [2])]) == 1
    assert action_sum(Ld, [(0, [0]), (1, [2])]) == 2
    with pytest.raises(NonMonotoneTime):
        action_sum(Ld, [(0, [0]), (0, [2])])


def test_action_gradient_vanishes_for_uniform_motion(free):
    Ld = midpoint_discretize(free.model)
    g = action_gradient(Ld, [(k * 0.5, [0.3 * k]) for k in range(6)])
    assert g.shape == (4, 2)
    assert np.max(np.abs(g)) <= 1e-8


def central_force_ld():
    return midpoint_discretize(builtin("central_force_2d").model)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0.05, 0.5),
       st.lists(st.floats(0.5, 2.0), min_size=4, max_size=4))
def test_rotation_invariance(angle, h, qs):
    Ld = central_force_ld()
    c, s_ = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s_], [s_, c]])
    q0, q1 = np.array(qs[:2]), np.array(qs[2:])
    assert Ld(0.0, R @ q0, h, R @ q1) == pytest.approx(Ld(0.0, q0, h, q1), rel=1e-13, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(-400, 400), st.floats(-2, 2), st.floats(-2, 2))
def test_time_translation_invariance(n, q0, q1):
    Ld = midpoint_discretize(builtin("harmonic_oscillator").model)
    # shifts by multiples of 1/8 keep the step bit-identical
    c = n / 8
    assert Ld(c, [q0], c + 0.25, [q1]) == Ld(0.0, [q0], 0.25, [q1])


def test_weighted_grad_blocks(ho_ld):
    s = seg(0, 0, 1, 2)
    g = grad_blocks(ho_ld, s)
    w = weighted_grad(ho_ld, s)
    L = ho_ld.value(s)
    np.testing.assert_allclose(w, [g.d1 - L, g.d2[0], g.d3 + L, g.d4[0]])
