import numpy as np
import pytest

from tdvi import LagrangianModel, builtin, midpoint_discretize
from tdvi.problems import linear_potential, particle_model


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def free():
    return builtin("free_particle")


@pytest.fixture
def ho():
    return builtin("harmonic_oscillator")


@pytest.fixture
def td():
    return builtin("td_oscillator")


@pytest.fixture
def tx_model():
    """L = v^2/2 - t x."""
    return particle_model(linear_potential())


@pytest.fixture
def ho_ld(ho):
    return midpoint_discretize(ho.model)


@pytest.fixture
def td_ld(td):
    return midpoint_discretize(td.model)


def bare(model):
    """The same Lagrangian with every analytic partial stripped."""
    return LagrangianModel(model.dim, model.lag, label=model.label + "[fd]", autonomous=model.autonomous)


def random_segment(rng, dim=1, t_range=3.0, h_range=(0.05, 0.4), q_range=2.0):
    from tdvi import SegmentState
    t0 = rng.uniform(-t_range, t_range)
    h = rng.uniform(*h_range)
    return SegmentState(t0, rng.uniform(-q_range, q_range, dim), t0 + h, rng.uniform(-q_range, q_range, dim))


def random_window(rng, dim=1, t_range=3.0, h_range=(0.05, 0.4), q_range=2.0):
    from tdvi import Window
    t0 = rng.uniform(-t_range, t_range)
    h1, h2 = rng.uniform(*h_range, 2)
    q = rng.uniform(-q_range, q_range, (3, dim))
    return Window(t0, q[0], t0 + h1, q[1], t0 + h1 + h2, q[2])


def moving_segment(rng, dim=1, t_range=3.0, h_range=(0.05, 0.4), q_range=2.0, v_range=3.0):
    """Segment whose secant velocity is bounded by ``v_range``, like a trajectory segment."""
    from tdvi import SegmentState
    t0 = rng.uniform(-t_range, t_range)
    h = rng.uniform(*h_range)
    q0 = rng.uniform(-q_range, q_range, dim)
    return SegmentState(t0, q0, t0 + h, q0 + h * rng.uniform(-v_range, v_range, dim))
