"""Built-in benchmark systems."""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .diagnostics import SymmetryGenerator
from .errors import NonMonotoneTime, UnknownProblem, ValidationError
from .lagrangian import LagrangianModel, as_vector


@dataclass(frozen=True)
class InitialCondition:
    t0: float
    q0: np.ndarray
    v0: np.ndarray
    h0: float


@dataclass(frozen=True)
class Potential:
    """A scalar potential V(t, x) with its partials, for one-dimensional particles."""

    value: Callable
    d_t: Callable
    d_x: Callable
    label: str = "V"


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    model: LagrangianModel
    initial: InitialCondition
    generators: List[SymmetryGenerator] = field(default_factory=list)
    exact_solution: Optional[Callable] = None
    notes: str = ""
    params: dict = field(default_factory=dict)
    potential: Optional[Potential] = None

    @property
    def autonomous(self):
        return self.model.autonomous

    def generator(self, label):
        for g in self.generators:
            if g.label == label:
                return g
        raise KeyError(label)


def _time_translation(dim):
    return SymmetryGenerator(lambda t, q: 1.0, lambda t, q: np.zeros(dim), "time")


def _translation(direction, label="translation"):
    d = np.asarray(direction, dtype=float)
    return SymmetryGenerator(lambda t, q: 0.0, lambda t, q: d.copy(), label)


def _rotation():
    return SymmetryGenerator(lambda t, q: 0.0, lambda t, q: np.array([-q[1], q[0]]), "rotation")


def particle_model(potential, m=1.0, autonomous=False, label=None):
    """L(t, x, v) = m/2 v^2 - V(t, x) on the real line."""
    return LagrangianModel(
        dim=1,
        lag=lambda t, q, v: 0.5 * m * float(v[0]) ** 2 - potential.value(t, float(q[0])),
        d_t=lambda t, q, v: -potential.d_t(t, float(q[0])),
        d_q=lambda t, q, v: np.array([-potential.d_x(t, float(q[0]))]),
        d_v=lambda t, q, v: np.array([m * float(v[0])]),
        label=label or f"particle[{potential.label}]",
        autonomous=autonomous,
    )


def linear_potential():
    """V(t, x) = t x."""
    return Potential(lambda t, x: t * x, lambda t, x: x, lambda t, x: t, "tx")


def parametric_potential(k=1.0, eps=0.1):
    """V(t, x) = k/2 (1 + eps sin t) x^2."""
    return Potential(
        lambda t, x: 0.5 * k * (1 + eps * math.sin(t)) * x * x,
        lambda t, x: 0.5 * k * eps * math.cos(t) * x * x,
        lambda t, x: k * (1 + eps * math.sin(t)) * x,
        f"parametric(eps={eps})",
    )


def driven_potential(k=1.0, amplitude=0.1, omega=1.0):
    """V(t, x) = k/2 x^2 - A sin(omega t) x."""
    return Potential(
        lambda t, x: 0.5 * k * x * x - amplitude * math.sin(omega * t) * x,
        lambda t, x: -amplitude * omega * math.cos(omega * t) * x,
        lambda t, x: k * x - amplitude * math.sin(omega * t),
        f"driven(A={amplitude})",
    )


POTENTIALS = {"parametric": parametric_potential, "linear": linear_potential, "driven": driven_potential}


def _free_particle(p):
    dim, m = int(p["dim"]), p["m"]
    model = LagrangianModel(
        dim=dim,
        lag=lambda t, q, v: 0.5 * m * float(v @ v),
        d_t=lambda t, q, v: 0.0,
        d_q=lambda t, q, v: np.zeros(dim),
        d_v=lambda t, q, v: m * v,
        label="free_particle",
        autonomous=True,
    )
    init = _initial(p, dim)

    def exact(t):
        return init.q0 + init.v0 * (t - init.t0), init.v0.copy()

    gens = [_time_translation(dim)] + [
        _translation(np.eye(dim)[i], "translation" if dim == 1 else f"translation_{i + 1}")
        for i in range(dim)
    ]
    return model, init, gens, exact, None, "L = m/2 |v|^2; degenerate time equation"


def _harmonic_oscillator(p):
    m, k = p["m"], p["k"]
    model = LagrangianModel(
        dim=1,
        lag=lambda t, q, v: 0.5 * m * float(v[0]) ** 2 - 0.5 * k * float(q[0]) ** 2,
        d_t=lambda t, q, v: 0.0,
        d_q=lambda t, q, v: -k * q,
        d_v=lambda t, q, v: m * v,
        label="harmonic_oscillator",
        autonomous=True,
    )
    init = _initial(p, 1)
    w = math.sqrt(k / m)

    def exact(t):
        s = w * (t - init.t0)
        q0, v0 = init.q0, init.v0
        return q0 * math.cos(s) + v0 / w * math.sin(s), -q0 * w * math.sin(s) + v0 * math.cos(s)

    return model, init, [_time_translation(1)], exact, None, "L = m/2 v^2 - k/2 q^2"


def _td_oscillator(p):
    pot = parametric_potential(p["k"], p["eps"])
    model = particle_model(pot, p["m"], label="td_oscillator")
    return model, _initial(p, 1), [], None, pot, "L = m/2 v^2 - k/2 (1 + eps sin t) q^2"


def _forced_particle(p):
    name = p["potential"]
    if name not in POTENTIALS:
        raise ValidationError(f"unknown potential {name!r}; choose from {sorted(POTENTIALS)}",
                              "problem.potential")
    if name == "linear":
        pot = linear_potential()
    elif name == "parametric":
        pot = parametric_potential(p["k"], p["eps"])
    else:
        pot = driven_potential(p["k"], p["amplitude"], p["omega"])
    model = particle_model(pot, p["m"], label=f"forced_particle[{pot.label}]")
    return model, _initial(p, 1), [], None, pot, "L = m/2 v^2 - V(t, x)"


def _central_force_2d(p):
    mu = p["mu"]

    def r(q):
        return math.hypot(q[0], q[1])

    model = LagrangianModel(
        dim=2,
        lag=lambda t, q, v: 0.5 * float(v @ v) + mu / r(q),
        d_t=lambda t, q, v: 0.0,
        d_q=lambda t, q, v: -mu * q / r(q) ** 3,
        d_v=lambda t, q, v: v.copy(),
        label="central_force_2d",
        autonomous=True,
    )
    gens = [_rotation(), _time_translation(2)]
    return model, _initial(p, 2), gens, None, None, "Kepler problem L = |v|^2/2 + mu/|q|"


def _two_body_1d(p):
    m1, m2, k, rest = p["m1"], p["m2"], p["k"], p["rest_length"]
    masses = np.array([m1, m2])

    def stretch(q):
        return float(q[1] - q[0]) - rest

    model = LagrangianModel(
        dim=2,
        lag=lambda t, q, v: 0.5 * float(masses @ (v * v)) - 0.5 * k * stretch(q) ** 2,
        d_t=lambda t, q, v: 0.0,
        d_q=lambda t, q, v: k * stretch(q) * np.array([1.0, -1.0]),
        d_v=lambda t, q, v: masses * v,
        label="two_body_1d",
        autonomous=True,
    )
    gens = [_translation([1.0, 1.0]), _time_translation(2)]
    return model, _initial(p, 2), gens, None, None, "two masses on a line joined by a spring"


def _initial(p, dim):
    q0 = as_vector(p["q0"], dim, "problem.q0")
    v0 = as_vector(p["v0"], dim, "problem.v0")
    return InitialCondition(float(p["t0"]), q0, v0, float(p["h0"]))


_COMMON = {"t0": 0.0, "h0": 0.1}

_REGISTRY = {
    "free_particle": (_free_particle, {"dim": 1, "m": 1.0, "q0": [0.0], "v0": [1.0]}),
    "harmonic_oscillator": (_harmonic_oscillator, {"m": 1.0, "k": 1.0, "q0": [1.0], "v0": [0.0]}),
    "td_oscillator": (_td_oscillator, {"m": 1.0, "k": 1.0, "eps": 0.1, "q0": [1.0], "v0": [0.0]}),
    "forced_particle": (_forced_particle, {
        "m": 1.0, "potential": "parametric", "k": 1.0, "eps": 0.1, "amplitude": 0.1,
        "omega": 1.0, "q0": [1.0], "v0": [0.0]}),
    "central_force_2d": (_central_force_2d, {
        "mu": 1.0, "q0": [1.0, 0.0], "v0": [0.0, 1.1], "h0": 0.05}),
    "two_body_1d": (_two_body_1d, {
        "m1": 1.0, "m2": 2.0, "k": 1.0, "rest_length": 1.0,
        "q0": [0.0, 1.5], "v0": [0.3, -0.1]}),
}


def problem_names():
    return sorted(_REGISTRY)


def default_params(name):
    if name not in _REGISTRY:
        raise UnknownProblem(f"unknown problem {name!r}; known: {', '.join(problem_names())}")
    params = dict(_COMMON)
    params.update(_REGISTRY[name][1])
    return params


def builtin(name, **overrides):
    """Construct a built-in ``ProblemSpec``; keyword overrides replace defaults."""
    params = default_params(name)
    for key, value in overrides.items():
        if key not in params:
            raise ValidationError(f"unknown parameter for {name}", f"problem.{key}")
        params[key] = value
    if name == "free_particle" and "dim" in overrides:
        dim = int(params["dim"])
        for key in ("q0", "v0"):
            if key not in overrides:
                params[key] = [params[key][0]] * dim
    factory = _REGISTRY[name][0]
    model, init, gens, exact, pot, notes = factory(params)
    return ProblemSpec(name, model, init, gens, exact, notes, params, pot)


def paper_example_residual(potential, window, m=1.0):
    """Residuals of the hand-written midpoint scheme for L = m/2 v^2 - V(t, x).

    Returns ``(position, energy)``, each written as left side minus right side:

        m (v_k - v_{k-1}) + 1/2 [h_k V_x(k) + h_{k-1} V_x(k-1)]
        E_L(k) - E_L(k-1) - 1/2 [h_k V_t(k) + h_{k-1} V_t(k-1)]

    where every V, V_x, V_t and E_L = m/2 v^2 + V is taken at the segment
    midpoint (t_mid, x_mid).
    """
    t0, q0, t1, q1, t2, q2 = window
    q0, q1, q2 = (float(np.asarray(q).reshape(-1)[0]) for q in (q0, q1, q2))
    h_prev, h_next = t1 - t0, t2 - t1
    if not (h_prev > 0 and h_next > 0):
        raise NonMonotoneTime("non-increasing window times")
    v_prev, v_next = (q1 - q0) / h_prev, (q2 - q1) / h_next
    tm_prev, xm_prev = 0.5 * (t0 + t1), 0.5 * (q0 + q1)
    tm_next, xm_next = 0.5 * (t1 + t2), 0.5 * (q1 + q2)

    position = m * (v_next - v_prev) + 0.5 * (
        h_next * potential.d_x(tm_next, xm_next) + h_prev * potential.d_x(tm_prev, xm_prev))
    e_next = 0.5 * m * v_next ** 2 + potential.value(tm_next, xm_next)
    e_prev = 0.5 * m * v_prev ** 2 + potential.value(tm_prev, xm_prev)
    energy = e_next - e_prev - 0.5 * (
        h_next * potential.d_t(tm_next, xm_next) + h_prev * potential.d_t(tm_prev, xm_prev))
    return np.array([position, energy])
