"""
Continuous time-dependent Lagrangians L(t, q, v) on R x TQ with Q = R^n.

Partial derivatives are analytic when the model supplies them and central
finite differences otherwise.  ``reference_solve`` integrates the continuous
Euler-Lagrange equations with classical RK4 and serves as the oracle for
initialization and convergence studies.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateLagrangian, EvaluationError

FD_EPS = float(np.sqrt(np.finfo(float).eps))
FD_CHECK_TOL = 1e-6
# central differences of (analytic) first derivatives
HESS_EPS = float(np.finfo(float).eps ** (1.0 / 3.0))
HESS_RTOL = 1e-12


class ExtendedPoint(NamedTuple):
    """A point (t, q) of the extended configuration space R x Q."""

    t: float
    q: np.ndarray


def as_vector(x, dim=None, name="q"):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} must have length {dim}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class LagrangianModel:
    """A Lagrangian ``lag(t, q, v)`` with optional analytic partials.

    ``d_t`` returns a scalar, ``d_q`` and ``d_v`` return length-``dim``
    vectors.  ``autonomous`` declares that L does not depend on t.
    """

    dim: int
    lag: Callable
    d_t: Optional[Callable] = None
    d_q: Optional[Callable] = None
    d_v: Optional[Callable] = None
    label: str = "lagrangian"
    autonomous: bool = False
    fd_eps: float = FD_EPS

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")

    @property
    def has_analytic_partials(self):
        return self.d_t is not None and self.d_q is not None and self.d_v is not None

    def __call__(self, t, q, v):
        return eval_lagrangian(self, t, q, v)


def _probe(t, q, v):
    return (float(t), np.asarray(q).tolist(), np.asarray(v).tolist())


def eval_lagrangian(model, t, q, v):
    q = as_vector(q, model.dim, "q")
    v = as_vector(v, model.dim, "v")
    value = float(model.lag(float(t), q, v))
    if not np.isfinite(value):
        raise EvaluationError("non-finite Lagrangian value", _probe(t, q, v))
    return value


def _fd_steps(x, eps):
    return eps * np.maximum(1.0, np.abs(x))


def _fd_partials(model, t, q, v):
    eps = model.fd_eps
    ht = eps * max(1.0, abs(t))
    dt = (model.lag(t + ht, q, v) - model.lag(t - ht, q, v)) / (2 * ht)
    dq = np.empty(model.dim)
    dv = np.empty(model.dim)
    for x, out, which in ((q, dq, 0), (v, dv, 1)):
        steps = _fd_steps(x, eps)
        for i in range(model.dim):
            xp = x.copy()
            xm = x.copy()
            xp[i] += steps[i]
            xm[i] -= steps[i]
            if which == 0:
                out[i] = (model.lag(t, xp, v) - model.lag(t, xm, v)) / (2 * steps[i])
            else:
                out[i] = (model.lag(t, q, xp) - model.lag(t, q, xm)) / (2 * steps[i])
    return float(dt), dq, dv


def partials(model, t, q, v):
    """Return ``(dL/dt, dL/dq, dL/dv)`` at ``(t, q, v)``.

    Each missing analytic partial is replaced by central differences with
    step ``fd_eps * max(1, |x|)`` per component.
    """
    t = float(t)
    q = as_vector(q, model.dim, "q")
    v = as_vector(v, model.dim, "v")
    if model.has_analytic_partials:
        dt = float(model.d_t(t, q, v))
        dq = as_vector(model.d_q(t, q, v), model.dim, "d_q")
        dv = as_vector(model.d_v(t, q, v), model.dim, "d_v")
    else:
        fd_t, fd_q, fd_v = _fd_partials(model, t, q, v)
        dt = float(model.d_t(t, q, v)) if model.d_t is not None else fd_t
        dq = as_vector(model.d_q(t, q, v), model.dim) if model.d_q is not None else fd_q
        dv = as_vector(model.d_v(t, q, v), model.dim) if model.d_v is not None else fd_v
    if not (np.isfinite(dt) and np.all(np.isfinite(dq)) and np.all(np.isfinite(dv))):
        raise EvaluationError("non-finite Lagrangian derivative", _probe(t, q, v))
    return dt, dq, dv


def continuous_energy(model, t, q, v):
    """E_L = v . dL/dv - L."""
    v = as_vector(v, model.dim, "v")
    _, _, dv = partials(model, t, q, v)
    return float(v @ dv) - eval_lagrangian(model, t, q, v)


def check_partials(model, points=None, n_points=100, bound=10.0, seed=0):
    """Largest discrepancy between analytic and finite-difference partials.

    The discrepancy of each component is ``|a - f| / max(1, |f|)``.  Returns
    0.0 for models without any analytic partial.
    """
    if points is None:
        rng = np.random.default_rng(seed)
        points = [
            (rng.uniform(-bound, bound), rng.uniform(-bound, bound, model.dim),
             rng.uniform(-bound, bound, model.dim))
            for _ in range(n_points)
        ]
    worst = 0.0
    for t, q, v in points:
        q = as_vector(q, model.dim)
        v = as_vector(v, model.dim)
        fd_t, fd_q, fd_v = _fd_partials(model, float(t), q, v)
        pairs = [(model.d_t, fd_t), (model.d_q, fd_q), (model.d_v, fd_v)]
        for fn, fd in pairs:
            if fn is None:
                continue
            a = np.atleast_1d(np.asarray(fn(float(t), q, v), dtype=float))
            f = np.atleast_1d(fd)
            worst = max(worst, float(np.max(np.abs(a - f) / np.maximum(1.0, np.abs(f)))))
    return worst


def _dv(model, t, q, v):
    return partials(model, t, q, v)[2]


def velocity_derivatives(model, t, q, v):
    """Second derivatives of L involving v, by differencing dL/dv.

    Returns ``(L_vv, L_vt, L_vq)`` where ``L_vq[i, j] = d(dL/dv_i)/dq_j``.
    """
    n = model.dim
    L_vv = np.empty((n, n))
    L_vq = np.empty((n, n))
    for x, out, which in ((v, L_vv, "v"), (q, L_vq, "q")):
        steps = _fd_steps(x, HESS_EPS)
        for j in range(n):
            xp = x.copy()
            xm = x.copy()
            xp[j] += steps[j]
            xm[j] -= steps[j]
            if which == "v":
                out[:, j] = (_dv(model, t, q, xp) - _dv(model, t, q, xm)) / (2 * steps[j])
            else:
                out[:, j] = (_dv(model, t, xp, v) - _dv(model, t, xm, v)) / (2 * steps[j])
    if model.autonomous:
        L_vt = np.zeros(n)
    else:
        ht = HESS_EPS * max(1.0, abs(t))
        L_vt = (_dv(model, t + ht, q, v) - _dv(model, t - ht, q, v)) / (2 * ht)
    return L_vv, L_vt, L_vq


def acceleration(model, t, q, v):
    """Solve L_vv a = L_q - L_vt - L_vq v for the acceleration."""
    q = as_vector(q, model.dim, "q")
    v = as_vector(v, model.dim, "v")
    _, dq, _ = partials(model, t, q, v)
    L_vv, L_vt, L_vq = velocity_derivatives(model, t, q, v)
    sv = np.linalg.svd(L_vv, compute_uv=False)
    if not sv[-1] > HESS_RTOL * sv[0]:
        raise DegenerateLagrangian(f"singular velocity Hessian at t={t}: singular values {sv}")
    return np.linalg.solve(L_vv, dq - L_vt - L_vq @ v)


def reference_solve(model, t0, q0, v0, t_end, steps):
    """Integrate the continuous Euler-Lagrange equations with classical RK4.

    Returns the list of ``(t, q, v)`` at the ``steps + 1`` grid nodes.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    q = as_vector(q0, model.dim, "q0").copy()
    v = as_vector(v0, model.dim, "v0").copy()
    t0 = float(t0)
    dt = (float(t_end) - t0) / steps

    def rhs(t, q, v):
        return v, acceleration(model, t, q, v)

    out = [(t0, q.copy(), v.copy())]
    for i in range(steps):
        t = t0 + i * dt
        k1q, k1v = rhs(t, q, v)
        k2q, k2v = rhs(t + dt / 2, q + dt / 2 * k1q, v + dt / 2 * k1v)
        k3q, k3v = rhs(t + dt / 2, q + dt / 2 * k2q, v + dt / 2 * k2v)
        k4q, k4v = rhs(t + dt, q + dt * k3q, v + dt * k3v)
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise EvaluationError("non-finite state in reference solve", (t + dt, q.tolist(), v.tolist()))
        out.append((t0 + (i + 1) * dt, q.copy(), v.copy()))
    return out
