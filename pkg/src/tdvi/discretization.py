"""
Discrete Lagrangians L_d(t0, q0, t1, q1) on (R x Q)^2.

Coordinates of a segment are always ordered (t0, q0, t1, q1).  The action of
a segment is weighted by its duration, ``(t1 - t0) * L_d``, and most
geometric quantities are built from the gradient of that weighted function.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import EvaluationError, NonMonotoneTime, ZeroTimeStep
from .lagrangian import FD_EPS, HESS_EPS, ExtendedPoint, LagrangianModel, as_vector, partials

DEGENERACY_RTOL = 1e-8


def check_step(h, where="segment"):
    if h == 0:
        raise ZeroTimeStep(f"zero time step in {where}")
    if not h > 0:
        raise NonMonotoneTime(f"non-increasing times in {where} (h={h!r})")


@dataclass(frozen=True, eq=False)
class SegmentState:
    """One segment (t0, q0, t1, q1) with t1 > t0."""

    t0: float
    q0: np.ndarray
    t1: float
    q1: np.ndarray

    def __post_init__(self):
        q0 = as_vector(self.q0, name="q0")
        q1 = as_vector(self.q1, len(q0), name="q1")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", q1)
        if not (np.isfinite(self.t0) and np.isfinite(self.t1)
                and np.all(np.isfinite(q0)) and np.all(np.isfinite(q1))):
            raise EvaluationError("non-finite segment", self.as_vector().tolist())
        check_step(self.t1 - self.t0)

    @property
    def dim(self):
        return len(self.q0)

    @property
    def h(self):
        return self.t1 - self.t0

    def as_vector(self):
        return np.concatenate(([self.t0], self.q0, [self.t1], self.q1))

    @classmethod
    def from_vector(cls, x, dim=None):
        x = np.asarray(x, dtype=float)
        n = (len(x) - 2) // 2 if dim is None else dim
        return cls(x[0], x[1:1 + n], x[1 + n], x[2 + n:2 + 2 * n])

    def shifted(self, dt):
        return SegmentState(self.t0 + dt, self.q0, self.t1 + dt, self.q1)

    def __repr__(self):
        return f"SegmentState(t0={self.t0!r}, q0={self.q0.tolist()}, t1={self.t1!r}, q1={self.q1.tolist()})"


class GradBlocks(NamedTuple):
    """The four blocks (D1, D2, D3, D4) of dL_d."""

    d1: float
    d2: np.ndarray
    d3: float
    d4: np.ndarray

    @property
    def bar1(self):
        """Covector on the (t0, q0) factor."""
        return np.concatenate(([self.d1], self.d2))

    @property
    def bar2(self):
        """Covector on the (t1, q1) factor."""
        return np.concatenate(([self.d3], self.d4))


@dataclass(frozen=True)
class DiscreteLagrangian:
    """An evaluable ``eval(t0, q0, t1, q1)`` with an optional analytic gradient.

    ``analytic_grad`` has the same signature and returns ``(D1, D2, D3, D4)``.
    """

    dim: int
    eval: Callable
    analytic_grad: Optional[Callable] = None
    source: Optional[LagrangianModel] = None
    fd_eps: float = FD_EPS
    label: str = field(default="")

    @property
    def autonomous(self):
        return self.source is not None and self.source.autonomous

    def __call__(self, t0, q0, t1, q1):
        check_step(t1 - t0)
        value = float(self.eval(float(t0), as_vector(q0, self.dim), float(t1), as_vector(q1, self.dim)))
        if not np.isfinite(value):
            raise EvaluationError("non-finite discrete Lagrangian", (t0, t1))
        return value

    def bar(self, t, x, h, y):
        """The step-parametrized form L_d(t, x, t + h, y)."""
        return self(t, x, t + h, y)

    def value(self, s):
        return self(s.t0, s.q0, s.t1, s.q1)


def midpoint_discretize(model):
    """L_d(t0, q0, t1, q1) = L((t0+t1)/2, (q0+q1)/2, (q1-q0)/(t1-t0))."""

    def ld(t0, q0, t1, q1):
        check_step(t1 - t0)
        return model.lag(0.5 * (t0 + t1), 0.5 * (q0 + q1), (q1 - q0) / (t1 - t0))

    grad = None
    if model.has_analytic_partials:
        def grad(t0, q0, t1, q1):
            h = t1 - t0
            check_step(h)
            v = (q1 - q0) / h
            lt, lq, lv = partials(model, 0.5 * (t0 + t1), 0.5 * (q0 + q1), v)
            pv = float(lv @ v) / h
            return 0.5 * lt + pv, 0.5 * lq - lv / h, 0.5 * lt - pv, 0.5 * lq + lv / h

    return DiscreteLagrangian(model.dim, ld, grad, source=model, fd_eps=model.fd_eps,
                              label=f"midpoint[{model.label}]")


def _fd_grad(Ld, s):
    x = s.as_vector()
    g = np.empty_like(x)
    steps = Ld.fd_eps * np.maximum(1.0, np.abs(x))
    # keep probes inside t1 > t0
    steps[0] = steps[1 + Ld.dim] = min(steps[0], steps[1 + Ld.dim], 0.25 * s.h)
    n = Ld.dim
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        fp = Ld(xp[0], xp[1:1 + n], xp[1 + n], xp[2 + n:])
        fm = Ld(xm[0], xm[1:1 + n], xm[1 + n], xm[2 + n:])
        g[i] = (fp - fm) / (2 * steps[i])
    return GradBlocks(float(g[0]), g[1:1 + n], float(g[1 + n]), g[2 + n:])


def grad_blocks(Ld, s, use_analytic=True):
    """The blocks (D1, D2, D3, D4) of dL_d at segment ``s``."""
    if Ld.analytic_grad is not None and use_analytic:
        d1, d2, d3, d4 = Ld.analytic_grad(s.t0, s.q0, s.t1, s.q1)
        g = GradBlocks(float(d1), as_vector(d2, Ld.dim), float(d3), as_vector(d4, Ld.dim))
    else:
        g = _fd_grad(Ld, s)
    if not (np.isfinite(g.d1) and np.isfinite(g.d3)
            and np.all(np.isfinite(g.d2)) and np.all(np.isfinite(g.d4))):
        raise EvaluationError("non-finite discrete Lagrangian gradient", s.as_vector().tolist())
    return g


def weighted_grad(Ld, s, use_analytic=True):
    """Gradient of (t1 - t0) * L_d in the order (t0, q0, t1, q1).

    The first 1+n entries are the (t0, q0) covector, the last 1+n the
    (t1, q1) covector.
    """
    g = grad_blocks(Ld, s, use_analytic)
    L = Ld.value(s)
    h = s.h
    return np.concatenate(([h * g.d1 - L], h * g.d2, [h * g.d3 + L], h * g.d4))


def barD12_matrix(Ld, s, eps=HESS_EPS):
    """Mixed block d^2[(t1 - t0) L_d] / d(t0, q0) d(t1, q1).

    Entry (i, j) differentiates the i-th (t0, q0) covector entry along the
    j-th (t1, q1) coordinate.
    """
    n = Ld.dim
    m = 1 + n
    y = np.concatenate(([s.t1], s.q1))
    steps = eps * np.maximum(1.0, np.abs(y))
    steps[0] = min(steps[0], 0.25 * s.h)
    out = np.empty((m, m))
    for j in range(m):
        yp = y.copy()
        ym = y.copy()
        yp[j] += steps[j]
        ym[j] -= steps[j]
        gp = weighted_grad(Ld, SegmentState(s.t0, s.q0, yp[0], yp[1:]))[:m]
        gm = weighted_grad(Ld, SegmentState(s.t0, s.q0, ym[0], ym[1:]))[:m]
        out[:, j] = (gp - gm) / (2 * steps[j])
    return out


def is_degenerate(matrix, rtol=DEGENERACY_RTOL):
    """Scale-free rank test: smallest singular value below rtol times the largest."""
    sv = np.linalg.svd(np.atleast_2d(matrix), compute_uv=False)
    return not sv[-1] > rtol * sv[0]


def discrete_energy(Ld, t, x, h, y):
    """E_d(t, x, h, y) = -L_d(t, x, t+h, y) - h * D3 L_d(t, x, t+h, y)."""
    check_step(h, "discrete energy")
    s = SegmentState(t, x, t + h, y)
    return -Ld.value(s) - h * grad_blocks(Ld, s).d3


def segment_energy(Ld, s):
    return discrete_energy(Ld, s.t0, s.q0, s.h, s.q1)


def _points(points, dim):
    out = []
    for p in points:
        t, q = p
        out.append(ExtendedPoint(float(t), as_vector(q, dim)))
    for a, b in zip(out, out[1:]):
        check_step(b.t - a.t, "trajectory")
    if len(out) < 2:
        raise ValueError("an action sum needs at least two points")
    return out


def action_sum(Ld, points):
    """Sum of (t_{k+1} - t_k) L_d(t_k, q_k, t_{k+1}, q_{k+1}) over the points."""
    pts = _points(points, Ld.dim)
    return float(sum((b.t - a.t) * Ld(a.t, a.q, b.t, b.q) for a, b in zip(pts, pts[1:])))


def action_gradient(Ld, points, eps=1e-6):
    """Central-difference derivatives of the action sum at the interior points.

    Returns an array of shape (N - 1, 1 + n): row k-1 holds d/dt_k followed
    by d/dq_k for interior point k.
    """
    pts = _points(points, Ld.dim)
    n = Ld.dim
    rows = []
    for k in range(1, len(pts) - 1):
        local = pts[k - 1:k + 2]
        row = np.empty(1 + n)
        for i in range(1 + n):
            vals = []
            for sign in (1.0, -1.0):
                t, q = local[1].t, local[1].q.copy()
                if i == 0:
                    step = eps * max(1.0, abs(t))
                    t = t + sign * step
                else:
                    step = eps * max(1.0, abs(q[i - 1]))
                    q[i - 1] += sign * step
                window = [local[0], ExtendedPoint(t, q), local[2]]
                vals.append(action_sum(Ld, window))
            row[i] = (vals[0] - vals[1]) / (2 * step)
        rows.append(row)
    return np.array(rows).reshape(len(rows), 1 + n)
