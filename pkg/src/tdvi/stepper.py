"""
Discrete Euler-Lagrange residuals and Newton steps of the discrete flow.

Three step flavours are provided:

* ``step_adaptive`` solves for (t_{k+1}, q_{k+1}), so the time step is a
  dynamical unknown fixed by the discrete energy-balance equation;
* ``step_fixed`` solves only the position equations on a prescribed grid;
* ``kmo_step`` solves the autonomous energy-conserving system in the
  variables (h_k, q_{k+1}).

Residual vectors put the time entry first and the n position entries after
it, matching the global (t, q) coordinate order.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .discretization import (
    DEGENERACY_RTOL,
    DiscreteLagrangian,
    SegmentState,
    check_step,
    grad_blocks,
    segment_energy,
    weighted_grad,
)
from .errors import (
    EvaluationError,
    NewtonDivergence,
    NonMonotoneTime,
    SingularJacobian,
    ValidationError,
)
from .lagrangian import FD_EPS, as_vector, reference_solve

MAX_HALVINGS = 30


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton_iters: int = 50
    # step scale of the central-difference Newton matrix
    fd_eps: float = float(np.finfo(float).eps ** (1.0 / 3.0))
    min_h: float = 1e-8
    max_h: float = 1e2
    damping: bool = True

    def __post_init__(self):
        if not (self.newton_tol > 0 and math.isfinite(self.newton_tol)):
            raise ValidationError("must be a positive finite number", "solver.newton_tol")
        if int(self.max_newton_iters) != self.max_newton_iters or self.max_newton_iters < 1:
            raise ValidationError("must be a positive integer", "solver.max_newton_iters")
        if not (self.fd_eps > 0 and self.fd_eps < 1):
            raise ValidationError("must lie in (0, 1)", "solver.fd_eps")
        if not (0 < self.min_h < self.max_h):
            raise ValidationError("bounds must satisfy 0 < min_h < max_h", "solver.min_h")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class StepStats:
    iterations: int = 0
    final_residual: float = 0.0
    jacobian_condition_estimate: float = float("nan")
    backtracks: int = 0


class Window(NamedTuple):
    """Three consecutive points (t_{k-1}, q_{k-1}), (t_k, q_k), (t_{k+1}, q_{k+1})."""

    t0: float
    q0: np.ndarray
    t1: float
    q1: np.ndarray
    t2: float
    q2: np.ndarray

    @classmethod
    def from_segments(cls, prev, nxt):
        return cls(prev.t0, prev.q0, prev.t1, prev.q1, nxt.t1, nxt.q1)

    def segments(self):
        return (SegmentState(self.t0, self.q0, self.t1, self.q1),
                SegmentState(self.t1, self.q1, self.t2, self.q2))

    def reversed(self):
        """Mirror the window in time about its centre, t -> t0 + t2 - t."""
        c = self.t0 + self.t2
        return Window(c - self.t2, self.q2, c - self.t1, self.q1, c - self.t0, self.q0)


def _window(window):
    if isinstance(window, Window):
        return window
    return Window(*window)


def del_residual(Ld, window):
    """Discrete Euler-Lagrange residual at the centre point of ``window``.

    Entry 0 is the time equation
    ``h_k D1 L_d(k) - L_d(k) + h_{k-1} D3 L_d(k-1) + L_d(k-1)``; entries
    1..n are the position equation ``h_k D2 L_d(k) + h_{k-1} D4 L_d(k-1)``.
    """
    prev, nxt = _window(window).segments()
    m = 1 + Ld.dim
    return weighted_grad(Ld, nxt)[:m] + weighted_grad(Ld, prev)[m:]


def energy_form_residual(Ld, window):
    """(E_d(k) - E_d(k-1)) / h_k + dL_d/dt at fixed step, on segment k.

    Multiplied by h_k this equals the time entry of ``del_residual``.
    """
    prev, nxt = _window(window).segments()
    g = grad_blocks(Ld, nxt)
    return (segment_energy(Ld, nxt) - segment_energy(Ld, prev)) / nxt.h + (g.d1 + g.d3)


# -- Newton machinery ----------------------------------------------------


def _fd_jacobian(F, x, r0, steps):
    J = np.empty((len(r0), len(x)))
    for j in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[j] += steps[j]
        xm[j] -= steps[j]
        J[:, j] = (F(xp) - F(xm)) / (2 * steps[j])
    return J


def _newton(F, x0, cfg, step_sizes, tol=None):
    """Damped Newton on F(x) = 0 with a central-difference Newton matrix.

    The Newton matrix is formed and rank-checked before the convergence
    test, so an exact initial guess still reports a singular system.
    """
    tol = cfg.newton_tol if tol is None else tol
    stats = StepStats()
    x = np.array(x0, dtype=float)
    r = F(x)
    norm = float(np.max(np.abs(r)))
    for it in range(cfg.max_newton_iters + 1):
        J = _fd_jacobian(F, x, r, step_sizes(x))
        if not np.all(np.isfinite(J)):
            raise EvaluationError("non-finite Newton matrix", x.tolist())
        sv = np.linalg.svd(J, compute_uv=False)
        if not sv[-1] > DEGENERACY_RTOL * sv[0]:
            raise SingularJacobian(
                f"rank-deficient Newton matrix (singular values {sv.tolist()})")
        stats.jacobian_condition_estimate = float(sv[0] / sv[-1])
        stats.iterations = it
        dx = np.linalg.solve(J, -r)
        if norm <= tol:
            # one polishing correction with the matrix already at hand
            try:
                r_new = F(x + dx)
                n_new = float(np.max(np.abs(r_new)))
                if n_new < norm:
                    x, r, norm = x + dx, r_new, n_new
            except (NonMonotoneTime, EvaluationError):
                pass
            stats.final_residual = norm
            return x, stats
        if it == cfg.max_newton_iters:
            break
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = x + lam * dx
            try:
                r_trial = F(trial)
                n_trial = float(np.max(np.abs(r_trial)))
                ok = np.isfinite(n_trial)
            except (NonMonotoneTime, EvaluationError):
                if not cfg.damping:
                    raise
                ok = False
            if not cfg.damping or (ok and n_trial < norm):
                break
            lam *= 0.5
            stats.backtracks += 1
        else:
            stats.final_residual = norm
            raise NewtonDivergence(
                f"line search failed after {MAX_HALVINGS} halvings (residual {norm:.3e})")
        x, r, norm = trial, r_trial, n_trial
    stats.final_residual = norm
    raise NewtonDivergence(
        f"no convergence in {cfg.max_newton_iters} iterations (residual {norm:.3e})")


def _check_bounds(h, cfg):
    if not (cfg.min_h <= h <= cfg.max_h):
        raise NonMonotoneTime(f"time step {h!r} outside [{cfg.min_h}, {cfg.max_h}]")


def _position_predictor(Ld, prev, t_next, cfg):
    q_lin = 2 * prev.q1 - prev.q0
    try:
        return step_fixed(Ld, prev, t_next, cfg.replace(max_newton_iters=10))[0]
    except (NewtonDivergence, SingularJacobian, NonMonotoneTime, EvaluationError):
        return q_lin


def step_adaptive(Ld, prev, cfg=None, guess=None, tol=None):
    """Advance the discrete flow: solve for (t_{k+1}, q_{k+1}) given ``prev``.

    The predictor keeps the previous step, t_{k+1} = t_k + h_{k-1}, and
    takes q_{k+1} from the position equations at that time (started from
    linear extrapolation), unless ``guess = (t_next, q_next)`` is given.
    """
    cfg = cfg or SolverConfig()
    n = Ld.dim
    tk, qk = prev.t1, prev.q1
    if guess is None:
        t_guess = tk + prev.h
        x0 = np.concatenate(([t_guess], _position_predictor(Ld, prev, t_guess, cfg)))
    else:
        x0 = np.concatenate(([guess[0]], as_vector(guess[1], n)))

    def F(x):
        return del_residual(Ld, Window(prev.t0, prev.q0, tk, qk, x[0], x[1:]))

    def sizes(x):
        steps = cfg.fd_eps * np.maximum(1.0, np.abs(x))
        steps[0] = min(steps[0], 0.25 * (x[0] - tk))
        return steps

    x, stats = _newton(F, x0, cfg, sizes, tol)
    _check_bounds(x[0] - tk, cfg)
    return SegmentState(tk, qk, x[0], x[1:]), stats


def step_fixed(Ld, prev, t_next, cfg=None, tol=None):
    """Solve the position equations for q_{k+1} at the prescribed time ``t_next``."""
    cfg = cfg or SolverConfig()
    tk, qk = prev.t1, prev.q1
    check_step(t_next - tk, "fixed step")
    x0 = qk + (qk - prev.q0) * ((t_next - tk) / prev.h)

    def F(q):
        return del_residual(Ld, Window(prev.t0, prev.q0, tk, qk, t_next, q))[1:]

    def sizes(x):
        return cfg.fd_eps * np.maximum(1.0, np.abs(x))

    q, stats = _newton(F, x0, cfg, sizes, tol)
    return q, stats


class AutonomousLagrangian:
    """A discrete Lagrangian depending on time only through the step: L(q0, q1, h).

    ``grad`` returns ``(dL/dq0, dL/dq1, dL/dh)``; it is analytic when built
    from a ``DiscreteLagrangian`` with an analytic gradient, and central
    differences otherwise.
    """

    def __init__(self, dim, func, grad=None, fd_eps=FD_EPS):
        self.dim = dim
        self.func = func
        self._grad = grad
        self.fd_eps = fd_eps

    @classmethod
    def from_discrete(cls, Ld, t_ref=0.0):
        def func(q0, q1, h):
            return Ld(t_ref, q0, t_ref + h, q1)

        grad = None
        if Ld.analytic_grad is not None:
            def grad(q0, q1, h):
                g = grad_blocks(Ld, SegmentState(t_ref, q0, t_ref + h, q1))
                return g.d2, g.d4, g.d3
        return cls(Ld.dim, func, grad, Ld.fd_eps)

    def __call__(self, q0, q1, h):
        check_step(h, "autonomous discrete Lagrangian")
        return float(self.func(as_vector(q0, self.dim), as_vector(q1, self.dim), float(h)))

    def grad(self, q0, q1, h):
        q0 = as_vector(q0, self.dim)
        q1 = as_vector(q1, self.dim)
        check_step(h, "autonomous discrete Lagrangian")
        if self._grad is not None:
            g0, g1, gh = self._grad(q0, q1, h)
            return as_vector(g0, self.dim), as_vector(g1, self.dim), float(gh)
        x = np.concatenate((q0, q1, [h]))
        steps = self.fd_eps * np.maximum(1.0, np.abs(x))
        steps[-1] = min(steps[-1], 0.25 * h)
        g = np.empty_like(x)
        n = self.dim
        for i in range(len(x)):
            xp = x.copy()
            xm = x.copy()
            xp[i] += steps[i]
            xm[i] -= steps[i]
            g[i] = (self(xp[:n], xp[n:2 * n], xp[-1]) - self(xm[:n], xm[n:2 * n], xm[-1])) / (2 * steps[i])
        return g[:n], g[n:2 * n], float(g[-1])

    def energy(self, q0, q1, h):
        """E_d = -L - h dL/dh."""
        return -self(q0, q1, h) - h * self.grad(q0, q1, h)[2]


def kmo_residual(Lbar, q_prev, q_k, h_prev, q_next, h_k):
    """Energy-conservation entry followed by the n position entries."""
    _, d2_prev, _ = Lbar.grad(q_prev, q_k, h_prev)
    d1_next, _, _ = Lbar.grad(q_k, q_next, h_k)
    energy = Lbar.energy(q_k, q_next, h_k) - Lbar.energy(q_prev, q_k, h_prev)
    return np.concatenate(([energy], h_k * d1_next + h_prev * d2_prev))


def kmo_step(Lbar, prev, cfg=None, tol=None):
    """Energy-momentum step for autonomous discrete Lagrangians.

    ``prev = (q_{k-1}, q_k, h_{k-1})``; returns ``(q_{k+1}, h_k, stats)``.
    """
    cfg = cfg or SolverConfig()
    if isinstance(Lbar, DiscreteLagrangian):
        Lbar = AutonomousLagrangian.from_discrete(Lbar)
    elif not isinstance(Lbar, AutonomousLagrangian):
        raise TypeError("kmo_step needs an AutonomousLagrangian or DiscreteLagrangian")
    n = Lbar.dim
    q_prev = as_vector(prev[0], n)
    q_k = as_vector(prev[1], n)
    h_prev = float(prev[2])
    check_step(h_prev, "kmo step")
    def F(x):
        return kmo_residual(Lbar, q_prev, q_k, h_prev, x[1:], x[0])

    # predictor: position equations at h_k = h_{k-1}
    q_guess = 2 * q_k - q_prev
    try:
        q_guess, _ = _newton(lambda q: F(np.concatenate(([h_prev], q)))[1:], q_guess,
                             cfg.replace(max_newton_iters=10),
                             lambda q: cfg.fd_eps * np.maximum(1.0, np.abs(q)))
    except (NewtonDivergence, SingularJacobian, NonMonotoneTime, EvaluationError):
        pass
    x0 = np.concatenate(([h_prev], q_guess))

    def sizes(x):
        steps = cfg.fd_eps * np.maximum(1.0, np.abs(x))
        steps[0] = min(steps[0], 0.25 * x[0])
        return steps

    x, stats = _newton(F, x0, cfg, sizes, tol)
    _check_bounds(x[0], cfg)
    return x[1:], float(x[0]), stats


def initialize(model, Ld, t0, q0, v0, h0, cfg=None):
    """First segment (t0, q0, t0 + h0, q1) with q1 from the RK4 reference solver."""
    cfg = cfg or SolverConfig()
    _check_bounds(h0, cfg)
    substeps = max(64, int(math.ceil(h0 / 1e-3)))
    path = reference_solve(model, t0, q0, v0, t0 + h0, substeps)
    return SegmentState(t0, as_vector(q0, model.dim), t0 + h0, path[-1][1])
