"""
Geometric diagnostics of the discrete flow: the boundary 1-forms, the
2-form they generate, flow Jacobians, symplecticity defects, boundary
energies and momentum maps.

Everything here is built by central finite differences with step
``FD_STEP * max(1, |x|)``, independently of any analytic gradient used by
the stepper.  Covectors and matrices on (R x Q)^2 use the coordinate order
(t0, q0, t1, q1).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discretization import SegmentState, grad_blocks, segment_energy
from .stepper import AutonomousLagrangian, SolverConfig, kmo_step, step_adaptive, step_fixed
from .lagrangian import acceleration

FD_STEP = 1e-6
PROBE_TOL = 1e-12


@dataclass(frozen=True)
class SymmetryGenerator:
    """Infinitesimal generator xi = xi_time d/dt + xi_config . d/dq on R x Q."""

    xi_time: Callable
    xi_config: Callable
    label: str

    def at(self, t, q):
        return np.concatenate(([float(self.xi_time(t, q))], np.asarray(self.xi_config(t, q), dtype=float)))


def theta_minus(Ld, s):
    """Theta^- = h D2 L_d dq0 + (h D1 L_d - L_d) dt0."""
    g = grad_blocks(Ld, s)
    h, L = s.h, Ld.value(s)
    zeros = np.zeros(1 + Ld.dim)
    return np.concatenate(([h * g.d1 - L], h * g.d2, zeros))


def theta_plus(Ld, s):
    """Theta^+ = h D4 L_d dq1 + (h D3 L_d + L_d) dt1; the dt1 entry is -E_d."""
    g = grad_blocks(Ld, s)
    h, L = s.h, Ld.value(s)
    zeros = np.zeros(1 + Ld.dim)
    return np.concatenate((zeros, [h * g.d3 + L], h * g.d4))


def _steps(x, eps, h):
    steps = eps * np.maximum(1.0, np.abs(x))
    n = (len(x) - 2) // 2
    # time probes must keep t1 > t0
    steps[0] = steps[1 + n] = min(steps[0], steps[1 + n], 0.25 * h)
    return steps


def form_jacobian(form, Ld, s, eps=FD_STEP):
    """G[i, j] = d(form_j)/dx_i by central differences."""
    x = s.as_vector()
    steps = _steps(x, eps, s.h)
    G = np.empty((len(x), len(x)))
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        G[i] = (form(Ld, SegmentState.from_vector(xp)) - form(Ld, SegmentState.from_vector(xm))) / (2 * steps[i])
    return G


def exterior_derivative(form, Ld, s, eps=FD_STEP):
    """Matrix A of d(form) with A[i, j] = d_i form_j - d_j form_i."""
    G = form_jacobian(form, Ld, s, eps)
    return G - G.T


def omega_matrix(Ld, s, eps=FD_STEP):
    """The 2-form Omega_d = d Theta^-, as an antisymmetric matrix."""
    return exterior_derivative(theta_minus, Ld, s, eps)


def weighted_action_gradient(Ld, s, eps=FD_STEP):
    """Central-difference gradient of the scalar (t1 - t0) L_d."""
    x = s.as_vector()
    steps = _steps(x, eps, s.h)
    g = np.empty_like(x)
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        sp, sm = SegmentState.from_vector(xp), SegmentState.from_vector(xm)
        g[i] = (sp.h * Ld.value(sp) - sm.h * Ld.value(sm)) / (2 * steps[i])
    return g


# -- flows ---------------------------------------------------------------


def adaptive_flow(Ld, cfg=None, tol=PROBE_TOL):
    cfg = cfg or SolverConfig()

    def step(s):
        return step_adaptive(Ld, s, cfg, tol=min(tol, cfg.newton_tol))[0]

    return step


def fixed_flow(Ld, cfg=None, tol=PROBE_TOL):
    """Fixed-grid flow; the next time is t1 + (t1 - t0)."""
    cfg = cfg or SolverConfig()

    def step(s):
        t_next = s.t1 + s.h
        q, _ = step_fixed(Ld, s, t_next, cfg, tol=min(tol, cfg.newton_tol))
        return SegmentState(s.t1, s.q1, t_next, q)

    return step


def kmo_flow(Ld, cfg=None, tol=PROBE_TOL):
    cfg = cfg or SolverConfig()
    Lbar = AutonomousLagrangian.from_discrete(Ld)

    def step(s):
        q, h, _ = kmo_step(Lbar, (s.q0, s.q1, s.h), cfg, tol=min(tol, cfg.newton_tol))
        return SegmentState(s.t1, s.q1, s.t1 + h, q)

    return step


def explicit_euler_flow(model):
    """Negative control: lagged explicit Euler map on segments.

    With v = (q1 - q0)/h taken as the velocity at t0, the velocity is
    advanced by one explicit Euler step and q2 = q1 + h v_new, t2 = t1 + h.
    """

    def step(s):
        h = s.h
        v = (s.q1 - s.q0) / h
        v_new = v + h * acceleration(model, s.t0, s.q0, v)
        return SegmentState(s.t1, s.q1, s.t1 + h, s.q1 + h * v_new)

    return step


def flow_jacobian(step, s, eps=FD_STEP):
    """Central-difference Jacobian of the segment map ``step`` at ``s``."""
    x = s.as_vector()
    steps = _steps(x, eps, s.h)
    J = np.empty((len(x), len(x)))
    for j in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[j] += steps[j]
        xm[j] -= steps[j]
        fp = step(SegmentState.from_vector(xp)).as_vector()
        fm = step(SegmentState.from_vector(xm)).as_vector()
        J[:, j] = (fp - fm) / (2 * steps[j])
    return J


def config_indices(dim):
    return np.concatenate((np.arange(1, 1 + dim), np.arange(2 + dim, 2 + 2 * dim)))


def symplecticity_defect(Ld, step, s, coords="full", eps=FD_STEP):
    """max |DPhi^T Omega(Phi(s)) DPhi - Omega(s)| over matrix entries.

    ``coords="config"`` restricts both the flow Jacobian and the 2-form to
    the (q0, q1) coordinates, which is the relevant statement for
    fixed-grid flows.
    """
    s_next = step(s)
    D = flow_jacobian(step, s, eps)
    W0 = omega_matrix(Ld, s, eps)
    W1 = omega_matrix(Ld, s_next, eps)
    if coords == "config":
        idx = config_indices(Ld.dim)
        D = D[np.ix_(idx, idx)]
        W0 = W0[np.ix_(idx, idx)]
        W1 = W1[np.ix_(idx, idx)]
    elif coords != "full":
        raise ValueError(f"coords must be 'full' or 'config', got {coords!r}")
    return float(np.max(np.abs(D.T @ W1 @ D - W0)))


def boundary_energies(Ld, points):
    """(Energy_t0, Energy_tN) of a trajectory given as (t, q) points.

    Energy_t0 adds h0 times the fixed-step time derivative of L_d on the
    first segment to its discrete energy; Energy_tN is the discrete energy
    of the last segment.
    """
    if len(points) < 2:
        raise ValueError("boundary energies need at least two points")
    (ta, qa), (tb, qb) = points[0], points[1]
    first = SegmentState(ta, qa, tb, qb)
    g = grad_blocks(Ld, first)
    e0 = first.h * (g.d1 + g.d3) + segment_energy(Ld, first)
    (ta, qa), (tb, qb) = points[-2], points[-1]
    eN = segment_energy(Ld, SegmentState(ta, qa, tb, qb))
    return float(e0), float(eN)


def momentum_map(Ld, s, gen):
    """<J_d, xi> = (L_d + h D3 L_d) xi_time(t1, q1) + h D4 L_d . xi_config(t1, q1)."""
    g = grad_blocks(Ld, s)
    h, L = s.h, Ld.value(s)
    xi = gen.at(s.t1, s.q1)
    return float((L + h * g.d3) * xi[0] + h * g.d4 @ xi[1:])


def invariance_defect(Ld, s, gen, eps=1e-5):
    """Central-difference derivative of (t1 - t0) L_d along the diagonal action of ``gen``."""
    xi = np.concatenate((gen.at(s.t0, s.q0), gen.at(s.t1, s.q1)))
    scale = max(1.0, float(np.max(np.abs(xi))))
    e = eps / scale
    x = s.as_vector()
    vals = []
    for sign in (1.0, -1.0):
        p = SegmentState.from_vector(x + sign * e * xi)
        vals.append(p.h * Ld.value(p))
    return float((vals[0] - vals[1]) / (2 * e))
