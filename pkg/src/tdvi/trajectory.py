"""Iterating the discrete flow and collecting per-step diagnostic series."""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .diagnostics import boundary_energies, momentum_map
from .discretization import SegmentState, midpoint_discretize, segment_energy
from .errors import ValidationError, VariationalError
from .lagrangian import reference_solve
from .stepper import (
    AutonomousLagrangian,
    SolverConfig,
    StepStats,
    Window,
    energy_form_residual,
    initialize,
    kmo_step,
    step_adaptive,
    step_fixed,
)

MODES = ("adaptive", "fixed", "kmo")
NAN = float("nan")


@dataclass
class Failure:
    step: int
    kind: str
    message: str


@dataclass
class Trajectory:
    """A discrete solution {(t_k, q_k)} with one diagnostic entry per segment.

    Segment k joins points k and k+1.  ``energy_residual_series[0]`` is NaN
    because no window is centred on the first point; ``stats_series[0]``
    describes the initialization, not a Newton solve.
    """

    problem: str
    mode: str
    dim: int
    points: List[tuple] = field(default_factory=list)
    h_series: List[float] = field(default_factory=list)
    Ed_series: List[float] = field(default_factory=list)
    energy_residual_series: List[float] = field(default_factory=list)
    momentum_series: dict = field(default_factory=dict)
    stats_series: List[StepStats] = field(default_factory=list)
    boundary_energies: Optional[tuple] = None
    failure: Optional[Failure] = None
    error: Optional[BaseException] = field(default=None, repr=False, compare=False)

    @property
    def times(self):
        return np.array([p[0] for p in self.points])

    @property
    def positions(self):
        return np.array([p[1] for p in self.points])

    @property
    def n_segments(self):
        return len(self.h_series)

    def segment(self, k):
        (ta, qa), (tb, qb) = self.points[k], self.points[k + 1]
        return SegmentState(ta, qa, tb, qb)

    def raise_for_failure(self):
        if self.error is not None:
            raise self.error


def run_trajectory(problem, mode="fixed", cfg=None, n_steps=100, sinks=(), generators=None,
                   h0=None, strict=False):
    """Iterate the discrete flow of the midpoint discretization of ``problem``.

    ``n_steps`` counts segments, so the result has ``n_steps + 1`` points
    on success.  The first segment comes from ``initialize``.  Step errors
    end the run: the partial trajectory is returned with ``failure`` set, or
    the error is re-raised (with ``step_index`` and ``trajectory``
    attributes) when ``strict`` is true.  Each sink is called as
    ``sink(traj, k)`` after segment k is recorded.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}", "mode")
    if mode == "kmo" and not problem.autonomous:
        raise ValidationError(f"kmo mode needs an autonomous problem; {problem.name} is time dependent", "mode")
    if n_steps < 1:
        raise ValidationError("must be positive", "n_steps")
    cfg = cfg or SolverConfig()
    model = problem.model
    Ld = midpoint_discretize(model)
    gens = problem.generators if generators is None else generators
    init = problem.initial
    h0 = init.h0 if h0 is None else h0

    traj = Trajectory(problem.name, mode, model.dim)
    traj.momentum_series = {g.label: [] for g in gens}

    def record(seg, stats, residual):
        if not traj.points:
            traj.points.append((seg.t0, seg.q0.copy()))
        traj.points.append((seg.t1, seg.q1.copy()))
        traj.h_series.append(seg.h)
        traj.Ed_series.append(segment_energy(Ld, seg))
        traj.energy_residual_series.append(residual)
        for g in gens:
            traj.momentum_series[g.label].append(momentum_map(Ld, seg, g))
        traj.stats_series.append(stats)
        for sink in sinks:
            sink(traj, len(traj.h_series) - 1)

    k = 0
    try:
        seg = initialize(model, Ld, init.t0, init.q0, init.v0, h0, cfg)
        record(seg, StepStats(), NAN)
        Lbar = AutonomousLagrangian.from_discrete(Ld) if mode == "kmo" else None
        for k in range(1, n_steps):
            if mode == "adaptive":
                nxt, stats = step_adaptive(Ld, seg, cfg)
            elif mode == "fixed":
                t_next = init.t0 + (k + 1) * h0
                q, stats = step_fixed(Ld, seg, t_next, cfg)
                nxt = SegmentState(seg.t1, seg.q1, t_next, q)
            else:
                q, h, stats = kmo_step(Lbar, (seg.q0, seg.q1, seg.h), cfg)
                nxt = SegmentState(seg.t1, seg.q1, seg.t1 + h, q)
            record(nxt, stats, energy_form_residual(Ld, Window.from_segments(seg, nxt)))
            seg = nxt
    except VariationalError as exc:
        exc.step_index = k
        exc.trajectory = traj
        traj.failure = Failure(k, exc.kind, str(exc))
        traj.error = exc
    if len(traj.points) >= 2:
        traj.boundary_energies = boundary_energies(Ld, traj.points)
    if strict:
        traj.raise_for_failure()
    return traj


@dataclass
class ConvergenceStudy:
    h_list: List[float]
    errors: List[float]
    order: float
    exact: bool


EXACT_TOL = 1e-12


def convergence_study(problem, mode="fixed", h_list=(0.1, 0.05, 0.025, 0.0125), t_end=2.0,
                      cfg=None, reference_steps=None):
    """End-state errors against the RK4 reference and their log-log slope.

    Fixed mode uses ``round((t_end - t0) / h)`` steps of size h.  Adaptive
    and kmo modes use h as the initial step and stop at the first point at
    or beyond ``t_end``; the reference is then solved up to that point.
    When every error is below 1e-12 the scheme is exact on the problem and
    the order is reported as NaN.
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("a convergence study needs at least three step sizes")
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("step sizes must be decreasing")
    init = problem.initial
    span = t_end - init.t0
    errors = []
    references = {}
    for h in h_list:
        if mode == "fixed":
            n = int(round(span / h))
            traj = run_trajectory(problem, "fixed", cfg, n_steps=n, generators=[], h0=h, strict=True)
        else:
            n = int(math.ceil(span / h * 2)) + 4
            traj = _run_until(problem, mode, cfg, h, t_end, n)
        t_N, q_N = traj.points[-1]
        key = round(t_N, 12)
        if key not in references:
            steps = reference_steps or max(2000, 8 * len(traj.points))
            references[key] = reference_solve(problem.model, init.t0, init.q0, init.v0, t_N, steps)[-1][1]
        ref = references[key]
        errors.append(float(np.max(np.abs(q_N - ref))))
    errs = np.array(errors)
    if np.all(errs <= EXACT_TOL):
        return ConvergenceStudy(h_list, errors, NAN, True)
    slope = np.polyfit(np.log(h_list), np.log(np.maximum(errs, 1e-300)), 1)[0]
    return ConvergenceStudy(h_list, errors, float(slope), False)


def _run_until(problem, mode, cfg, h, t_end, max_steps):
    traj = run_trajectory(problem, mode, cfg, n_steps=max_steps, generators=[], h0=h, strict=True)
    for i, (t, _) in enumerate(traj.points):
        if t >= t_end - 1e-12:
            traj.points = traj.points[:i + 1]
            return traj
    raise ValueError(f"{mode} run did not reach t_end={t_end} within {max_steps} steps")


def convergence_order(problem, mode="fixed", h_list=(0.1, 0.05, 0.025, 0.0125), t_end=2.0, cfg=None):
    """Observed order of accuracy; NaN when the scheme is exact on ``problem``."""
    return convergence_study(problem, mode, h_list, t_end, cfg).order
