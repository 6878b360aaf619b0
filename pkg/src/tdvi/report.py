"""Post-run geometric diagnostics of a trajectory."""

import numpy as np

from .diagnostics import (
    FD_STEP,
    adaptive_flow,
    fixed_flow,
    invariance_defect,
    kmo_flow,
    symplecticity_defect,
)
from .discretization import midpoint_discretize

FLOWS = {"adaptive": (adaptive_flow, "full"), "fixed": (fixed_flow, "config"), "kmo": (kmo_flow, "full")}


def diagnostics_report(problem, traj, solver_cfg=None, every=10, generators=None):
    """Symplecticity defects at every ``every``-th window plus momentum and energy summaries."""
    Ld = midpoint_discretize(problem.model)
    make_flow, coords = FLOWS[traj.mode]
    flow = make_flow(Ld, solver_cfg)
    gens = problem.generators if generators is None else generators

    samples = []
    for k in range(0, traj.n_segments - 1, every):
        try:
            defect = symplecticity_defect(Ld, flow, traj.segment(k), coords=coords)
        except Exception as exc:  # noqa: BLE001 - reported, not fatal
            samples.append({"segment": k, "defect": None, "error": f"{type(exc).__name__}: {exc}"})
            continue
        samples.append({"segment": k, "defect": defect})
    defects = [s["defect"] for s in samples if s["defect"] is not None]

    momentum = {}
    for g in gens:
        series = np.asarray(traj.momentum_series.get(g.label, []), dtype=float)
        inv = [invariance_defect(Ld, traj.segment(k), g) for k in range(0, traj.n_segments, max(1, every))]
        momentum[g.label] = {
            "max_invariance_defect": float(np.max(np.abs(inv))) if inv else None,
            "max_deviation": float(np.max(np.abs(series - series[0]))) if series.size else None,
        }

    residuals = np.asarray(traj.energy_residual_series[1:], dtype=float)
    energies = np.asarray(traj.Ed_series, dtype=float)
    return {
        "problem": problem.name,
        "mode": traj.mode,
        "segments": traj.n_segments,
        "symplecticity": {
            "coords": coords,
            "fd_step": FD_STEP,
            "samples": samples,
            "max_defect": max(defects) if defects else None,
        },
        "momentum": momentum,
        "max_energy_residual": float(np.max(np.abs(residuals))) if residuals.size else None,
        "energy_drift": float(np.max(np.abs(energies - energies[0]))) if energies.size else None,
        "boundary_energies": list(traj.boundary_energies) if traj.boundary_energies else None,
        "failure": None if traj.failure is None else vars(traj.failure),
    }
