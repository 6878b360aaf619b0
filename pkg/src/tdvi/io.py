"""
Run configuration and trajectory serialization.

Configuration files are line oriented, one ``key=value`` per line, with
dotted section prefixes::

    problem=harmonic_oscillator
    problem.k=2.0
    problem.q0=1.0
    mode=adaptive
    n_steps=200
    solver.newton_tol=1e-10
    diagnostics.symplecticity_every=10
    diagnostics.generators=time
    output.path=ho.csv
    output.format=csv

Blank lines and lines starting with ``#`` are ignored.
"""

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ParseError, ValidationError
from .problems import builtin, default_params
from .stepper import SolverConfig, StepStats
from .trajectory import MODES, Failure, Trajectory

FORMATS = ("csv", "json")
_SOLVER_KEYS = {f.name for f in dataclasses.fields(SolverConfig)}
_TOP_KEYS = {"problem", "mode", "n_steps"}
_DIAG_KEYS = {"symplecticity_every", "generators"}
_OUTPUT_KEYS = {"path", "format"}


@dataclass
class RunConfig:
    problem: str
    problem_params: dict = field(default_factory=dict)
    mode: str = "fixed"
    n_steps: int = 100
    solver: SolverConfig = field(default_factory=SolverConfig)
    symplecticity_every: int = 10
    # None selects every generator the problem carries
    generators: Optional[List[str]] = None
    output_path: Optional[str] = None
    output_format: str = "csv"

    def build_problem(self):
        return builtin(self.problem, **self.problem_params)

    def selected_generators(self, problem):
        if self.generators is None:
            return list(problem.generators)
        return [problem.generator(label) for label in self.generators]


def _as_bool(text, key):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"expected a boolean, got {text!r}", key)


def _as_number(text, kind, key):
    try:
        value = kind(text)
    except ValueError:
        raise ValidationError(f"expected {kind.__name__}, got {text!r}", key) from None
    if kind is float and not math.isfinite(value):
        raise ValidationError("must be finite", key)
    return value


def _coerce_like(default, text, key):
    if isinstance(default, bool):
        return _as_bool(text, key)
    if isinstance(default, int):
        return _as_number(text, int, key)
    if isinstance(default, float):
        return _as_number(text, float, key)
    if isinstance(default, (list, tuple)):
        return [_as_number(part.strip(), float, key) for part in text.split(",") if part.strip()]
    return text.strip()


def _read_pairs(text):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("empty key", lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", lineno)
        pairs[key] = (value, lineno)
    return pairs


def parse_config(text):
    """Parse and validate a key=value run configuration."""
    pairs = _read_pairs(text)
    if "problem" not in pairs:
        raise ValidationError("required key missing", "problem")
    name = pairs["problem"][0]
    defaults = default_params(name)

    cfg = RunConfig(problem=name)
    solver = {}
    for key, (value, lineno) in pairs.items():
        section, _, sub = key.partition(".")
        if key in _TOP_KEYS:
            if key == "mode":
                if value not in MODES:
                    raise ValidationError(f"must be one of {', '.join(MODES)}", key)
                cfg.mode = value
            elif key == "n_steps":
                cfg.n_steps = _as_number(value, int, key)
                if cfg.n_steps < 1:
                    raise ValidationError("must be a positive integer", key)
        elif section == "problem" and sub:
            if sub not in defaults:
                raise ValidationError(f"unknown parameter for {name}", key)
            cfg.problem_params[sub] = _coerce_like(defaults[sub], value, key)
        elif section == "solver" and sub in _SOLVER_KEYS:
            default = getattr(SolverConfig, sub)
            solver[sub] = _coerce_like(default, value, key)
        elif section == "diagnostics" and sub in _DIAG_KEYS:
            if sub == "symplecticity_every":
                cfg.symplecticity_every = _as_number(value, int, key)
                if cfg.symplecticity_every < 1:
                    raise ValidationError("must be a positive integer", key)
            else:
                labels = [v.strip() for v in value.split(",") if v.strip()]
                cfg.generators = [] if labels == ["none"] else labels
        elif section == "output" and sub in _OUTPUT_KEYS:
            if sub == "format":
                if value not in FORMATS:
                    raise ValidationError(f"must be one of {', '.join(FORMATS)}", key)
                cfg.output_format = value
            else:
                cfg.output_path = value
        else:
            raise ValidationError(f"unknown key (line {lineno})", key)

    cfg.solver = SolverConfig(**solver)
    # resolve names now so that errors surface as configuration errors
    problem = cfg.build_problem()
    if cfg.mode == "kmo" and not problem.autonomous:
        raise ValidationError(f"kmo mode needs an autonomous problem; {name} is time dependent", "mode")
    if cfg.generators is not None:
        known = {g.label for g in problem.generators}
        for label in cfg.generators:
            if label not in known:
                raise ValidationError(f"unknown generator {label!r} for {name}", "diagnostics.generators")
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


# -- serialization -------------------------------------------------------


def fmt_float(x):
    return format(float(x), ".17g")


def csv_columns(traj):
    cols = ["k", "t"] + [f"q_{i + 1}" for i in range(traj.dim)]
    cols += ["h", "E_d", "energy_residual"]
    cols += [f"J_{label}" for label in traj.momentum_series]
    cols += ["newton_iters", "final_residual"]
    return cols


def csv_rows(traj):
    for k in range(traj.n_segments):
        t, q = traj.points[k]
        stats = traj.stats_series[k]
        row = [str(k), fmt_float(t)] + [fmt_float(x) for x in q]
        row += [fmt_float(traj.h_series[k]), fmt_float(traj.Ed_series[k]),
                fmt_float(traj.energy_residual_series[k])]
        row += [fmt_float(series[k]) for series in traj.momentum_series.values()]
        row += [str(stats.iterations), fmt_float(stats.final_residual)]
        yield row


def emit_csv(traj, sink):
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(csv_columns(traj))
    writer.writerows(csv_rows(traj))


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _unnum(x):
    return float("nan") if x is None else float(x)


def trajectory_to_dict(traj):
    n = traj.n_segments
    return {
        "problem": traj.problem,
        "mode": traj.mode,
        "dim": traj.dim,
        "columns": csv_columns(traj),
        "k": list(range(n)),
        "t": [_num(p[0]) for p in traj.points[:n]],
        "q": [[_num(x) for x in p[1]] for p in traj.points[:n]],
        "h": [_num(x) for x in traj.h_series],
        "E_d": [_num(x) for x in traj.Ed_series],
        "energy_residual": [_num(x) for x in traj.energy_residual_series],
        "J": {label: [_num(x) for x in s] for label, s in traj.momentum_series.items()},
        "newton_iters": [s.iterations for s in traj.stats_series],
        "final_residual": [_num(s.final_residual) for s in traj.stats_series],
        "jacobian_condition_estimate": [_num(s.jacobian_condition_estimate) for s in traj.stats_series],
        "backtracks": [s.backtracks for s in traj.stats_series],
        "points": [{"t": _num(t), "q": [_num(x) for x in q]} for t, q in traj.points],
        "boundary_energies": None if traj.boundary_energies is None
        else [_num(x) for x in traj.boundary_energies],
        "failure": None if traj.failure is None else dataclasses.asdict(traj.failure),
    }


def emit_json(traj, sink):
    json.dump(trajectory_to_dict(traj), sink, indent=1, allow_nan=False)
    sink.write("\n")


def emit(traj, fmt, sink):
    """Write ``traj`` to the text stream ``sink`` as CSV or JSON."""
    if fmt == "csv":
        emit_csv(traj, sink)
    elif fmt == "json":
        emit_json(traj, sink)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    sink.flush()


def trajectory_from_dict(data):
    traj = Trajectory(data["problem"], data["mode"], data["dim"])
    traj.points = [(_unnum(p["t"]), np.array([_unnum(x) for x in p["q"]])) for p in data["points"]]
    traj.h_series = [_unnum(x) for x in data["h"]]
    traj.Ed_series = [_unnum(x) for x in data["E_d"]]
    traj.energy_residual_series = [_unnum(x) for x in data["energy_residual"]]
    traj.momentum_series = {k: [_unnum(x) for x in v] for k, v in data["J"].items()}
    traj.stats_series = [
        StepStats(it, _unnum(res), _unnum(cond), bt)
        for it, res, cond, bt in zip(data["newton_iters"], data["final_residual"],
                                     data["jacobian_condition_estimate"], data["backtracks"])
    ]
    be = data.get("boundary_energies")
    traj.boundary_energies = None if be is None else tuple(_unnum(x) for x in be)
    fail = data.get("failure")
    traj.failure = None if fail is None else Failure(**fail)
    return traj


def load_trajectory_json(sink):
    return trajectory_from_dict(json.load(sink))
