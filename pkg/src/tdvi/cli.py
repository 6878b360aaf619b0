"""Command-line entry points: run, diagnose, converge, list-problems.

Exit codes: 0 success, 2 configuration error, 3 solver failure (any
partial trajectory is still written).
"""

import argparse
import json
import os
import sys

from .errors import ParseError, UnknownProblem, ValidationError
from .io import emit, load_config
from .problems import builtin, default_params, problem_names
from .report import diagnostics_report
from .stepper import SolverConfig
from .trajectory import MODES, convergence_study, run_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _output_path(cfg):
    return cfg.output_path or f"{cfg.problem}_{cfg.mode}.{cfg.output_format}"


def _summary(traj, path):
    lines = [f"problem={traj.problem} mode={traj.mode} segments={traj.n_segments}"]
    if traj.n_segments:
        t_end, q_end = traj.points[-1]
        lines.append(f"t_end={t_end:.12g} q_end={[float(f'{x:.12g}') for x in q_end]}")
        lines.append(f"E_d first={traj.Ed_series[0]:.12g} last={traj.Ed_series[-1]:.12g}")
    if traj.boundary_energies:
        e0, eN = traj.boundary_energies
        lines.append(f"boundary energies: t0={e0:.12g} tN={eN:.12g}")
    if traj.failure:
        f = traj.failure
        lines.append(f"FAILED at step {f.step}: {f.kind}: {f.message}")
    lines.append(f"wrote {path}")
    return "\n".join(lines)


def _load(path, out):
    try:
        return load_config(path)
    except (ParseError, ValidationError, UnknownProblem) as exc:
        print(f"config error: {exc}", file=out)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=out)
    return None


def _run(args, out, diagnose=False):
    cfg = _load(args.config, out)
    if cfg is None:
        return EXIT_CONFIG
    problem = cfg.build_problem()
    traj = run_trajectory(problem, cfg.mode, cfg.solver, cfg.n_steps,
                          generators=cfg.selected_generators(problem))
    path = _output_path(cfg)
    with open(path, "w", newline="") as fh:
        emit(traj, cfg.output_format, fh)
    print(_summary(traj, path), file=out)
    if diagnose:
        report = diagnostics_report(problem, traj, cfg.solver, cfg.symplecticity_every,
                                    cfg.selected_generators(problem))
        report_path = os.path.splitext(path)[0] + ".diagnostics.json"
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=1)
            fh.write("\n")
        sym = report["symplecticity"]
        print(f"symplecticity ({sym['coords']} coordinates, {len(sym['samples'])} windows): "
              f"max defect={sym['max_defect']}", file=out)
        for label, m in report["momentum"].items():
            print(f"momentum J_{label}: max deviation={m['max_deviation']} "
                  f"max invariance defect={m['max_invariance_defect']}", file=out)
        print(f"max |energy residual|={report['max_energy_residual']} "
              f"E_d drift={report['energy_drift']}", file=out)
        print(f"wrote {report_path}", file=out)
    return EXIT_SOLVER if traj.failure else EXIT_OK


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"expected key=value, got {item!r}", "--param")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _converge(args, out):
    try:
        h_list = [float(x) for x in args.h.split(",") if x.strip()]
        defaults = default_params(args.problem)
        params = {}
        for key, text in _parse_params(args.param).items():
            if key not in defaults:
                raise ValidationError(f"unknown parameter for {args.problem}", f"problem.{key}")
            d = defaults[key]
            params[key] = [float(v) for v in text.split(",")] if isinstance(d, list) else type(d)(text)
        problem = builtin(args.problem, **params)
        if args.mode == "kmo" and not problem.autonomous:
            raise ValidationError("kmo mode needs an autonomous problem", "mode")
        study = convergence_study(problem, args.mode, h_list, args.t_end, SolverConfig())
    except (ValueError, UnknownProblem) as exc:
        print(f"config error: {exc}", file=out)
        return EXIT_CONFIG
    except Exception as exc:  # solver failures from strict runs
        print(f"solver failure: {type(exc).__name__}: {exc}", file=out)
        return EXIT_SOLVER
    print(f"problem={problem.name} mode={args.mode} t_end={args.t_end}", file=out)
    print("h,error", file=out)
    for h, e in zip(study.h_list, study.errors):
        print(f"{h:.17g},{e:.17g}", file=out)
    if study.exact:
        print("observed order: exact (all errors <= 1e-12)", file=out)
    else:
        print(f"observed order: {study.order:.6f}", file=out)
    return EXIT_OK


def _list_problems(out):
    for name in problem_names():
        p = builtin(name)
        kind = "autonomous" if p.autonomous else "time-dependent"
        gens = ",".join(g.label for g in p.generators) or "-"
        params = ", ".join(f"{k}={v}" for k, v in default_params(name).items())
        print(f"{name}: {p.notes} [{kind}; generators: {gens}]\n    {params}", file=out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="tdvi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "integrate a configured problem"),
                            ("diagnose", "integrate and report geometric diagnostics")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key=value run configuration file")
    p = sub.add_parser("converge", help="observed order of accuracy against the RK4 reference")
    p.add_argument("--problem", required=True)
    p.add_argument("--h", required=True, help='comma-separated decreasing step sizes, e.g. "0.1,0.05,0.025"')
    p.add_argument("--mode", default="fixed", choices=MODES)
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--param", action="append", help="problem parameter override key=value")
    sub.add_parser("list-problems", help="list the built-in problems")
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "run":
        return _run(args, out)
    if args.command == "diagnose":
        return _run(args, out, diagnose=True)
    if args.command == "converge":
        return _converge(args, out)
    return _list_problems(out)


if __name__ == "__main__":
    sys.exit(main())
