"""Command-line front end.

    haltflow run --machine halt3.tm --tape "[0]" --mode compactified
    haltflow predict --machine halt3.tm --tape "[0]"
    haltflow export --machine loop.tm --mode intrinsic --horizon 5 --export traj.csv
    haltflow check --machine bb-small.tm
    haltflow layout --machine halt3.tm > layout.json

Exit codes: 0 completed, 2 input or parse error, 3 validation failure,
4 numerical failure.  ``--config FILE`` reads ``key = value`` lines using the
long flag names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import sample_path, tm
from .checks import SuiteResult, run_suites
from .export import FORMATS, write_trajectory
from .integrate import METHODS, IntegratorConfig
from .machine import Layout, RecipeOverflow, validate_layout
from .runtime import MODES, System, predict_blowup_time, run_mode

EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _resolve_machine(path: str) -> Path:
    p = Path(path)
    if p.is_file():
        return p
    shipped = sample_path(p.name)
    if p.parent == Path(".") and shipped.is_file():
        return Path(str(shipped))
    raise CLIError(f"machine file not found: {path}", EXIT_INPUT)


def load_machine(path: str) -> tm.TMSpec:
    p = _resolve_machine(path)
    try:
        return tm.parse_tm(p.read_text(encoding="utf-8"))
    except tm.TMFormatError as e:
        raise CLIError(f"{p}: {e}", EXIT_INPUT) from e


def build_system(spec: tm.TMSpec, layout_path: str | None = None) -> System:
    layout = None
    if layout_path:
        try:
            layout = Layout.from_json(json.loads(Path(layout_path).read_text(encoding="utf-8")))
        except FileNotFoundError as e:
            raise CLIError(f"layout file not found: {layout_path}", EXIT_INPUT) from e
        except (KeyError, ValueError, TypeError) as e:
            raise CLIError(f"{layout_path}: malformed layout ({e})", EXIT_INPUT) from e
    try:
        system = System.build(spec, layout)
    except RecipeOverflow as e:
        raise CLIError(f"layout recipe overflow: {e}; supply a custom layout with --layout", EXIT_VALIDATION) from e
    return system


def _integrator(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(method=args.method, atol=args.tol_abs, rtol=args.tol_rel,
                                max_step=args.max_step)
    except ValueError as e:
        raise CLIError(str(e), EXIT_INPUT) from e


def _tapes(args, spec) -> list[tm.Tape]:
    out = []
    for lit in args.tape or ["[0]"]:
        try:
            out.append(tm.parse_tape(lit, spec.alphabet_size))
        except tm.TMFormatError as e:
            raise CLIError(str(e), EXIT_INPUT) from e
    return out


def _one_run(job):
    machine, layout_path, tape_literal, mode, horizon, threshold, cfg, record, stride = job
    spec = load_machine(machine)
    system = build_system(spec, layout_path)
    tape = tm.parse_tape(tape_literal, spec.alphabet_size)
    return run_mode(system, mode, tape, horizon, threshold, cfg, record, stride=stride)


def _export_path(base: str, index: int, count: int) -> Path:
    p = Path(base)
    if count == 1:
        return p
    return p.with_name(f"{p.stem}.{index}{p.suffix}")


def cmd_run(args, force_record: bool = False) -> int:
    spec = load_machine(args.machine)
    system = build_system(spec, args.layout)
    problems = validate_layout(system.layout)
    if problems:
        for v in problems:
            print(f"layout violation: {v}", file=sys.stderr)
        return EXIT_VALIDATION
    cfg = _integrator(args)
    tapes = _tapes(args, spec)
    if args.mode == "ambient":
        x0 = max(float((system.ambient_start(tm.initial(spec, t)) ** 2).sum()) ** 0.5 for t in tapes)
        if not args.threshold > x0:
            raise CLIError(f"--threshold must exceed |x0| = {x0:.6g}", EXIT_INPUT)
    record = bool(args.export) or force_record
    if force_record and not args.export:
        raise CLIError("export needs --export PATH", EXIT_INPUT)
    jobs = [(str(_resolve_machine(args.machine)), args.layout, t.literal(), args.mode, args.horizon,
             args.threshold, cfg, record, args.stride) for t in tapes]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_one_run, jobs))
    else:
        reports = [_one_run(j) for j in jobs]

    code = EXIT_OK
    lines = []
    for i, (tape, rep) in enumerate(zip(tapes, reports)):
        d = rep.as_dict()
        d["machine"] = Path(args.machine).name
        d["tape"] = tape.literal()
        if record:
            path = _export_path(args.export, i, len(reports))
            write_trajectory(path, rep.columns, rep.trajectory, args.format)
            d["export"] = str(path)
        lines.append(json.dumps(d, sort_keys=True))
        if rep.outcome == "StepSizeUnderflow":
            code = EXIT_NUMERIC
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    return code


def cmd_export(args) -> int:
    return cmd_run(args, force_record=True)


def cmd_predict(args) -> int:
    spec = load_machine(args.machine)
    for tape in _tapes(args, spec):
        p = predict_blowup_time(spec, tape, args.budget)
        if p.halts:
            print(f"{p.tau:g} (halts after {p.steps} steps; tape {tape.literal()})")
        else:
            print(f"no halt within budget of {p.budget} steps (tape {tape.literal()})")
    return EXIT_OK


def cmd_check(args) -> int:
    spec = load_machine(args.machine)
    system = build_system(spec, args.layout)
    problems = validate_layout(system.layout)
    if problems:
        print(SuiteResult("layout", False, [str(v) for v in problems]).line())
        return EXIT_VALIDATION
    ok = True
    for res in run_suites(system, seed=args.seed):
        print(res.line())
        ok &= res.passed
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_layout(args) -> int:
    spec = load_machine(args.machine)
    system = build_system(spec)
    print(json.dumps(system.layout.to_json(), indent=1, sort_keys=True))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="haltflow", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--machine", help="machine file (shipped samples may be named directly)")
        sp.add_argument("--config", help="key = value file with defaults for these flags")
        sp.add_argument("--layout", help="layout JSON to use instead of the default recipe")
        sp.add_argument("--seed", type=int, default=0)

    for name, func in (("run", cmd_run), ("export", cmd_export)):
        sp = sub.add_parser(name, help="integrate one mode" if name == "run" else "integrate and write the trajectory")
        common(sp)
        sp.add_argument("--tape", action="append", help='input tape such as "01[1]0" (repeatable)')
        sp.add_argument("--mode", choices=MODES, default="ambient")
        sp.add_argument("--horizon", type=float, default=100.0)
        sp.add_argument("--threshold", type=float, default=1e6, help="blow-up threshold for |x|")
        sp.add_argument("--method", choices=METHODS, default="dopri5")
        sp.add_argument("--tol-abs", type=float, default=1e-10)
        sp.add_argument("--tol-rel", type=float, default=1e-10)
        sp.add_argument("--max-step", type=float, default=1e-3)
        sp.add_argument("--export", help="trajectory output path")
        sp.add_argument("--format", choices=FORMATS, default="csv")
        sp.add_argument("--stride", type=int, default=1, help="keep every n-th accepted step")
        sp.add_argument("--report", help="also write the JSON report here")
        sp.add_argument("--jobs", type=int, default=1)
        sp.set_defaults(func=func)

    sp = sub.add_parser("predict", help="symbolic blow-up time n - 0.05")
    common(sp)
    sp.add_argument("--tape", action="append")
    sp.add_argument("--budget", type=int, default=10_000)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("check", help="run the invariant suites for a machine")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("layout", help="print the default layout as JSON")
    common(sp)
    sp.set_defaults(func=cmd_layout)
    return p


def _apply_config(parser, args, argv):
    """Fill in settings from ``--config``; anything given as a flag wins."""
    path = Path(args.config)
    if not path.is_file():
        raise CLIError(f"config file not found: {args.config}", EXIT_INPUT)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions if a.option_strings}
    given = {a.dest for a in sub._actions
             if any(tok == o or tok.startswith(o + "=") for tok in argv for o in a.option_strings)}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        dest = key.strip().lstrip("-").replace("-", "_")
        if not sep or dest not in known or dest in ("config", "help"):
            raise CLIError(f"{path}:{lineno}: unknown setting {key.strip()!r}", EXIT_INPUT)
        if dest in given:
            continue
        action, value = known[dest], value.strip()
        if dest in ("machine", "layout") and not Path(value).is_absolute() and (path.parent / value).exists():
            value = str(path.parent / value)
        if action.choices is not None and value not in action.choices:
            raise CLIError(f"{path}:{lineno}: {key.strip()} must be one of {sorted(action.choices)}", EXIT_INPUT)
        try:
            value = action.type(value) if action.type else value
        except ValueError as e:
            raise CLIError(f"{path}:{lineno}: bad value for {key.strip()}: {value!r}", EXIT_INPUT) from e
        if isinstance(action, argparse._AppendAction):
            setattr(args, dest, (getattr(args, dest) or []) + [value])
        else:
            setattr(args, dest, value)
    return args


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        if not args.machine:
            raise CLIError("--machine is required", EXIT_INPUT)
        return args.func(args)
    except CLIError as e:
        print(f"haltflow: error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
