"""Command line driver.

    corolower compile fib.mini --emit lowered -o fib.lowered.mini
    corolower run fib.mini
    corolower cfg fib.mini --no-optimize
    corolower diff fib.mini
    corolower diff --all tests/corpus

Exit codes: 0 success, 1 compile error, 2 runtime error, 3 divergence.
Diagnostics go to stderr, program output to stdout. COROLOWER_BUDGET
overrides the evaluation step budget (default 10^7 steps).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .defunc import defunctionalize
from .errors import InterpError, MiniError
from .interp import (
    DEFAULT_STEP_BUDGET,
    Interpreter,
    NULL,
    render_output,
    render_value,
    resume_sequence,
    values_equal,
)
from .parser import parse_source
from .printer import print_source
from .syntax import Program
from .transform import transform_program
from . import cfg as cfg_mod

EXIT_OK = 0
EXIT_COMPILE = 1
EXIT_RUNTIME = 2
EXIT_DIVERGENCE = 3

BUDGET_ENV = "COROLOWER_BUDGET"
DEFAULT_RESUMPTIONS = 100


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Failure as failure:
        print(f"error: {failure.message}", file=sys.stderr)
        return failure.code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corolower",
        description="Lower generator coroutines to closure state machines.",
    )
    sub = parser.add_subparsers(required=True)

    p_compile = sub.add_parser("compile", help="lower a program and print it")
    p_compile.add_argument("input")
    p_compile.add_argument(
        "--emit", choices=["lowered", "first-order"], default="lowered"
    )
    p_compile.add_argument(
        "--optimize",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="merge CFG blocks before lowering (default on)",
    )
    p_compile.add_argument("-o", "--output", help="output path (default stdout)")
    p_compile.set_defaults(func=cmd_compile)

    p_run = sub.add_parser("run", help="interpret a program")
    p_run.add_argument("input")
    p_run.set_defaults(func=cmd_run)

    p_cfg = sub.add_parser("cfg", help="write each generator's CFG as DOT")
    p_cfg.add_argument("input")
    p_cfg.add_argument(
        "--optimize", action=argparse.BooleanOptionalAction, default=True
    )
    p_cfg.add_argument("--out-dir", default=".")
    p_cfg.set_defaults(func=cmd_cfg)

    p_diff = sub.add_parser(
        "diff", help="check native/lowered/first-order agreement"
    )
    p_diff.add_argument("inputs", nargs="*")
    p_diff.add_argument("--all", dest="all_dir", help="check every .mini file in a directory")
    p_diff.add_argument(
        "--budget",
        type=int,
        default=DEFAULT_RESUMPTIONS,
        help="resumptions per generator trace (default 100)",
    )
    p_diff.set_defaults(func=cmd_diff)
    return parser


def _step_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_STEP_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise _Failure(EXIT_COMPILE, f"{BUDGET_ENV} is not an integer: {raw!r}")


def _load(path: str) -> Program:
    try:
        source = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _Failure(EXIT_COMPILE, f"cannot read {path}: {err.strerror}")
    try:
        return parse_source(source)
    except MiniError as err:
        raise _Failure(EXIT_COMPILE, f"{path}: {err}")


def cmd_compile(args) -> int:
    program = _load(args.input)
    try:
        lowered = transform_program(program, args.optimize)
        if args.emit == "first-order":
            lowered = defunctionalize(lowered)
    except MiniError as err:
        raise _Failure(EXIT_COMPILE, f"{args.input}: {err}")
    text = print_source(lowered)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    program = _load(args.input)
    try:
        output = Interpreter(program, _step_budget()).run()
    except InterpError as err:
        raise _Failure(EXIT_RUNTIME, f"{args.input}: {err}")
    sys.stdout.write(render_output(output))
    return EXIT_OK


def cmd_cfg(args) -> int:
    program = _load(args.input)
    generators = [d for d in program.decls if d.is_generator]
    if not generators:
        print("warning: no generators in program", file=sys.stderr)
        return EXIT_OK
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for decl in generators:
        graph = cfg_mod.build_cfg(decl)
        if args.optimize:
            graph = cfg_mod.merge_blocks(graph)
        path = out_dir / f"{decl.name}.dot"
        path.write_text(cfg_mod.emit_dot(graph, decl.name), encoding="utf-8")
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


# -- differential checking -----------------------------------------------------


def program_forms(program: Program) -> dict[str, Program]:
    """The program under every transformation the pipeline can produce."""
    lowered_opt = transform_program(program, True)
    lowered_noopt = transform_program(program, False)
    return {
        "native": program,
        "lowered-opt": lowered_opt,
        "lowered-noopt": lowered_noopt,
        "first-order": defunctionalize(lowered_opt),
    }


def diff_program(program: Program, resumptions: int, step_budget: int) -> list[str]:
    """Run the agreement check; returns human-readable divergences."""
    divergences: list[str] = []
    forms = program_forms(program)
    outputs = {}
    for form, prog in forms.items():
        outputs[form] = Interpreter(prog, step_budget).run()
    reference = outputs["native"]
    for form, got in outputs.items():
        if form == "native":
            continue
        index = _first_mismatch(reference, got)
        if index is not None:
            expected_text = _item_text(reference, index)
            got_text = _item_text(got, index)
            divergences.append(
                f"{form}: output line {index}: expected {expected_text}, got {got_text}"
            )
    script = [NULL] + list(range(1, resumptions))
    for decl in program.decls:
        if not decl.is_generator:
            continue
        args = list(range(1, len(decl.params) + 1))
        traces = {
            form: resume_sequence(prog, decl.name, args, script, step_budget)
            for form, prog in forms.items()
        }
        reference_trace = traces["native"]
        for form, got in traces.items():
            if form == "native":
                continue
            index = _first_mismatch(reference_trace, got)
            if index is not None:
                divergences.append(
                    f"{form}: generator {decl.name}: resumption {index}: "
                    f"expected {_item_text(reference_trace, index)}, "
                    f"got {_item_text(got, index)}"
                )
    return divergences


def _first_mismatch(expected: list, got: list) -> int | None:
    for i in range(max(len(expected), len(got))):
        if i >= len(expected) or i >= len(got):
            return i
        if not values_equal(expected[i], got[i]):
            return i
    return None


def _item_text(values: list, index: int) -> str:
    if index >= len(values):
        return "<missing>"
    return render_value(values[index])


def cmd_diff(args) -> int:
    if args.all_dir:
        paths = sorted(str(p) for p in Path(args.all_dir).glob("*.mini"))
        if not paths:
            raise _Failure(EXIT_COMPILE, f"no .mini files in {args.all_dir}")
    else:
        paths = args.inputs
        if not paths:
            raise _Failure(EXIT_COMPILE, "diff needs input files or --all DIR")
    step_budget = _step_budget()
    code = EXIT_OK
    if not args.all_dir and len(paths) > 1:
        # Compare the outputs of later files against the first one.
        reference_path, rest = paths[0], paths[1:]
        try:
            reference = Interpreter(_load(reference_path), step_budget).run()
        except InterpError as err:
            raise _Failure(EXIT_RUNTIME, f"{reference_path}: {err}")
        for path in rest:
            try:
                got = Interpreter(_load(path), step_budget).run()
            except InterpError as err:
                raise _Failure(EXIT_RUNTIME, f"{path}: {err}")
            index = _first_mismatch(reference, got)
            if index is None:
                print(f"{path}: OK (matches {reference_path})", file=sys.stderr)
            else:
                print(
                    f"{path}: DIVERGED at output line {index}: "
                    f"expected {_item_text(reference, index)}, "
                    f"got {_item_text(got, index)}",
                    file=sys.stderr,
                )
                code = EXIT_DIVERGENCE
        return code
    for path in paths:
        program = _load(path)
        try:
            divergences = diff_program(program, args.budget, step_budget)
        except InterpError as err:
            raise _Failure(EXIT_RUNTIME, f"{path}: {err}")
        except MiniError as err:
            raise _Failure(EXIT_COMPILE, f"{path}: {err}")
        if divergences:
            code = EXIT_DIVERGENCE
            print(f"{path}: DIVERGED", file=sys.stderr)
            for line in divergences:
                print(f"  {line}", file=sys.stderr)
        else:
            print(f"{path}: OK", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
