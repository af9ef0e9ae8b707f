"""Command-line entry point: REPL and batch subcommands.

Exit codes: 0 success, 1 semantic failure (or ill-dimensioned under
analyze --strict), 2 I/O or usage errors.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, image
from . import expr as E
from . import sexpr
from .errors import (EvalFailure, ExpansionError, EzeroError, FuelExhausted,
                     ImageError, ParseError, ResourceOverflow)
from .expr import ExprBuilder
from .session import Session

PROMPT = "e1> "


def _common_flags(parser, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=d,
                        help="randomize the thread scheduler with this seed "
                             "(default: deterministic round-robin)")
    parser.add_argument("--fuel", type=int, default=d,
                        help="step budget per toplevel form (default 10^8)")
    parser.add_argument("--trace", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="log every fired rule to stderr")
    parser.add_argument("--color", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="colorize memory dumps")
    parser.add_argument("--no-prelude", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="start from the bare core language")
    parser.add_argument("--strict", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="analyze: exit nonzero on ill-dimensioned programs")


def _build_parser():
    parent = argparse.ArgumentParser(add_help=False)
    _common_flags(parent, suppress=True)
    parser = argparse.ArgumentParser(
        prog="ezero",
        description="Interpreter, dimension analyzer and image tools for the "
                    "e0 core language with the e1 extension layer.")
    _common_flags(parser)
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("repl", parents=[parent], help="interactive session (the default)")
    p = sub.add_parser("run", parents=[parent], help="evaluate a source file")
    p.add_argument("file")
    p = sub.add_parser("analyze", parents=[parent],
                       help="report bundle dimensions for a source file")
    p.add_argument("file")
    p.add_argument("--format", choices=("text", "kv"), default="text")
    p = sub.add_parser("unexec", parents=[parent],
                       help="run a source file, then save the state as an image")
    p.add_argument("file")
    p.add_argument("image")
    p.add_argument("--magic", action="store_true",
                   help="prefix the image with an 8-byte magic header "
                        "(the raw format has none)")
    p = sub.add_parser("exec", parents=[parent],
                       help="load an image and evaluate its main expression")
    p.add_argument("image")
    p.add_argument("--repl", action="store_true", dest="into_repl",
                   help="continue interactively afterwards")
    return parser


IMAGE_MAGIC = b"\x7fEZIMG0\n"


def _make_session(args, state=None, input=None, output=None):
    trace = None
    if args.trace:
        def trace(thread, rule):
            print(f"trace: thread {thread} {rule}", file=sys.stderr)
    return Session(seed=args.seed, fuel=args.fuel,
                   prelude=not args.no_prelude and state is None,
                   trace=trace, state=state, input=input, output=output)


def _print_results(results, out, color):
    if results:
        out.write(" ".join(image.dump_text(w, color=color) for w in results) + "\n")


def _report_failure(err, out):
    if isinstance(err, EvalFailure):
        where = f" at handle {err.handle}" if err.handle is not None else ""
        out.write(f"failure: {err.kind}{where}: {err}\n")
    else:
        out.write(f"error: {type(err).__name__}: {err}\n")


def repl(session, color=False):
    state = session.state
    out = state.output
    reader = sexpr.Reader(state, state.input)
    while True:
        out.write(PROMPT)
        out.flush()
        try:
            form = reader.read()
        except ParseError as err:
            out.write(f"parse error: {err}\n")
            # resynchronize at the next line
            ch = state.input.read(1)
            while ch and ch != "\n":
                ch = state.input.read(1)
            if not ch:
                return 0
            reader = sexpr.Reader(state, state.input)
            continue
        if form is sexpr.END_OF_INPUT:
            out.write("\n")
            return 0
        try:
            results = session.eval_sexpr(form)
        except (EvalFailure, ExpansionError, FuelExhausted, ResourceOverflow) as err:
            _report_failure(err, out)
            continue
        _print_results(results, out, color)


def _load_forms(session, path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as err:
        print(f"cannot read {path}: {err}", file=sys.stderr)
        raise SystemExit(2) from err
    return session.read_all(text)


def _evaluate_program(session, forms):
    """Evaluate every form but a trailing non-definition, which is
    returned (expanded and transformed) as the main expression."""
    main_form = None
    if forms and not session.is_definition_form(forms[-1]):
        main_form = forms[-1]
        forms = forms[:-1]
    for s in forms:
        session.eval_sexpr(s)
    if main_form is None:
        return None
    return session.expand_and_transform(main_form)


def cmd_run(args):
    session = _make_session(args)
    forms = _load_forms(session, args.file)
    results = []
    try:
        for s in forms:
            results = session.eval_sexpr(s)
    except (EvalFailure, ExpansionError, FuelExhausted, ResourceOverflow) as err:
        kind = err.kind if isinstance(err, EvalFailure) else type(err).__name__
        print(f"failure: {kind}: {err}", file=sys.stderr)
        return 1
    _print_results(results, sys.stdout, args.color)
    return 0


def _collect_handles(e, into):
    into.append(e.cells[1])
    for sub in E.subexpressions(e):
        _collect_handles(sub, into)


def cmd_analyze(args):
    session = _make_session(args)
    state = session.state
    forms = _load_forms(session, args.file)
    try:
        main_expr = _evaluate_program(session, forms)
    except (EvalFailure, ExpansionError, FuelExhausted, ResourceOverflow) as err:
        print(f"failure while loading definitions: {err}", file=sys.stderr)
        return 1
    program = analysis.StaticProgram.from_state(state, main=main_expr)
    report = analysis.infer(program)
    user = session.user_procedures()
    handles = []
    for sym in user:
        _collect_handles(sym.cells[4], handles)
    if main_expr is not None:
        _collect_handles(main_expr, handles)
    # the verdict covers the analyzed file's own definitions and main;
    # the prelude substrate deliberately contains top-dimensioned
    # error-reporting branches
    well = all(report.procedure_dimension(sym)[1] is not analysis.TOP for sym in user)
    if main_expr is not None and report.main_dimension is analysis.TOP:
        well = False
    fmt = analysis.format_dimension
    if args.format == "kv":
        for sym in user:
            n, d = report.procedure_dimension(sym)
            name = state.symbol_name(sym)
            print(f"procedure.{name}.in={n}")
            print(f"procedure.{name}.out={fmt(d)}")
        if main_expr is not None:
            print(f"main.dimension={fmt(report.main_dimension)}")
        print(f"well-dimensioned={'yes' if well else 'no'}")
        for h in sorted(handles):
            print(f"handle.{h}={fmt(report.by_handle[h])}")
    else:
        for sym in user:
            n, d = report.procedure_dimension(sym)
            print(f"{state.symbol_name(sym)} :# {n} -> {fmt(d)}")
        if main_expr is not None:
            print(f"main :# {fmt(report.main_dimension)}")
        print(f"well-dimensioned: {'yes' if well else 'no'}")
        if handles:
            print("handles:")
            for h in sorted(handles):
                print(f"  {h}: {fmt(report.by_handle[h])}")
    if args.strict and not well:
        return 1
    return 0


def cmd_unexec(args):
    session = _make_session(args)
    forms = _load_forms(session, args.file)
    try:
        main_expr = _evaluate_program(session, forms)
    except (EvalFailure, ExpansionError, FuelExhausted, ResourceOverflow) as err:
        kind = err.kind if isinstance(err, EvalFailure) else type(err).__name__
        print(f"failure: {kind}: {err}", file=sys.stderr)
        return 1
    if main_expr is None:
        main_expr = ExprBuilder(session.state).bundle([])
    try:
        data = image.unexec(session.state, main_expr)
        if args.magic:
            data = IMAGE_MAGIC + data
        with open(args.image, "wb") as f:
            f.write(data)
    except (ImageError, OSError) as err:
        print(f"cannot write image: {err}", file=sys.stderr)
        return 2
    return 0


def cmd_exec(args):
    try:
        with open(args.image, "rb") as f:
            data = f.read()
        if data.startswith(IMAGE_MAGIC):
            data = data[len(IMAGE_MAGIC):]
        state, main_expr = image.exec_image(data)
    except OSError as err:
        print(f"cannot read image: {err}", file=sys.stderr)
        return 2
    except ImageError as err:
        print(f"bad image: {err}", file=sys.stderr)
        return 2
    session = _make_session(args, state=state)
    try:
        results = session.eval_expression(main_expr)
    except (EvalFailure, ExpansionError, FuelExhausted, ResourceOverflow) as err:
        kind = err.kind if isinstance(err, EvalFailure) else type(err).__name__
        print(f"failure: {kind}: {err}", file=sys.stderr)
        return 1
    _print_results(results, sys.stdout, args.color)
    if args.into_repl:
        return repl(session, color=args.color)
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "analyze":
            return cmd_analyze(args)
        if args.command == "unexec":
            return cmd_unexec(args)
        if args.command == "exec":
            return cmd_exec(args)
        session = _make_session(args)
        return repl(session, color=args.color)
    except SystemExit as err:
        return err.code
    except EzeroError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
