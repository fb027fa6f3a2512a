"""Command-line front end.

Exit codes: 0 success, 1 parse error, 2 type error, 3 runtime error,
4 usage error (bad flags, unreadable file).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, is_dataclass
from importlib import resources
from pathlib import Path

from . import quantum
from .errors import EvalError
from .evaluator import DEFAULT_FUEL, EvalConfig, run_program
from .parser import ParseError, Position, format_term, format_type, parse_with_positions
from .store import DEFAULT_MAX_QUBITS
from .syntax import CVAR, QVAR, Arrow, Ground, Location, Type
from .typechecker import TypeCheckError, check_program

EXIT_OK, EXIT_PARSE, EXIT_TYPE, EXIT_RUNTIME, EXIT_USAGE = range(5)


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _binding(kind: Type):
    def parse(text: str):
        name, sep, value = text.partition("=")
        if not sep or not name.isidentifier() or not value.isdigit():
            raise argparse.ArgumentTypeError(f"expected NAME=N, got {text!r}")
        return name, (kind, int(value))
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="iqu", description="Run and inspect IQu programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def with_bindings(sp):
        sp.add_argument("--cvar", action="append", default=[], type=_binding(CVAR),
                        metavar="NAME=N", help="free classical variable with initial value N")
        sp.add_argument("--qvar", action="append", default=[], type=_binding(QVAR),
                        metavar="NAME=N", help="free quantum register of N qubits")

    run = sub.add_parser("run", help="evaluate a program and print its outcomes")
    run.add_argument("file")
    run.add_argument("--mode", choices=["dist", "distribution", "sample"], default="distribution")
    run.add_argument("--seed", type=int, default=None, help="RNG seed (sample mode only)")
    run.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="rule-application budget")
    run.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    run.add_argument("--trace", action="store_true", help="print the derivation to stderr")
    run.add_argument("--strict-pred", action="store_true", help="pred 0 is a run-time error")
    run.add_argument("--faithful-divergence", action="store_true",
                     help="ill-formed sequential circuits spin until fuel runs out")
    with_bindings(run)

    check = sub.add_parser("check", help="print the program's type")
    check.add_argument("file")
    with_bindings(check)

    parse = sub.add_parser("parse", help="print the abstract syntax tree")
    parse.add_argument("file")
    parse.add_argument("--pretty", action="store_true", help="print concrete syntax instead")

    sub.add_parser("gates", help="dump the gate table")
    return p


def corpus_dir() -> Path:
    return Path(str(resources.files("iqu") / "corpus"))


def resolve(path: str) -> Path:
    """A path on disk, or else a shipped corpus program of the same name."""
    p = Path(path)
    if p.is_file():
        return p
    shipped = corpus_dir() / p.name
    if shipped.is_file():
        return shipped
    raise UsageError(f"no such file: {path}")


def dump_term(t) -> str:
    """Compact constructor-style rendering of a term."""
    parts = []
    for f in fields(t):
        v = getattr(t, f.name)
        if isinstance(v, (Ground, Arrow)):
            parts.append(format_type(v))
        elif is_dataclass(v) and not isinstance(v, Location):
            parts.append(dump_term(v))
        else:
            parts.append("_" if v is None else str(v))
    name = type(t).__name__
    return f"{name}({', '.join(parts)})" if parts else name


def _locate(positions, term) -> Position:
    return positions.get(id(term), Position(0, 1, 1))


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"iqu: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "gates":
        print(quantum.format_gate_table())
        return EXIT_OK

    try:
        path = resolve(args.file)
        source = path.read_bytes().decode("utf-8")
    except UsageError as exc:
        print(f"iqu: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnicodeDecodeError as exc:
        print(f"{args.file}: not UTF-8 text: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"iqu: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "run":
        mode = "distribution" if args.mode == "dist" else args.mode
        if args.seed is not None and mode != "sample":
            print("iqu: --seed is only valid with --mode sample", file=sys.stderr)
            return EXIT_USAGE

    try:
        term, positions = parse_with_positions(source)
    except ParseError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.command == "parse":
        print(format_term(term) if args.pretty else dump_term(term))
        return EXIT_OK

    bindings = dict(args.cvar + args.qvar)
    try:
        ty = check_program(term, {n: t for n, (t, _) in bindings.items()})
    except TypeCheckError as exc:
        print(f"{args.file}:{_locate(positions, exc.term)}: {exc}", file=sys.stderr)
        return EXIT_TYPE

    if args.command == "check":
        print(ty)
        return EXIT_OK

    config = EvalConfig(
        mode=mode,
        seed=args.seed or 0,
        fuel=args.fuel,
        max_qubits=args.max_qubits,
        strict_pred=args.strict_pred,
        faithful_divergence=args.faithful_divergence,
        trace=sys.stderr if args.trace else None,
    )
    try:
        report = run_program(source, bindings, config)
    except EvalError as exc:
        print(f"{args.file}: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(report.format())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
