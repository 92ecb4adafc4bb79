"""Command-line entry point: JSON in, JSON out.

Examples:
  varlp norm --json '{"a": {"entries": [[1, 1, 0]]}, "p": {"prefix": [], "tail": {"kind": "constant", "value": 3}}}'
  varlp example 41 --n 20
  varlp suite clarkson -i p.json --trials 10000 --seed 7 --deterministic
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__, codec
from .errors import VarLpError
from .operators import (
    LampertiOperator,
    MatrixOperator,
    Permutation,
    Shift,
    Table,
    apply_injection,
    apply_lamperti,
    check_isometry_randomized,
    check_isomodular_structural,
    injection_to_matrix,
    lamperti_to_matrix,
    recover_structure,
    theta_isometry_decision,
)
from .space import DEFAULT_TOL, classify_regime, luxemburg_norm, modular
from .verify import (
    FAULTS,
    clarkson_gap,
    explore_isometric_not_isomodular,
    reproduce_example_41,
    reproduce_example_42,
    suite_clarkson,
    suite_orthogonality,
    suite_shift_dichotomy,
    suite_shift_exhaustive,
    suite_structure_theorem,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    pass


def _field(doc: dict, key: str):
    if key not in doc:
        raise UsageError(f"input is missing field {key!r}")
    return doc[key]


def _as_matrix(op, n: int | None) -> MatrixOperator:
    if isinstance(op, MatrixOperator):
        return op
    if n is None:
        raise UsageError("a truncation size is needed for this operator: pass --n or an 'n' field")
    if isinstance(op, LampertiOperator):
        return lamperti_to_matrix(op, n)
    rows = max(op(k) for k in range(1, n + 1))
    return injection_to_matrix(op, max(rows, n), n_columns=n)


def _size(args, doc: dict) -> int | None:
    if args.n is not None:
        return args.n
    n = doc.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 1):
        raise UsageError("'n' must be a positive integer")
    return n


def cmd_norm(args, doc):
    r = luxemburg_norm(codec.decode_sequence(_field(doc, "a")), codec.decode_exponents(_field(doc, "p")), args.tol)
    return codec.encode_norm(r), EXIT_OK


def cmd_modular(args, doc):
    return {"modular": modular(codec.decode_sequence(_field(doc, "a")), codec.decode_exponents(_field(doc, "p")))}, EXIT_OK


def cmd_clarkson(args, doc):
    p = codec.decode_exponents(_field(doc, "p"))
    s = clarkson_gap(codec.decode_sequence(_field(doc, "a")), codec.decode_sequence(_field(doc, "b")), p)
    return {"gap": s.gap, "disjoint": s.disjoint, "regime": classify_regime(p).value}, EXIT_OK


def cmd_apply(args, doc):
    op = codec.decode_operator(_field(doc, "operator"))
    x = codec.decode_sequence(_field(doc, "x"))
    if isinstance(op, LampertiOperator):
        y = apply_lamperti(op, x)
    elif isinstance(op, MatrixOperator):
        y = op.apply(x)
    else:
        y = apply_injection(op, x)
    return {"result": codec.encode_sequence(y)}, EXIT_OK


def cmd_check_op(args, doc):
    p = codec.decode_exponents(_field(doc, "p"))
    M = _as_matrix(codec.decode_operator(_field(doc, "operator")), _size(args, doc))
    cert = check_isomodular_structural(M, p, seed=args.seed)
    iso = check_isometry_randomized(M, p, trials=args.trials, tol=args.check_tol, seed=args.seed)
    return {"certificate": codec.encode_certificate(cert), "isometry": codec.encode_isometry(iso)}, EXIT_OK


def cmd_recover(args, doc):
    p = codec.decode_exponents(_field(doc, "p"))
    M = _as_matrix(codec.decode_operator(_field(doc, "operator")), _size(args, doc))
    T, h = recover_structure(M, p)
    return {"operator": codec.encode_operator(LampertiOperator(h, T))}, EXIT_OK


def cmd_theta_check(args, doc):
    p = codec.decode_exponents(_field(doc, "p"))
    raw = _field(doc, "theta")
    theta = codec.decode_operator(raw) if isinstance(raw, dict) and "kind" in raw else codec.decode_rule(raw)
    if not isinstance(theta, (Shift, Permutation, Table)):
        raise UsageError("theta must be an injection rule")
    n = _size(args, doc)
    if n is None:
        n = len(theta.table) if isinstance(theta, Table) else p.decisive_length()
        if isinstance(theta, Permutation):
            n = max(n, len(theta.table))
    return codec.encode_theta_decision(theta_isometry_decision(theta, p, n)), EXIT_OK


def _suite_exponents(doc):
    return codec.decode_exponents(_field(doc, "p"))


def cmd_suite(args, doc):
    name = args.name
    fault = args.fault
    if fault and name not in ("orthogonality", "structure"):
        raise UsageError("--fault applies to the orthogonality and structure suites only")
    if name == "clarkson":
        report = suite_clarkson(_suite_exponents(doc), args.trials, args.seed)
    elif name == "orthogonality":
        report = suite_orthogonality(_suite_exponents(doc), args.trials, args.seed, fault=fault)
    elif name == "structure":
        report = suite_structure_theorem(_suite_exponents(doc), args.trials, args.seed, fault=fault)
    elif name == "shift":
        report = suite_shift_dichotomy(args.trials, args.seed)
    else:
        report = suite_shift_exhaustive(seed=args.seed)
    return {"report": report.to_dict(args.deterministic)}, EXIT_OK if report.passed else EXIT_FAIL


def cmd_example(args, doc):
    n = args.n if args.n is not None else 20
    if n < 1:
        raise UsageError("--n must be >= 1")
    if args.which == "41":
        ma, ms = reproduce_example_41(n)
        return {"n": n, "modular_a": ma, "modular_Sa": ms}, EXIT_OK
    report = reproduce_example_42(n)
    out = dict(report.values)
    out["report"] = report.to_dict(args.deterministic)
    return out, EXIT_OK if report.passed else EXIT_FAIL


def cmd_explore(args, doc):
    report = explore_isometric_not_isomodular(_suite_exponents(doc), args.trials, args.seed)
    return {"exploration": report.to_dict()}, EXIT_OK


COMMANDS: dict[str, tuple[Callable, bool]] = {
    "norm": (cmd_norm, True),
    "modular": (cmd_modular, True),
    "clarkson": (cmd_clarkson, True),
    "apply": (cmd_apply, True),
    "check-op": (cmd_check_op, True),
    "recover": (cmd_recover, True),
    "theta-check": (cmd_theta_check, True),
    "suite": (cmd_suite, False),
    "example": (cmd_example, False),
    "explore": (cmd_explore, True),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", "-i", help="JSON input file ('-' for stdin)")
    common.add_argument("--json", dest="inline", help="inline JSON input")
    common.add_argument("--output", "-o", help="write the JSON result here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="norm solver residual tolerance")
    common.add_argument("--check-tol", type=float, default=1e-9, help="isometry check tolerance")
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--deterministic", action="store_true", help="omit timestamps and timings")

    parser = _Parser(prog="varlp", description="Computations in variable-exponent sequence spaces.")
    parser.add_argument("--version", action="version", version=f"varlp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "suite":
            sp.add_argument("name", choices=["clarkson", "orthogonality", "structure", "shift", "shift-exhaustive"])
            sp.add_argument("--fault", choices=FAULTS, default=None)
        elif name == "example":
            sp.add_argument("which", choices=["41", "42"])
    return parser


def _load(args, needed: bool) -> dict:
    if args.input and args.inline:
        raise UsageError("give either --input or --json, not both")
    if args.input:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text(encoding="utf-8")
    elif args.inline:
        text = args.inline
    elif needed:
        raise UsageError(f"{args.command} needs --input or --json")
    else:
        return {}
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise UsageError("input must be a JSON object")
    return doc


def _emit(payload: dict, output: str | None) -> None:
    text = codec.dumps(payload) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv: list[str] | None = None) -> int:
    output = None
    try:
        args = build_parser().parse_args(argv)
        output = args.output
        if args.tol <= 0 or args.check_tol <= 0:
            raise UsageError("tolerances must be positive")
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        handler, needs_input = COMMANDS[args.command]
        doc = _load(args, needs_input)
        result, code = handler(args, doc)
    except (UsageError, json.JSONDecodeError, codec.DecodeError, VarLpError, ValueError, OSError) as exc:
        print(f"varlp: error: {exc}", file=sys.stderr)
        _emit({"error": {"type": type(exc).__name__, "message": str(exc)}}, output)
        return EXIT_CONFIG
    payload = {"command": args.command, "version": __version__, "input": doc}
    if args.command in ("suite", "example", "check-op", "explore"):
        payload["seed"] = args.seed
    payload.update(result)
    if not args.deterministic:
        payload["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    _emit(payload, output)
    return code


def main() -> None:
    raise SystemExit(run())
