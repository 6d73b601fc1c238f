"""Command-line front end.

    steklov spectrum --expr "1 + 0.2*cos(2*t)" --degree 32
    steklov zeta --seed 3 --s -2,-1,0.5,2 --format json
    steklov flow --expr "1 + 0.3*cos(t)" --probes -2,2 --out traj.csv
    steklov check

Inputs are trig polynomials given as coefficient JSON, grid-sample JSON
(``--input`` takes a path or an inline JSON object), an expression
(``--expr``), or a seeded random fixture (``--seed`` alone).  Every input is
rescaled to satisfy the normalization before use.

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 numerical
failure, 4 monotonicity violation during the flow.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import checks, dtn, flow, zeta
from .errors import (
    AliasingRisk,
    ComplexityLimit,
    DegenerateMap,
    EigensolveFailure,
    InputError,
    MeanNotZero,
    NonPositiveSample,
    NormalizationError,
    PoleAtOne,
    PositivityLost,
    QuadratureBudget,
    StepCollapse,
)
from .fixtures import random_factor
from .harmonics import ConformalFactor, TrigPolynomial, from_json, normalize

INPUT_ERRORS = (InputError, NonPositiveSample, AliasingRisk, NormalizationError, DegenerateMap,
                MeanNotZero, PoleAtOne, OSError, json.JSONDecodeError)
NUMERIC_ERRORS = (EigensolveFailure, QuadratureBudget, PositivityLost, StepCollapse, ComplexityLimit,
                  FloatingPointError)


@dataclass(frozen=True)
class Defaults:
    degree: int = 64
    s_grid: str = "-3,-2,-1,-0.5,0,0.5,2,3"
    dt: float = 1e-3
    tau_max: float = 100.0
    tol: float = 1e-6
    probes: str = "-2,2"
    record_every: int = 100


DEFAULTS = Defaults()


# -- expression grammar -----------------------------------------------------

class _ExprEvaluator:
    """Evaluates a restricted arithmetic expression in t to a TrigPolynomial.

    Grammar: numbers, ``+ - * /``, integer powers ``**``, parentheses and
    ``cos(k*t)`` / ``sin(k*t)`` with an integer frequency k (``cos(t)`` is
    k = 1).  Division is only by constants.
    """

    def __init__(self, text: str):
        self.text = text

    def __call__(self) -> TrigPolynomial:
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise InputError(f"cannot parse expression: {exc.msg}") from exc
        out = self.visit(tree.body)
        return out if isinstance(out, TrigPolynomial) else TrigPolynomial.constant(out)

    def visit(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.visit(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            left, right = self.visit(node.left), self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if isinstance(right, TrigPolynomial):
                    raise InputError("division by a non-constant")
                return left / right
            if isinstance(node.op, ast.Pow):
                if isinstance(right, TrigPolynomial) or right != int(right) or not 0 <= right <= 8:
                    raise InputError("exponent must be an integer between 0 and 8")
                out = 1.0
                for _ in range(int(right)):
                    out = left * out
                return out
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("cos", "sin"):
            if len(node.args) != 1 or node.keywords:
                raise InputError(f"{node.func.id} takes one argument")
            k = self._frequency(node.args[0])
            return getattr(TrigPolynomial, node.func.id)(k)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        raise InputError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")

    def _frequency(self, node) -> int:
        if isinstance(node, ast.Name) and node.id == "t":
            return 1
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
            for num, var in ((node.left, node.right), (node.right, node.left)):
                if isinstance(var, ast.Name) and var.id == "t" and isinstance(num, ast.Constant):
                    k = num.value
                    if isinstance(k, (int, float)) and k == int(k) and k >= 0:
                        return int(k)
        raise InputError("trig arguments must look like k*t with a nonnegative integer k")


def parse_expression(text: str) -> TrigPolynomial:
    return _ExprEvaluator(text)()


# -- input / output ----------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc


def load_factor(args) -> ConformalFactor:
    if args.input:
        raw = args.input.strip()
        text = raw if raw.startswith("{") else Path(raw).read_text()
        obj = json.loads(text)
        if not isinstance(obj, dict):
            raise InputError("JSON input must be an object")
        series = from_json(obj)
    elif args.expr:
        series = parse_expression(args.expr)
    elif args.seed is not None:
        return random_factor(args.seed)
    else:
        raise InputError("no input: pass --input, --expr or --seed")
    if not series.is_real():
        raise InputError("factor must be real")
    return normalize(series)


def atomic_write(path, text: str) -> None:
    """Write text to path via a temporary file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def emit(args, text: str) -> None:
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def info(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


# -- commands ------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    a = load_factor(args)
    spec = dtn.spectrum(a, args.degree)
    rows = [(k, lam, n, res) for k, lam, n, res in spec.to_csv_rows()]
    emit(args, render(["k", "lambda_k", "floor_half", "residual"], rows, args.format))
    info(args, f"trusted range k <= {spec.trust_horizon}")
    return 0


def cmd_zeta(args) -> int:
    a = load_factor(args)
    rows = [(v.s, v.diff, v.zeta_a, v.tail_estimate) for v in zeta.zeta_sweep(a, parse_grid(args.s), args.degree)]
    emit(args, render(["s", "diff", "zeta_a", "tail_estimate"], rows, args.format))
    return 0


def cmd_invariants(args) -> int:
    a = load_factor(args)
    snap = zeta.compact_set_snapshot(a, args.m)
    rows = [("hat_b0", snap.hat_b0), ("zeta_minus1", snap.zeta_minus1)]
    rows += [(f"Z_{m}", z) for m, z in enumerate(snap.z_minus_2m, start=1)]
    emit(args, render(["name", "value"], rows, args.format))
    return 0


def cmd_variation(args) -> int:
    a = load_factor(args)
    s_grid = parse_grid(args.s)
    beta = parse_expression(args.beta) if args.beta else None
    columns = ["s", "flow_variation"]
    if beta is not None:
        columns.append("general_variation")
        if a.degree == 0:
            columns.append("second_variation_at_one")
    rows = []
    for s in s_grid:
        row = [s, zeta.first_variation_flow(a, s, args.degree)]
        if beta is not None:
            row.append(zeta.first_variation_general(a, beta, s, args.degree))
            if a.degree == 0:
                row.append(zeta.second_variation_at_one(beta, s))
        rows.append(row)
    emit(args, render(columns, rows, args.format))
    return 0


def cmd_flow(args) -> int:
    a = load_factor(args)
    probes = parse_grid(args.probes)
    traj = flow.integrate(a, args.dt, args.tau_max, args.tol, probes, args.degree, args.record_every)
    summary = json.dumps(traj.summary(), indent=2, default=float) + "\n"
    if args.out:
        out = Path(args.out)
        atomic_write(out, traj.csv_text())
        atomic_write(out.with_name(out.name + ".states.json"), json.dumps(traj.sidecar(args.stride), indent=2))
        atomic_write(out.with_name(out.name + ".summary.json"), summary)
    else:
        sys.stdout.write(traj.csv_text())
    if not args.quiet:
        sys.stderr.write(summary)
    if traj.failed:
        f = traj.failure
        print(f"monotonicity violated at step {f['step']} (tau={f['tau']:.6g}): "
              f"{f['quantity']} increased by {f['increase']:.3e}", file=sys.stderr)
        return 4
    return 0


def cmd_check(args) -> int:
    if args.list:
        for name, fn in checks.REGISTRY.items():
            print(f"{name}\t{(fn.__doc__ or '').strip().splitlines()[0] if fn.__doc__ else ''}")
        return 0
    ctx = checks.CheckContext(seed=args.seed or 0, fault=args.inject_fault)
    results = checks.run_checks(ctx)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  residual={r.residual:.3e}  "
              f"threshold={r.threshold:.0e}  {r.detail}".rstrip())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "zeta": cmd_zeta,
    "invariants": cmd_invariants,
    "variation": cmd_variation,
    "flow": cmd_flow,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON file path or inline JSON object")
    common.add_argument("--expr", help='trig expression, e.g. "1 + 0.3*cos(1*t)"')
    common.add_argument("--seed", type=int, help="seed for a random fixture (or for check)")
    common.add_argument("--degree", type=int, default=DEFAULTS.degree, help="truncation N (>= 8)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--quiet", action="store_true")

    p = argparse.ArgumentParser(prog="steklov", description="Steklov spectra, zeta values and the deformation flow.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="truncated Steklov eigenvalues")
    z = sub.add_parser("zeta", parents=[common], help="regularized zeta values over an s-grid")
    z.add_argument("--s", default=DEFAULTS.s_grid, help="comma-separated s values")
    inv = sub.add_parser("invariants", parents=[common], help="mean, zeta(-1) and algebraic invariants")
    inv.add_argument("--m", type=int, default=2, help="highest invariant index")
    v = sub.add_parser("variation", parents=[common], help="first (and second) variations of zeta")
    v.add_argument("--s", default="-2,2")
    v.add_argument("--beta", help="zero-mean variation direction as an expression")
    f = sub.add_parser("flow", parents=[common], help="integrate the deformation flow")
    f.add_argument("--dt", type=float, default=DEFAULTS.dt)
    f.add_argument("--tau-max", type=float, default=DEFAULTS.tau_max)
    f.add_argument("--tol", type=float, default=DEFAULTS.tol)
    f.add_argument("--probes", default=DEFAULTS.probes)
    f.add_argument("--record-every", type=int, default=DEFAULTS.record_every)
    f.add_argument("--stride", type=int, default=10, help="state stride in the JSON sidecar")
    c = sub.add_parser("check", parents=[common], help="run the identity suite")
    c.add_argument("--list", action="store_true", help="list checks without running them")
    c.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    return p


LIST_FLAGS = ("--s", "--probes")


def _join_list_flags(argv: list[str]) -> list[str]:
    """Turn ``--s -2,1`` into ``--s=-2,1`` so argparse does not read -2 as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in LIST_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_list_flags(list(sys.argv[1:] if argv is None else argv)))
    if args.degree < 8:
        print("error: --degree must be at least 8", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
