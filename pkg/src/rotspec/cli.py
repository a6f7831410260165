"""Command-line entry point.

Exit codes: 0 when every executed check passes, 1 when a check fails,
2 on invalid input (one-line diagnostic naming the offending field).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import reproduce as R
from .acceptance import SuiteConfig, verify
from .potential import ParamFileError, Potential, PotentialParams, Vec2Q, parse_params

MAX_MEMORY = 10
MAX_PERIOD = 16


class UsageError(Exception):
    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse's own errors (unknown flag, bad type) become one-line exit-2 diagnostics
        raise UsageError("arguments", message)


def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    def d(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--params", type=Path, default=d(None),
                   help="parameter file (key = value lines); defaults otherwise")
    p.add_argument("--out", type=Path, default=d(None), help="output directory (default: $ROTSPEC_OUT or ./out)")
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--tol", type=float, default=d(1e-9), help="dual solver gradient tolerance (default 1e-9)")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False), help="log solver warnings")


def _with_parents(add_parser, common):
    def wrapped(*args, **kwargs):
        return add_parser(*args, parents=[common], **kwargs)

    return wrapped


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rotspec", description="Rotation set and localized entropy experiments.")
    _add_common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    # also accepted after the subcommand; suppressed defaults keep earlier values
    _add_common(common, suppress=True)
    sub.add_parser = _with_parents(sub.add_parser, common)

    s = sub.add_parser("rotation-set", help="exact hull of periodic rotation vectors")
    s.add_argument("--max-period", type=int, default=12, help="largest period N (default 12)")

    s = sub.add_parser("spectrum", help="dual localized entropy at a list of targets")
    s.add_argument("--memory", type=int, default=8, help="memory m of the truncation (default 8)")
    s.add_argument("--targets", default="builtin:segment",
                   help="builtin:segment, builtin:vertices, or a file of 'wx, wy' lines")
    s.add_argument("--alpha-cap", type=float, default=1e3, help="norm cap T (default 1000)")

    s = sub.add_parser("discontinuity", help="entropy gap between w_inf and the w_k")
    s.add_argument("--memory", type=int, default=9, help="memory m (default 9)")
    s.add_argument("--k-max", type=int, help="largest k (default m - lambda - 1)")
    s.add_argument("--alpha-cap", type=float, default=1e3, help="norm cap T (default 1000)")

    s = sub.add_parser("uniqueness", help="orbits with rotation vector exactly w_k")
    s.add_argument("--k", type=int, default=1, help="index k >= 1 (default 1)")
    s.add_argument("--max-period", type=int, default=12, help="largest period N (default 12)")

    s = sub.add_parser("gkr", help="properties of the concave discontinuous example g")
    s.add_argument("--samples", type=int, default=10_000, help="number of samples (default 10000)")

    sub.add_parser("verify", help="run the full acceptance suite and write report.json")
    return p


def load_params(path: Path | None) -> PotentialParams:
    if path is None:
        return PotentialParams()
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError("params", f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_params(text)
    except ParamFileError as exc:
        raise UsageError(f"params.{exc.field}", str(exc).split(": ", 1)[-1]) from None


def parse_targets(spec: str, pot: Potential, m: int) -> list[Vec2Q]:
    if spec == "builtin:segment":
        return R.segment_targets(pot, m)
    if spec == "builtin:vertices":
        return R.vertex_targets(pot, m)
    if spec.startswith("builtin:"):
        raise UsageError("targets", f"unknown builtin {spec!r} (segment, vertices)")
    try:
        text = Path(spec).read_text()
    except OSError as exc:
        raise UsageError("targets", f"cannot read {spec}: {exc.strerror}") from None
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s for s in line.replace(",", " ").split() if s]
        try:
            if len(parts) != 2:
                raise ValueError
            out.append(Vec2Q(Fraction(parts[0]), Fraction(parts[1])))
        except (ValueError, ZeroDivisionError):
            raise UsageError("targets", f"line {lineno}: expected 'wx, wy', got {line!r}") from None
    if not out:
        raise UsageError("targets", "no targets")
    return out


def _positive(field: str, value: float) -> None:
    if not value > 0:
        raise UsageError(field, f"must be positive, got {value}")


def _check_memory(m: int, lam: int) -> None:
    if m < lam + 1:
        raise UsageError("memory", f"memory below lambda+1 (m={m}, lambda={lam})")
    if m > MAX_MEMORY:
        raise UsageError("memory", f"memory above {MAX_MEMORY} (m={m})")


def _check_period(n: int) -> None:
    if not 1 <= n <= MAX_PERIOD:
        raise UsageError("max-period", f"must lie in 1..{MAX_PERIOD}, got {n}")


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        params = load_params(args.params)
        _positive("tol", args.tol)
        out = args.out or Path(os.environ.get("ROTSPEC_OUT", "out"))
        pot = Potential(params)
        lam = params.lam

        if args.command == "rotation-set":
            _check_period(args.max_period)
            job = lambda: R.rotation_set_report(pot, args.max_period, out)
        elif args.command == "spectrum":
            _check_memory(args.memory, lam)
            _positive("alpha-cap", args.alpha_cap)
            targets = parse_targets(args.targets, pot, args.memory)
            job = lambda: R.spectrum_scan(pot, targets, args.memory, args.alpha_cap, args.tol, out)[1]
        elif args.command == "discontinuity":
            _check_memory(args.memory, lam)
            _positive("alpha-cap", args.alpha_cap)
            k_max = args.k_max if args.k_max is not None else args.memory - lam - 1
            if not 1 <= k_max <= args.memory - lam - 1:
                raise UsageError("k-max", f"need 1 <= k-max <= memory - lambda - 1 = {args.memory - lam - 1}")
            job = lambda: R.discontinuity_report(
                pot, list(range(1, k_max + 1)), args.memory, args.alpha_cap, args.tol, out_dir=out
            )
        elif args.command == "uniqueness":
            _check_period(args.max_period)
            if args.k < 1 or args.k + lam > args.max_period:
                raise UsageError("k", f"need 1 <= k <= max-period - lambda = {args.max_period - lam}")
            job = lambda: R.uniqueness_report(pot, args.k, args.max_period)
        elif args.command == "gkr":
            if args.samples < 1000:
                raise UsageError("samples", f"need at least 1000, got {args.samples}")
            job = lambda: R.gkr_report(args.samples, args.seed)
        else:
            cfg = SuiteConfig(params, out, seed=args.seed, tol=args.tol)
            ok, _ = verify(cfg)
            print(f"report written to {out / 'report.json'}")
            return 0 if ok else 1
    except UsageError as exc:
        print(f"rotspec: error: {exc}", file=sys.stderr)
        return 2

    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR)
    rep = job()
    print(rep.summary())
    for name in rep.files:
        print(f"wrote {out / name}")
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
