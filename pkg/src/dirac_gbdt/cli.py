"""Command-line front end: ``gen``, ``verify`` and ``eval``.

Exit codes: 0 on success, 1 when a mathematical check fails (or every grid
point hits a pole), 2 on usage and I/O errors.  Human-readable messages go to
stderr; stdout stays empty unless ``--quiet=false`` is given.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import DiracGbdtError, GenerationError, PoleError
from .gbdt import build_sequence
from .io import load_triple, save_triple, triple_digest, write_csv_rows
from .spectral import reflection_closed, weyl_value
from .transfer import fundamental_paths
from .triples import Signature, SystemKind, generate
from .verify import run_suite

__all__ = ["GridSpec", "parse_grid", "build_parser", "main"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

TOL_ENV = "DIRAC_GBDT_TOL"
DEFAULT_VERIFY_TOL = 1e-7
DEFAULT_KMAX = 40


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Sample points: a segment of the real or imaginary axis, or a rectangle.

    Text forms: ``real:START:STOP:COUNT``, ``imag:START:STOP:COUNT`` (points
    ``i*y``) and ``rect:RE0:RE1:NRE:IM0:IM1:NIM`` (row-major over the
    imaginary part, then the real part).
    """

    kind: str
    axes: tuple

    def points(self):
        if self.kind == "real":
            start, stop, count = self.axes[0]
            return [complex(x) for x in np.linspace(start, stop, count)]
        if self.kind == "imag":
            start, stop, count = self.axes[0]
            return [complex(0.0, y) for y in np.linspace(start, stop, count)]
        (r0, r1, nr), (i0, i1, ni) = self.axes
        return [complex(x, y) for y in np.linspace(i0, i1, ni) for x in np.linspace(r0, r1, nr)]


def _axis(start, stop, count):
    try:
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise UsageError(f"bad grid axis {start}:{stop}:{count}") from None
    if count < 1:
        raise UsageError("grid count must be >= 1")
    if not start <= stop:
        raise UsageError("grid start must not exceed stop")
    if count == 1 and start != stop:
        raise UsageError("a single-point grid axis needs start == stop")
    return (start, stop, count)


def parse_grid(text):
    parts = text.split(":")
    kind = parts[0].lower()
    if kind in ("real", "imag") and len(parts) == 4:
        return GridSpec(kind, (_axis(*parts[1:]),))
    if kind == "rect" and len(parts) == 7:
        return GridSpec(kind, (_axis(*parts[1:4]), _axis(*parts[4:])))
    raise UsageError(
        f"bad grid {text!r}; expected real:START:STOP:N, imag:START:STOP:N "
        "or rect:RE0:RE1:NRE:IM0:IM1:NIM")


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _default_tol():
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_VERIFY_TOL
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not value > 0:
        raise UsageError(f"{TOL_ENV} must be positive")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dirac-gbdt",
        description="GBDT triples for discrete Dirac systems: generation, verification, evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", nargs="?", const=True, default=True, type=_bool,
                        help="suppress progress output on stdout (default: true)")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a strongly admissible triple")
    g.add_argument("--kind", required=True, help="sa | skew")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m1", type=int, required=True)
    g.add_argument("--m2", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--out", required=True, help="output triple JSON")

    v = sub.add_parser("verify", parents=[common], help="run the invariant suite on a triple")
    v.add_argument("triple")
    v.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    v.add_argument("--tol", type=float, default=None,
                   help=f"oracle tolerance (default {DEFAULT_VERIFY_TOL:g}, or ${TOL_ENV})")
    v.add_argument("-o", "--out", default=None, help="report JSON")

    e = sub.add_parser("eval", parents=[common], help="evaluate a quantity on a grid")
    e.add_argument("triple")
    e.add_argument("--what", required=True,
                   choices=("potential", "fundamental", "weyl", "reflection"))
    e.add_argument("--grid", default=None, help="sample grid (not used for potential)")
    e.add_argument("--k", type=int, default=None,
                   help="step for potential/fundamental (default: all steps up to --kmax)")
    e.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    e.add_argument("-o", "--out", required=True, help="output CSV")
    return parser


def _progress(args, message):
    if not args.quiet:
        print(message, flush=True)


def _cmd_gen(args):
    try:
        kind = SystemKind.parse(args.kind)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 1 or args.m1 < 1 or args.m2 < 1:
        raise UsageError("--n, --m1 and --m2 must be >= 1")
    try:
        t = generate(kind, args.n, Signature(args.m1, args.m2), args.seed)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    save_triple(t, args.out)
    _progress(args, f"wrote {args.out} ({kind.value}, n={t.n}, m1={args.m1}, m2={args.m2})")
    return EXIT_OK


def _cmd_verify(args):
    tol = args.tol if args.tol is not None else _default_tol()
    if args.kmax < 1:
        raise UsageError("--kmax must be >= 1")
    if not tol > 0:
        raise UsageError("--tol must be positive")
    t = load_triple(args.triple)
    start = time.perf_counter()
    checks = run_suite(t, kmax=args.kmax, tol=tol)
    overall = all(c.passed for c in checks)
    report = {
        "version": __version__,
        "triple_sha256": triple_digest(t),
        "checks": [c.as_dict() for c in checks],
        "pass": overall,
        "seconds": time.perf_counter() - start,
    }
    for c in checks:
        _progress(args, f"{'pass' if c.passed else 'FAIL'}  {c.name}  {c.value:.3e} (tol {c.tol:g})")
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    if not overall:
        failed = ", ".join(c.name for c in checks if not c.passed)
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _eval_rows(args, t):
    """Return ``(rows, poles, total)``; rows are ``(what, k, z, matrix)`` records."""
    what = args.what
    kmax = args.kmax if args.k is None else args.k
    if kmax < 0:
        raise UsageError("--k/--kmax must be >= 0")
    if what == "potential":
        seq = build_sequence(t, kmax)
        ks = range(kmax + 1) if args.k is None else [args.k]
        return [("potential", k, None, seq.C[k]) for k in ks], 0, 0
    if args.grid is None:
        raise UsageError(f"--grid is required for --what {what}")
    points = parse_grid(args.grid).points()
    rows, poles = [], 0
    if what == "fundamental":
        seq = build_sequence(t, max(kmax, 1))
        ks = list(range(kmax + 1)) if args.k is None else [args.k]
        values = {}
        for z in points:
            try:
                values[z] = fundamental_paths(seq, kmax, z)[0]
            except PoleError as exc:
                poles += 1
                print(f"skipped z={z}: {exc}", file=sys.stderr)
        for k in ks:
            for z in points:
                if z in values:
                    rows.append(("fundamental", k, z, values[z][k]))
        return rows, poles, len(points)
    seq = build_sequence(t, 0) if what == "weyl" else None
    for z in points:
        try:
            M = weyl_value(seq, z) if what == "weyl" else reflection_closed(t, z)
        except PoleError as exc:
            poles += 1
            print(f"skipped z={z}: {exc}", file=sys.stderr)
            continue
        rows.append((what, None, z, M))
    return rows, poles, len(points)


def _cmd_eval(args):
    t = load_triple(args.triple)
    rows, poles, total = _eval_rows(args, t)
    if total and poles == total:
        print("every grid point is at a pole; nothing written", file=sys.stderr)
        return EXIT_FAIL
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        count = write_csv_rows(fh, rows)
    if poles:
        print(f"{poles} of {total} grid points skipped at poles", file=sys.stderr)
    _progress(args, f"wrote {count} rows to {args.out}")
    return EXIT_OK


_COMMANDS = {"gen": _cmd_gen, "verify": _cmd_verify, "eval": _cmd_eval}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DiracGbdtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
