"""Command-line front end.

Subcommands: ``random`` (seeded state generation), ``reduce`` (staged
elimination with trace and report output), ``verify`` (round-trip check
of a recorded trace), ``schmidt`` (bipartite cross-check against the
spectral oracle).

Exit codes are a stable scripting contract: 0 success, 1 invalid input
or arguments, 2 non-convergence or oracle failure, 3 verification or
cross-check failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NonConvergenceError, OracleFailureError
from .fileio import (
    file_digest,
    load_state,
    load_trace,
    read_state_file,
    report_to_dict,
    save_report,
    save_state,
    save_trace,
)
from .reduction import invert_rotations, reduce
from .spectral import schmidt_coefficients
from .state import random_state

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_CONVERGENCE = 2
EXIT_VERIFY_FAILED = 3

#: Round-trip deviation below which ``verify`` passes.
VERIFY_TOL = 1e-9
#: Oracle-vs-reduction coefficient difference below which ``schmidt`` passes.
SCHMIDT_TOL = 1e-8

_OUTPUT_SUFFIXES = (".reduced.json", ".trace.json", ".report.json")


def _fail(message) -> None:
    print(f"error: {message}", file=sys.stderr)


def _derived(path: Path, kind: str) -> Path:
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    return path.with_name(f"{stem}.{kind}.json")


def cmd_random(args) -> int:
    try:
        state = random_state(args.n, args.l, args.seed)
    except ValueError as exc:  # includes CapacityError
        _fail(exc)
        return EXIT_INVALID
    save_state(args.output, state, seed=args.seed)
    print(f"wrote {args.output}: n={args.n} l={args.l} seed={args.seed}")
    return EXIT_OK


def _reduce_single(input_path: Path, output: Path, trace_path: Path,
                   report_path: Path, args) -> int:
    started = time.perf_counter()
    try:
        state, renormalized, seed = load_state(input_path)
        digest = file_digest(input_path)
    except (OSError, ValueError) as exc:
        _fail(f"{input_path}: {exc}")
        return EXIT_INVALID

    code = EXIT_OK
    try:
        trace, report = reduce(state, strategy=args.strategy,
                               epsilon=args.eps,
                               max_iters_per_stage=args.max_iters,
                               support_threshold=args.threshold)
    except NonConvergenceError as exc:
        # Partial outputs are still written, flagged in the report.
        trace, report = exc.trace, exc.report
        code = EXIT_NO_CONVERGENCE
        _fail(f"{input_path}: {exc}")

    duration = time.perf_counter() - started
    save_state(output, trace.final_state)
    save_trace(trace_path, trace)
    save_report(report_path, report_to_dict(
        report, tool_version=__version__, input_digest=digest, seed=seed,
        duration_seconds=duration, input_renormalized=renormalized))
    print(f"{input_path}: converged={report.converged} "
          f"support {report.support_before} -> {report.support_after} "
          f"(bound {report.bound}), {len(trace.rotations)} rotations")
    return code


def cmd_reduce(args) -> int:
    if args.batch:
        directory = Path(args.batch)
        if not directory.is_dir():
            _fail(f"{directory} is not a directory")
            return EXIT_INVALID
        inputs = sorted(
            p for p in directory.glob("*.json")
            if not p.name.endswith(_OUTPUT_SUFFIXES)
        )
        if not inputs:
            _fail(f"no state files found in {directory}")
            return EXIT_INVALID
        # Runs are independent; processed sequentially here.
        return max(
            _reduce_single(p, _derived(p, "reduced"), _derived(p, "trace"),
                           _derived(p, "report"), args)
            for p in inputs
        )
    if not args.input:
        _fail("reduce needs --input or --batch")
        return EXIT_INVALID
    input_path = Path(args.input)
    output = Path(args.output) if args.output else _derived(input_path, "reduced")
    trace_path = Path(args.trace) if args.trace else _derived(input_path, "trace")
    report_path = Path(args.report) if args.report else _derived(input_path, "report")
    return _reduce_single(input_path, output, trace_path, report_path, args)


def cmd_verify(args) -> int:
    try:
        n0, l0, original, _ = read_state_file(args.original)
        n1, l1, reduced, _ = read_state_file(args.reduced)
        nt, lt, _, rotations = load_trace(args.trace)
    except (OSError, ValueError) as exc:
        _fail(exc)
        return EXIT_INVALID
    if not (n0 == n1 == nt and l0 == l1 == lt):
        _fail(f"shape mismatch: original ({n0},{l0}), reduced ({n1},{l1}), "
              f"trace ({nt},{lt})")
        return EXIT_INVALID
    reconstructed = invert_rotations(reduced, n0, l0, rotations)
    deviation = float(np.max(np.abs(reconstructed - original))) if len(original) else 0.0
    print(f"max amplitude deviation: {deviation:.6e}")
    if deviation < VERIFY_TOL:
        print("verification passed")
        return EXIT_OK
    print("verification FAILED")
    return EXIT_VERIFY_FAILED


def cmd_schmidt(args) -> int:
    try:
        state, _, _ = load_state(args.input)
    except (OSError, ValueError) as exc:
        _fail(exc)
        return EXIT_INVALID
    if state.l != 2:
        _fail(f"schmidt cross-check needs a bipartite state (l = 2), got l = {state.l}")
        return EXIT_INVALID
    try:
        oracle = schmidt_coefficients(state)
    except OracleFailureError as exc:
        _fail(exc)
        return EXIT_NO_CONVERGENCE
    try:
        trace, _ = reduce(state, strategy="greedy", epsilon=1e-12)
    except NonConvergenceError as exc:
        _fail(exc)
        return EXIT_NO_CONVERGENCE
    n = state.n
    diag = np.abs(trace.final_state.amplitudes[[i * (n + 1) for i in range(n)]])
    diag = np.sort(diag)[::-1]
    coeffs = oracle.schmidt_coefficients
    difference = float(np.max(np.abs(diag - coeffs)))
    print("reduction diagonal:", " ".join(repr(float(v)) for v in diag))
    print("schmidt oracle:    ", " ".join(repr(float(v)) for v in coeffs))
    print(f"max difference: {difference:.6e}")
    return EXIT_OK if difference < SCHMIDT_TOL else EXIT_VERIFY_FAILED


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit 1, as the code contract promises."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _fail(message)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="quditreduce",
        description="Reduce multipartite pure states to few product-basis "
                    "terms with recorded local plane rotations.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("random", help="write a seeded random state file")
    p.add_argument("--n", type=int, required=True, help="levels per site (>= 2)")
    p.add_argument("--l", type=int, required=True, help="number of sites (>= 1)")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--output", required=True, help="state file to write")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("reduce", help="run the staged elimination on a state file")
    p.add_argument("--input", help="state file to reduce")
    p.add_argument("--batch", metavar="DIR",
                   help="reduce every state file in DIR instead of --input")
    p.add_argument("--output", help="reduced state file (default: <input>.reduced.json)")
    p.add_argument("--trace", help="rotation trace file (default: <input>.trace.json)")
    p.add_argument("--report", help="report file (default: <input>.report.json)")
    p.add_argument("--eps", type=float, default=1e-12,
                   help="convergence threshold on target magnitudes")
    p.add_argument("--strategy", choices=["greedy", "round-robin"],
                   default="greedy")
    p.add_argument("--max-iters", type=int, default=10000,
                   help="elimination cap per stage")
    p.add_argument("--threshold", type=float, default=None,
                   help="support-count threshold (default 10*eps)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify",
                       help="check that a trace maps the reduced state back to the original")
    p.add_argument("--original", required=True, help="original state file")
    p.add_argument("--trace", required=True, help="trace file from reduce")
    p.add_argument("--reduced", required=True, help="reduced state file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("schmidt",
                       help="cross-check a bipartite reduction against the spectral oracle")
    p.add_argument("--input", required=True, help="bipartite state file")
    p.set_defaults(func=cmd_schmidt)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
