"""Command line interface: ``dtcs analyze | check-guarantee | recover | experiment``.

Exit codes: 0 success, 1 invalid arguments or config, 2 runtime or numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import harness
from .errors import (
    ConfigError,
    DegenerateMatrixError,
    EnumerationBudgetError,
    InadmissibleError,
    RankDeficientError,
)
from .matrices import MatrixKind, MatrixSpec, build
from .metrics import rho_2, rho_d

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
_RUNTIME_ERRORS = (RankDeficientError, InadmissibleError, DegenerateMatrixError,
                   EnumerationBudgetError, np.linalg.LinAlgError, ArithmeticError, OSError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _snr(text):
    return harness._parse_float(text)


def _matrix_args(p):
    p.add_argument("--kind", required=True, choices=[k.value for k in MatrixKind])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inflation-d", type=int, default=0)


def _spec(args) -> MatrixSpec:
    return MatrixSpec(MatrixKind(args.kind), args.m, args.n, args.seed, args.inflation_d)


def build_parser():
    parser = _Parser(prog="dtcs", description="d-tolerant compressed sensing toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="coherence profile of one matrix as CSV")
    _matrix_args(p)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("check-guarantee", help="recovery-guarantee conditions per d as CSV")
    _matrix_args(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d-min", type=int, default=0)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("recover", help="recover one random signal and print metrics")
    _matrix_args(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--snr-db", type=_snr, default=math.inf)
    p.add_argument("--algorithm", choices=harness.ALGORITHMS, default="dtomp")
    p.add_argument("--spread", default=None, help="integer gap or '4d+1'")

    p = sub.add_parser("experiment", help="Monte-Carlo sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    return parser


def _cmd_analyze(args):
    path = harness.analyze_matrix(_spec(args), args.d_max, args.out)
    print(f"wrote {path}")


def _cmd_check(args):
    admissible = harness.check_guarantee(_spec(args), args.s, args.out, args.d_min, args.d_max)
    print(f"wrote {args.out}")
    print("admissible d: " + (",".join(str(d) for d in sorted(admissible)) or "none"))


def _cmd_recover(args):
    spec = _spec(args)
    spread = None
    if args.spread is not None:
        spread = "4d+1" if args.spread.replace(" ", "") == "4d+1" else int(args.spread)
    config = harness.ExperimentConfig(
        matrix_specs=(spec,), n=args.n, m=args.m, s=args.s, d_values=(args.d,),
        snr_db_values=(args.snr_db,), trials=1, master_seed=args.seed,
        algorithm=args.algorithm, spread=spread, metric="both",
    )
    point = harness.grid_points(config)[0]
    matrix = build(spec)
    seed = harness.trial_seed(config.master_seed, point, 0)
    sig_seed, noise_seed = harness._sub_seeds(seed)
    signal = harness.generate_signal(args.n, args.s, sig_seed, config.spread_for(args.d))
    noise = harness.NoiseSpec(args.snr_db, noise_seed)
    estimate, support = harness._recover(config, config.matrix_specs[0], matrix, signal, noise, args.d)
    print("true support:      " + " ".join(map(str, signal.support)))
    print("recovered support: " + " ".join(map(str, support)))
    print(f"rho_d: {rho_d(signal.support, support, args.d)!r}")
    try:
        print(f"rho_2: {rho_2(signal, estimate, args.d)!r}")
    except ValueError as exc:
        print(f"rho_2: undefined ({exc})")


def _cmd_experiment(args):
    config = harness.load_config(args.config, args.trials)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    result = harness.run_sweep(config, threads=args.threads)
    harness.emit_csv(result, args.out)
    flagged = sum(r.flagged for recs in result.records.values() for r in recs)
    print(f"wrote {args.out} ({len(result.rows)} grid points, {flagged} flagged trials)")


_COMMANDS = {
    "analyze": _cmd_analyze,
    "check-guarantee": _cmd_check,
    "recover": _cmd_recover,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except _RUNTIME_ERRORS as exc:
        print(f"dtcs: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, ValueError) as exc:
        print(f"dtcs: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
