"""Command-line front end: BER sweeps, L sweeps, constellation dumps, oracle checks."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

from . import __version__
from .csvio import emit_ber_csv, emit_constellation_csv, emit_lsweep_csv
from .model import SystemConfig
from .precoders import BWP_SIZE_LIMIT, BwpSizeError, PrecoderKind, PrecodingError
from .sim import WORKERS_ENV, capture_constellation, run_ber_experiment

SUBCOMMANDS = ("ber-sweep", "l-sweep", "constellation", "oracle-check")
DEFAULT_METHODS = "passive,max-min,max-sum-min"

EPILOG = f"""\
notes:
  Full-scale runs use --antennas 64; the default of 16 keeps desk runs short.
  Active methods (max-min, max-sum-min) need the next L-1 symbol vectors when
  designing slot t, i.e. a design latency of L-1 symbols.
  bwp solves one dense LP per block and is limited to antennas*block_length <=
  {BWP_SIZE_LIMIT} unless --allow-large-bwp is given.
  Set {WORKERS_ENV}=<n> to spread Monte-Carlo trials over n processes
  (0 = all cores); results do not depend on the worker count.
"""


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunSpec:
    subcommand: str
    config: SystemConfig
    kinds: Tuple[PrecoderKind, ...] = ()
    snr_db: Tuple[float, ...] = ()
    taps_list: Tuple[int, ...] = ()
    trials: int = 100
    output_path: Optional[Path] = None
    allow_large_bwp: bool = False


def _float_list(flag):
    def parse(text):
        try:
            vals = tuple(float(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: malformed list {text!r}") from None
        if not vals:
            raise argparse.ArgumentTypeError(f"{flag}: empty list")
        return vals
    return parse


def _int_list(flag):
    def parse(text):
        try:
            vals = tuple(int(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"{flag}: malformed list {text!r}") from None
        if not vals or min(vals) < 1:
            raise argparse.ArgumentTypeError(f"{flag}: need positive integers")
        return vals
    return parse


def _methods(text):
    try:
        kinds = tuple(PrecoderKind.parse(v.strip()) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--methods: {exc}") from None
    if not kinds:
        raise argparse.ArgumentTypeError("--methods: empty list")
    return tuple(dict.fromkeys(kinds))


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="onebit-mimo", description=__doc__, epilog=EPILOG,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--antennas", type=_positive_int, default=16, help="N (full scale: 64)")
    p.add_argument("--users", type=_positive_int, default=4, help="K")
    p.add_argument("--taps", type=_positive_int, default=3, help="L")
    p.add_argument("--psk", type=int, default=8, help="D, a power of two")
    p.add_argument("--block-length", type=_positive_int, default=256, help="T_c")
    p.add_argument("--power", type=float, default=1.0, help="total transmit power rho")
    p.add_argument("--snr-db", type=_float_list("--snr-db"), default=None,
                   help="comma list (default 0,5,10,15,20; l-sweep 20)")
    p.add_argument("--taps-list", type=_int_list("--taps-list"), default=None,
                   help="comma list of L values for l-sweep")
    p.add_argument("--trials", type=_positive_int, default=100,
                   help="Monte-Carlo trials (oracle-check: instances per size)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", type=_methods, default=_methods(DEFAULT_METHODS),
                   help="comma list of passive,max-min,max-sum-min,bwp")
    p.add_argument("--out", type=Path, default=None, help="output CSV path (default: stdout)")
    p.add_argument("--allow-large-bwp", action="store_true",
                   help=f"run bwp beyond antennas*block_length={BWP_SIZE_LIMIT}")
    return p


def parse_cli(argv: List[str]) -> RunSpec:
    args = build_parser().parse_args(argv)
    if args.psk < 2 or args.psk & (args.psk - 1):
        raise UsageError(f"--psk must be a power of two >= 2, got {args.psk}")
    if args.antennas < args.users:
        raise UsageError("--antennas must be >= --users")
    if not args.power > 0:
        raise UsageError("--power must be positive")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")

    snr = args.snr_db
    if snr is None:
        snr = (20.0,) if args.subcommand == "l-sweep" else (0.0, 5.0, 10.0, 15.0, 20.0)
    taps_list = args.taps_list or ()
    if args.subcommand == "l-sweep" and not taps_list:
        raise UsageError("l-sweep requires --taps-list")

    config = SystemConfig(
        n_antennas=args.antennas, n_users=args.users,
        n_taps=taps_list[0] if args.subcommand == "l-sweep" else args.taps,
        psk_order=args.psk, total_power=args.power, noise_variance=1.0,
        block_length=args.block_length, rng_seed=args.seed,
    )
    if (PrecoderKind.BWP in args.methods and args.subcommand != "oracle-check"
            and args.antennas * args.block_length > BWP_SIZE_LIMIT
            and not args.allow_large_bwp):
        raise UsageError(
            f"bwp with --antennas*--block-length={args.antennas * args.block_length} "
            f"exceeds {BWP_SIZE_LIMIT}; pass --allow-large-bwp to override")
    return RunSpec(args.subcommand, config, args.methods, snr, taps_list, args.trials,
                   args.out, args.allow_large_bwp)


def _run_oracle_check(spec: RunSpec, out) -> int:
    from .checks import oracle_dominance_suite

    report = oracle_dominance_suite(seed=spec.config.rng_seed, instances=spec.trials)
    for f in report.failures[:20]:
        print("violation: kind=%s N=%d K=%d L=%d instance=%d relaxed=%r oracle=%r "
              "quantized=%r" % f, file=out)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict} oracle dominance: {report.checked} slot checks, "
          f"{len(report.failures)} violations", file=out)
    return 0 if report.passed else 1


def run(spec: RunSpec, out=None) -> int:
    out = out or sys.stdout
    cfg = spec.config
    if spec.subcommand == "oracle-check":
        return _run_oracle_check(spec, out)
    if spec.subcommand == "ber-sweep":
        table = run_ber_experiment(cfg, spec.kinds, spec.snr_db, spec.trials,
                                   allow_large_bwp=spec.allow_large_bwp)
        emit_ber_csv(table, spec.output_path)
    elif spec.subcommand == "l-sweep":
        tables = [
            run_ber_experiment(replace(cfg, n_taps=L), spec.kinds, spec.snr_db,
                               spec.trials, allow_large_bwp=spec.allow_large_bwp)
            for L in spec.taps_list
        ]
        emit_lsweep_csv(tables, spec.output_path)
    elif spec.subcommand == "constellation":
        dumps = [capture_constellation(cfg, k, allow_large_bwp=spec.allow_large_bwp)
                 for k in spec.kinds]
        emit_constellation_csv(dumps, spec.output_path, cfg)
    if spec.output_path is not None and str(spec.output_path) != "-":
        print(f"wrote {spec.output_path}", file=out)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_cli(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"onebit-mimo: error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(spec)
    except BwpSizeError as exc:
        print(f"onebit-mimo: error: {exc}", file=sys.stderr)
        return 2
    except (PrecodingError, OSError) as exc:
        print(f"onebit-mimo: failed: {exc}", file=sys.stderr)
        return 1
