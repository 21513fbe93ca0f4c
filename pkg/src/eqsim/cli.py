"""``eqsim`` command line: ``run`` BER sweeps and ``verify`` the oracles."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .channel import InvalidChannelError, parse_channel
from .coded import ConvCode, parse_generators
from .equalizer import EqualizerConfig
from .harness import CODED_SCHEMES, ExperimentConfig, run_ber_experiment, verify, write_results
from .schedules import parse_alpha

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def parse_snr(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list, in dB."""
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError as exc:
            raise ConfigError(f"bad SNR range {text!r}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"bad SNR range {text!r}")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad SNR list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo BER sweep")
    run.add_argument("--channel", default="proakis5",
                     help="proakis5 | iir09 | fir:<csv> | iir:<b csv>/<a csv>")
    run.add_argument("--snr", default="6:12:2", help="start:stop:step in dB, or a list")
    run.add_argument("--schemes", default=None,
                     help="comma list of lmmse,minka_A,minka_B,bcjr,coded_std,coded_minka")
    run.add_argument("--block", type=int, default=None,
                     help="symbols per block (uncoded) or info bits per block (coded)")
    run.add_argument("--min-bits", type=int, default=200_000)
    run.add_argument("--min-errors", type=int, default=100)
    run.add_argument("--max-bits", type=int, default=10_000_000)
    run.add_argument("--iters", type=int, default=20, help="EP iterations per equalization")
    run.add_argument("--schedule", choices=("A", "B"), default="B",
                     help="schedule of minka_* schemes not naming one, and of coded_minka")
    run.add_argument("--alpha", default="geo:0.05,1.2", help="const:a | geo:a0,r | two:a0,r,N")
    run.add_argument("--negvar", choices=("allow", "clamp"), default="clamp")
    run.add_argument("--tol", type=float, default=1e-4, help="convergence tolerance on LLRs")
    run.add_argument("--coded", action="store_true", help="coded experiment (default schemes coded_*)")
    run.add_argument("--code", default="133,171", help="octal generators")
    run.add_argument("--interleaver-seed", type=int, default=1)
    run.add_argument("--outer-iters", type=int, default=4)
    run.add_argument("--inner-iters", type=int, default=10, help="EP iterations per outer iteration")
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--timing", action="store_true",
                     help="record wall time (otherwise written as 0 for reproducible files)")
    run.add_argument("--out", default="results.csv", help=".csv or .jsonl")

    ver = sub.add_parser("verify", help="oracle-equivalence checks on small instances")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--perturb", type=float, default=0.0,
                     help="tap perturbation injected into the checked model")
    ver.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args) -> ExperimentConfig:
    try:
        channel = parse_channel(args.channel)
        if args.schemes:
            schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
        else:
            schemes = CODED_SCHEMES if args.coded else ("lmmse", "minka_B", "bcjr")
        code = ConvCode(generators=parse_generators(args.code))
        equalizer = EqualizerConfig(
            schedule=args.schedule, max_iters=args.iters, alpha_schedule=parse_alpha(args.alpha),
            negvar_policy=args.negvar, convergence_tol=args.tol,
        )
        block = {} if args.block is None else (
            {"info_block_length": args.block} if args.coded else {"block_length": args.block}
        )
        return ExperimentConfig(
            channel=channel, snr_db=parse_snr(args.snr), min_bits=args.min_bits,
            min_errors=args.min_errors, max_bits=args.max_bits, schemes=schemes,
            equalizer=equalizer, code=code, interleaver_seed=args.interleaver_seed,
            outer_iters=args.outer_iters, coded_inner_iters=args.inner_iters,
            base_seed=args.seed, **block,
        )
    except (InvalidChannelError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        if args.trials < 1:
            print("eqsim: configuration error: --trials must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        return verify(trials=args.trials, perturb=args.perturb, seed=args.seed)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"eqsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    records = run_ber_experiment(config)
    for snr, scheme, reason in records.skipped:
        print(f"eqsim: skipped {scheme} at {snr:g} dB: {reason}", file=sys.stderr)
    try:
        write_results(records, args.out, timing=args.timing)
    except OSError as exc:
        print(f"eqsim: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in records:
        print(f"{r.snr_db:6.2f} dB  {r.scheme:<12} ber {r.ber:.3e}  ({r.errors}/{r.bits})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
