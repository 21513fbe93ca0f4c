"""Uncoded bit error rates: LMMSE, iterative Minka equalization and BCJR.

A short sweep on the Proakis channel (and LMMSE vs Minka on the IIR
channel). Sample sizes are small so this finishes in well under a minute;
use ``eqsim run`` for publication-size runs.

    python demos/03_uncoded_ber.py --bits 50000
"""

import argparse

from eqsim.channel import PRESETS
from eqsim.harness import ExperimentConfig, run_ber_experiment


def table(records):
    for r in records:
        lo, hi = r.confidence_interval()
        print(f"  {r.snr_db:5.1f} dB  {r.scheme:<8} ber {r.ber:.4f}  95% CI [{lo:.4f}, {hi:.4f}]"
              f"  iters {r.iters:4.1f}  negvar {r.negvar_count}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bits", type=int, default=50_000)
    args = parser.parse_args()
    common = dict(min_bits=args.bits, min_errors=50)

    print("Proakis channel, schedules A and B at 20 iterations:")
    table(run_ber_experiment(ExperimentConfig(
        snr_db=(8.0, 10.0, 12.0), schemes=("lmmse", "minka_A", "minka_B", "bcjr"), **common)))

    print("\nFirst-order IIR channel (no trellis baseline):")
    table(run_ber_experiment(ExperimentConfig(
        channel=PRESETS["iir09"], snr_db=(8.0, 10.0, 12.0), schemes=("lmmse", "minka_B"), **common)))


if __name__ == "__main__":
    main()
