"""Turbo equalization with a rate-1/2, constraint-length-7 code.

Shows the error count after each outer iteration for standard and Minka
input messages on the same blocks.

    python demos/04_turbo_equalization.py --blocks 20 --snr 8.5
"""

import argparse

import numpy as np

from eqsim.channel import PRESETS, realize_state_space, simulate, snr_to_noise_var
from eqsim.coded import ConvCode, Interleaver, conv_encode, interleave, turbo_equalize
from eqsim.equalizer import EqualizerConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--blocks", type=int, default=20)
    parser.add_argument("--info-bits", type=int, default=1024)
    parser.add_argument("--snr", type=float, default=8.5)
    parser.add_argument("--outer", type=int, default=4)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    spec = PRESETS["proakis5"]
    model = realize_state_space(spec)
    code = ConvCode()
    n_coded = code.coded_length(args.info_bits)
    pi = Interleaver.random(n_coded, seed=1)
    nv = snr_to_noise_var(args.snr, spec, args.info_bits / n_coded)
    inner = {"standard": None, "minka": EqualizerConfig(max_iters=10)}
    errors = {k: np.zeros(args.outer, dtype=int) for k in inner}

    rng = np.random.default_rng(args.seed)
    for _ in range(args.blocks):
        info = rng.integers(0, 2, args.info_bits)
        obs = simulate(model, interleave(conv_encode(info, code), pi), nv, rng)
        for name, cfg in inner.items():
            _, diag = turbo_equalize(obs, model, code, pi, cfg, args.outer, info_bits=info)
            errors[name] += diag.per_outer_errors

    total = args.blocks * args.info_bits
    print(f"{total} info bits at {args.snr:g} dB, noise variance {nv:.4f}")
    print("outer  " + "  ".join(f"{k:>10}" for k in inner))
    for j in range(args.outer):
        print(f"{j + 1:5d}  " + "  ".join(f"{errors[k][j] / total:10.2e}" for k in inner))


if __name__ == "__main__":
    main()
