"""The Kalman sweep computes exact Gaussian extrinsic messages.

Compares ``kalman_extrinsic`` with a dense joint-Gaussian computation on a
short block, for a proper set of input messages and for one containing
negative weights.

    python demos/02_kalman_vs_oracle.py --n 8 --seed 3
"""

import argparse

import numpy as np

from eqsim.channel import PRESETS, realize_state_space, simulate, snr_to_noise_var
from eqsim.equalizer import NumericalFailure, kalman_extrinsic
from eqsim.messages import GaussianMessages
from eqsim.oracles import OracleFailure, joint_gaussian_extrinsic


def compare(model, obs, msgs, label):
    try:
        out = kalman_extrinsic(model, obs, msgs, negvar_policy="allow")
        w, xi = joint_gaussian_extrinsic(model, obs, msgs)
    except (NumericalFailure, OracleFailure) as exc:
        print(f"{label}: skipped ({exc})")
        return
    print(f"{label}: max |weight diff| {np.max(np.abs(out.weight - w)):.2e}, "
          f"max |wmean diff| {np.max(np.abs(out.wmean - xi)):.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--snr", type=float, default=10.0)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    for name in ("proakis5", "iir09"):
        spec = PRESETS[name]
        model = realize_state_space(spec)
        obs = simulate(model, rng.choice([1.0, -1.0], args.n), snr_to_noise_var(args.snr, spec), rng)
        print(f"\n{name}: state dimension {model.dim}, noise variance {obs.noise_var:.4f}")
        proper = GaussianMessages.from_mean_var(rng.uniform(-1, 1, args.n), rng.uniform(0.2, 2, args.n))
        compare(model, obs, proper, "  proper inputs  ")
        w = proper.weight.copy()
        w[args.n // 2] = -0.2
        compare(model, obs, GaussianMessages(w, proper.wmean), "  one weight < 0 ")


if __name__ == "__main__":
    main()
