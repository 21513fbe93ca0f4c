"""How a soft bit becomes a Gaussian input message.

Walks through the standard (moment-of-the-prior) message, the Minka
(moment-of-the-posterior) message, the case where the latter has negative
weight, and alpha-damping between the two.

    python demos/01_message_conversion.py
"""

from eqsim.conversion import SoftBit, damped_msg, minka_gaussian, standard_gaussian, true_moments
from eqsim.messages import make_from_mean_var, mean_var, multiply


def show(label, msg):
    if msg.weight > 0:
        m, v = mean_var(msg)
        print(f"  {label:<28} weight {msg.weight:+.6f}  mean {m:+.6f}  var {v:.6f}")
    else:
        print(f"  {label:<28} weight {msg.weight:+.6f}  (improper)")


def main():
    prior = SoftBit(0.0)
    incoming = make_from_mean_var(1.0, 1.0)
    print("Neutral prior, channel says N(1, 1):")
    show("standard message", standard_gaussian(prior))
    minka = minka_gaussian(prior, incoming)
    show("Minka message", minka)

    t = true_moments(prior, SoftBit(2 * incoming.wmean))
    m, v = mean_var(multiply(minka, incoming))
    print(f"  Minka x incoming has mean {m:.12f}, var {v:.12f}")
    print(f"  exact two-point posterior: mean {t.mean:.12f}, var {t.variance:.12f}")

    print("\nIncoming N(0, 0.5) is narrower than the two-point posterior (variance 1),")
    print("so the Minka message has negative weight:")
    show("Minka message", minka_gaussian(prior, make_from_mean_var(0.0, 0.5)))

    print("\nDamping from standard (alpha = 0) to Minka (alpha = 1):")
    std = standard_gaussian(prior)
    for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
        show(f"alpha = {alpha:.2f}", damped_msg(minka, std, alpha))


if __name__ == "__main__":
    main()
