"""Conversions between soft bits (LLRs) and scalar Gaussian messages.

Three ways of turning a soft bit into a Gaussian message are provided:

* :func:`standard_gaussian` matches the mean and variance of the soft bit
  itself (the classical choice, which makes the Kalman equalizer an LMMSE
  equalizer);
* :func:`minka_gaussian` matches the moments of the soft bit *times* the
  incoming Gaussian message and then divides the incoming message back out
  (expectation propagation). The result can have zero or negative weight;
* :func:`damped_msg` forms the geometric mixture of the two, which in
  precision form is plain linear interpolation of the parameters.

The ``_*_scalar`` helpers are numba-compiled so the equalizer kernels share
the exact arithmetic used by the public functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .messages import WEIGHT_CAP, GaussianMessage, TrueMoments

LLR_MAX = 30.0


class MinkaFallback(ValueError):
    """The incoming message is not a proper Gaussian; use the standard conversion."""


@dataclass(frozen=True)
class SoftBit:
    """Binary message on {+1, -1} stored as ``ln(mu(+1) / mu(-1))``.

    The LLR is clamped to ``[-LLR_MAX, LLR_MAX]`` on construction.
    """

    llr: float

    def __post_init__(self):
        llr = float(self.llr)
        if math.isnan(llr):
            raise ValueError("LLR is NaN")
        object.__setattr__(self, "llr", min(max(llr, -LLR_MAX), LLR_MAX))

    @property
    def mean(self) -> float:
        return math.tanh(0.5 * self.llr)


@njit(cache=True)
def _clip(llr, llr_max):
    return min(max(llr, -llr_max), llr_max)


@njit(cache=True)
def _standard_scalar(llr):
    # weight = 1 / (1 - tanh^2) = cosh^2, capped
    h = 0.5 * llr
    w = min(math.cosh(h) ** 2, WEIGHT_CAP)
    return w, w * math.tanh(h)


@njit(cache=True)
def _minka_scalar(llr_fwd, w_in, xi_in, llr_max):
    """Minka message for a proper incoming Gaussian ``(w_in, xi_in)``; ``w_in > 0``."""
    h = 0.5 * (llr_fwd + _clip(2.0 * xi_in, llr_max))
    w_true = min(math.cosh(h) ** 2, WEIGHT_CAP)
    return w_true - w_in, w_true * math.tanh(h) - xi_in


@njit(cache=True)
def _input_message(llr_fwd, w_out, xi_out, alpha, llr_max):
    """Damped input message for one symbol.

    Returns ``(weight, wmean, status)`` with status 0 for a Minka-based
    message, 1 when the Minka conversion fell back to the standard one, and
    2 when the Minka message itself had weight <= 0.
    """
    w_s, xi_s = _standard_scalar(llr_fwd)
    if alpha == 0.0:
        return w_s, xi_s, 0
    if w_out <= 0.0:
        return w_s, xi_s, 1
    w_m, xi_m = _minka_scalar(llr_fwd, w_out, xi_out, llr_max)
    status = 2 if w_m <= 0.0 else 0
    return alpha * w_m + (1.0 - alpha) * w_s, alpha * xi_m + (1.0 - alpha) * xi_s, status


def gaussian_to_softbit(g: GaussianMessage) -> SoftBit:
    """Exact (lossless) conversion ``llr = 2 m / var = 2 wmean``."""
    return SoftBit(2.0 * g.wmean)


def softbit_moments(s: SoftBit) -> tuple[float, float]:
    h = 0.5 * s.llr
    return math.tanh(h), 1.0 / math.cosh(h) ** 2


def standard_gaussian(s: SoftBit) -> GaussianMessage:
    w, xi = _standard_scalar(s.llr)
    return GaussianMessage(w, xi)


def true_moments(forward: SoftBit, backward: SoftBit) -> TrueMoments:
    """Moments of the normalized product of two soft bits.

    ``(m_f + m_b) / (1 + m_f m_b)`` is evaluated as ``tanh((l_f + l_b) / 2)``.
    """
    mean = math.tanh(0.5 * (forward.llr + backward.llr))
    return TrueMoments(mean, 1.0 - mean * mean)


def minka_gaussian(forward: SoftBit, incoming: GaussianMessage) -> GaussianMessage:
    """Gaussian message whose product with ``incoming`` moment-matches the true product.

    Raises :class:`MinkaFallback` when ``incoming`` has weight <= 0.
    """
    if incoming.weight <= 0.0:
        raise MinkaFallback(f"incoming weight {incoming.weight!r} is not positive")
    # weight of the moment-matched product is 1 / (1 - m_true**2) = cosh^2(L / 2),
    # evaluated directly to avoid cancellation near saturation
    w, xi = _minka_scalar(forward.llr, incoming.weight, incoming.wmean, LLR_MAX)
    return GaussianMessage(w, xi)


def minka_or_standard(forward: SoftBit, incoming: GaussianMessage) -> GaussianMessage:
    try:
        return minka_gaussian(forward, incoming)
    except MinkaFallback:
        return standard_gaussian(forward)


def damped_msg(minka: GaussianMessage, standard: GaussianMessage, alpha: float) -> GaussianMessage:
    """Geometric mixture ``minka**alpha * standard**(1 - alpha)``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return GaussianMessage(
        alpha * minka.weight + (1.0 - alpha) * standard.weight,
        alpha * minka.wmean + (1.0 - alpha) * standard.wmean,
    )


def clip_llrs(llrs, llr_max: float = LLR_MAX) -> np.ndarray:
    return np.clip(np.asarray(llrs, dtype=float), -llr_max, llr_max)


def standard_gaussians(llrs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`standard_gaussian`: returns ``(weights, wmeans)``."""
    h = 0.5 * clip_llrs(llrs)
    w = np.minimum(np.cosh(h) ** 2, WEIGHT_CAP)
    return w, w * np.tanh(h)
