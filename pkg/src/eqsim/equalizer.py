"""Kalman-smoother equalizers with EP input messages, plus LMMSE and BCJR baselines.

All equalizers return *extrinsic* LLRs: the prior of a symbol is not
included in its own output, so callers add priors before deciding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel import ChannelSpec, StateSpaceModel, TransmissionRecord
from .conversion import LLR_MAX, clip_llrs, standard_gaussians
from .messages import GaussianMessages
from .schedules import AlphaSchedule

SCHEDULES = ("A", "B")
NEGVAR_POLICIES = ("allow", "clamp")


class NumericalFailure(ArithmeticError):
    """A local combined precision became non-positive under the ``allow`` policy."""


class UnsupportedChannelError(ValueError):
    pass


@dataclass(frozen=True)
class EqualizerConfig:
    schedule: str = "B"
    max_iters: int = 20
    alpha_schedule: AlphaSchedule = field(default_factory=AlphaSchedule)
    llr_max: float = LLR_MAX
    negvar_policy: str = "clamp"
    convergence_tol: float = 1e-4

    def __post_init__(self):
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if self.negvar_policy not in NEGVAR_POLICIES:
            raise ValueError(f"negvar_policy must be one of {NEGVAR_POLICIES}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if not self.llr_max > 0:
            raise ValueError("llr_max must be positive")


@dataclass
class EqualizerDiagnostics:
    iterations_run: int = 0
    negvar_count: int = 0
    clamp_count: int = 0
    fallback_count: int = 0
    converged: bool = False
    per_iteration_ber: np.ndarray | None = None
    llr_history: np.ndarray | None = None
    inputs: GaussianMessages | None = None
    outputs: GaussianMessages | None = None


def _arrays(model: StateSpaceModel):
    # numba wants writable contiguous copies
    return np.array(model.A), np.array(model.B), np.array(model.C)


def _priors(priors, n: int, llr_max: float) -> np.ndarray:
    if priors is None:
        return np.zeros(n)
    priors = clip_llrs(priors, llr_max)
    if priors.shape != (n,):
        raise ValueError(f"expected {n} priors, got shape {priors.shape}")
    return priors


def kalman_extrinsic(
    model: StateSpaceModel,
    obs: TransmissionRecord,
    input_msgs: GaussianMessages,
    negvar_policy: str = "clamp",
) -> GaussianMessages:
    """Exact Gaussian sum-product messages out of the channel on every symbol edge.

    Parameters
    ----------
    model : StateSpaceModel
    obs : TransmissionRecord
        Only ``observations`` and ``noise_var`` are used.
    input_msgs : GaussianMessages
        Messages into the channel model, one per symbol. Zero or negative
        weights are allowed as long as every local combined precision stays
        positive; otherwise ``negvar_policy`` decides (``clamp`` replaces the
        offending input by a weight-1e-9 message, ``allow`` raises
        :class:`NumericalFailure`).

    Returns
    -------
    GaussianMessages
        Extrinsic messages: message ``k`` does not depend on ``input_msgs[k]``.
    """
    y = np.asarray(obs.observations, dtype=float)
    if len(input_msgs) != y.size:
        raise ValueError("one input message per observation is required")
    if negvar_policy not in NEGVAR_POLICIES:
        raise ValueError(f"negvar_policy must be one of {NEGVAR_POLICIES}")
    w, xi, _, failed = _kernels.kalman_sweep(
        *_arrays(model), y, float(obs.noise_var), input_msgs.weight, input_msgs.wmean,
        negvar_policy == "clamp",
    )
    if failed:
        raise NumericalFailure("non-positive combined precision during the sweep")
    return GaussianMessages(w, xi)


def lmmse_equalize(model: StateSpaceModel, obs: TransmissionRecord, priors=None) -> np.ndarray:
    """One sweep with standard Gaussian input messages (the LMMSE equalizer)."""
    n = len(obs.observations)
    w, xi = standard_gaussians(_priors(priors, n, LLR_MAX))
    out = kalman_extrinsic(model, obs, GaussianMessages(w, xi))
    return clip_llrs(2.0 * out.wmean)


def ep_equalize(
    model: StateSpaceModel,
    obs: TransmissionRecord,
    priors=None,
    config: EqualizerConfig | None = None,
    truth=None,
) -> tuple[np.ndarray, EqualizerDiagnostics]:
    """Iterative Kalman equalizer with damped Minka input messages.

    Each symbol's input message is ``damped_msg(minka_gaussian(prior,
    output), standard_gaussian(prior), alpha)``; the standard message is used
    whenever the current output message has weight <= 0. Schedule ``A``
    updates all outputs after a full sweep (starting from non-informative
    outputs); schedule ``B`` updates each output, and the input derived from
    it, immediately during both the forward and the backward sweep.

    ``priors`` are per-symbol LLRs (zeros when uncoded). When ``truth``
    (symbols +-1) is given, the bit error rate of ``sign(llr + prior)`` after
    every iteration is stored in the diagnostics.
    """
    config = config or EqualizerConfig()
    y = np.asarray(obs.observations, dtype=float)
    prior = _priors(priors, y.size, config.llr_max)
    alphas = config.alpha_schedule.values(config.max_iters)
    out_w, out_xi, in_w, in_xi, hist, counts, iters, converged, failed = _kernels.ep_loop(
        *_arrays(model), y, float(obs.noise_var), prior, alphas,
        config.schedule == "B", config.convergence_tol, config.llr_max,
        config.negvar_policy == "clamp",
    )
    if failed:
        raise NumericalFailure("non-positive combined precision during the sweep")
    diag = EqualizerDiagnostics(
        iterations_run=int(iters),
        negvar_count=int(counts[_kernels.NEGVAR]),
        clamp_count=int(counts[_kernels.CLAMPED]),
        fallback_count=int(counts[_kernels.FALLBACK]),
        converged=bool(converged),
        llr_history=hist,
        inputs=GaussianMessages(in_w, in_xi),
        outputs=GaussianMessages(out_w, out_xi),
    )
    if truth is not None:
        truth = np.asarray(truth)
        diag.per_iteration_ber = np.mean(hard_decide(hist, prior) != truth, axis=1)
    return clip_llrs(2.0 * out_xi, config.llr_max), diag


def bcjr_equalize(spec: ChannelSpec, obs: TransmissionRecord, priors=None, noise_var=None) -> np.ndarray:
    """Exact symbol-wise MAP equalizer on the ``2**M``-state trellis (FIR only)."""
    if spec.is_iir:
        raise UnsupportedChannelError("BCJR equalization needs an FIR channel")
    if spec.memory > 12:
        raise UnsupportedChannelError(f"channel memory {spec.memory} exceeds 12")
    y = np.asarray(obs.observations, dtype=float)
    nv = float(obs.noise_var if noise_var is None else noise_var)
    ext = _kernels.bcjr_isi(np.array(spec.b), y, nv, _priors(priors, y.size, LLR_MAX))
    return clip_llrs(ext)


def hard_decide(llrs, priors=None) -> np.ndarray:
    """``sign(llr + prior)`` with ties going to +1."""
    total = np.asarray(llrs, dtype=float)
    if priors is not None:
        total = total + np.asarray(priors, dtype=float)
    return np.where(total >= 0.0, 1, -1)
