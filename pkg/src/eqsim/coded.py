"""Rate-1/2 convolutional coding and turbo equalization."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .channel import StateSpaceModel, TransmissionRecord
from .conversion import LLR_MAX, clip_llrs
from .equalizer import EqualizerConfig, ep_equalize, lmmse_equalize


def parse_generators(text: str) -> tuple[int, ...]:
    """``"133,171"`` -> ``(0o133, 0o171)``."""
    try:
        return tuple(int(g, 8) for g in text.split(","))
    except ValueError as exc:
        raise ValueError(f"bad octal generator list {text!r}") from exc


@dataclass(frozen=True)
class ConvCode:
    """Feed-forward rate-1/2 code; generator MSB taps the current input bit."""

    constraint_length: int = 7
    generators: tuple[int, int] = (0o133, 0o171)
    terminated: bool = True

    def __post_init__(self):
        if len(self.generators) != 2:
            raise ValueError("exactly two generators are required for rate 1/2")
        for g in self.generators:
            if g <= 0 or g >= 1 << self.constraint_length:
                raise ValueError(f"generator {g:o} incompatible with K={self.constraint_length}")

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def taps(self) -> np.ndarray:
        """``taps[j, t]`` = coefficient of delay ``t`` in generator ``j``."""
        K = self.constraint_length
        return np.array([[(g >> (K - 1 - t)) & 1 for t in range(K)] for g in self.generators])

    def coded_length(self, n_info: int) -> int:
        return 2 * (n_info + (self.memory if self.terminated else 0))

    def info_length(self, n_coded: int) -> int:
        n = n_coded // 2 - (self.memory if self.terminated else 0)
        if n_coded % 2 or n < 0:
            raise ValueError(f"{n_coded} is not a valid coded length")
        return n

    @cached_property
    def trellis(self) -> tuple[np.ndarray, np.ndarray]:
        """``(next_state[s, u], outputs[s, u, j])``.

        State ``s`` holds the previous ``K-1`` inputs, most recent in the
        highest bit.
        """
        K, S = self.constraint_length, self.n_states
        nxt = np.empty((S, 2), dtype=np.int64)
        out = np.empty((S, 2, 2), dtype=np.int64)
        for s in range(S):
            for u in range(2):
                reg = (u << (K - 1)) | s
                nxt[s, u] = reg >> 1
                for j, g in enumerate(self.generators):
                    out[s, u, j] = bin(reg & g).count("1") & 1
        return nxt, out


def conv_encode(info_bits, code: ConvCode) -> np.ndarray:
    """Encode bits {0, 1}; returns coded symbols with 0 -> +1, 1 -> -1."""
    u = np.asarray(info_bits, dtype=np.int64)
    if np.any((u != 0) & (u != 1)):
        raise ValueError("info bits must be 0 or 1")
    if code.terminated:
        u = np.concatenate([u, np.zeros(code.memory, dtype=np.int64)])
    coded = np.empty(2 * u.size, dtype=np.int64)
    for j, taps in enumerate(code.taps()):
        coded[j::2] = np.convolve(u, taps)[: u.size] % 2
    return 1.0 - 2.0 * coded


def bcjr_decode(coded_llrs, code: ConvCode) -> tuple[np.ndarray, np.ndarray]:
    """Log-domain BCJR on the code trellis.

    Returns ``(extrinsic coded-bit LLRs, info-bit posterior LLRs)``; LLRs are
    ``ln P(+1) / P(-1)`` with bit 0 mapped to +1.
    """
    llr = clip_llrs(coded_llrs)
    if llr.ndim != 1:
        raise ValueError("coded LLRs must be a 1-d sequence")
    n_info = code.info_length(llr.size)
    nxt, out = code.trellis
    info, ext = _kernels.bcjr_code(nxt, out, llr, n_info, code.terminated)
    return clip_llrs(ext), clip_llrs(info)


@dataclass(frozen=True)
class Interleaver:
    permutation: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("permutation is not a bijection")
        perm.setflags(write=False)
        object.__setattr__(self, "permutation", perm)

    @classmethod
    def random(cls, length: int, seed: int) -> Interleaver:
        return cls(np.random.default_rng(seed).permutation(length), seed)

    @classmethod
    def identity(cls, length: int) -> Interleaver:
        return cls(np.arange(length))

    def __len__(self) -> int:
        return self.permutation.size


def interleave(seq, interleaver: Interleaver) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[0] != len(interleaver):
        raise ValueError(f"length {seq.shape[0]} does not match interleaver {len(interleaver)}")
    return seq[interleaver.permutation]


def deinterleave(seq, interleaver: Interleaver) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape[0] != len(interleaver):
        raise ValueError(f"length {seq.shape[0]} does not match interleaver {len(interleaver)}")
    out = np.empty_like(seq)
    out[interleaver.permutation] = seq
    return out


@dataclass
class TurboDiagnostics:
    outer_iterations: int = 0
    inner_iterations: list[int] = field(default_factory=list)
    negvar_count: int = 0
    clamp_count: int = 0
    per_outer_errors: list[int] = field(default_factory=list)


def _uses_minka(config: EqualizerConfig) -> bool:
    return config.max_iters > 1 or config.alpha_schedule(0) > 0.0


def turbo_equalize(
    obs: TransmissionRecord,
    model: StateSpaceModel,
    code: ConvCode,
    interleaver: Interleaver,
    config: EqualizerConfig | None,
    outer_iters: int,
    info_bits=None,
) -> tuple[np.ndarray, TurboDiagnostics]:
    """Exchange extrinsic LLRs between the equalizer and the decoder.

    ``config=None`` runs the classical LMMSE turbo equalizer (one sweep
    with standard input messages per outer iteration). Returns the info-bit
    decisions {0, 1} after the last outer iteration. Passing the true
    ``info_bits`` records the error count after every outer iteration.
    """
    if outer_iters < 1:
        raise ValueError("outer_iters must be >= 1")
    n = len(obs.observations)
    if n != len(interleaver):
        raise ValueError("observation length does not match the interleaver")
    code.info_length(n)
    diag = TurboDiagnostics()
    priors = np.zeros(n)
    decisions = None
    for _ in range(outer_iters):
        if config is None or not _uses_minka(config):
            eq = lmmse_equalize(model, obs, priors)
            diag.inner_iterations.append(1)
        else:
            eq, d = ep_equalize(model, obs, priors, config)
            diag.inner_iterations.append(d.iterations_run)
            diag.negvar_count += d.negvar_count
            diag.clamp_count += d.clamp_count
        ext, info = bcjr_decode(deinterleave(eq, interleaver), code)
        priors = clip_llrs(interleave(ext, interleaver), LLR_MAX)
        decisions = (info < 0).astype(np.int64)
        diag.outer_iterations += 1
        if info_bits is not None:
            diag.per_outer_errors.append(int(np.sum(decisions != np.asarray(info_bits))))
    return decisions, diag
