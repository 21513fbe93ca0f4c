"""Brute-force reference computations for small instances.

These deliberately avoid the recursive machinery they are used to check:
joint-Gaussian inference is done with dense matrices, MAP decisions by
enumerating every sequence, and moment matching from explicit densities.
Cost is O(n^3) or O(2^n).
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.special import logsumexp

LLR_LIMIT = 30.0


class OracleFailure(RuntimeError):
    pass


def _impulse_matrix(model, n: int) -> np.ndarray:
    """Lower-triangular Toeplitz matrix of ``h_l = C A^l B``."""
    A, B, C = np.asarray(model.A), np.asarray(model.B), np.asarray(model.C)
    h = np.empty(n)
    v = B.copy()
    for lag in range(n):
        h[lag] = C @ v
        v = A @ v
    H = np.zeros((n, n))
    for i in range(n):
        H[i, : i + 1] = h[i::-1]
    return H


def joint_gaussian_extrinsic(model, obs, input_msgs):
    """Extrinsic messages via the full joint Gaussian posterior.

    Returns ``(weights, wmeans)`` arrays.
    """
    y = np.asarray(obs.observations, dtype=float)
    n = y.size
    if n > 16:
        raise OracleFailure(f"n = {n} too large for the dense oracle")
    w = np.asarray(input_msgs.weight, dtype=float)
    xi = np.asarray(input_msgs.wmean, dtype=float)
    H = _impulse_matrix(model, n)
    J = np.diag(w) + H.T @ H / obs.noise_var
    h = xi + H.T @ y / obs.noise_var
    try:
        np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise OracleFailure("joint precision is not positive definite") from exc
    cov = np.linalg.inv(J)
    mean = cov @ h
    var = np.diag(cov)
    return 1.0 / var - w, mean / var - xi


def _fir_outputs(taps, seqs) -> np.ndarray:
    n = seqs.shape[1]
    out = np.zeros(seqs.shape)
    for lag, tap in enumerate(taps):
        if lag < n:
            out[:, lag:] += tap * seqs[:, : n - lag]
    return out


def _all_sequences(n: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def exhaustive_map_llrs(spec, obs, priors, noise_var=None) -> np.ndarray:
    """Extrinsic per-symbol LLRs by summing over all ``2**n`` symbol sequences."""
    y = np.asarray(obs.observations, dtype=float)
    n = y.size
    if n > 14:
        raise OracleFailure(f"n = {n} too large for enumeration")
    nv = obs.noise_var if noise_var is None else noise_var
    prior = np.zeros(n) if priors is None else np.clip(np.asarray(priors, float), -LLR_LIMIT, LLR_LIMIT)
    seqs = _all_sequences(n)
    resid = y - _fir_outputs(spec.b, seqs)
    logp = -np.sum(resid**2, axis=1) / (2 * nv) + seqs @ prior / 2
    llr = np.empty(n)
    for k in range(n):
        plus = seqs[:, k] > 0
        llr[k] = logsumexp(logp[plus]) - logsumexp(logp[~plus]) - prior[k]
    return np.clip(llr, -LLR_LIMIT, LLR_LIMIT)


def two_point_moments(p_plus: float, g) -> tuple[float, float]:
    """Mean and variance of ``p(x) * g(x)`` restricted to x in {+1, -1}, normalized."""
    if not 0.0 < p_plus < 1.0:
        raise ValueError("p_plus must lie strictly between 0 and 1")
    if g.weight <= 0:
        raise ValueError("g must be a proper Gaussian")
    mean_g = g.wmean / g.weight
    var_g = 1.0 / g.weight
    log_plus = math.log(p_plus) - (1.0 - mean_g) ** 2 / (2 * var_g)
    log_minus = math.log1p(-p_plus) - (-1.0 - mean_g) ** 2 / (2 * var_g)
    top = max(log_plus, log_minus)
    a = math.exp(log_plus - top)
    b = math.exp(log_minus - top)
    mean = (a - b) / (a + b)
    second = 1.0  # x**2 == 1 on both points
    return mean, second - mean * mean


def _encode_bits(info, generators, K, terminated=True) -> list[int]:
    # plain shift register, bit by bit
    reg = [0] * K
    bits = list(info) + ([0] * (K - 1) if terminated else [])
    out = []
    for u in bits:
        reg = [u] + reg[:-1]
        for g in generators:
            taps = [(g >> (K - 1 - t)) & 1 for t in range(K)]
            out.append(sum(r * t for r, t in zip(reg, taps)) % 2)
    return out


def exhaustive_decode(coded_llrs, code) -> tuple[np.ndarray, np.ndarray]:
    """Coded-bit extrinsic LLRs and info-bit posteriors by enumerating codewords."""
    llr = np.clip(np.asarray(coded_llrs, dtype=float), -LLR_LIMIT, LLR_LIMIT)
    K = code.constraint_length
    n_info = llr.size // 2 - (K - 1 if code.terminated else 0)
    if n_info > 14:
        raise OracleFailure("too many info bits for enumeration")
    words = np.array(list(itertools.product((0, 1), repeat=n_info)), dtype=int)
    cw = np.array([_encode_bits(wd, code.generators, K, code.terminated) for wd in words])
    logp = (1 - 2 * cw) @ llr / 2
    info = np.array([
        logsumexp(logp[words[:, t] == 0]) - logsumexp(logp[words[:, t] == 1]) for t in range(n_info)
    ])
    ext = np.empty(llr.size)
    for i in range(llr.size):
        zero = cw[:, i] == 0
        if zero.all() or not zero.any():
            ext[i] = math.copysign(np.inf, 1.0 if zero.all() else -1.0)
        else:
            ext[i] = logsumexp(logp[zero]) - logsumexp(logp[~zero]) - llr[i]
    return np.clip(ext, -LLR_LIMIT, LLR_LIMIT), np.clip(info, -LLR_LIMIT, LLR_LIMIT)


def kl_two_point_to_gaussian(p_plus: float, mean: float, var: float) -> float:
    """``D(f || N(mean, var))`` for the two-point target ``f`` on {+1, -1}.

    The target is a mass function, so the divergence is taken against the
    Gaussian density at the two points (up to a constant independent of the
    Gaussian): ``sum_x f(x) ln(f(x) / N(x; mean, var))``.
    """
    total = 0.0
    for x, p in ((1.0, p_plus), (-1.0, 1.0 - p_plus)):
        if p > 0:
            log_q = -0.5 * math.log(2 * math.pi * var) - (x - mean) ** 2 / (2 * var)
            total += p * (math.log(p) - log_q)
    return total
