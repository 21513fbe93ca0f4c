"""numba kernels for the sequential recursions.

Forward state messages are kept in mean/covariance form; backward state
messages are kept in information form ``(W, xi)`` so they can start from
zero precision. Input messages on the symbol edges are scalar precision-form
pairs and may have any sign, as long as the local combined precision of the
symbol stays positive (otherwise the clamp policy applies).
"""

import math

import numpy as np
from numba import njit

from .conversion import _clip, _input_message

CLAMP_WEIGHT = 1e-9

# per-block counters returned by ep_loop
NEGVAR, FALLBACK, CLAMPED = 0, 1, 2


@njit(cache=True)
def ss_output(A, B, C, x):
    d = A.shape[0]
    s = np.zeros(d)
    y = np.empty(x.size)
    for k in range(x.size):
        s = A @ s + B * x[k]
        y[k] = C @ s
    return y


@njit(cache=True)
def _workspace(d):
    # scratch buffers reused by every step of a sweep
    return (np.zeros(d), np.zeros(d), np.zeros((d, d)), np.zeros((d, d)),
            np.zeros((d, d + 1)))


@njit(cache=True)
def _predict(A, m, P, mu, S, T):
    """``mu = A m``, ``S = A P A^T`` (``T`` is scratch)."""
    d = m.size
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += A[i, j] * m[j]
        mu[i] = acc
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for l in range(d):
                acc += A[i, l] * P[l, j]
            T[i, j] = acc
    for i in range(d):
        for j in range(i, d):
            acc = 0.0
            for l in range(d):
                acc += T[i, l] * A[j, l]
            S[i, j] = acc
            S[j, i] = acc


@njit(cache=True)
def _forward_step(mu, S, B, C, y, nv, w, xi, clamp, m, P, SC, g):
    """Posterior ``N(m, P)`` of the state given the predicted ``N(mu, S)``, one input and ``y``.

    Returns a status: 0 ok, 1 input clamped, -1 non-positive combined
    precision under the ``allow`` policy.
    """
    d = mu.size
    r = nv
    cb = 0.0
    cmu = 0.0
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += S[i, j] * C[j]
        SC[i] = acc
        r += C[i] * acc
        cb += C[i] * B[i]
        cmu += C[i] * mu[i]
    resid = y - cmu
    w_y = cb * cb / r
    status = 0
    if w + w_y <= 0.0:
        if not clamp:
            return -1
        # w_y >= 0, so a tiny non-informative-like input restores positivity
        w, xi = CLAMP_WEIGHT, 0.0
        status = 1
    wp = w + w_y
    xhat = (xi + cb * resid / r) / wp
    for i in range(d):
        k = SC[i] / r
        g[i] = B[i] - k * cb
        m[i] = mu[i] + k * resid + g[i] * xhat
    for i in range(d):
        for j in range(d):
            P[i, j] = S[i, j] - SC[i] * SC[j] / r + g[i] * g[j] / wp
    return status


@njit(cache=True)
def _observe(Wb, xib, C, y, nv, W1, x1):
    """Add the observation ``y = C s + w`` to backward information ``(Wb, xib)``."""
    d = C.size
    for i in range(d):
        x1[i] = xib[i] + C[i] * y / nv
        for j in range(d):
            W1[i, j] = Wb[i, j] + C[i] * C[j] / nv


@njit(cache=True)
def _backward_step(Wb, xib, A, B, C, y, nv, w, xi, clamp, W1, x1, v, G, Wout, xout):
    """Information-form message on ``s_{k-1}`` from ``y_k``, input ``k`` and the future.

    Under the clamp policy a non-positive combined precision first replaces
    the input by ``(CLAMP_WEIGHT, 0)``; if the future message alone is
    improper along ``B`` it is dropped for this step as well. ``Wout`` and
    ``xout`` may alias ``Wb`` and ``xib``.
    """
    d = B.size
    _observe(Wb, xib, C, y, nv, W1, x1)
    c = 0.0
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += W1[i, j] * B[j]
        v[i] = acc
        c += B[i] * acc
    status = 0
    if w + c <= 0.0:
        if not clamp:
            return -1
        w, xi = CLAMP_WEIGHT, 0.0
        status = 1
        if w + c <= CLAMP_WEIGHT:
            Wb[:, :] = 0.0
            xib[:] = 0.0
            _observe(Wb, xib, C, y, nv, W1, x1)
            c = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += W1[i, j] * B[j]
                v[i] = acc
                c += B[i] * acc
    D = w + c
    t = xi
    for i in range(d):
        t += B[i] * x1[i]
    for i in range(d):
        x1[i] -= v[i] * t / D
        for j in range(d):
            G[i, j] = W1[i, j] - v[i] * v[j] / D
    # Wout = A^T G A, xout = A^T x1; W1 reused as scratch for G A
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for l in range(d):
                acc += G[i, l] * A[l, j]
            W1[i, j] = acc
    for i in range(d):
        for j in range(i, d):
            acc = 0.0
            for l in range(d):
                acc += A[l, i] * W1[l, j]
            Wout[i, j] = acc
            Wout[j, i] = acc
        acc = 0.0
        for l in range(d):
            acc += A[l, i] * x1[l]
        xout[i] = acc
    return status


@njit(cache=True)
def _solve_inplace(M, R):
    """Solve ``M X = R`` by Gaussian elimination with partial pivoting; ``R`` becomes ``X``."""
    d = M.shape[0]
    nr = R.shape[1]
    for col in range(d):
        piv = col
        best = abs(M[col, col])
        for i in range(col + 1, d):
            if abs(M[i, col]) > best:
                best = abs(M[i, col])
                piv = i
        if piv != col:
            for j in range(d):
                M[col, j], M[piv, j] = M[piv, j], M[col, j]
            for j in range(nr):
                R[col, j], R[piv, j] = R[piv, j], R[col, j]
        inv = 1.0 / M[col, col]
        for i in range(col + 1, d):
            f = M[i, col] * inv
            if f != 0.0:
                for j in range(col, d):
                    M[i, j] -= f * M[col, j]
                for j in range(nr):
                    R[i, j] -= f * R[col, j]
    for col in range(d - 1, -1, -1):
        inv = 1.0 / M[col, col]
        for j in range(nr):
            acc = R[col, j]
            for l in range(col + 1, d):
                acc -= M[col, l] * R[l, j]
            R[col, j] = acc * inv


@njit(cache=True)
def _extrinsic(mu, S, Wb, xib, B, C, y, nv, W1, x1, M, R):
    """Message ``(weight, wmean)`` out of the channel model on the symbol edge.

    Combines the predicted state ``N(mu, S)`` (past), the observation and
    the backward information ``(Wb, xib)`` (future), excluding the symbol's
    own input message: with ``(W1, x1)`` the future plus observation,
    ``G = (I + W1 S)^-1 W1`` and ``g = (I + W1 S)^-1 x1`` give
    ``weight = B^T G B`` and ``wmean = B^T (g - G mu)``.
    """
    d = mu.size
    _observe(Wb, xib, C, y, nv, W1, x1)
    for i in range(d):
        for j in range(d):
            acc = 1.0 if i == j else 0.0
            for l in range(d):
                acc += W1[i, l] * S[l, j]
            M[i, j] = acc
            R[i, j] = W1[i, j]
        R[i, d] = x1[i]
    _solve_inplace(M, R)
    w = 0.0
    xi = 0.0
    for i in range(d):
        bg_i = 0.0
        for l in range(d):
            bg_i += B[l] * R[l, i]
        w += bg_i * B[i]
        xi += B[i] * R[i, d] - bg_i * mu[i]
    return w, xi


@njit(cache=True)
def kalman_sweep(A, B, C, y, nv, in_w, in_xi, clamp):
    """One forward-backward sweep with fixed input messages.

    Returns ``(out_w, out_xi, clamp_count, failed)``.
    """
    n = y.size
    d = A.shape[0]
    mu_p = np.zeros((n, d))
    S_p = np.zeros((n, d, d))
    out_w = np.zeros(n)
    out_xi = np.zeros(n)
    clamps = _sweeps(A, B, C, y, nv, in_w, in_xi, clamp, mu_p, S_p, out_w, out_xi)
    if clamps < 0:
        return out_w, out_xi, 0, True
    return out_w, out_xi, clamps, False


@njit(cache=True)
def _sweeps(A, B, C, y, nv, in_w, in_xi, clamp, mu_p, S_p, out_w, out_xi):
    # fixed inputs: forward pass storing predictions, then backward pass with outputs
    n = y.size
    d = A.shape[0]
    v1, v2, T, T2, R = _workspace(d)
    m = np.zeros(d)
    P = np.zeros((d, d))
    clamps = 0
    for k in range(n):
        _predict(A, m, P, mu_p[k], S_p[k], T)
        st = _forward_step(mu_p[k], S_p[k], B, C, y[k], nv, in_w[k], in_xi[k], clamp, m, P, v1, v2)
        if st < 0:
            return -1
        clamps += st
    Wb = np.zeros((d, d))
    xb = np.zeros(d)
    for k in range(n - 1, -1, -1):
        out_w[k], out_xi[k] = _extrinsic(mu_p[k], S_p[k], Wb, xb, B, C, y[k], nv, T, v1, T2, R)
        st = _backward_step(Wb, xb, A, B, C, y[k], nv, in_w[k], in_xi[k], clamp, T, v1, v2, T2, Wb, xb)
        if st < 0:
            return -1
        clamps += st
    return clamps


@njit(cache=True)
def _count(counts, status):
    if status == 2:
        counts[NEGVAR] += 1
    elif status == 1:
        counts[FALLBACK] += 1


@njit(cache=True)
def ep_loop(A, B, C, y, nv, prior, alphas, schedule_b, tol, llr_max, clamp):
    """Iterative EP equalization.

    ``alphas[i]`` is the damping exponent of iteration ``i``; the loop runs
    at most ``alphas.size`` iterations. Returns the final output and input
    messages, the per-iteration output LLRs, counters
    ``[negvar, fallback, clamped]``, iterations run, convergence flag and a
    failure flag.
    """
    n = y.size
    d = A.shape[0]
    n_iter = alphas.size
    mu_p = np.zeros((n, d))
    S_p = np.zeros((n, d, d))
    Wb_st = np.zeros((n, d, d))
    xb_st = np.zeros((n, d))
    out_w = np.zeros(n)
    out_xi = np.zeros(n)
    in_w = np.zeros(n)
    in_xi = np.zeros(n)
    hist = np.zeros((n_iter, n))
    llr_prev = np.zeros(n)
    counts = np.zeros(3, dtype=np.int64)
    v1, v2, T, T2, R = _workspace(d)
    m = np.zeros(d)
    P = np.zeros((d, d))
    Wb = np.zeros((d, d))
    xb = np.zeros(d)
    converged = False
    it_run = 0
    for it in range(n_iter):
        alpha = alphas[it]
        if not schedule_b:
            for k in range(n):
                in_w[k], in_xi[k], st = _input_message(prior[k], out_w[k], out_xi[k], alpha, llr_max)
                _count(counts, st)
            cl = _sweeps(A, B, C, y, nv, in_w, in_xi, clamp, mu_p, S_p, out_w, out_xi)
            if cl < 0:
                return out_w, out_xi, in_w, in_xi, hist[:it_run], counts, it_run, False, True
            counts[CLAMPED] += cl
        else:
            m[:] = 0.0
            P[:, :] = 0.0
            for k in range(n):
                _predict(A, m, P, mu_p[k], S_p[k], T)
                w_o, x_o = _extrinsic(mu_p[k], S_p[k], Wb_st[k], xb_st[k], B, C, y[k], nv, T, v1, T2, R)
                out_w[k] = w_o
                out_xi[k] = x_o
                in_w[k], in_xi[k], st = _input_message(prior[k], w_o, x_o, alpha, llr_max)
                _count(counts, st)
                st = _forward_step(mu_p[k], S_p[k], B, C, y[k], nv, in_w[k], in_xi[k], clamp, m, P, v1, v2)
                if st < 0:
                    return out_w, out_xi, in_w, in_xi, hist[:it_run], counts, it_run, False, True
                counts[CLAMPED] += st
            Wb[:, :] = 0.0
            xb[:] = 0.0
            for k in range(n - 1, -1, -1):
                Wb_st[k] = Wb
                xb_st[k] = xb
                w_o, x_o = _extrinsic(mu_p[k], S_p[k], Wb, xb, B, C, y[k], nv, T, v1, T2, R)
                out_w[k] = w_o
                out_xi[k] = x_o
                in_w[k], in_xi[k], st = _input_message(prior[k], w_o, x_o, alpha, llr_max)
                _count(counts, st)
                st = _backward_step(Wb, xb, A, B, C, y[k], nv, in_w[k], in_xi[k], clamp, T, v1, v2, T2, Wb, xb)
                if st < 0:
                    return out_w, out_xi, in_w, in_xi, hist[:it_run], counts, it_run, False, True
                counts[CLAMPED] += st
        delta = 0.0
        for k in range(n):
            llr = _clip(2.0 * out_xi[k], llr_max)
            hist[it, k] = llr
            delta = max(delta, abs(llr - llr_prev[k]))
            llr_prev[k] = llr
        it_run = it + 1
        if delta < tol:
            converged = True
            break
    return out_w, out_xi, in_w, in_xi, hist[:it_run], counts, it_run, converged, False


@njit(cache=True)
def _lse(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@njit(cache=True)
def bcjr_isi(h, y, nv, prior):
    """Log-domain BCJR on the ``2**M``-state ISI trellis; returns extrinsic LLRs.

    State bit ``i`` holds symbol ``x_{k-1-i}`` (bit 0 -> +1, bit 1 -> -1).
    Symbols before the block are zero, so branch metrics ignore state bits
    that refer to them and only the all-zero-bit state is live at the start.
    """
    n = y.size
    mem = h.size - 1
    ns_ = 1 << mem
    mask = ns_ - 1
    gam = np.empty((n, ns_, 2))
    for k in range(n):
        for s in range(ns_):
            past = 0.0
            for i in range(min(mem, k)):
                past += h[i + 1] * (1.0 - 2.0 * ((s >> i) & 1))
            for b in range(2):
                e = y[k] - h[0] * (1.0 - 2.0 * b) - past
                gam[k, s, b] = -e * e / (2.0 * nv)
    alpha = np.full((n + 1, ns_), -np.inf)
    alpha[0, 0] = 0.0
    for k in range(n):
        for s in range(ns_):
            a = alpha[k, s]
            if a == -np.inf:
                continue
            for b in range(2):
                t = ((s << 1) | b) & mask
                lp = 0.5 * prior[k] * (1.0 - 2.0 * b)
                alpha[k + 1, t] = _lse(alpha[k + 1, t], a + gam[k, s, b] + lp)
        # renormalize to keep magnitudes bounded
        top = alpha[k + 1].max()
        alpha[k + 1] -= top
    beta = np.full((n + 1, ns_), -np.inf)
    beta[n, :] = 0.0
    for k in range(n - 1, -1, -1):
        for s in range(ns_):
            acc = -np.inf
            for b in range(2):
                t = ((s << 1) | b) & mask
                lp = 0.5 * prior[k] * (1.0 - 2.0 * b)
                acc = _lse(acc, gam[k, s, b] + lp + beta[k + 1, t])
            beta[k, s] = acc
        top = beta[k].max()
        beta[k] -= top
    ext = np.empty(n)
    for k in range(n):
        num = -np.inf
        den = -np.inf
        for s in range(ns_):
            a = alpha[k, s]
            if a == -np.inf:
                continue
            num = _lse(num, a + gam[k, s, 0] + beta[k + 1, (s << 1) & mask])
            den = _lse(den, a + gam[k, s, 1] + beta[k + 1, ((s << 1) | 1) & mask])
        ext[k] = num - den
    return ext


@njit(cache=True)
def bcjr_code(next_state, outputs, llr, n_info, terminated):
    """Log-domain BCJR for a rate-1/2 feed-forward convolutional code.

    ``next_state[s, u]`` and ``outputs[s, u, j]`` describe the trellis;
    ``llr`` holds two LLRs per trellis step. Steps at or beyond ``n_info``
    are tail steps with the input forced to 0. Returns the posterior
    info-bit LLRs and the extrinsic coded-bit LLRs.
    """
    n_states = next_state.shape[0]
    n_steps = llr.size // 2
    gam = np.empty((n_steps, n_states, 2))
    for t in range(n_steps):
        for s in range(n_states):
            for u in range(2):
                acc = 0.0
                for j in range(2):
                    acc += 0.5 * llr[2 * t + j] * (1.0 - 2.0 * outputs[s, u, j])
                gam[t, s, u] = acc
    alpha = np.full((n_steps + 1, n_states), -np.inf)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        nu = 2 if t < n_info else 1
        for s in range(n_states):
            a = alpha[t, s]
            if a == -np.inf:
                continue
            for u in range(nu):
                ns = next_state[s, u]
                alpha[t + 1, ns] = _lse(alpha[t + 1, ns], a + gam[t, s, u])
        alpha[t + 1] -= alpha[t + 1].max()
    beta = np.full((n_steps + 1, n_states), -np.inf)
    if terminated:
        beta[n_steps, 0] = 0.0
    else:
        beta[n_steps, :] = 0.0
    for t in range(n_steps - 1, -1, -1):
        nu = 2 if t < n_info else 1
        for s in range(n_states):
            acc = -np.inf
            for u in range(nu):
                acc = _lse(acc, gam[t, s, u] + beta[t + 1, next_state[s, u]])
            beta[t, s] = acc
        top = beta[t].max()
        if top > -np.inf:
            beta[t] -= top
    info = np.zeros(n_info)
    ext = np.empty(llr.size)
    for t in range(n_steps):
        nu = 2 if t < n_info else 1
        pu = np.full(2, -np.inf)
        pc = np.full((2, 2), -np.inf)
        for s in range(n_states):
            a = alpha[t, s]
            if a == -np.inf:
                continue
            for u in range(nu):
                m = a + gam[t, s, u] + beta[t + 1, next_state[s, u]]
                pu[u] = _lse(pu[u], m)
                for j in range(2):
                    c = outputs[s, u, j]
                    pc[j, c] = _lse(pc[j, c], m)
        if t < n_info:
            info[t] = pu[0] - pu[1]
        for j in range(2):
            ext[2 * t + j] = pc[j, 0] - pc[j, 1] - llr[2 * t + j]
    return info, ext
