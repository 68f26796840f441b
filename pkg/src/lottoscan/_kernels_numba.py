"""numba-compiled simulation kernels.

Mirrors ``_kernels_numpy`` draw for draw: each (win, replicate) stream is
consumed in the same order by both engines.
"""

import math

import numpy as np
from numba import njit, prange

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_REP_BITS = np.uint64(40)
_UNIT = 2.0**-52


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _u(key, t):
    z = _mix(key + np.uint64(t) * _G)
    return (float(z >> np.uint64(12)) + 0.5) * _UNIT


@njit(inline="always")
def _stream_key(pkey, win, rep):
    return _mix(pkey ^ _mix((np.uint64(win) << _REP_BITS) | np.uint64(rep)))


@njit
def _binom_inv(n, p, key, t):
    q = 1.0 - p
    s = p / q
    a = (n + 1) * s
    bound = min(float(n), n * p + 10.0 * math.sqrt(n * p * q + 1.0))
    while True:
        t += 1
        u = _u(key, t)
        pmf = math.exp(n * math.log1p(-p))
        x = 0
        ok = True
        while u > pmf:
            u -= pmf
            x += 1
            if x > bound:
                ok = False
                break
            pmf *= a / x - s
        if ok:
            return x, t


@njit
def _binom_btrs(n, p, key, t):
    q = 1.0 - p
    spq = math.sqrt(n * p * q)
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = n * p + 0.5
    v_r = 0.92 - 4.2 / b
    alpha = (2.83 + 5.1 / b) * spq
    lpq = math.log(p / q)
    m = math.floor((n + 1) * p)
    h = math.lgamma(m + 1.0) + math.lgamma(n - m + 1.0)
    while True:
        u = _u(key, t + 1) - 0.5
        v = _u(key, t + 2)
        t += 2
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + c)
        if k < 0 or k > n:
            continue
        if us >= 0.07 and v <= v_r:
            return np.int64(k), t
        v = math.log(v * alpha / (a / (us * us) + b))
        if v <= h - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0) + (k - m) * lpq:
            return np.int64(k), t


@njit
def _binom(n, r, key, t):
    if n <= 0 or r <= 0.0:
        return np.int64(0), t
    if r >= 1.0:
        return np.int64(n), t
    flip = r > 0.5
    p = 1.0 - r if flip else r
    if n * p < 10.0:
        x, t = _binom_inv(n, p, key, t)
    else:
        x, t = _binom_btrs(n, p, key, t)
    if flip:
        x = n - x
    return np.int64(x), t


@njit
def _fast_one(key, p_big, values, cprobs, cap):
    """(tickets, small_cents) for one win; tickets = -1 when the cap is hit."""
    t = 0
    if p_big >= 1.0:
        nt = np.int64(1)
    else:
        t += 1
        g = math.floor(math.log(_u(key, t)) / math.log1p(-p_big))
        if g + 1.0 > cap:
            return np.int64(-1), np.int64(0)
        nt = np.int64(g) + 1
    n = nt - 1
    mass = 1.0
    small = np.int64(0)
    for c in range(values.shape[0]):
        if n == 0:
            break
        r = cprobs[c] / mass if mass > 0.0 else 1.0
        x, t = _binom(n, min(r, 1.0), key, t)
        small += x * values[c]
        n -= x
        mass -= cprobs[c]
    return nt, small


@njit
def _loop_one(key, cum, values, is_big, cap):
    t = 0
    small = np.int64(0)
    m = cum.shape[0]
    while True:
        t += 1
        if t > cap:
            return np.int64(-1), np.int64(0)
        u = _u(key, t)
        for c in range(m):
            if u < cum[c]:
                if is_big[c]:
                    return np.int64(t), small
                small += values[c]
                break


@njit(parallel=True)
def fast_outcomes(keys, p_big, values, cprobs, cap):
    n = keys.shape[0]
    tickets = np.empty(n, np.int64)
    small = np.empty(n, np.int64)
    for i in prange(n):
        tickets[i], small[i] = _fast_one(keys[i], p_big, values, cprobs, cap)
    return tickets, small


@njit(parallel=True)
def loop_outcomes(keys, cum, values, is_big, cap):
    n = keys.shape[0]
    tickets = np.empty(n, np.int64)
    small = np.empty(n, np.int64)
    for i in prange(n):
        tickets[i], small[i] = _loop_one(keys[i], cum, values, is_big, cap)
    return tickets, small


@njit(parallel=True)
def fast_totals(pkey, prizes, costs, p_bigs, offsets, values, cprobs, rep_start, n_reps, cap):
    """Per-replicate sum over wins of prize + small - tickets * cost (cents).

    Returns ``(totals, bad)`` where ``bad`` is the first win index that hit
    the ticket cap, or -1.
    """
    totals = np.zeros(n_reps, np.int64)
    badwin = np.full(n_reps, -1, np.int64)
    for i in prange(n_reps):
        rep = rep_start + i
        acc = np.int64(0)
        for w in range(prizes.shape[0]):
            key = _stream_key(pkey, w, rep)
            lo, hi = offsets[w], offsets[w + 1]
            nt, small = _fast_one(key, p_bigs[w], values[lo:hi], cprobs[lo:hi], cap)
            if nt < 0:
                badwin[i] = w
                break
            acc += prizes[w] + small - nt * costs[w]
        totals[i] = acc
    bad = -1
    for i in range(n_reps):
        if badwin[i] >= 0:
            bad = badwin[i]
            break
    return totals, bad


@njit(parallel=True)
def loop_totals(pkey, prizes, costs, offsets, cum, values, is_big, rep_start, n_reps, cap):
    totals = np.zeros(n_reps, np.int64)
    badwin = np.full(n_reps, -1, np.int64)
    for i in prange(n_reps):
        rep = rep_start + i
        acc = np.int64(0)
        for w in range(prizes.shape[0]):
            key = _stream_key(pkey, w, rep)
            lo, hi = offsets[w], offsets[w + 1]
            nt, small = _loop_one(key, cum[lo:hi], values[lo:hi], is_big[lo:hi], cap)
            if nt < 0:
                badwin[i] = w
                break
            acc += prizes[w] + small - nt * costs[w]
        totals[i] = acc
    bad = -1
    for i in range(n_reps):
        if badwin[i] >= 0:
            bad = badwin[i]
            break
    return totals, bad
