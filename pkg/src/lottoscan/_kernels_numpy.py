"""Pure-numpy simulation kernels, vectorised across replicates.

Each lane owns one counter-based stream and consumes it in the same order as
the scalar numba kernels, so the two engines agree draw for draw up to
last-ulp differences between libm and numpy transcendental functions.
"""

import numpy as np
from scipy.special import gammaln

from .rng import stream_keys, uniforms


def _binom_inv(n, p, keys, t):
    q = 1.0 - p
    s = p / q
    x = np.zeros(n.shape, np.int64)
    todo = np.ones(n.shape, bool)
    nf = n.astype(np.float64)
    a = (nf + 1) * s
    bound = np.minimum(nf, nf * p + 10.0 * np.sqrt(nf * p * q + 1.0))
    while todo.any():
        idx = np.flatnonzero(todo)
        t[idx] += 1
        u = uniforms(keys[idx], t[idx])
        pmf = np.exp(nf[idx] * np.log1p(-p))
        xi = np.zeros(idx.size, np.int64)
        live = u > pmf
        failed = np.zeros(idx.size, bool)
        while live.any():
            li = np.flatnonzero(live)
            u[li] -= pmf[li]
            xi[li] += 1
            over = xi[li] > bound[idx[li]]
            failed[li[over]] = True
            live[li[over]] = False
            ok = li[~over]
            pmf[ok] *= a[idx[ok]] / xi[ok] - s
            live[ok] = u[ok] > pmf[ok]
        x[idx] = xi
        todo[idx] = failed
    return x


def _binom_btrs(n, p, keys, t):
    q = 1.0 - p
    nf = n.astype(np.float64)
    spq = np.sqrt(nf * p * q)
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = nf * p + 0.5
    v_r = 0.92 - 4.2 / b
    alpha = (2.83 + 5.1 / b) * spq
    lpq = np.log(p / q)
    m = np.floor((nf + 1) * p)
    h = gammaln(m + 1.0) + gammaln(nf - m + 1.0)
    out = np.zeros(n.shape, np.int64)
    todo = np.arange(n.size)
    while todo.size:
        u = uniforms(keys[todo], t[todo] + 1) - 0.5
        v = uniforms(keys[todo], t[todo] + 2)
        t[todo] += 2
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a[todo] / us + b[todo]) * u + c[todo])
        inside = (k >= 0) & (k <= nf[todo])
        quick = inside & (us >= 0.07) & (v <= v_r[todo])
        accept = quick.copy()
        slow = inside & ~quick
        if slow.any():
            j = todo[slow]
            ks = k[slow]
            lv = np.log(v[slow] * alpha[j] / (a[j] / (us[slow] ** 2) + b[j]))
            rhs = h[j] - gammaln(ks + 1.0) - gammaln(nf[j] - ks + 1.0) + (ks - m[j]) * lpq
            accept[slow] = lv <= rhs
        out[todo[accept]] = k[accept].astype(np.int64)
        todo = todo[~accept]
    return out


def _binom(n, r, keys, t):
    """Binomial(n[i], r) per lane; advances the lane counters ``t`` in place."""
    out = np.zeros(n.shape, np.int64)
    live = n > 0
    if r <= 0.0 or not live.any():
        return out
    if r >= 1.0:
        return n.copy()
    flip = r > 0.5
    p = 1.0 - r if flip else r
    small = live & (n * p < 10.0)
    large = live & ~small
    if small.any():
        i = np.flatnonzero(small)
        tt = t[i]
        out[i] = _binom_inv(n[i], p, keys[i], tt)
        t[i] = tt
    if large.any():
        i = np.flatnonzero(large)
        tt = t[i]
        out[i] = _binom_btrs(n[i], p, keys[i], tt)
        t[i] = tt
    if flip:
        out[live] = n[live] - out[live]
    return out


def fast_outcomes(keys, p_big, values, cprobs, cap):
    keys = np.asarray(keys, np.uint64)
    t = np.zeros(keys.shape, np.int64)
    if p_big >= 1.0:
        tickets = np.ones(keys.shape, np.int64)
    else:
        t += 1
        g = np.floor(np.log(uniforms(keys, t)) / np.log1p(-p_big))
        over = g + 1.0 > cap
        g[over] = 0
        tickets = g.astype(np.int64) + 1
        tickets[over] = -1
    n = np.where(tickets > 0, tickets - 1, 0)
    small = np.zeros(keys.shape, np.int64)
    mass = 1.0
    for c in range(len(values)):
        if not n.any():
            break
        r = cprobs[c] / mass if mass > 0.0 else 1.0
        x = _binom(n, min(r, 1.0), keys, t)
        small += x * values[c]
        n -= x
        mass -= cprobs[c]
    small[tickets < 0] = 0
    return tickets, small


def loop_outcomes(keys, cum, values, is_big, cap):
    keys = np.asarray(keys, np.uint64)
    tickets = np.zeros(keys.shape, np.int64)
    small = np.zeros(keys.shape, np.int64)
    live = np.arange(keys.size)
    t = 0
    while live.size:
        t += 1
        if t > cap:
            tickets[live] = -1
            small[live] = 0
            break
        u = uniforms(keys[live], np.full(live.size, t, np.int64))
        c = np.searchsorted(cum, u, side="right")
        hit = c < len(cum)
        cc = np.where(hit, c, 0)
        big = hit & is_big[cc]
        won_small = hit & ~is_big[cc]
        small[live[won_small]] += values[cc[won_small]]
        tickets[live[big]] = t
        live = live[~big]
    return tickets, small


def fast_totals(pkey, prizes, costs, p_bigs, offsets, values, cprobs, rep_start, n_reps, cap):
    reps = np.arange(rep_start, rep_start + n_reps, dtype=np.uint64)
    totals = np.zeros(n_reps, np.int64)
    for w in range(len(prizes)):
        lo, hi = offsets[w], offsets[w + 1]
        nt, small = fast_outcomes(stream_keys(pkey, w, reps), p_bigs[w], values[lo:hi], cprobs[lo:hi], cap)
        if (nt < 0).any():
            return totals, w
        totals += prizes[w] + small - nt * costs[w]
    return totals, -1


def loop_totals(pkey, prizes, costs, offsets, cum, values, is_big, rep_start, n_reps, cap):
    reps = np.arange(rep_start, rep_start + n_reps, dtype=np.uint64)
    totals = np.zeros(n_reps, np.int64)
    for w in range(len(prizes)):
        lo, hi = offsets[w], offsets[w + 1]
        nt, small = loop_outcomes(stream_keys(pkey, w, reps), cum[lo:hi], values[lo:hi], is_big[lo:hi], cap)
        if (nt < 0).any():
            return totals, w
        totals += prizes[w] + small - nt * costs[w]
    return totals, -1
