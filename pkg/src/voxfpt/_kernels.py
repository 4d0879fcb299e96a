"""JIT-compiled event loops for the stochastic samplers.

The random number generator is xoshiro256++ with splitmix64 seeding; each
trial derives its own 256-bit state from (master_seed, stream_index), so
trials are reproducible bit-for-bit regardless of execution order or thread
layout, and distinct stream indices give statistically independent streams.

All kernels are direct-method event loops: draw an exponential waiting time
at the total rate, then pick a channel proportionally (two uniforms per
event).  Reflective walls are channels with rate zero, never rejected jumps.
"""
from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_STREAM_SALT = U64(0xD1B54A32D192ED03)
_INV_2_53 = 1.1102230246251565e-16  # 2**-53

STATUS_COLLISION = 0
STATUS_REACTION = 1
STATUS_CAP = 2
STATUS_T_END = 3


@njit(cache=True, nogil=True, inline="always")
def _splitmix_next(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return state, z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def stream_state(master_seed, stream_index):
    """Derive the 4-word xoshiro256++ state for one trial stream."""
    sm = U64(master_seed) ^ (U64(stream_index) * _STREAM_SALT)
    s = np.empty(4, dtype=np.uint64)
    for i in range(4):
        sm, z = _splitmix_next(sm)
        s[i] = z
    if s[0] == U64(0) and s[1] == U64(0) and s[2] == U64(0) and s[3] == U64(0):
        s[0] = U64(1)
    return s


@njit(cache=True, nogil=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (U64(64) - k))


@njit(cache=True, nogil=True, inline="always")
def next_u64(s):
    result = _rotl(s[0] + s[3], U64(23)) + s[0]
    t = s[1] << U64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], U64(45))
    return result


@njit(cache=True, nogil=True, inline="always")
def uniform01(s):
    """Uniform double in [0, 1) with 53 random bits."""
    return np.float64(next_u64(s) >> U64(11)) * _INV_2_53


@njit(cache=True, nogil=True, inline="always")
def exp1(s):
    return -np.log1p(-uniform01(s))


@njit(cache=True, nogil=True, inline="always")
def randbelow(s, n):
    """Uniform integer in [0, n) without modulo bias."""
    nn = U64(n)
    threshold = (U64(0) - nn) % nn
    while True:
        x = next_u64(s)
        if x >= threshold:
            return np.int64(x % nn)


@njit(cache=True, nogil=True, inline="always")
def _pick(rates, n_channels, total, s):
    x = uniform01(s) * total
    acc = 0.0
    for i in range(n_channels):
        acc += rates[i]
        if x < acc:
            return i
    return n_channels - 1  # guard against roundoff at the top end


@njit(cache=True, nogil=True, inline="always")
def _hop_1d(pos, step, K, periodic):
    q = pos + step
    if periodic:
        if q < 0:
            q += K
        elif q >= K:
            q -= K
    return q


@njit(cache=True, nogil=True)
def collision_3walkers_1d(K, du, dv, dw, periodic, cap, s):
    u = randbelow(s, K)
    v = randbelow(s, K)
    w = randbelow(s, K)
    t = 0.0
    jumps = np.int64(0)
    if u == v and v == w:
        return t, jumps, STATUS_COLLISION
    rates = np.empty(6)
    while True:
        if periodic:
            rates[0] = du
            rates[1] = du
            rates[2] = dv
            rates[3] = dv
            rates[4] = dw
            rates[5] = dw
        else:
            rates[0] = du if u > 0 else 0.0
            rates[1] = du if u < K - 1 else 0.0
            rates[2] = dv if v > 0 else 0.0
            rates[3] = dv if v < K - 1 else 0.0
            rates[4] = dw if w > 0 else 0.0
            rates[5] = dw if w < K - 1 else 0.0
        total = rates[0] + rates[1] + rates[2] + rates[3] + rates[4] + rates[5]
        t += exp1(s) / total
        c = _pick(rates, 6, total, s)
        if c == 0:
            u = _hop_1d(u, -1, K, periodic)
        elif c == 1:
            u = _hop_1d(u, 1, K, periodic)
        elif c == 2:
            v = _hop_1d(v, -1, K, periodic)
        elif c == 3:
            v = _hop_1d(v, 1, K, periodic)
        elif c == 4:
            w = _hop_1d(w, -1, K, periodic)
        else:
            w = _hop_1d(w, 1, K, periodic)
        jumps += 1
        if u == v and v == w:
            return t, jumps, STATUS_COLLISION
        if jumps >= cap:
            return t, jumps, STATUS_CAP


@njit(cache=True, nogil=True)
def reaction_3walkers_1d(K, du, dv, dw, alpha, periodic, cap, s):
    """Diffusion competes with the reaction channel (rate alpha) that is
    open whenever all three walkers share a compartment."""
    u = randbelow(s, K)
    v = randbelow(s, K)
    w = randbelow(s, K)
    t = 0.0
    jumps = np.int64(0)
    rates = np.empty(7)
    while True:
        if periodic:
            rates[0] = du
            rates[1] = du
            rates[2] = dv
            rates[3] = dv
            rates[4] = dw
            rates[5] = dw
        else:
            rates[0] = du if u > 0 else 0.0
            rates[1] = du if u < K - 1 else 0.0
            rates[2] = dv if v > 0 else 0.0
            rates[3] = dv if v < K - 1 else 0.0
            rates[4] = dw if w > 0 else 0.0
            rates[5] = dw if w < K - 1 else 0.0
        rates[6] = alpha if (u == v and v == w) else 0.0
        total = (rates[0] + rates[1] + rates[2] + rates[3] + rates[4]
                 + rates[5] + rates[6])
        t += exp1(s) / total
        c = _pick(rates, 7, total, s)
        if c == 6:
            return t, jumps, STATUS_REACTION
        if c == 0:
            u = _hop_1d(u, -1, K, periodic)
        elif c == 1:
            u = _hop_1d(u, 1, K, periodic)
        elif c == 2:
            v = _hop_1d(v, -1, K, periodic)
        elif c == 3:
            v = _hop_1d(v, 1, K, periodic)
        elif c == 4:
            w = _hop_1d(w, -1, K, periodic)
        else:
            w = _hop_1d(w, 1, K, periodic)
        jumps += 1
        if jumps >= cap:
            return t, jumps, STATUS_CAP


@njit(cache=True, nogil=True)
def collision_2walkers_2d(K, da, db, periodic, cap, s):
    ax = randbelow(s, K)
    ay = randbelow(s, K)
    bx = randbelow(s, K)
    by = randbelow(s, K)
    t = 0.0
    jumps = np.int64(0)
    if ax == bx and ay == by:
        return t, jumps, STATUS_COLLISION
    rates = np.empty(8)
    while True:
        if periodic:
            for i in range(4):
                rates[i] = da
                rates[4 + i] = db
        else:
            rates[0] = da if ax > 0 else 0.0
            rates[1] = da if ax < K - 1 else 0.0
            rates[2] = da if ay > 0 else 0.0
            rates[3] = da if ay < K - 1 else 0.0
            rates[4] = db if bx > 0 else 0.0
            rates[5] = db if bx < K - 1 else 0.0
            rates[6] = db if by > 0 else 0.0
            rates[7] = db if by < K - 1 else 0.0
        total = 0.0
        for i in range(8):
            total += rates[i]
        t += exp1(s) / total
        c = _pick(rates, 8, total, s)
        if c == 0:
            ax = _hop_1d(ax, -1, K, periodic)
        elif c == 1:
            ax = _hop_1d(ax, 1, K, periodic)
        elif c == 2:
            ay = _hop_1d(ay, -1, K, periodic)
        elif c == 3:
            ay = _hop_1d(ay, 1, K, periodic)
        elif c == 4:
            bx = _hop_1d(bx, -1, K, periodic)
        elif c == 5:
            bx = _hop_1d(bx, 1, K, periodic)
        elif c == 6:
            by = _hop_1d(by, -1, K, periodic)
        else:
            by = _hop_1d(by, 1, K, periodic)
        jumps += 1
        if ax == bx and ay == by:
            return t, jumps, STATUS_COLLISION
        if jumps >= cap:
            return t, jumps, STATUS_CAP


@njit(cache=True, nogil=True)
def collision_2walkers_1d(K, da, db, periodic, cap, s):
    a = randbelow(s, K)
    b = randbelow(s, K)
    t = 0.0
    jumps = np.int64(0)
    if a == b:
        return t, jumps, STATUS_COLLISION
    rates = np.empty(4)
    while True:
        if periodic:
            rates[0] = da
            rates[1] = da
            rates[2] = db
            rates[3] = db
        else:
            rates[0] = da if a > 0 else 0.0
            rates[1] = da if a < K - 1 else 0.0
            rates[2] = db if b > 0 else 0.0
            rates[3] = db if b < K - 1 else 0.0
        total = rates[0] + rates[1] + rates[2] + rates[3]
        t += exp1(s) / total
        c = _pick(rates, 4, total, s)
        if c == 0:
            a = _hop_1d(a, -1, K, periodic)
        elif c == 1:
            a = _hop_1d(a, 1, K, periodic)
        elif c == 2:
            b = _hop_1d(b, -1, K, periodic)
        else:
            b = _hop_1d(b, 1, K, periodic)
        jumps += 1
        if a == b:
            return t, jumps, STATUS_COLLISION
        if jumps >= cap:
            return t, jumps, STATUS_CAP


_MODEL_COLLISION_2W_2D = 0
_MODEL_COLLISION_3W_1D = 1
_MODEL_REACTION_3W_1D = 2
_MODEL_COLLISION_2W_1D = 3


@njit(cache=True, nogil=True)
def run_batch(model, K, r0, r1, r2, alpha, periodic, cap,
              master_seed, stream_base, times, jumps, status):
    """Fill per-trial result slots; trial i uses stream (stream_base + i)."""
    for i in range(times.shape[0]):
        s = stream_state(master_seed, stream_base + i)
        if model == _MODEL_COLLISION_2W_2D:
            t, nj, st = collision_2walkers_2d(K, r0, r1, periodic, cap, s)
        elif model == _MODEL_COLLISION_3W_1D:
            t, nj, st = collision_3walkers_1d(K, r0, r1, r2, periodic, cap, s)
        elif model == _MODEL_REACTION_3W_1D:
            t, nj, st = reaction_3walkers_1d(K, r0, r1, r2, alpha, periodic, cap, s)
        else:
            t, nj, st = collision_2walkers_1d(K, r0, r1, periodic, cap, s)
        times[i] = t
        jumps[i] = nj
        status[i] = st


@njit(cache=True, nogil=True)
def run_rdme(K, counts, du, dv, dw, alpha, variant, periodic, t_end,
             max_events, reaction_times, reaction_sites, s):
    """Direct-method simulation of the full compartment system.

    counts is a (3, K) int64 array (species U, V, W per compartment),
    modified in place.  variant selects the reactant combination:
    0 = 3U, 1 = 2U+V, 2 = U+V+W.  Propensities are recomputed per event;
    the channel count is small for the few-molecule problems this serves.
    Returns (t, n_events, n_reactions, status).
    """
    t = 0.0
    n_events = np.int64(0)
    n_reactions = np.int64(0)
    diff_prop = np.empty((3, K))
    rxn_prop = np.empty(K)
    d_rates = np.empty(3)
    d_rates[0] = du
    d_rates[1] = dv
    d_rates[2] = dw
    while True:
        total = 0.0
        for sp in range(3):
            d = d_rates[sp]
            for i in range(K):
                if K == 1:
                    n_dirs = 0.0  # a single compartment has no diffusion
                elif periodic:
                    n_dirs = 2.0
                else:
                    n_dirs = 2.0 if 0 < i < K - 1 else 1.0
                p = d * counts[sp, i] * n_dirs
                diff_prop[sp, i] = p
                total += p
        for i in range(K):
            u = counts[0, i]
            v = counts[1, i]
            w = counts[2, i]
            if variant == 0:
                combos = u * (u - 1) * (u - 2) / 6.0
            elif variant == 1:
                combos = u * (u - 1) / 2.0 * v
            else:
                combos = np.float64(u * v * w)
            p = alpha * combos
            rxn_prop[i] = p
            total += p
        if total == 0.0:
            return t_end, n_events, n_reactions, STATUS_T_END
        dt = exp1(s) / total
        if t + dt > t_end:
            return t_end, n_events, n_reactions, STATUS_T_END
        t += dt
        x = uniform01(s) * total
        acc = 0.0
        fired = False
        for sp in range(3):
            for i in range(K):
                acc += diff_prop[sp, i]
                if x < acc:
                    # choose direction uniformly among the open ones
                    if periodic:
                        step = 1 if uniform01(s) < 0.5 else -1
                        j = i + step
                        if j < 0:
                            j += K
                        elif j >= K:
                            j -= K
                    elif i == 0:
                        j = i + 1
                    elif i == K - 1:
                        j = i - 1
                    else:
                        j = i + 1 if uniform01(s) < 0.5 else i - 1
                    counts[sp, i] -= 1
                    counts[sp, j] += 1
                    fired = True
                    break
            if fired:
                break
        if not fired:
            for i in range(K):
                acc += rxn_prop[i]
                if x < acc:
                    if variant == 0:
                        counts[0, i] -= 3
                    elif variant == 1:
                        counts[0, i] -= 2
                        counts[1, i] -= 1
                    else:
                        counts[0, i] -= 1
                        counts[1, i] -= 1
                        counts[2, i] -= 1
                    if n_reactions < reaction_times.shape[0]:
                        reaction_times[n_reactions] = t
                        reaction_sites[n_reactions] = i
                    n_reactions += 1
                    break
        n_events += 1
        if n_events >= max_events:
            return t, n_events, n_reactions, STATUS_CAP
