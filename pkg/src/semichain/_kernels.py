"""Numba kernels for the hot loops.

Everything here has a pure-python twin used in tests; the kernels must
consume the SplitMix64 stream draw-for-draw identically so trajectories
agree bit for bit between the two paths.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _sm_output(state):
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def run_layers(
    cells,
    n_symbols,
    allow_flat,
    allow_start,
    allow_count,
    allow_thresh,
    layer0,
    n_layers,
    rng_state,
    charge,
    accum,
    do_accum,
    window_weight,
    stop_on_zero_weight,
    weight_now,
):
    """Advance `n_layers` brickwork layers in place.

    Each layer applies one uniform class-resampling gate per 3-site
    window at offset (layer index mod 3).  `window_weight` is any
    per-window integer tracked incrementally (the absolute c-count for
    irreversible runs); evolution stops after the first layer where it
    hits zero when `stop_on_zero_weight` is set.  When `do_accum`, the
    per-site symbol charge is added to `accum` once per layer.

    Returns (rng_state, layers_done, weight_now).
    """
    L = cells.shape[0]
    S2 = n_symbols * n_symbols
    state = np.uint64(rng_state)
    layers_done = 0
    for t in range(n_layers):
        off = (layer0 + t) % 3
        p = off
        while p + 3 <= L:
            idx = int(cells[p]) * S2 + int(cells[p + 1]) * n_symbols + int(cells[p + 2])
            cnt = allow_count[idx]
            if cnt > 1:
                thr = allow_thresh[idx]
                while True:
                    state = state + _GAMMA
                    z = _sm_output(state)
                    if thr == np.uint64(0) or z < thr:
                        break
                j = int(z % np.uint64(cnt))
                nidx = allow_flat[allow_start[idx] + j]
                if nidx != idx:
                    if stop_on_zero_weight:
                        weight_now += window_weight[nidx] - window_weight[idx]
                    cells[p] = nidx // S2
                    cells[p + 1] = (nidx // n_symbols) % n_symbols
                    cells[p + 2] = nidx % n_symbols
            p += 3
        layers_done += 1
        if do_accum:
            for i in range(L):
                accum[i] += charge[cells[i]]
        if stop_on_zero_weight and weight_now == 0:
            break
    return state, layers_done, weight_now


@njit(cache=True)
def bs_identity_screen(words, p1, p2):
    """Mask of words whose matrix is possibly the identity.

    Tracks the net b-charge and the off-diagonal dyadic scaled to an
    integer, modulo two 31-bit primes (additive only: the powers of two
    are table lookups, so no overflow).  Zero residues are necessary for
    identity; callers confirm survivors with exact arithmetic.
    """
    n, L = words.shape
    pow1 = np.empty(2 * L + 1, dtype=np.int64)
    pow2 = np.empty(2 * L + 1, dtype=np.int64)
    pow1[0] = 1
    pow2[0] = 1
    for j in range(1, 2 * L + 1):
        pow1[j] = (pow1[j - 1] * 2) % p1
        pow2[j] = (pow2[j - 1] * 2) % p2
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        e = L  # diag exponent offset by +L so it stays a valid table index
        m1 = np.int64(0)
        m2 = np.int64(0)
        for j in range(L):
            s = words[i, j]
            if s == 1:  # a
                m1 += pow1[e]
                m2 += pow2[e]
            elif s == 2:  # A
                m1 -= pow1[e]
                m2 -= pow2[e]
            elif s == 3:  # b
                e -= 1
            elif s == 4:  # B
                e += 1
        if e == L and m1 % p1 == 0 and m2 % p2 == 0:
            out[i] = True
    return out


# ---------------------------------------------------------------------------
# bounded-closure equality for gate windows
#
# States are e-stripped words packed 3 bits per symbol (symbol codes
# 1..6) with the length in the top bits.  Identity characters commute
# freely with everything, so connectivity inside a fixed-length chain of
# `cap` cells is exactly connectivity of reduced words of length <= cap
# under: free reduction/insertion of inverse pairs, and the 2<->3 symbol
# relation rewrites.


@njit(cache=True)
def _pack(buf, length):
    # length biased by 1 so the empty word is nonzero (0 is the hash sentinel)
    code = np.uint64(length + 1) << np.uint64(54)
    for i in range(length):
        code |= np.uint64(buf[i]) << np.uint64(3 * i)
    return code


@njit(cache=True)
def _unpack(code, buf):
    length = int(code >> np.uint64(54)) - 1
    for i in range(length):
        buf[i] = int((code >> np.uint64(3 * i)) & np.uint64(7))
    return length


@njit(cache=True)
def _component_bfs(start_code, owner, visited_codes, visited_owner, n_hash, cap,
                   inv, src_len, src, dst_len, dst, queue, max_states):
    """Flood one connectivity component; returns (state_count, clashing_owner).

    `visited_codes`/`visited_owner` implement an open-addressing hash set
    shared across calls.  If the start state was already claimed by an
    earlier component, its owner is returned without exploring.
    """
    mask = np.uint64(n_hash - 1)
    # probe for start
    h = (start_code * np.uint64(0x9E3779B97F4A7C15)) & mask
    while True:
        c = visited_codes[h]
        if c == np.uint64(0):
            break
        if c == start_code:
            return 0, visited_owner[h]
        h = (h + np.uint64(1)) & mask
    visited_codes[h] = start_code
    visited_owner[h] = owner
    queue[0] = start_code
    head = 0
    tail = 1
    wa = np.empty(cap + 2, dtype=np.int64)
    wb = np.empty(cap + 2, dtype=np.int64)
    n_rules = src_len.shape[0]
    while head < tail:
        code = queue[head]
        head += 1
        la = _unpack(code, wa)
        # neighbor generation: write candidate into wb, then push
        for kind in range(3):
            if kind == 0:
                # free reduction of an adjacent inverse pair
                for i in range(la - 1):
                    if inv[wa[i]] == wa[i + 1]:
                        n = 0
                        for j in range(la):
                            if j != i and j != i + 1:
                                wb[n] = wa[j]
                                n += 1
                        tail = _push(_pack(wb, n), owner, visited_codes, visited_owner,
                                     mask, queue, tail, max_states)
            elif kind == 1:
                # free insertion of an inverse pair
                if la + 2 <= cap:
                    for i in range(la + 1):
                        for x in range(1, 7):
                            for j in range(i):
                                wb[j] = wa[j]
                            wb[i] = x
                            wb[i + 1] = inv[x]
                            for j in range(i, la):
                                wb[j + 2] = wa[j]
                            tail = _push(_pack(wb, la + 2), owner, visited_codes,
                                         visited_owner, mask, queue, tail, max_states)
            else:
                # relation rewrites
                for r in range(n_rules):
                    sl = src_len[r]
                    dl = dst_len[r]
                    if la - sl + dl > cap:
                        continue
                    for i in range(la - sl + 1):
                        match = True
                        for j in range(sl):
                            if wa[i + j] != src[r, j]:
                                match = False
                                break
                        if not match:
                            continue
                        n = 0
                        for j in range(i):
                            wb[n] = wa[j]
                            n += 1
                        for j in range(dl):
                            wb[n] = dst[r, j]
                            n += 1
                        for j in range(i + sl, la):
                            wb[n] = wa[j]
                            n += 1
                        tail = _push(_pack(wb, n), owner, visited_codes, visited_owner,
                                     mask, queue, tail, max_states)
        if tail >= max_states - 2048:
            return -1, -1  # budget exhausted
    return tail, -1


@njit(cache=True)
def _push(code, owner, visited_codes, visited_owner, mask, queue, tail, max_states):
    h = (code * np.uint64(0x9E3779B97F4A7C15)) & mask
    while True:
        c = visited_codes[h]
        if c == np.uint64(0):
            visited_codes[h] = code
            visited_owner[h] = owner
            if tail < max_states:
                queue[tail] = code
                tail += 1
            return tail
        if c == code:
            return tail
        h = (h + np.uint64(1)) & mask


@njit(cache=True)
def closure_partition(start_codes, cap, inv, src_len, src, dst_len, dst, max_states):
    """Owner index per start state under bounded-move connectivity.

    Starts sharing a component get the owner of whichever start explored
    it first.  Owner -2 flags a budget blow-up (caller must fail hard).
    """
    n = start_codes.shape[0]
    n_hash = 1
    while n_hash < 4 * max_states:
        n_hash *= 2
    visited_codes = np.zeros(n_hash, dtype=np.uint64)
    visited_owner = np.full(n_hash, -1, dtype=np.int32)
    queue = np.empty(max_states, dtype=np.uint64)
    owners = np.full(n, -1, dtype=np.int32)
    for i in range(n):
        count, clash = _component_bfs(start_codes[i], i, visited_codes, visited_owner,
                                      n_hash, cap, inv, src_len, src, dst_len, dst,
                                      queue, max_states)
        if count == -1 and clash == -1:
            owners[i] = -2
            return owners
        owners[i] = i if clash == -1 else clash
    return owners
