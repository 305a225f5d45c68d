"""Numba kernels for biased random walks and skip-gram with negative sampling.

Kernels are strictly sequential. Randomness enters either as pre-drawn
uniforms or as an explicit splitmix64 state, both derived from the caller's
seed, so a run is fully determined by that seed.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _is_neighbor(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        x = indices[mid]
        if x == b:
            return True
        if x < b:
            lo = mid + 1
        else:
            hi = mid
    return False


@njit(cache=True, nogil=True)
def biased_walks(indptr, indices, starts, uniforms, walk_length, inv_p, inv_q):
    """Second-order node2vec walks.

    ``uniforms`` has shape ``(len(starts), walk_length - 1)``; one draw per step.
    Transition weights from ``cur`` (having arrived from ``prev``) to ``x``:
    ``1/p`` if ``x == prev``, ``1`` if ``x`` is adjacent to ``prev``, else ``1/q``.
    """
    n_walks = starts.shape[0]
    walks = np.empty((n_walks, walk_length), dtype=np.int64)
    max_deg = 0
    for v in range(indptr.shape[0] - 1):
        d = indptr[v + 1] - indptr[v]
        if d > max_deg:
            max_deg = d
    weights = np.empty(max_deg, dtype=np.float64)
    unbiased = inv_p == 1.0 and inv_q == 1.0
    for w in range(n_walks):
        cur = starts[w]
        walks[w, 0] = cur
        for step in range(1, walk_length):
            lo = indptr[cur]
            deg = indptr[cur + 1] - lo
            u = uniforms[w, step - 1]
            if step == 1 or unbiased:
                k = int(u * deg)
                if k >= deg:
                    k = deg - 1
                nxt = indices[lo + k]
            else:
                prev = walks[w, step - 2]
                total = 0.0
                for j in range(deg):
                    x = indices[lo + j]
                    if x == prev:
                        wt = inv_p
                    elif _is_neighbor(indptr, indices, prev, x):
                        wt = 1.0
                    else:
                        wt = inv_q
                    total += wt
                    weights[j] = total
                target = u * total
                k = deg - 1
                for j in range(deg):
                    if target < weights[j]:
                        k = j
                        break
                nxt = indices[lo + k]
            walks[w, step] = nxt
            cur = nxt
    return walks


@njit(cache=True, nogil=True)
def splitmix64(state):
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def alias_table(weights):
    """Vose alias tables ``(prob, alias)`` for sampling proportional to ``weights``."""
    n = weights.shape[0]
    scaled = weights * (n / weights.sum())
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(n):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        g = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            nl -= 1
            small[ns] = g
            ns += 1
    return prob, alias


@njit(cache=True, nogil=True)
def _draw_noise(prob, alias, state):
    state, bits = splitmix64(state)
    n = prob.shape[0]
    k = np.int64(((bits >> np.uint64(32)) * np.uint64(n)) >> np.uint64(32))
    u = (bits & np.uint64(0xFFFFFFFF)) * (1.0 / 4294967296.0)
    if u < prob[k]:
        return state, k
    return state, alias[k]


@njit(cache=True, nogil=True)
def count_pairs(walk_length, window):
    n = 0
    for i in range(walk_length):
        lo = max(0, i - window)
        hi = min(walk_length - 1, i + window)
        n += hi - lo
    return n


@njit(cache=True, nogil=True)
def sgns_epoch(walks, order, emb_in, emb_out, noise_prob, noise_alias, n_neg, rng_state, window,
               lr0, lr_floor, step0, total_steps):
    """One pass of SGNS over ``walks`` in the given ``order``.

    Noise nodes are drawn from the alias tables with a splitmix64 stream
    started at ``rng_state``. Returns ``(step, rng_state)`` after the pass.
    """
    dim = emb_in.shape[1]
    walk_length = walks.shape[1]
    neu = np.empty(dim, dtype=np.float64)
    step = step0
    state = np.uint64(rng_state)
    for oi in range(order.shape[0]):
        walk = walks[order[oi]]
        for i in range(walk_length):
            center = walk[i]
            lo = max(0, i - window)
            hi = min(walk_length - 1, i + window)
            for j in range(lo, hi + 1):
                if j == i:
                    continue
                ctx = walk[j]
                frac = step / total_steps
                lr = lr0 * (1.0 - (1.0 - lr_floor) * frac)
                for d in range(dim):
                    neu[d] = 0.0
                for t in range(n_neg + 1):
                    if t == 0:
                        target = ctx
                        label = 1.0
                    else:
                        state, target = _draw_noise(noise_prob, noise_alias, state)
                        if target == ctx:
                            continue
                        label = 0.0
                    dot = 0.0
                    for d in range(dim):
                        dot += emb_in[center, d] * emb_out[target, d]
                    if dot > 30.0:
                        f = 1.0
                    elif dot < -30.0:
                        f = 0.0
                    else:
                        f = 1.0 / (1.0 + math.exp(-dot))
                    g = (label - f) * lr
                    for d in range(dim):
                        neu[d] += g * emb_out[target, d]
                        emb_out[target, d] += g * emb_in[center, d]
                for d in range(dim):
                    emb_in[center, d] += neu[d]
                step += 1
    return step, state
