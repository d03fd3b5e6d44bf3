"""Compiled bee-colony driver for the two clustering fitness functions.

Mirrors :func:`beecup.abc.run_abc` step for step (same phases, neighbour
rule, greedy tie handling and single scout) but keeps the whole loop in
machine code. ``kind`` selects the cost: 0 = head-count fitness over a bit
vector, 1 = head-selection fitness over an index vector.
"""

import numpy as np
from numba import njit

from . import _kernels

KIND_CHNUM = 0
KIND_SELECT = 1


@njit(cache=True)
def _cost(kind, x, pos, base_dist, base_total, e_norm, speed, speed_total,
          nbr_ptr, nbr_idx, s_max, literal, w, head, count):
    if kind == KIND_CHNUM:
        return _kernels.ch_number_cost(x, speed, speed_total, nbr_ptr, nbr_idx, s_max,
                                       w[0], w[1], literal, head, count)
    return _kernels.ch_select_cost(x, pos, base_dist, base_total, e_norm, speed, speed_total,
                                   nbr_ptr, nbr_idx, s_max, literal, w[0], w[1], w[2], w[3],
                                   head, count)


@njit(cache=True)
def _random_solution(binary, dim, n, p_lo, p_hi, out):
    if binary:
        p = p_lo + (p_hi - p_lo) * np.random.random()
        for j in range(dim):
            out[j] = 1 if np.random.random() < p else 0
    else:
        perm = np.arange(n)
        for j in range(dim):
            r = j + np.random.randint(n - j)
            perm[j], perm[r] = perm[r], perm[j]
            out[j] = perm[j]


@njit(cache=True)
def _perturb(binary, n, x, j, value, out):
    """Write the neighbour into ``out``; return False when it equals ``x``."""
    v = int(np.floor(value + 0.5))
    if binary:
        v = min(1, max(0, v))
    else:
        v = min(n - 1, max(0, v))
    if v == x[j]:
        return False
    out[:] = x
    if not binary:
        clash = False
        for t in range(x.shape[0]):
            if x[t] == v:
                clash = True
                break
        if clash:
            used = np.zeros(n, dtype=np.bool_)
            for t in range(x.shape[0]):
                used[x[t]] = True
            free = n - x.shape[0]
            if free == 0:
                return False
            r = np.random.randint(free)
            for c in range(n):
                if not used[c]:
                    if r == 0:
                        v = c
                        break
                    r -= 1
    out[j] = v
    return True


@njit(cache=True)
def run(kind, binary, dim, n, sn, mcn, limit, seed, init, n_init, p_lo, p_hi,
        pos, base_dist, base_total, e_norm, speed, speed_total,
        nbr_ptr, nbr_idx, s_max, literal, w, head, count, record):
    np.random.seed(seed)
    colony = np.empty((sn, dim), dtype=np.int64)
    costs = np.empty(sn)
    trials = np.zeros(sn, dtype=np.int64)
    history = np.empty(mcn)
    n_rec = mcn * 2 * sn if record else 1
    rec_old = np.empty(n_rec)
    rec_new = np.empty(n_rec)
    rec_pos = 0
    evals = 0
    scouts = 0

    for i in range(sn):
        if i < n_init:
            colony[i, :] = init[i]
        else:
            _random_solution(binary, dim, n, p_lo, p_hi, colony[i])
        costs[i] = _cost(kind, colony[i], pos, base_dist, base_total, e_norm, speed,
                         speed_total, nbr_ptr, nbr_idx, s_max, literal, w, head, count)
        evals += 1
    b = int(np.argmin(costs))
    best = colony[b].copy()
    best_cost = costs[b]
    v = np.empty(dim, dtype=np.int64)
    cum = np.empty(sn)

    for cycle in range(mcn):
        for phase in range(2):
            if phase == 1:
                acc = 0.0
                for t in range(sn):
                    acc += 1.0 / (1.0 + costs[t])
                    cum[t] = acc
            for step in range(sn):
                if phase == 0:
                    i = step
                else:
                    r = np.random.random() * cum[sn - 1]
                    i = sn - 1
                    for t in range(sn):
                        if r < cum[t]:
                            i = t
                            break
                k = np.random.randint(sn - 1)
                if k >= i:
                    k += 1
                j = np.random.randint(dim)
                phi = np.random.uniform(-1.0, 1.0)
                value = colony[i, j] + phi * (colony[i, j] - colony[k, j])
                if not _perturb(binary, n, colony[i], j, value, v):
                    trials[i] += 1
                    continue
                c = _cost(kind, v, pos, base_dist, base_total, e_norm, speed, speed_total,
                          nbr_ptr, nbr_idx, s_max, literal, w, head, count)
                evals += 1
                before = costs[i]
                if c <= costs[i]:
                    if c < costs[i]:
                        trials[i] = 0
                    else:
                        trials[i] += 1
                    colony[i, :] = v
                    costs[i] = c
                    if c < best_cost:
                        best_cost = c
                        best[:] = v
                else:
                    trials[i] += 1
                if record:
                    rec_old[rec_pos] = before
                    rec_new[rec_pos] = costs[i]
                    rec_pos += 1
        worst = int(np.argmax(trials))
        if trials[worst] >= limit:
            _random_solution(binary, dim, n, p_lo, p_hi, colony[worst])
            costs[worst] = _cost(kind, colony[worst], pos, base_dist, base_total, e_norm, speed,
                                 speed_total, nbr_ptr, nbr_idx, s_max, literal, w, head, count)
            trials[worst] = 0
            evals += 1
            scouts += 1
            if costs[worst] < best_cost:
                best_cost = costs[worst]
                best[:] = colony[worst]
        history[cycle] = best_cost

    return best, best_cost, history, evals, scouts, rec_old[:rec_pos], rec_new[:rec_pos]
