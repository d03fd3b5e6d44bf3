"""Compiled inner loops for membership assignment and fitness evaluation.

Every function works on *local* indices 0..m-1 of a :class:`~beecup.clustering.Snapshot`
(alive nodes in ascending id order). ``nbr_ptr``/``nbr_idx`` is a CSR list of
in-range neighbours sorted by (distance, id).
"""

import numpy as np
from numba import njit

EPS = 1e-9


@njit(cache=True)
def assign(is_ch, nbr_ptr, nbr_idx, s_max, head, count):
    """Fill ``head`` (local head index per node) and ``count`` (members per head).

    Nodes join in ascending index order the nearest head with spare
    capacity; a node with no option heads a forced single cluster.
    Returns the number of single-node clusters.
    """
    m = is_ch.shape[0]
    for j in range(m):
        count[j] = 0
        head[j] = j
    for j in range(m):
        if is_ch[j]:
            continue
        for t in range(nbr_ptr[j], nbr_ptr[j + 1]):
            c = nbr_idx[t]
            if is_ch[c] and count[c] < s_max:
                head[j] = c
                count[c] += 1
                break
    singles = 0
    for j in range(m):
        if head[j] == j and count[j] == 0:
            singles += 1
    return singles


@njit(cache=True)
def ch_number_cost(x, speed, speed_total, nbr_ptr, nbr_idx, s_max, w1, w2, literal, head, count):
    m = x.shape[0]
    is_ch = x != 0
    singles = assign(is_ch, nbr_ptr, nbr_idx, s_max, head, count)
    v = 0.0
    for j in range(m):
        if is_ch[j]:
            v += speed[j]
    if literal:
        return w1 * singles / m + w2 * 1.0 / (v + 1.0)
    return w1 * singles / m + w2 * v / (speed_total + EPS)


@njit(cache=True)
def ch_select_terms(idx, pos, base_dist, base_total, e_norm, speed, speed_total,
                    nbr_ptr, nbr_idx, s_max, literal, head, count):
    """Return (nD, nE, nM, nSN) for the head set ``idx``."""
    m = pos.shape[0]
    k = idx.shape[0]
    is_ch = np.zeros(m, dtype=np.bool_)
    for t in range(k):
        is_ch[idx[t]] = True
    singles = assign(is_ch, nbr_ptr, nbr_idx, s_max, head, count)
    dist = 0.0
    for j in range(m):
        h = head[j]
        if h == j:
            dist += base_dist[j]
        else:
            dx = pos[j, 0] - pos[h, 0]
            dy = pos[j, 1] - pos[h, 1]
            dist += np.sqrt(dx * dx + dy * dy)
    n_d = dist / base_total if base_total > 0.0 else 0.0
    e_sum = 0.0
    v = 0.0
    for t in range(k):
        e_sum += e_norm[idx[t]]
        v += speed[idx[t]]
    n_e = 1.0 - e_sum / k
    if literal:
        n_m = 1.0 / (v + 1.0)
    else:
        n_m = v / (speed_total + EPS)
    n_sn = singles / m
    return n_d, n_e, n_m, n_sn


@njit(cache=True)
def ch_select_cost(idx, pos, base_dist, base_total, e_norm, speed, speed_total,
                   nbr_ptr, nbr_idx, s_max, literal, w_dist, w_energy, w_mob, w_single,
                   head, count):
    n_d, n_e, n_m, n_sn = ch_select_terms(
        idx, pos, base_dist, base_total, e_norm, speed, speed_total,
        nbr_ptr, nbr_idx, s_max, literal, head, count)
    return w_dist * n_d + w_energy * n_e + w_mob * n_m + w_single * n_sn
