"""Compiled inner loops for train-mode QLBP decoding.

Training touches the Q-table once per PE per direction per iteration;
doing that with per-stage numpy batches costs tens of milliseconds per
frame, so the full iteration (both passes, action selection, pending
resolution) runs as a numba kernel over scalars instead. Updates are
applied strictly sequentially: within the left-to-right pass stages
ascend and PEs ascend by top index, then the right-to-left pass mirrors
that with stages descending; every Q-update sees all earlier ones.

All randomness is drawn by the caller from its seeded generator and
passed in, so results are reproducible from the seed alone.
"""

import numpy as np
from numba import njit

MIN_SUM_SCALE = 0.9375


@njit(cache=True, inline="always")
def _g(x, y):
    m = min(abs(x), abs(y))
    if (x < 0) != (y < 0):
        return -MIN_SUM_SCALE * m
    return MIN_SUM_SCALE * m


@njit(cache=True, inline="always")
def _rho(curr, prev, beta):
    den = abs(curr) + abs(prev)
    if den == 0.0:
        return 1.0
    ratio = abs(abs(curr) - abs(prev)) / den
    if curr + prev < 0:
        return 1.0 - beta * ratio
    return 1.0 + beta * ratio


@njit(cache=True, inline="always")
def _encode4(a0, a1, a2, a3):
    # Lehmer rank of the stable magnitude-ascending permutation (x16)
    # plus the sign bits; identical to qlearn.encode_states.
    m0, m1, m2, m3 = abs(a0), abs(a1), abs(a2), abs(a3)
    i0, i1, i2, i3 = 0, 1, 2, 3
    mm0, mm1, mm2, mm3 = m0, m1, m2, m3
    # stable insertion sort of (magnitude, original index)
    if mm1 < mm0:
        mm0, mm1, i0, i1 = mm1, mm0, i1, i0
    if mm2 < mm1:
        mm1, mm2, i1, i2 = mm2, mm1, i2, i1
        if mm1 < mm0:
            mm0, mm1, i0, i1 = mm1, mm0, i1, i0
    if mm3 < mm2:
        mm2, mm3, i2, i3 = mm3, mm2, i3, i2
        if mm2 < mm1:
            mm1, mm2, i1, i2 = mm2, mm1, i2, i1
            if mm1 < mm0:
                mm0, mm1, i0, i1 = mm1, mm0, i1, i0
    c0 = (i1 < i0) + (i2 < i0) + (i3 < i0)
    c1 = (i2 < i1) + (i3 < i1)
    c2 = 1 if i3 < i2 else 0
    rank = 6 * c0 + 2 * c1 + c2
    signs = 0
    if a0 < 0:
        signs += 1
    if a1 < 0:
        signs += 2
    if a2 < 0:
        signs += 4
    if a3 < 0:
        signs += 8
    return rank * 16 + signs


@njit(cache=True, inline="always")
def _argmax_row(q, state):
    best = 0
    best_val = q[state, 0]
    for a in range(1, q.shape[1]):
        if q[state, a] > best_val:
            best_val = q[state, a]
            best = a
    return best


@njit(cache=True, inline="always")
def _q_step(q, visits, state, action, reward, next_state, alpha, gamma):
    future = q[next_state, 0]
    for a in range(1, q.shape[1]):
        if q[next_state, a] > future:
            future = q[next_state, a]
    q[state, action] += alpha * (reward + gamma * future - q[state, action])
    visits[state, action] += 1


@njit(cache=True)
def train_iteration(
    L, R, L_prev, R_prev, tops, q, visits, actions,
    pending_state, pending_action, uniforms, rand_actions,
    epsilon, alpha, gamma, r_kept, r_flip,
):
    """One round-trip iteration with agent interaction at every PE."""
    n, pe_count = tops.shape
    for s in range(n):
        span = 1 << s
        for p in range(pe_count):
            j = tops[s, p]
            jb = j + span
            ra, rb = R[s, j], R[s, jb]
            lc, ld = L[s + 1, j], L[s + 1, jb]
            prov_top = _g(ra, ld + rb)
            prov_bot = _g(lc, ra) + rb
            prev_top = R_prev[s + 1, j]
            state = _encode4(ra, rb, lc, ld)
            if uniforms[0, s, p] < epsilon:
                action = rand_actions[0, s, p]
            else:
                action = _argmax_row(q, state)
            kept = (prov_top < 0) == (prev_top < 0)
            if kept:
                w_top = 1.0
                w_bot = 1.0
            else:
                beta = actions[action]
                w_top = _rho(prov_top, prev_top, beta)
                w_bot = _rho(prov_bot, R_prev[s + 1, jb], beta)
            R[s + 1, j] = _g(w_top * ra, w_top * (ld + rb))
            R[s + 1, jb] = _g(w_bot * lc, w_bot * ra) + w_bot * rb
            old_state = pending_state[0, s, p]
            if old_state >= 0:
                reward = r_kept if kept else r_flip
                _q_step(q, visits, old_state, pending_action[0, s, p],
                        reward, state, alpha, gamma)
            pending_state[0, s, p] = state
            pending_action[0, s, p] = action
    for s in range(n - 1, -1, -1):
        span = 1 << s
        for p in range(pe_count):
            j = tops[s, p]
            jb = j + span
            ra, rb = R[s, j], R[s, jb]
            lc, ld = L[s + 1, j], L[s + 1, jb]
            prov_top = _g(lc, ld + rb)
            prov_bot = _g(lc, ra) + ld
            prev_top = L_prev[s, j]
            state = _encode4(lc, ld, ra, rb)
            if uniforms[1, s, p] < epsilon:
                action = rand_actions[1, s, p]
            else:
                action = _argmax_row(q, state)
            kept = (prov_top < 0) == (prev_top < 0)
            if kept:
                w_top = 1.0
                w_bot = 1.0
            else:
                beta = actions[action]
                w_top = _rho(prov_top, prev_top, beta)
                w_bot = _rho(prov_bot, L_prev[s, jb], beta)
            L[s, j] = _g(w_top * lc, w_top * (ld + rb))
            L[s, jb] = _g(w_bot * lc, w_bot * ra) + w_bot * ld
            old_state = pending_state[1, s, p]
            if old_state >= 0:
                reward = r_kept if kept else r_flip
                _q_step(q, visits, old_state, pending_action[1, s, p],
                        reward, state, alpha, gamma)
            pending_state[1, s, p] = state
            pending_action[1, s, p] = action
    return


@njit(cache=True)
def train_terminal(
    L, R, L_prev, R_prev, tops, q, visits,
    pending_state, pending_action, alpha,
    r_both, r_one, r_none,
):
    """Resolve every pending transition with the success reward.

    Terminal transitions carry no future term. Sign stability of each
    output over the final two iterations picks 20/10/0.
    """
    n, pe_count = tops.shape
    for s in range(n):
        span = 1 << s
        for p in range(pe_count):
            j = tops[s, p]
            jb = j + span
            for direction in range(2):
                old_state = pending_state[direction, s, p]
                if old_state < 0:
                    continue
                if direction == 0:
                    kept1 = (R[s + 1, j] < 0) == (R_prev[s + 1, j] < 0)
                    kept2 = (R[s + 1, jb] < 0) == (R_prev[s + 1, jb] < 0)
                else:
                    kept1 = (L[s, j] < 0) == (L_prev[s, j] < 0)
                    kept2 = (L[s, jb] < 0) == (L_prev[s, jb] < 0)
                if kept1 and kept2:
                    reward = r_both
                elif kept1 or kept2:
                    reward = r_one
                else:
                    reward = r_none
                action = pending_action[direction, s, p]
                q[old_state, action] += alpha * (reward - q[old_state, action])
                visits[old_state, action] += 1
