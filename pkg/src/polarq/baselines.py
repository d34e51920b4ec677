"""Successive cancellation (SC) and list (SCL) reference decoders.

Both use exact min-sum kernels (scale 1.0, unlike the 0.9375-scaled BP
operator) and force frozen bits to 0. The SCL path metric adds |LLR|
whenever a decided bit contradicts its LLR sign; the final answer is the
lowest-metric path (no CRC selection).
"""

import numpy as np

from .polar import PolarCode


def _f(a, b):
    """Check-node kernel: sign(a)*sign(b)*min(|a|,|b|)."""
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    return sign * np.minimum(np.abs(a), np.abs(b))


def _g(a, b, bits):
    """Variable-node kernel after the left bits are known."""
    return b + (1.0 - 2.0 * bits) * a


def sc_decode(code: PolarCode, channel_llrs):
    """Successive cancellation decoding; returns the K information bits."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    if llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} channel LLRs, got {llrs.shape}")
    frozen = code.frozen_mask
    u_hat = np.zeros(code.N, dtype=np.int8)

    def recurse(seg, lo):
        # Decodes u[lo : lo+len(seg)]; returns that subrange's codeword bits.
        if seg.size == 1:
            bit = 0 if frozen[lo] else int(seg[0] < 0)
            u_hat[lo] = bit
            return np.array([bit], dtype=np.int8)
        half = seg.size // 2
        a, b = seg[:half], seg[half:]
        x_left = recurse(_f(a, b), lo)
        x_right = recurse(_g(a, b, x_left), lo + half)
        return np.concatenate([x_left ^ x_right, x_right])

    recurse(llrs, 0)
    return u_hat[code.info_set]


def scl_decode(code: PolarCode, channel_llrs, list_size):
    """Successive cancellation list decoding; returns the K information bits.

    list_size must be a power of two; list_size 1 reproduces sc_decode
    bit for bit.
    """
    if list_size < 1 or (list_size & (list_size - 1)) != 0:
        raise ValueError(f"list_size must be a power of two, got {list_size}")
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    if llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} channel LLRs, got {llrs.shape}")
    N, n, L = code.N, code.n, list_size
    frozen = code.frozen_mask

    # Per-path workspaces: depth 0 holds the channel LLRs, depth n the
    # bit decisions in natural u order. Only path 0 is alive initially.
    path_llrs = np.zeros((L, n + 1, N))
    path_llrs[:, 0, :] = llrs
    path_bits = np.zeros((L, n + 1, N), dtype=np.int8)
    metrics = np.full(L, np.inf)
    metrics[0] = 0.0

    # Depth-first traversal with an explicit visit-state per tree node:
    # 0 = descend left, 1 = descend right, 2 = combine and ascend.
    visit_state = np.zeros(2 * N - 1, dtype=np.int8)
    depth, node = 0, 0
    while True:
        if depth == n:
            decision_llr = path_llrs[:, n, node]
            if frozen[node]:
                path_bits[:, n, node] = 0
                metrics += np.abs(decision_llr) * (decision_llr < 0)
            else:
                hard = (decision_llr < 0).astype(np.int8)
                # First L candidates keep the hard decision, the next L
                # flip it at a |LLR| penalty; keep the best L overall.
                forked = np.concatenate([metrics, metrics + np.abs(decision_llr)])
                keep = np.argsort(forked, kind="stable")[:L]
                flipped = keep >= L
                parent = np.where(flipped, keep - L, keep)
                metrics = forked[keep]
                path_llrs = path_llrs[parent]
                path_bits = path_bits[parent]
                path_bits[:, n, node] = np.where(flipped, 1 - hard[parent], hard[parent])
            if node == N - 1:
                break
            node //= 2
            depth -= 1
            continue

        tree_pos = (1 << depth) - 1 + node
        seg = N >> depth
        half = seg // 2
        base = node * seg
        a = path_llrs[:, depth, base : base + half]
        b = path_llrs[:, depth, base + half : base + seg]
        if visit_state[tree_pos] == 0:
            path_llrs[:, depth + 1, base : base + half] = _f(a, b)
            visit_state[tree_pos] = 1
            node, depth = 2 * node, depth + 1
        elif visit_state[tree_pos] == 1:
            left_bits = path_bits[:, depth + 1, base : base + half]
            path_llrs[:, depth + 1, base + half : base + seg] = _g(a, b, left_bits)
            visit_state[tree_pos] = 2
            node, depth = 2 * node + 1, depth + 1
        else:
            left = path_bits[:, depth + 1, base : base + half]
            right = path_bits[:, depth + 1, base + half : base + seg]
            path_bits[:, depth, base : base + half] = left ^ right
            path_bits[:, depth, base + half : base + seg] = right
            node //= 2
            depth -= 1

    best = int(np.argmin(metrics))
    return path_bits[best, n, code.info_set]
