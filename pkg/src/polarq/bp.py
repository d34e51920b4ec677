"""Polar factor graph and standard belief-propagation decoding.

The graph has n = log2(N) stages of N/2 processing elements (PEs) each.
Stage s (0-based) pairs node j with node j + 2^s: adjacent pairs sit at
the input (u) boundary, the widest (N/2-spaced) pairs at the channel
boundary, mirroring the recursive structure the SC tree eliminates.
Messages live on an (n+1) x N grid: L flows right-to-left, R
left-to-right. Row 0 is the u boundary, row n the channel boundary.

One iteration is a round trip: an R-pass sweeping stages 0..n-1 followed
by an L-pass sweeping n-1..0, each pass consuming the freshest values.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .polar import PolarCode, is_consistent

# Saturation constant standing in for the +inf prior on frozen bits.
# Large enough to dominate any channel LLR, finite so min-sum arithmetic
# needs no special-casing.
INF_LLR = 1e30

# Scaling of the min-sum approximation to the exact boxplus operator.
MIN_SUM_SCALE = 0.9375


def g_op(x, y):
    """Scaled min-sum operator: 0.9375 * sign(x)*sign(y) * min(|x|,|y|).

    sign(0) counts as +1. Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sign = np.where((x < 0) != (y < 0), -1.0, 1.0)
    return MIN_SUM_SCALE * sign * np.minimum(np.abs(x), np.abs(y))


@dataclass(frozen=True)
class PEIndex:
    """One processing element: stage s pairs top j with bottom j + 2^s."""

    stage: int
    top: int
    bottom: int


def stage_span(N, stage):
    """Top/bottom node distance of the PEs at a stage (0-based)."""
    return 1 << stage


@lru_cache(maxsize=64)
def stage_tops(N, stage):
    """Top-node indices of the N/2 PEs at a stage (0-based)."""
    span = stage_span(N, stage)
    j = np.arange(N)
    tops = j[(j & span) == 0]
    tops.setflags(write=False)
    return tops


def enumerate_pes(N, stage):
    span = stage_span(N, stage)
    return [PEIndex(stage, int(j), int(j + span)) for j in stage_tops(N, stage)]


class MessageGrid:
    """LLR message state for one decode call.

    Attributes L and R are (n+1) x N arrays; L_prev and R_prev hold the
    previous iteration's values; t is the last completed iteration.
    """

    __slots__ = ("code", "L", "R", "L_prev", "R_prev", "t")

    def __init__(self, code: PolarCode):
        shape = (code.n + 1, code.N)
        self.code = code
        self.L = np.zeros(shape)
        self.R = np.zeros(shape)
        self.L_prev = np.zeros(shape)
        self.R_prev = np.zeros(shape)
        self.t = 0

    def snapshot(self):
        """Record the current messages as the previous iteration's."""
        np.copyto(self.L_prev, self.L)
        np.copyto(self.R_prev, self.R)


def init_grid(code: PolarCode, channel_llrs) -> MessageGrid:
    """Channel LLRs on the right boundary, frozen saturation on the left."""
    channel_llrs = np.asarray(channel_llrs, dtype=np.float64)
    if channel_llrs.shape != (code.N,):
        raise ValueError(f"expected {code.N} channel LLRs, got {channel_llrs.shape}")
    grid = MessageGrid(code)
    grid.L[code.n, :] = channel_llrs
    grid.R[0, code.frozen_set] = INF_LLR
    grid.snapshot()
    return grid


def r_outputs(ra, rb, lc, ld):
    """Left-to-right PE update: inputs (R_top, R_bot, L_top, L_bot)."""
    return g_op(ra, ld + rb), g_op(lc, ra) + rb


def l_outputs(ra, rb, lc, ld):
    """Right-to-left PE update: same inputs, opposite direction."""
    return g_op(lc, ld + rb), g_op(lc, ra) + ld


def pe_update_standard(grid: MessageGrid, pe: PEIndex):
    """The four Eq-style output LLRs of one PE from the current grid.

    Returns (L_top, L_bottom, R_top_next, R_bottom_next) without
    mutating the grid.
    """
    s, j, jb = pe.stage, pe.top, pe.bottom
    ra, rb = grid.R[s, j], grid.R[s, jb]
    lc, ld = grid.L[s + 1, j], grid.L[s + 1, jb]
    l_top, l_bot = l_outputs(ra, rb, lc, ld)
    r_top, r_bot = r_outputs(ra, rb, lc, ld)
    return float(l_top), float(l_bot), float(r_top), float(r_bot)


def _stage_inputs(grid, stage, tops, bots):
    return (
        grid.R[stage, tops],
        grid.R[stage, bots],
        grid.L[stage + 1, tops],
        grid.L[stage + 1, bots],
    )


def run_iteration(grid: MessageGrid, update_r=None, update_l=None):
    """One round trip over all stages.

    update_r / update_l, when given, replace the standard PE update for
    that pass. They receive (stage, tops, bots, ra, rb, lc, ld) and
    return the (top, bottom) output arrays. Used by the reweighted and
    learning decoders; the default is plain min-sum.
    """
    code = grid.code
    n, N = code.n, code.N
    grid.snapshot()
    for s in range(n):
        tops = stage_tops(N, s)
        bots = tops + stage_span(N, s)
        ra, rb, lc, ld = _stage_inputs(grid, s, tops, bots)
        if update_r is None:
            out_top, out_bot = r_outputs(ra, rb, lc, ld)
        else:
            out_top, out_bot = update_r(s, tops, bots, ra, rb, lc, ld)
        grid.R[s + 1, tops] = out_top
        grid.R[s + 1, bots] = out_bot
    for s in range(n - 1, -1, -1):
        tops = stage_tops(N, s)
        bots = tops + stage_span(N, s)
        ra, rb, lc, ld = _stage_inputs(grid, s, tops, bots)
        if update_l is None:
            out_top, out_bot = l_outputs(ra, rb, lc, ld)
        else:
            out_top, out_bot = update_l(s, tops, bots, ra, rb, lc, ld)
        grid.L[s, tops] = out_top
        grid.L[s, bots] = out_bot
    grid.t += 1


def hard_decide(grid: MessageGrid):
    """Hard decisions on both boundaries: bit 0 iff L + R > 0.

    A zero sum resolves to bit 1.
    """
    n = grid.code.n
    u_hat = (grid.L[0] + grid.R[0] <= 0).astype(np.int8)
    x_hat = (grid.L[n] + grid.R[n] <= 0).astype(np.int8)
    return u_hat, x_hat


def _record_trace(trace, grid):
    if trace is not None:
        trace.append((grid.t, grid.L.copy(), grid.R.copy()))


def bp_decode(code: PolarCode, channel_llrs, t_max=60, early_stop=True, trace=None):
    """Standard min-sum BP decoding.

    Parameters
    ----------
    code : PolarCode
    channel_llrs : array of N channel LLRs
    t_max : iteration cap (>= 1)
    early_stop : stop once the hard-decided input word re-encodes to the
        hard-decided codeword
    trace : optional list; receives (iteration, L, R) grid copies

    Returns
    -------
    (u_hat_info, iterations_used, converged)
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    grid = init_grid(code, channel_llrs)
    converged = False
    while grid.t < t_max:
        run_iteration(grid)
        _record_trace(trace, grid)
        if early_stop:
            u_hat, x_hat = hard_decide(grid)
            if is_consistent(code, u_hat, x_hat):
                converged = True
                break
    u_hat, _ = hard_decide(grid)
    return u_hat[code.info_set], grid.t, converged
