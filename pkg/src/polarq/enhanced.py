"""BP decoding with inter-iteration LLR reweighting.

Each PE output gets a weight 1 + beta * d * s, where d is the normalized
magnitude distance between this iteration's provisional output and the
previous iteration's output, and s is the sign of their sum. The weight
scales that output's PE inputs before the update is recomputed, so
stationary messages pass through unchanged and beta = 0 reduces exactly
to standard BP.

The provisional-then-reweight order resolves the circular dependence of
the weight on the output it produces: weights are measured on the
standard update's result, then applied.
"""

from dataclasses import dataclass

import numpy as np

from .bp import (
    MessageGrid,
    PEIndex,
    _record_trace,
    g_op,
    hard_decide,
    init_grid,
    l_outputs,
    r_outputs,
    run_iteration,
)
from .polar import PolarCode, is_consistent

MAX_BETA = 0.5


@dataclass(frozen=True)
class WeightContext:
    """Correction factor for the reweighted update; |beta| <= 0.5.

    The previous iteration's PE outputs referenced by the weights are
    the L_prev/R_prev snapshots of the grid being updated.
    """

    beta: float

    def __post_init__(self):
        if abs(self.beta) > MAX_BETA:
            raise ValueError(f"|beta| must be <= {MAX_BETA}, got {self.beta}")


def compute_rho(curr, prev, beta):
    """Weight for one output LLR given its previous-iteration value.

    Returns 1 + beta * (||curr|-|prev|| / (|curr|+|prev|)) * sign(curr+prev),
    with sign(0) = +1 and weight 1 when both magnitudes are zero. Always
    lies in [1-|beta|, 1+|beta|]. Accepts scalars or arrays.
    """
    curr = np.asarray(curr, dtype=np.float64)
    prev = np.asarray(prev, dtype=np.float64)
    den = np.abs(curr) + np.abs(prev)
    ratio = np.divide(
        np.abs(np.abs(curr) - np.abs(prev)),
        den,
        out=np.zeros(np.broadcast(curr, prev).shape),
        where=den > 0,
    )
    delta = np.where(curr + prev < 0, -1.0, 1.0)
    return 1.0 + beta * ratio * delta


def weighted_r_outputs(ra, rb, lc, ld, w_top, w_bot):
    """Left-to-right update with each output's inputs scaled by its weight."""
    top = g_op(w_top * ra, w_top * (ld + rb))
    bot = g_op(w_bot * lc, w_bot * ra) + w_bot * rb
    return top, bot


def weighted_l_outputs(ra, rb, lc, ld, w_top, w_bot):
    """Right-to-left update with each output's inputs scaled by its weight."""
    top = g_op(w_top * lc, w_top * (ld + rb))
    bot = g_op(w_bot * lc, w_bot * ra) + w_bot * ld
    return top, bot


def pe_update_weighted(grid: MessageGrid, pe: PEIndex, ctx: WeightContext):
    """Two-phase reweighted update of one PE, both directions.

    Returns (L_top, L_bottom, R_top_next, R_bottom_next) from the
    current grid without mutating it; previous outputs come from the
    grid's snapshots.
    """
    s, j, jb = pe.stage, pe.top, pe.bottom
    ra, rb = grid.R[s, j], grid.R[s, jb]
    lc, ld = grid.L[s + 1, j], grid.L[s + 1, jb]

    prov_l_top, prov_l_bot = l_outputs(ra, rb, lc, ld)
    w1 = compute_rho(prov_l_top, grid.L_prev[s, j], ctx.beta)
    w2 = compute_rho(prov_l_bot, grid.L_prev[s, jb], ctx.beta)
    l_top, l_bot = weighted_l_outputs(ra, rb, lc, ld, w1, w2)

    prov_r_top, prov_r_bot = r_outputs(ra, rb, lc, ld)
    w3 = compute_rho(prov_r_top, grid.R_prev[s + 1, j], ctx.beta)
    w4 = compute_rho(prov_r_bot, grid.R_prev[s + 1, jb], ctx.beta)
    r_top, r_bot = weighted_r_outputs(ra, rb, lc, ld, w3, w4)
    return float(l_top), float(l_bot), float(r_top), float(r_bot)


def _weighted_passes(grid, beta):
    """Pass callbacks implementing the two-phase reweighted update."""

    def update_r(s, tops, bots, ra, rb, lc, ld):
        prov_top, prov_bot = r_outputs(ra, rb, lc, ld)
        w_top = compute_rho(prov_top, grid.R_prev[s + 1, tops], beta)
        w_bot = compute_rho(prov_bot, grid.R_prev[s + 1, bots], beta)
        return weighted_r_outputs(ra, rb, lc, ld, w_top, w_bot)

    def update_l(s, tops, bots, ra, rb, lc, ld):
        prov_top, prov_bot = l_outputs(ra, rb, lc, ld)
        w_top = compute_rho(prov_top, grid.L_prev[s, tops], beta)
        w_bot = compute_rho(prov_bot, grid.L_prev[s, bots], beta)
        return weighted_l_outputs(ra, rb, lc, ld, w_top, w_bot)

    return update_r, update_l


def enhanced_bp_decode(
    code: PolarCode, channel_llrs, t_max=60, beta=0.0, early_stop=True, trace=None
):
    """Reweighted BP decoding; the first iteration is the standard update.

    Returns (u_hat_info, iterations_used, converged).
    """
    ctx = WeightContext(beta=beta)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    grid = init_grid(code, channel_llrs)
    update_r, update_l = _weighted_passes(grid, ctx.beta)
    converged = False
    while grid.t < t_max:
        if grid.t == 0:
            run_iteration(grid)
        else:
            run_iteration(grid, update_r=update_r, update_l=update_l)
        _record_trace(trace, grid)
        if early_stop:
            u_hat, x_hat = hard_decide(grid)
            if is_consistent(code, u_hat, x_hat):
                converged = True
                break
    u_hat, _ = hard_decide(grid)
    return u_hat[code.info_set], grid.t, converged
