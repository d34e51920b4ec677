"""Tabular Q-learning agent selecting per-PE correction factors.

Every PE visit (one per direction per iteration) is an agent step. The
state encodes the four input LLRs of the directional update as the sign
pattern (4 bits) plus the rank permutation of the magnitudes (4! = 24),
giving 24 * 16 = 384 states. The action is the correction factor used
to reweight that update; the weighting is skipped (weight 1) whenever
the tracked output LLR kept its sign since the previous iteration.

Rewards: +1/-1 for the tracked output keeping/flipping its sign by the
next visit of the same PE and direction, and 20/10/0 at a successful
early stop depending on how many of the two outputs were sign-stable
over the final two iterations. A single table is shared by all PEs,
stages, and directions.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bp import (
    _record_trace,
    hard_decide,
    init_grid,
    l_outputs,
    r_outputs,
    run_iteration,
    stage_tops,
)
from .enhanced import compute_rho, weighted_l_outputs, weighted_r_outputs
from .polar import PolarCode, is_consistent

STATE_COUNT = 384

# Correction-factor grid. Index 0 is 0.0 so that greedy selection on an
# all-zero table is the neutral (standard BP) decoder; the remaining
# values ascend over the validated range.
DEFAULT_ACTIONS = (0.0, -0.5, -0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class ActionSet:
    """Candidate correction factors; index 0 must be the neutral 0.0."""

    values: tuple = DEFAULT_ACTIONS

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("action set must not be empty")
        if vals[0] != 0.0:
            raise ValueError("action index 0 must be the neutral value 0.0")
        if len(set(vals)) != len(vals):
            raise ValueError("action values must be distinct")
        if any(abs(v) > 0.5 for v in vals):
            raise ValueError("action values must lie in [-0.5, 0.5]")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AgentParams:
    """Learning hyperparameters and the reward schedule."""

    alpha: float = 0.1
    gamma: float = 0.6
    epsilon: float = 0.5
    reward_success_both: float = 20.0
    reward_success_one: float = 10.0
    reward_success_none: float = 0.0
    reward_sign_kept: float = 1.0
    reward_sign_flipped: float = -1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")


class QTable:
    """Q-values and visit counts, one row per state, one column per action."""

    __slots__ = ("q", "visit_counts", "actions")

    def __init__(self, action_set=None, q=None, visit_counts=None):
        if action_set is None:
            action_set = ActionSet()
        self.actions = np.asarray(action_set.values, dtype=np.float64)
        shape = (STATE_COUNT, len(self.actions))
        self.q = np.zeros(shape) if q is None else np.asarray(q, dtype=np.float64)
        if visit_counts is None:
            self.visit_counts = np.zeros(shape, dtype=np.int64)
        else:
            self.visit_counts = np.asarray(visit_counts, dtype=np.int64)
        if self.q.shape != shape or self.visit_counts.shape != shape:
            raise ValueError("table shape does not match the action set")
        if not np.all(np.isfinite(self.q)):
            raise ValueError("Q-values must be finite")

    def copy(self):
        return QTable(
            ActionSet(tuple(self.actions)), self.q.copy(), self.visit_counts.copy()
        )


def encode_states(inputs):
    """State indices for rows of four LLRs (vectorized over leading axes).

    sign_bits collects input_k < 0 into bit k (zero counts as
    nonnegative); the rank permutation stably sorting the magnitudes
    ascending contributes its Lehmer rank * 16.
    """
    a = np.asarray(inputs, dtype=np.float64)
    if a.shape[-1] != 4:
        raise ValueError("expected four LLR inputs per state")
    perm = np.argsort(np.abs(a), axis=-1, kind="stable")
    c0 = np.sum(perm[..., 1:] < perm[..., :1], axis=-1)
    c1 = np.sum(perm[..., 2:] < perm[..., 1:2], axis=-1)
    c2 = (perm[..., 3] < perm[..., 2]).astype(np.int64)
    rank = 6 * c0 + 2 * c1 + c2
    neg = a < 0
    sign_bits = (
        neg[..., 0].astype(np.int64)
        + 2 * neg[..., 1]
        + 4 * neg[..., 2]
        + 8 * neg[..., 3]
    )
    return rank * 16 + sign_bits


def encode_state(inputs) -> int:
    """Scalar form of encode_states for exactly four LLRs."""
    return int(encode_states(np.asarray(inputs, dtype=np.float64).reshape(4)))


def select_action(qtable: QTable, state, epsilon, rng=None) -> int:
    """Epsilon-greedy pick; greedy ties break to the smallest index."""
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("epsilon > 0 requires a random generator")
        if rng.random() < epsilon:
            return int(rng.integers(0, len(qtable.actions)))
    return int(np.argmax(qtable.q[state]))


def q_update(qtable: QTable, state, action, reward, next_state, alpha, gamma):
    """One-step update toward reward + gamma * max_a Q(next_state, a).

    next_state None marks a terminal transition (no future term).
    Returns the new Q-value.
    """
    future = 0.0 if next_state is None else float(np.max(qtable.q[next_state]))
    old = float(qtable.q[state, action])
    new = old + alpha * (reward + gamma * future - old)
    qtable.q[state, action] = new
    qtable.visit_counts[state, action] += 1
    return new


def step_reward(curr_out, prev_out, params: AgentParams = AgentParams()):
    """+1 if the tracked output kept its sign, else -1 (zero counts positive)."""
    kept = (curr_out < 0) == (prev_out < 0)
    return params.reward_sign_kept if kept else params.reward_sign_flipped


def terminal_reward(out1_kept, out2_kept, params: AgentParams = AgentParams()):
    """Success reward by how many of the two outputs stayed sign-stable."""
    if out1_kept and out2_kept:
        return params.reward_success_both
    if out1_kept or out2_kept:
        return params.reward_success_one
    return params.reward_success_none


@lru_cache(maxsize=16)
def _tops_matrix(N, n):
    """(n, N/2) top-node indices per stage, for the compiled kernels."""
    return np.vstack([stage_tops(N, s) for s in range(n)]).astype(np.int64)


def _qlbp_eval(code, grid, t_max, qtable, trace):
    """Greedy (epsilon 0) decoding on the shared numpy update path."""

    def agent_weights(state_inputs, prov_top, prov_bot, prev_top, prev_bot):
        states = encode_states(state_inputs)
        actions = np.argmax(qtable.q[states], axis=1)
        kept = (prov_top < 0) == (prev_top < 0)
        beta = qtable.actions[actions]
        w_top = np.where(kept, 1.0, compute_rho(prov_top, prev_top, beta))
        w_bot = np.where(kept, 1.0, compute_rho(prov_bot, prev_bot, beta))
        return w_top, w_bot

    def update_r(s, tops, bots, ra, rb, lc, ld):
        prov_top, prov_bot = r_outputs(ra, rb, lc, ld)
        w_top, w_bot = agent_weights(
            np.stack([ra, rb, lc, ld], axis=-1), prov_top, prov_bot,
            grid.R_prev[s + 1, tops], grid.R_prev[s + 1, bots],
        )
        return weighted_r_outputs(ra, rb, lc, ld, w_top, w_bot)

    def update_l(s, tops, bots, ra, rb, lc, ld):
        prov_top, prov_bot = l_outputs(ra, rb, lc, ld)
        w_top, w_bot = agent_weights(
            np.stack([lc, ld, ra, rb], axis=-1), prov_top, prov_bot,
            grid.L_prev[s, tops], grid.L_prev[s, bots],
        )
        return weighted_l_outputs(ra, rb, lc, ld, w_top, w_bot)

    converged = False
    while grid.t < t_max:
        run_iteration(grid, update_r=update_r, update_l=update_l)
        _record_trace(trace, grid)
        u_hat, x_hat = hard_decide(grid)
        if is_consistent(grid.code, u_hat, x_hat):
            converged = True
            break
    return converged


def _qlbp_train(code, grid, t_max, qtable, params, rng, trace):
    """Epsilon-greedy decoding through the compiled training kernels."""
    from . import _kernels

    n, N = code.n, code.N
    pe_count = N // 2
    tops = _tops_matrix(N, n)
    n_actions = len(qtable.actions)
    # direction 0 = left-to-right pass, 1 = right-to-left pass
    pending_state = np.full((2, n, pe_count), -1, dtype=np.int64)
    pending_action = np.zeros((2, n, pe_count), dtype=np.int64)
    converged = False
    while grid.t < t_max:
        grid.snapshot()
        uniforms = rng.random((2, n, pe_count))
        randoms = rng.integers(0, n_actions, size=(2, n, pe_count))
        _kernels.train_iteration(
            grid.L, grid.R, grid.L_prev, grid.R_prev, tops,
            qtable.q, qtable.visit_counts, qtable.actions,
            pending_state, pending_action, uniforms, randoms,
            params.epsilon, params.alpha, params.gamma,
            params.reward_sign_kept, params.reward_sign_flipped,
        )
        grid.t += 1
        _record_trace(trace, grid)
        u_hat, x_hat = hard_decide(grid)
        if is_consistent(code, u_hat, x_hat):
            converged = True
            _kernels.train_terminal(
                grid.L, grid.R, grid.L_prev, grid.R_prev, tops,
                qtable.q, qtable.visit_counts, pending_state, pending_action,
                params.alpha, params.reward_success_both,
                params.reward_success_one, params.reward_success_none,
            )
            break
    return converged


def qlbp_decode(
    code: PolarCode,
    channel_llrs,
    t_max,
    qtable: QTable,
    params: AgentParams,
    mode="eval",
    rng=None,
    trace=None,
):
    """BP decoding with the correction factor chosen per PE by the agent.

    In train mode actions are epsilon-greedy and the table is updated in
    place: a transition is scored on the next visit of the same PE and
    direction (sign kept/flipped), or with the success reward at an
    early stop, where the episode ends with no future-value term. In
    eval mode selection is greedy and the table is left untouched.

    Returns (u_hat_info, iterations_used, converged, qtable).
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    train = mode == "train"
    if train and rng is None:
        raise ValueError("train mode requires a random generator")
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if qtable.q.shape != (STATE_COUNT, len(qtable.actions)):
        raise ValueError("Q-table shape does not match its action set")

    grid = init_grid(code, channel_llrs)
    if train:
        converged = _qlbp_train(code, grid, t_max, qtable, params, rng, trace)
    else:
        converged = _qlbp_eval(code, grid, t_max, qtable, trace)
    u_hat, _ = hard_decide(grid)
    return u_hat[code.info_set], grid.t, converged, qtable


def save_qtable(qtable: QTable, path):
    """Text dump: 'num_states num_actions', the action values, then one
    'state action q visits' line per cell, full round-trip precision."""
    n_actions = len(qtable.actions)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{STATE_COUNT} {n_actions}\n")
        fh.write(" ".join(repr(float(v)) for v in qtable.actions) + "\n")
        for s in range(STATE_COUNT):
            for a in range(n_actions):
                fh.write(
                    f"{s} {a} {float(qtable.q[s, a])!r} {int(qtable.visit_counts[s, a])}\n"
                )


def load_qtable(path) -> QTable:
    """Read a table written by save_qtable, validating shape and indices."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        n_states, n_actions = int(header[0]), int(header[1])
        if n_states != STATE_COUNT:
            raise ValueError(f"{path}: expected {STATE_COUNT} states, file has {n_states}")
        actions = tuple(float(tok) for tok in fh.readline().split())
        if len(actions) != n_actions:
            raise ValueError(
                f"{path}: header says {n_actions} actions, {len(actions)} values found"
            )
        q = np.zeros((n_states, n_actions))
        visits = np.zeros((n_states, n_actions), dtype=np.int64)
        filled = np.zeros((n_states, n_actions), dtype=bool)
        for line in fh:
            toks = line.split()
            if len(toks) != 4:
                raise ValueError(f"{path}: malformed row {line!r}")
            s, a = int(toks[0]), int(toks[1])
            if not (0 <= s < n_states and 0 <= a < n_actions):
                raise ValueError(f"{path}: index ({s}, {a}) out of range")
            q[s, a] = float(toks[2])
            visits[s, a] = int(toks[3])
            filled[s, a] = True
    if not filled.all():
        raise ValueError(f"{path}: missing rows for some (state, action) pairs")
    return QTable(ActionSet(actions), q, visits)


def check_action_compatibility(qtable: QTable, action_set: ActionSet):
    """Reject a loaded table whose action grid differs from the config's."""
    if len(qtable.actions) != len(action_set) or not np.array_equal(
        qtable.actions, np.asarray(action_set.values)
    ):
        raise ValueError(
            "Q-table action set does not match the configured one: "
            f"{list(qtable.actions)} vs {list(action_set.values)}"
        )
