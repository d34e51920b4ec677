"""Polar code encoding/decoding and Monte Carlo link simulation.

Decoders: successive cancellation (SC), SC list (SCL), min-sum belief
propagation (BP), BP with inter-iteration LLR reweighting (EBP), and BP
with a tabular Q-learning agent choosing the reweighting factor per
processing element (QLBP).
"""

from .baselines import sc_decode, scl_decode
from .bp import INF_LLR, MessageGrid, PEIndex, bp_decode, g_op, hard_decide, init_grid
from .channel import ChannelParams, add_noise, channel_llr, modulate, sigma_from_ebn0
from .enhanced import WeightContext, compute_rho, enhanced_bp_decode
from .polar import (
    PolarCode,
    construct_code,
    encode,
    extract_info_bits,
    is_consistent,
    place_info_bits,
    polar_transform,
)
from .qlearn import (
    ActionSet,
    AgentParams,
    QTable,
    encode_state,
    load_qtable,
    q_update,
    qlbp_decode,
    save_qtable,
    select_action,
    step_reward,
    terminal_reward,
)
from .simulator import CurvePoint, SimConfig, emit_csv, run_point, run_sweep, train_qlbp_driver

__version__ = "0.1.0"

__all__ = [
    "ActionSet",
    "AgentParams",
    "ChannelParams",
    "CurvePoint",
    "INF_LLR",
    "MessageGrid",
    "PEIndex",
    "PolarCode",
    "QTable",
    "SimConfig",
    "WeightContext",
    "add_noise",
    "bp_decode",
    "channel_llr",
    "compute_rho",
    "construct_code",
    "emit_csv",
    "encode",
    "encode_state",
    "enhanced_bp_decode",
    "extract_info_bits",
    "g_op",
    "hard_decide",
    "init_grid",
    "is_consistent",
    "load_qtable",
    "modulate",
    "place_info_bits",
    "polar_transform",
    "q_update",
    "qlbp_decode",
    "run_point",
    "run_sweep",
    "save_qtable",
    "sc_decode",
    "scl_decode",
    "select_action",
    "sigma_from_ebn0",
    "step_reward",
    "terminal_reward",
    "train_qlbp_driver",
]
