"""Monte Carlo link simulation: frame generation, channel sweep, decoder
dispatch, Q-table training driver, and CSV output.

Every point restarts its random stream at seed + worker_index, so all
Eb/N0 points (and all decoders run with the same seed) see the same
noise realizations, and a single-point run reproduces the corresponding
sweep point exactly.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .baselines import sc_decode, scl_decode
from .bp import bp_decode
from .channel import add_noise, channel_llr, modulate, sigma_from_ebn0
from .enhanced import enhanced_bp_decode
from .polar import construct_code, place_info_bits, polar_transform
from .qlearn import (
    ActionSet,
    AgentParams,
    DEFAULT_ACTIONS,
    QTable,
    check_action_compatibility,
    load_qtable,
    qlbp_decode,
    save_qtable,
)

log = logging.getLogger("polarq")

DECODERS = ("sc", "scl", "bp", "ebp", "qlbp")

# Correction factor used for the 'ebp' decoder when none is given;
# picked by the packaged sweep experiment (see tests/test_acceptance.py
# and the README).
DEFAULT_EBP_BETA = 0.1

DEFAULT_LIST_SIZE = 4

# Absolute bound on trained Q-values; exceeding it indicates a runaway
# update loop rather than normal learning.
Q_RUNAWAY_BOUND = 200.0


@dataclass(frozen=True)
class SimConfig:
    """Full experiment description. None means 'use the decoder default'."""

    N: int = 256
    K: int = 128
    decoder: str = "bp"
    list_size: int | None = None
    t_max: int = 60
    beta: float | None = None
    qtable_path: str | None = None
    alpha: float = 0.1
    gamma: float = 0.6
    epsilon: float = 0.5
    train_frames: int = 0
    train_ebn0_db: float = 2.0
    ebn0_points: tuple = (1.0, 1.5, 2.0, 2.5, 3.0)
    max_frames: int = 10000
    min_frame_errors: int = 100
    seed: int = 1
    design_ebn0_db: float = 2.0
    workers: int = 1
    actions: tuple = DEFAULT_ACTIONS

    def normalized(self):
        """Validate and resolve per-decoder defaults; raises ValueError."""
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}, expected one of {DECODERS}")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if not self.ebn0_points:
            raise ValueError("ebn0_points must not be empty")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.list_size is not None and self.decoder != "scl":
            raise ValueError(f"list_size only applies to the scl decoder, not {self.decoder}")
        if self.beta is not None and self.decoder != "ebp":
            raise ValueError(f"beta only applies to the ebp decoder, not {self.decoder}")
        if self.qtable_path is not None and self.decoder != "qlbp":
            raise ValueError(f"qtable_path only applies to the qlbp decoder, not {self.decoder}")
        ActionSet(self.actions)  # validates the grid
        out = self
        if self.decoder == "scl" and self.list_size is None:
            out = replace(out, list_size=DEFAULT_LIST_SIZE)
        if self.decoder == "ebp" and self.beta is None:
            out = replace(out, beta=DEFAULT_EBP_BETA)
        return out

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string key=value pairs (config files, CLI layers)."""
        kwargs = {}
        typed = {f.name: f for f in fields(cls)}
        for key, raw in mapping.items():
            if key not in typed:
                raise ValueError(f"unknown config key {key!r}")
            if raw is None:
                continue
            if isinstance(raw, str):
                kwargs[key] = _parse_field(key, raw)
            else:
                kwargs[key] = raw
        return cls(**kwargs)


_INT_FIELDS = {"N", "K", "list_size", "t_max", "train_frames", "max_frames",
               "min_frame_errors", "seed", "workers"}
_FLOAT_FIELDS = {"beta", "alpha", "gamma", "epsilon", "train_ebn0_db", "design_ebn0_db"}
_FLOAT_TUPLE_FIELDS = {"ebn0_points", "actions"}


def _parse_field(key, raw):
    raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _FLOAT_TUPLE_FIELDS:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    return raw


def load_config_file(path):
    """Flat key=value text file; '#' starts a comment, blank lines skipped."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            mapping[key.strip()] = value.strip()
    return mapping


@dataclass(frozen=True)
class CurvePoint:
    """One measured (Eb/N0, BER, FER) record."""

    ebn0_db: float
    frames_run: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    avg_iterations: float
    wall_time_s: float


def _build_decoder(config, code, qtable):
    """Per-frame decode callable: llrs -> (info bits, iterations)."""
    dec = config.decoder
    if dec == "sc":
        return lambda llrs: (sc_decode(code, llrs), 1)
    if dec == "scl":
        ls = config.list_size
        return lambda llrs: (scl_decode(code, llrs, ls), 1)
    if dec == "bp":
        return lambda llrs: bp_decode(code, llrs, t_max=config.t_max)[:2]
    if dec == "ebp":
        return lambda llrs: enhanced_bp_decode(
            code, llrs, t_max=config.t_max, beta=config.beta
        )[:2]
    if dec == "qlbp":
        params = AgentParams(alpha=config.alpha, gamma=config.gamma, epsilon=config.epsilon)
        return lambda llrs: qlbp_decode(
            code, llrs, config.t_max, qtable, params, mode="eval"
        )[:2]
    raise ValueError(f"unknown decoder {dec!r}")


def _resolve_qtable(config, qtable):
    if config.decoder != "qlbp":
        return None
    if qtable is None:
        if config.qtable_path is None:
            raise ValueError("qlbp evaluation needs a trained Q-table (qtable_path)")
        qtable = load_qtable(config.qtable_path)
    check_action_compatibility(qtable, ActionSet(config.actions))
    return qtable


def run_frames(config, ebn0_db, worker_index, n_frames, errors_target, qtable=None):
    """Decode n_frames on the stream seed + worker_index; returns counts.

    Stops early once errors_target frame errors are seen (None or 0
    disables the early stop). The aggregate over workers is the sum of
    the per-worker counts.
    """
    code = construct_code(config.N, config.K, config.design_ebn0_db)
    decode = _build_decoder(config, code, qtable)
    rng = np.random.default_rng(config.seed + worker_index)
    # Rate-0 codes carry no information bits; noise still needs a finite
    # variance, so clamp the rate used for sigma.
    sigma = sigma_from_ebn0(ebn0_db, max(code.K, 1) / code.N)
    frames = bit_errors = frame_errors = 0
    iterations_total = 0
    for _ in range(n_frames):
        info = rng.integers(0, 2, size=code.K, dtype=np.int8)
        x = polar_transform(place_info_bits(code, info))
        y = add_noise(modulate(x), sigma, rng)
        u_hat, iters = decode(channel_llr(y, sigma))
        n_bad = int(np.count_nonzero(u_hat != info))
        frames += 1
        bit_errors += n_bad
        frame_errors += n_bad > 0
        iterations_total += iters
        if errors_target and frame_errors >= errors_target:
            break
    return {
        "frames": frames,
        "bit_errors": bit_errors,
        "frame_errors": frame_errors,
        "iterations": iterations_total,
    }


def _share(total, workers, index):
    base, extra = divmod(total, workers)
    return base + (1 if index < extra else 0)


def run_point(config, ebn0_db, qtable=None):
    """Monte Carlo estimate of one (decoder, Eb/N0) point."""
    config = config.normalized()
    qtable = _resolve_qtable(config, qtable)
    started = time.perf_counter()
    if config.workers == 1:
        counts = [run_frames(config, ebn0_db, 0, config.max_frames,
                             config.min_frame_errors, qtable)]
    else:
        per_worker_target = math.ceil(config.min_frame_errors / config.workers)
        jobs = [
            (config, ebn0_db, w, _share(config.max_frames, config.workers, w),
             per_worker_target, qtable)
            for w in range(config.workers)
            if _share(config.max_frames, config.workers, w) > 0
        ]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            counts = list(pool.map(_run_frames_star, jobs))
    frames = sum(c["frames"] for c in counts)
    bit_errors = sum(c["bit_errors"] for c in counts)
    frame_errors = sum(c["frame_errors"] for c in counts)
    iterations = sum(c["iterations"] for c in counts)
    assert frame_errors <= bit_errors or config.K == 0, \
        "every errored frame must contain at least one bit error"
    return CurvePoint(
        ebn0_db=float(ebn0_db),
        frames_run=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / (frames * config.K) if config.K else 0.0,
        fer=frame_errors / frames,
        avg_iterations=iterations / frames,
        wall_time_s=time.perf_counter() - started,
    )


def _run_frames_star(args):
    return run_frames(*args)


def run_sweep(config, qtable=None):
    """run_point across all configured Eb/N0 points."""
    config = config.normalized()
    qtable = _resolve_qtable(config, qtable)
    points = []
    for ebn0 in config.ebn0_points:
        point = run_point(config, ebn0, qtable)
        log.info(
            "%s N=%d K=%d %.2f dB: frames=%d ber=%.3e fer=%.3e",
            config.decoder, config.N, config.K, ebn0,
            point.frames_run, point.ber, point.fer,
        )
        points.append(point)
    return points


def train_qlbp_driver(config):
    """Sequential training run; saves the table and returns it.

    Returns (qtable, success_flags) where success_flags[f] records
    whether frame f hit the consistency early stop within t_max.
    """
    config = config.normalized()
    if config.decoder != "qlbp":
        raise ValueError("training requires decoder=qlbp")
    if config.train_frames < 1:
        raise ValueError("train_frames must be >= 1")
    code = construct_code(config.N, config.K, config.design_ebn0_db)
    params = AgentParams(alpha=config.alpha, gamma=config.gamma, epsilon=config.epsilon)
    qtable = QTable(ActionSet(config.actions))
    rng = np.random.default_rng(config.seed)
    sigma = sigma_from_ebn0(config.train_ebn0_db, max(code.K, 1) / code.N)
    success = np.zeros(config.train_frames, dtype=bool)
    for f in range(config.train_frames):
        info = rng.integers(0, 2, size=code.K, dtype=np.int8)
        x = polar_transform(place_info_bits(code, info))
        y = add_noise(modulate(x), sigma, rng)
        _, _, converged, _ = qlbp_decode(
            code, channel_llr(y, sigma), config.t_max, qtable, params,
            mode="train", rng=rng,
        )
        success[f] = converged
        if (f + 1) % 1000 == 0:
            peak = float(np.abs(qtable.q).max())
            if peak > Q_RUNAWAY_BOUND:
                raise RuntimeError(f"Q-values ran away: |Q| reached {peak:.1f}")
            log.info(
                "trained %d/%d frames, running success rate %.4f, max|Q| %.2f",
                f + 1, config.train_frames, success[: f + 1].mean(), peak,
            )
    if config.qtable_path:
        save_qtable(qtable, config.qtable_path)
    return qtable, success


_CSV_COLUMNS = ("decoder", "N", "K", "ebn0_db", "frames", "bit_errors",
                "frame_errors", "ber", "fer", "avg_iterations")


def _config_echo(config):
    items = []
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        items.append((f.name, value))
    return items


def emit_csv(points, path, config):
    """Results CSV with the full effective config echoed as comments.

    Indices and numeric fields are written with full round-trip
    precision; no timestamps, so identical runs produce identical bytes.
    """
    config = config.normalized()
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("# polar link-simulation results; indices are 0-based\n")
            for key, value in _config_echo(config):
                fh.write(f"# {key}={value}\n")
            fh.write(",".join(_CSV_COLUMNS) + "\n")
            for p in points:
                row = (
                    config.decoder, config.N, config.K, repr(float(p.ebn0_db)),
                    p.frames_run, p.bit_errors, p.frame_errors,
                    repr(float(p.ber)), repr(float(p.fer)),
                    repr(float(p.avg_iterations)),
                )
                fh.write(",".join(str(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path):
    """Parse an emit_csv file; returns (config_echo dict, list of row dicts)."""
    echo = {}
    rows = []
    header = None
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    echo[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
                continue
            toks = line.split(",")
            row = dict(zip(header, toks))
            for key in ("N", "K", "frames", "bit_errors", "frame_errors"):
                row[key] = int(row[key])
            for key in ("ebn0_db", "ber", "fer", "avg_iterations"):
                row[key] = float(row[key])
            rows.append(row)
    return echo, rows
