"""Command-line interface: construct, decode, train, simulate."""

import argparse
import logging
import sys

import numpy as np

from .baselines import sc_decode, scl_decode
from .bp import bp_decode
from .channel import add_noise, channel_llr, modulate, sigma_from_ebn0
from .enhanced import enhanced_bp_decode
from .polar import construct_code, place_info_bits, polar_transform, save_frozen_set
from .qlearn import AgentParams, load_qtable, qlbp_decode
from .simulator import (
    SimConfig,
    emit_csv,
    load_config_file,
    run_sweep,
    train_qlbp_driver,
)

log = logging.getLogger("polarq")


def _add_code_args(parser):
    parser.add_argument("--N", type=int, default=256, help="block length (power of two)")
    parser.add_argument("--K", type=int, default=128, help="information bit count")
    parser.add_argument("--design-ebn0", type=float, default=2.0,
                        help="construction design Eb/N0 in dB")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarq",
        description="Polar code decoders (SC/SCL/BP/reweighted BP/Q-learning BP) "
                    "and a Monte Carlo BER/FER link simulator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="emit the code's information set as a text file")
    _add_code_args(p)
    p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("decode", help="decode a single random noisy frame, verbosely")
    _add_code_args(p)
    p.add_argument("--decoder", default="bp", help="sc | scl | bp | ebp | qlbp")
    p.add_argument("--ebn0", type=float, default=2.0, help="channel Eb/N0 in dB")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--t-max", type=int, default=60)
    p.add_argument("--beta", type=float, default=None, help="ebp correction factor")
    p.add_argument("--list-size", type=int, default=None, help="scl list size")
    p.add_argument("--qtable", default=None, help="Q-table file for qlbp")
    p.add_argument("--dump-messages", default=None, metavar="PATH",
                   help="write per-iteration L/R messages as CSV (BP-family only)")

    p = sub.add_parser("train", help="train a QLBP Q-table")
    _add_code_args(p)
    p.add_argument("--frames", type=int, required=True, help="training frame count")
    p.add_argument("--ebn0", type=float, default=2.0, help="training Eb/N0 in dB")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--t-max", type=int, default=60)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True, help="Q-table output path")

    p = sub.add_parser("simulate", help="run a BER/FER sweep and emit CSV")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--N", type=int, default=None, help="block length (power of two)")
    p.add_argument("--K", type=int, default=None, help="information bit count")
    p.add_argument("--design-ebn0", type=float, default=None,
                   help="construction design Eb/N0 in dB")
    p.add_argument("--decoder", default=None, help="sc | scl | bp | ebp | qlbp")
    p.add_argument("--ebn0", default=None,
                   help="comma-separated Eb/N0 points in dB, e.g. 1.0,1.5,2.0")
    p.add_argument("--max-frames", type=int, default=None)
    p.add_argument("--min-frame-errors", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--list-size", type=int, default=None)
    p.add_argument("--qtable", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True, help="results CSV path")
    return parser


def _cmd_construct(args):
    code = construct_code(args.N, args.K, args.design_ebn0)
    if args.out:
        save_frozen_set(code, args.design_ebn0, args.out)
        print(f"wrote {args.out}")
    else:
        print(f"{code.N} {code.K} {args.design_ebn0!r}")
        print(" ".join(str(int(j)) for j in code.info_set))
    return 0


def _cmd_decode(args):
    code = construct_code(args.N, args.K, args.design_ebn0)
    sigma = sigma_from_ebn0(args.ebn0, max(code.K, 1) / code.N)
    rng = np.random.default_rng(args.seed)
    info = rng.integers(0, 2, size=code.K, dtype=np.int8)
    x = polar_transform(place_info_bits(code, info))
    llrs = channel_llr(add_noise(modulate(x), sigma, rng), sigma)

    trace = [] if args.dump_messages else None
    iterations, converged = 1, None
    if args.decoder == "sc":
        u_hat = sc_decode(code, llrs)
    elif args.decoder == "scl":
        u_hat = scl_decode(code, llrs, args.list_size or 4)
    elif args.decoder == "bp":
        u_hat, iterations, converged = bp_decode(code, llrs, t_max=args.t_max, trace=trace)
    elif args.decoder == "ebp":
        from .simulator import DEFAULT_EBP_BETA

        beta = DEFAULT_EBP_BETA if args.beta is None else args.beta
        u_hat, iterations, converged = enhanced_bp_decode(
            code, llrs, t_max=args.t_max, beta=beta, trace=trace
        )
    elif args.decoder == "qlbp":
        if not args.qtable:
            raise ValueError("qlbp decoding needs --qtable")
        qtable = load_qtable(args.qtable)
        u_hat, iterations, converged, _ = qlbp_decode(
            code, llrs, args.t_max, qtable, AgentParams(), mode="eval", trace=trace
        )
    else:
        raise ValueError(f"unknown decoder {args.decoder!r}")

    if trace is not None:
        if args.decoder in ("sc", "scl"):
            raise ValueError("--dump-messages applies to BP-family decoders only")
        _write_trace(args.dump_messages, trace)
        print(f"wrote message trace to {args.dump_messages}")

    n_bad = int(np.count_nonzero(u_hat != info))
    print(f"decoder={args.decoder} N={code.N} K={code.K} ebn0={args.ebn0} dB "
          f"sigma={sigma:.6f} seed={args.seed}")
    print(f"bit errors: {n_bad}/{code.K}  frame error: {n_bad > 0}")
    print(f"iterations: {iterations}  converged: {converged}")
    return 0


def _write_trace(path, trace):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("iteration,stage,node,L,R\n")
        for t, L, R in trace:
            stages, N = L.shape
            for s in range(stages):
                for j in range(N):
                    fh.write(f"{t},{s},{j},{L[s, j]!r},{R[s, j]!r}\n")


def _cmd_train(args):
    config = SimConfig(
        N=args.N, K=args.K, decoder="qlbp", t_max=args.t_max,
        alpha=args.alpha, gamma=args.gamma, epsilon=args.epsilon,
        train_frames=args.frames, train_ebn0_db=args.ebn0,
        seed=args.seed, design_ebn0_db=args.design_ebn0,
        qtable_path=args.out,
    )
    _, success = train_qlbp_driver(config)
    print(f"trained {args.frames} frames at {args.ebn0} dB; "
          f"overall success rate {success.mean():.4f}; wrote {args.out}")
    return 0


def _cmd_simulate(args):
    mapping = load_config_file(args.config) if args.config else {}
    overrides = {
        "N": args.N,
        "K": args.K,
        "design_ebn0_db": args.design_ebn0,
        "decoder": args.decoder,
        "ebn0_points": args.ebn0,
        "max_frames": args.max_frames,
        "min_frame_errors": args.min_frame_errors,
        "seed": args.seed,
        "t_max": args.t_max,
        "beta": args.beta,
        "list_size": args.list_size,
        "qtable_path": args.qtable,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            mapping[key] = value
    config = SimConfig.from_mapping(mapping).normalized()
    points = run_sweep(config)
    emit_csv(points, args.out, config)
    print(f"wrote {args.out}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    handlers = {
        "construct": _cmd_construct,
        "decode": _cmd_decode,
        "train": _cmd_train,
        "simulate": _cmd_simulate,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
