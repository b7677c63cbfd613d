"""Command line front end.

Subcommands:
  run       execute an experiment config and write the summary CSV
  validate  check a config file and report problems
  analyze   print finite-blocklength bounds and sentence error laws
  bench     quick decoder throughput measurement
  corrupt   emit clean/noisy sentence pairs (training data for external
            candidate providers)
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np


def _cmd_run(args: argparse.Namespace) -> int:
    from .harness import run_to_files

    doc = json.loads(open(args.config).read())
    if args.lc_alist:
        doc["lc"] = {"alist": args.lc_alist}
    csv_path, sidecar = run_to_files(doc, workers=args.workers,
                                     output=args.output)
    print(f"wrote {csv_path} and {sidecar}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    from .harness import config_hash, resolve_config, validate_config

    doc = json.loads(open(args.config).read())
    problems = validate_config(doc)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return 1
    print(f"ok (config_hash {config_hash(resolve_config(doc))})")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    from .analysis import (RecoveryProfile, bler_approx, bler_exact,
                           estimate_pe, na_bound, recovery_rate)
    from .gf2codes import random_code

    profile = None
    if args.profile:
        profile = RecoveryProfile.from_json(open(args.profile).read())
    rng = np.random.default_rng(args.seed)
    code = random_code(args.n, args.k, args.seed)
    print("snr_db,na_bound,pe_hat,pe_lo,pe_hi,eta,bler_exact,bler_approx")
    for snr_db in args.snr_db:
        na = na_bound(args.n, args.k, snr_db)
        pe, lo, hi = estimate_pe(code, snr_db, args.osd_order,
                                 args.frames, rng)
        fields = [f"{snr_db:g}", f"{na:.6g}", f"{pe:.6g}", f"{lo:.6g}",
                  f"{hi:.6g}"]
        if profile is not None:
            eta = recovery_rate(args.q, pe, profile)
            fields += [f"{eta:.6g}",
                       f"{bler_exact(args.q, pe, profile):.6g}",
                       f"{bler_approx(args.q, pe, eta):.6g}"]
        else:
            fields += ["", "", ""]
        print(",".join(fields))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    from .channel import transmit_codeword
    from .gf2codes import encode, random_code
    from .osd import decode

    rng = np.random.default_rng(args.seed)
    code = random_code(args.n, args.k, args.seed)
    payloads = rng.integers(0, 2, size=(args.frames, args.k), dtype=np.uint8)
    observations = [transmit_codeword(encode(code, p), args.snr_db, rng)
                    for p in payloads]
    t0 = time.perf_counter()
    errors = 0
    for p, obs in zip(payloads, observations):
        res = decode(code, obs, args.osd_order)
        errors += not np.array_equal(res.info, p)
    dt = time.perf_counter() - t0
    print(f"({args.n},{args.k}) order {args.osd_order} @ {args.snr_db:g} dB: "
          f"{args.frames / dt:.1f} frames/s, "
          f"frame error rate {errors / args.frames:.4g}")
    return 0


def _cmd_corrupt(args: argparse.Namespace) -> int:
    from .gf2codes import random_code
    from .pipeline import make_channels, run_msc
    from .textcodec import load_corpus, reassemble, segment

    code = random_code(args.n, args.k, args.code_seed)
    sentences = load_corpus(args.corpus)
    rng = np.random.default_rng(args.seed)
    out = open(args.output, "w") if args.output else sys.stdout
    emitted = 0
    try:
        while emitted < args.count:
            original = sentences[emitted % len(sentences)]
            frame = segment(original, None, code.k // 8)
            channels = make_channels(code, frame, args.snr_db, rng)
            noisy_padded, _ = run_msc(channels, args.osd_order)
            l = frame.segment_len
            noisy = reassemble(frame, [noisy_padded[i * l:(i + 1) * l]
                                       for i in range(frame.q)])
            out.write(json.dumps({"noisy": noisy, "clean": original}) + "\n")
            emitted += 1
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msclab",
        description="segmented short-block text transmission experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--lc-alist", default=None,
                   help="add a long-code baseline from this alist file")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="validate an experiment config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze",
                       help="bounds and error laws for a code/profile")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--snr-db", type=float, nargs="+", required=True)
    p.add_argument("--osd-order", type=int, default=2)
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--profile", default=None,
                   help="recovery profile JSON for sentence error laws")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("bench", help="decoder throughput measurement")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--osd-order", type=int, default=2)
    p.add_argument("--snr-db", type=float, default=2.0)
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("corrupt",
                       help="clean/noisy sentence pairs over the channel")
    p.add_argument("--corpus", required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--snr-db", type=float, default=2.0)
    p.add_argument("--osd-order", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--code-seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_corrupt)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
