"""NDJSON stdio server exposing the repair model as a candidate provider.

One JSON object per line on stdin, one response per line on stdout:

    request:  {"id": int, "mode": "correct"|"fill", "text": str,
               "masked_indices": [int], "segment_len": int,
               "num_candidates": int}
    response: {"id": int, "outputs": [str, ...], "error": str|null}

The first line written is the handshake {"ready": true, "provider": ...}.
A malformed request line gets an error response with id null; any
per-request failure is reported in the error field and the process stays
alive.  Diagnostics go to stderr only — stdout carries protocol lines
exclusively.
"""
from __future__ import annotations

import argparse
import json
import sys

import torch

from .model import MASK_TEXT, encode_text, generate, load_checkpoint

PROVIDER_NAME = "lm_bridge"


def expected_length(text: str, segment_len: int) -> int:
    holes = text.count(MASK_TEXT)
    return len(text) - holes * len(MASK_TEXT) + holes * segment_len


def _normalize(outputs: list[str], want_len: int) -> list[str]:
    """Exact length, 7-bit only, and never the literal placeholder."""
    fixed = []
    for out in outputs:
        out = "".join(c if ord(c) < 128 else "?" for c in out)
        out = out.replace(MASK_TEXT, " " * len(MASK_TEXT))
        out = out[:want_len].ljust(want_len)
        fixed.append(out)
    return fixed


class Bridge:
    def __init__(self, checkpoints: dict[str, str], num_candidates: int,
                 groups: int, diversity: float, device: str):
        loaded: dict[str, object] = {}
        self.models = {}
        for mode, path in checkpoints.items():
            if str(path) not in loaded:
                loaded[str(path)] = load_checkpoint(path, device)
            self.models[mode] = loaded[str(path)]
        self.num_candidates = num_candidates
        self.groups = groups
        self.diversity = diversity
        self.device = device

    def handle(self, request: dict) -> list[str]:
        mode = request["mode"]
        if mode not in self.models:
            raise ValueError(f"unsupported mode: {mode!r}")
        text = request["text"]
        want = expected_length(text, int(request["segment_len"]))
        src = encode_text(text)
        if mode == "correct":
            outputs = generate(self.models[mode], src, want,
                               num_candidates=1, device=self.device)
        else:
            v = int(request.get("num_candidates", self.num_candidates))
            if v < 1:
                raise ValueError("num_candidates must be >= 1")
            outputs = generate(self.models[mode], src, want,
                               num_candidates=v, groups=self.groups,
                               diversity=self.diversity, device=self.device)
        return _normalize(outputs, want)


def run_loop(bridge: Bridge, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(obj):
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    emit({"ready": True, "provider": PROVIDER_NAME})
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            emit({"id": None, "outputs": [], "error": f"bad json: {exc}"})
            continue
        rid = request.get("id") if isinstance(request, dict) else None
        try:
            outputs = bridge.handle(request)
            emit({"id": rid, "outputs": outputs, "error": None})
        except Exception as exc:  # keep serving after any request failure
            emit({"id": rid, "outputs": [], "error": str(exc)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-bridge-serve",
        description="serve a repair model over NDJSON stdio")
    parser.add_argument("--checkpoint", required=True,
                        help="model used for both modes unless overridden")
    parser.add_argument("--correct-checkpoint", default=None)
    parser.add_argument("--fill-checkpoint", default=None)
    parser.add_argument("--num-candidates", type=int, default=20)
    parser.add_argument("--groups", type=int, default=4)
    parser.add_argument("--diversity", type=float, default=0.8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--threads", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    torch.set_num_threads(args.threads)
    checkpoints = {
        "correct": args.correct_checkpoint or args.checkpoint,
        "fill": args.fill_checkpoint or args.checkpoint,
    }
    print(f"loading {sorted(set(checkpoints.values()))}", file=sys.stderr)
    bridge = Bridge(checkpoints, args.num_candidates, args.groups,
                    args.diversity, args.device)
    return run_loop(bridge)


if __name__ == "__main__":
    raise SystemExit(main())
