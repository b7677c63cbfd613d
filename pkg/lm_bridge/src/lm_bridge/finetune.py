"""Train the repair model on channel-corrupted sentence pairs.

Pairs come as JSONL lines {"noisy": ..., "clean": ...}, exactly what
`msclab corrupt` emits; pass --pairs to use an existing file or --corpus to
have this script shell out to msclab and generate them. Each pair is used
twice per epoch: once as plain noisy->clean repair, and once with a random
subset of the noisy sentence's segments replaced by the placeholder, which
teaches hole filling with the same weights.

Desk-scale by design: hundreds of pairs and a minute of CPU give a model
that speaks the protocol and mostly echoes plausible characters; quality
scales with --count/--epochs if you have the patience.
"""
from __future__ import annotations

import argparse
import json
import random
import subprocess
import sys
import time
from pathlib import Path

import torch
import torch.nn as nn

from .model import (BOS, EOS, MASK_TEXT, PAD, CharSeq2Seq, ModelConfig,
                    encode_text, save_checkpoint)


def generate_pairs(corpus: str, out_path: Path, count: int, snr_db: float,
                   seed: int, n: int = 32, k: int = 16) -> None:
    cmd = [sys.executable, "-m", "msclab.cli", "corrupt",
           "--corpus", corpus, "--count", str(count),
           "--snr-db", str(snr_db), "--seed", str(seed),
           "--n", str(n), "--k", str(k), "--output", str(out_path)]
    subprocess.run(cmd, check=True)


def load_pairs(path) -> list[tuple[str, str]]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            pairs.append((obj["noisy"], obj["clean"]))
    if not pairs:
        raise SystemExit(f"no pairs in {path}")
    return pairs


def mask_variant(noisy: str, segment_len: int, rng: random.Random) -> str:
    """Replace a random nonempty subset of segments by the placeholder."""
    q = max(1, len(noisy) // segment_len)
    holes = [i for i in range(q) if rng.random() < 0.3]
    if not holes:
        holes = [rng.randrange(q)]
    parts = []
    for i in range(q):
        seg = noisy[i * segment_len:(i + 1) * segment_len]
        parts.append(MASK_TEXT if i in set(holes) else seg)
    return "".join(parts)


def make_samples(pairs, segment_len: int, rng: random.Random
                 ) -> list[tuple[list[int], list[int]]]:
    samples = []
    for noisy, clean in pairs:
        tgt = encode_text(clean)
        samples.append((encode_text(noisy), tgt))
        samples.append((encode_text(mask_variant(noisy, segment_len, rng)),
                        tgt))
    return samples


def _pad_batch(seqs: list[list[int]], device) -> torch.Tensor:
    width = max(len(s) for s in seqs)
    out = torch.full((len(seqs), width), PAD, dtype=torch.long, device=device)
    for r, s in enumerate(seqs):
        out[r, :len(s)] = torch.tensor(s, dtype=torch.long)
    return out


def train(samples, cfg: ModelConfig, epochs: int, batch_size: int, lr: float,
          seed: int, device: str, log=print) -> tuple[CharSeq2Seq, float, float]:
    torch.manual_seed(seed)
    rng = random.Random(seed)
    model = CharSeq2Seq(cfg).to(device)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    first_loss = last_loss = None
    step = 0
    t0 = time.perf_counter()
    for epoch in range(epochs):
        order = list(range(len(samples)))
        rng.shuffle(order)
        for lo in range(0, len(order), batch_size):
            batch = [samples[i] for i in order[lo:lo + batch_size]]
            src = _pad_batch([s for s, _ in batch], device)
            tgt_in = _pad_batch([[BOS] + t for _, t in batch], device)
            tgt_out = _pad_batch([t + [EOS] for _, t in batch], device)
            logits = model(src, tgt_in)
            loss = loss_fn(logits.reshape(-1, logits.size(-1)),
                           tgt_out.reshape(-1))
            opt.zero_grad()
            loss.backward()
            opt.step()
            step += 1
            if first_loss is None:
                first_loss = loss.item()
            last_loss = loss.item()
            if step % 25 == 0:
                log(f"epoch {epoch} step {step} loss {loss.item():.4f}")
    dt = time.perf_counter() - t0
    log(f"{step} steps in {dt:.1f}s, loss {first_loss:.4f} -> {last_loss:.4f}")
    return model, first_loss, last_loss


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-bridge-finetune",
        description="train the repair model on corrupted sentence pairs")
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--pairs", help="JSONL file of {noisy, clean} pairs")
    src.add_argument("--corpus",
                     help="generate pairs from this corpus via msclab")
    parser.add_argument("--out", required=True, help="checkpoint path")
    parser.add_argument("--count", type=int, default=1000,
                        help="pairs to generate with --corpus")
    parser.add_argument("--snr-db", type=float, default=2.0)
    parser.add_argument("--segment-len", type=int, default=2)
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--heads", type=int, default=2)
    parser.add_argument("--enc-layers", type=int, default=2)
    parser.add_argument("--dec-layers", type=int, default=2)
    parser.add_argument("--ff", type=int, default=128)
    parser.add_argument("--max-len", type=int, default=192)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    pairs_path = args.pairs
    if pairs_path is None:
        pairs_path = Path(args.out).with_suffix(".pairs.jsonl")
        generate_pairs(args.corpus, pairs_path, args.count, args.snr_db,
                       args.seed)
    pairs = load_pairs(pairs_path)
    cfg = ModelConfig(dim=args.dim, heads=args.heads,
                      enc_layers=args.enc_layers, dec_layers=args.dec_layers,
                      ff=args.ff, max_len=args.max_len)
    samples = make_samples(pairs, args.segment_len, random.Random(args.seed))
    model, first, last = train(samples, cfg, args.epochs, args.batch,
                               args.lr, args.seed, args.device)
    save_checkpoint(args.out, model)
    print(f"saved {args.out} ({len(pairs)} pairs, "
          f"loss {first:.4f} -> {last:.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
