"""Character-level sequence-to-sequence model for sentence repair.

The model maps a corrupted (or partially masked) sentence to a clean one,
character by character.  The wire protocol carries plain text; everything
token-related lives here: the literal placeholder "<mask>" is folded into a
single input token, and generation emits printable-range characters only, at
a forced output length, so callers always get same-shape ASCII text back.
"""
from __future__ import annotations

import dataclasses
import math

import torch
import torch.nn as nn
import torch.nn.functional as F

MASK_TEXT = "<mask>"

PAD, BOS, EOS, MASK_ID = 0, 1, 2, 3
N_SPECIALS = 4
VOCAB_SIZE = N_SPECIALS + 128  # 7-bit character set


def encode_text(text: str) -> list[int]:
    """Text -> token ids; each literal placeholder becomes one MASK token.
    Characters outside the 7-bit range are mapped to '?'."""
    ids: list[int] = []
    pos = 0
    while pos < len(text):
        if text.startswith(MASK_TEXT, pos):
            ids.append(MASK_ID)
            pos += len(MASK_TEXT)
            continue
        c = ord(text[pos])
        ids.append(N_SPECIALS + (c if c < 128 else ord("?")))
        pos += 1
    return ids


def decode_ids(ids) -> str:
    return "".join(chr(int(i) - N_SPECIALS) for i in ids
                   if int(i) >= N_SPECIALS)


@dataclasses.dataclass
class ModelConfig:
    dim: int = 64
    heads: int = 2
    enc_layers: int = 2
    dec_layers: int = 2
    ff: int = 128
    dropout: float = 0.1
    max_len: int = 192


class CharSeq2Seq(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.tok = nn.Embedding(VOCAB_SIZE, cfg.dim, padding_idx=PAD)
        self.pos = nn.Embedding(cfg.max_len, cfg.dim)
        enc_layer = nn.TransformerEncoderLayer(
            cfg.dim, cfg.heads, cfg.ff, cfg.dropout, batch_first=True)
        dec_layer = nn.TransformerDecoderLayer(
            cfg.dim, cfg.heads, cfg.ff, cfg.dropout, batch_first=True)
        self.encoder = nn.TransformerEncoder(enc_layer, cfg.enc_layers)
        self.decoder = nn.TransformerDecoder(dec_layer, cfg.dec_layers)
        self.head = nn.Linear(cfg.dim, VOCAB_SIZE)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.size(1) > self.cfg.max_len:
            raise ValueError(
                f"sequence of {ids.size(1)} tokens exceeds max_len="
                f"{self.cfg.max_len}")
        positions = torch.arange(ids.size(1), device=ids.device)
        return self.tok(ids) * math.sqrt(self.cfg.dim) + self.pos(positions)

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        return self.encoder(self._embed(src),
                            src_key_padding_mask=(src == PAD))

    def decode_logits(self, tgt_in: torch.Tensor, memory: torch.Tensor,
                      src: torch.Tensor) -> torch.Tensor:
        t = tgt_in.size(1)
        causal = torch.triu(
            torch.ones(t, t, dtype=torch.bool, device=tgt_in.device), 1)
        out = self.decoder(
            self._embed(tgt_in), memory, tgt_mask=causal,
            tgt_key_padding_mask=(tgt_in == PAD),
            memory_key_padding_mask=(src == PAD))
        return self.head(out)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        return self.decode_logits(tgt_in, self.encode(src), src)


def save_checkpoint(path, model: CharSeq2Seq):
    torch.save({"config": dataclasses.asdict(model.cfg),
                "state": model.state_dict()}, path)


def load_checkpoint(path, device: str = "cpu") -> CharSeq2Seq:
    blob = torch.load(path, map_location=device, weights_only=True)
    model = CharSeq2Seq(ModelConfig(**blob["config"]))
    model.load_state_dict(blob["state"])
    model.to(device)
    model.eval()
    return model


def _split_widths(total: int, groups: int) -> list[int]:
    groups = max(1, min(groups, total))
    base, extra = divmod(total, groups)
    return [base + (g < extra) for g in range(groups)]


@torch.no_grad()
def generate(model: CharSeq2Seq, src_ids: list[int], out_len: int,
             num_candidates: int = 1, groups: int = 1,
             diversity: float = 0.0, device: str = "cpu") -> list[str]:
    """Diverse beam search with forced output length.

    Beams are partitioned into groups decoded in lockstep; at each step a
    group pays a penalty on characters already chosen by earlier groups,
    which spreads the candidates out.  Only character tokens may be emitted
    and exactly ``out_len`` of them are, so every returned string has length
    out_len and no specials leak into the text.
    """
    model.eval()
    src = torch.tensor([src_ids], dtype=torch.long, device=device)
    memory = model.encode(src)
    widths = _split_widths(num_candidates, groups)

    # per group: (sequences (w, t+1) starting with BOS, cumulative log-probs)
    states = [(torch.full((1, 1), BOS, dtype=torch.long, device=device),
               torch.zeros(1, device=device)) for _ in widths]
    for step in range(out_len):
        step_counts = torch.zeros(VOCAB_SIZE, device=device)
        new_states = []
        for width, (seqs, scores) in zip(widths, states):
            mem = memory.expand(seqs.size(0), -1, -1)
            logits = model.decode_logits(
                seqs, mem, src.expand(seqs.size(0), -1))[:, -1, :]
            logp = F.log_softmax(logits, dim=-1)
            logp[:, :N_SPECIALS] = float("-inf")
            if diversity > 0.0:
                logp = logp - diversity * step_counts
            total = scores[:, None] + logp
            flat = total.reshape(-1)
            top = torch.topk(flat, width)
            beam_idx = top.indices // VOCAB_SIZE
            tok_idx = top.indices % VOCAB_SIZE
            seqs = torch.cat([seqs[beam_idx], tok_idx[:, None]], dim=1)
            new_states.append((seqs, top.values))
            for t in tok_idx.tolist():
                step_counts[t] += 1.0
        states = new_states

    outputs: list[str] = []
    for seqs, scores in states:
        order = torch.argsort(scores, descending=True)
        for i in order.tolist():
            outputs.append(decode_ids(seqs[i, 1:].tolist()))
    return outputs[:num_candidates]
