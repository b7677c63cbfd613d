"""Text similarity metrics on the 0..100 scale.

bleu() is word-level BLEU with up to 4-gram precision, uniform weights, the
standard brevity penalty, and add-one smoothing applied to any zero match
count at n >= 2.  rouge_l() is the LCS-based F1.  Both treat whitespace as
the token separator and return 0 for an empty candidate or reference.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    cand, ref = candidate.split(), reference.split()
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cn, rn = _ngrams(cand, n), _ngrams(ref, n)
        total = max(len(cand) - n + 1, 0)
        matched = sum(min(c, rn[g]) for g, c in cn.items())
        if matched == 0:
            if n == 1:
                return 0.0
            matched, total = 1, total + 1
        log_sum += math.log(matched / total) / max_n
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return 100.0 * brevity * math.exp(log_sum)


def _lcs_len(a: list[str], b: list[str]) -> int:
    # One-row dynamic program.
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    cand, ref = candidate.split(), reference.split()
    if not cand or not ref:
        return 0.0
    lcs = _lcs_len(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 100.0 * 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ScoreRow:
    """Per-sentence, per-stage outcome produced by the experiment harness."""

    stage: str
    snr_db: float
    sentence_index: int
    error: bool
    bleu: float
    rouge_l: float
    time_ms: float

    def __post_init__(self):
        if not 0.0 <= self.bleu <= 100.0:
            raise ValueError(f"bleu {self.bleu} out of range")
        if not 0.0 <= self.rouge_l <= 100.0:
            raise ValueError(f"rouge_l {self.rouge_l} out of range")
        if self.time_ms < 0.0:
            raise ValueError("time_ms must be non-negative")
