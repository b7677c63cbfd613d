"""Segment-selective incremental-redundancy HARQ.

A sentence's segments are first sent as the high-rate prefix of a low-rate
mother code.  After the receiver pipeline runs, segments whose confidence
stays below a threshold may receive their remaining mother-code positions,
subject to a retransmission bit budget; the selection policy is either
confidence-ranked or uniformly random among the flagged segments.  A
CRC-detection baseline and a BP/LDPC wrapper are provided for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import confidence
from .bp import LdpcCode, bp_decode
from .channel import SoftObservation, modulate, snr_db_to_sigma2, transmit
from .gf2 import nullspace
from .gf2codes import LinearCode, MotherCodeSchedule, crc_augment, encode, puncture
from .osd import decode
from .pipeline import (PipelineConfig, PipelineResult, SegmentChannel,
                       identify_errors, run_sec, run_sld)
from .semantic import CandidateProvider
from .textcodec import SentenceFrame, from_bits


class BudgetExhaustedError(RuntimeError):
    """A retransmission was requested beyond the session's bit budget."""


def throughput_gain(k: int, k_crc: int) -> float:
    """Relative payload gained by dropping a k_crc-bit CRC from k info bits."""
    if not 0 < k_crc < k:
        raise ValueError("need 0 < k_crc < k")
    return k_crc / (k - k_crc)


def crc_overhead_ratio(k: int, k_crc: int) -> float:
    """CRC share of the information bits."""
    if not 0 < k_crc <= k:
        raise ValueError("need 0 < k_crc <= k")
    return k_crc / k


@dataclass
class HarqSession:
    """Receiver/transmitter state for one sentence."""

    schedule: MotherCodeSchedule
    snr_db: float
    budget_bits: int
    max_rounds: int = 2
    codewords: list[np.ndarray] = field(default_factory=list)
    values: np.ndarray | None = None          # (q, n_mother) soft values
    received: np.ndarray | None = None        # (q, n_mother) bool
    rounds_seen: list[int] = field(default_factory=list)
    bits_spent: int = 0

    @property
    def q(self) -> int:
        return len(self.codewords)


def first_transmission(schedule: MotherCodeSchedule, frame: SentenceFrame,
                       snr_db: float, budget_bits: int,
                       rng: np.random.Generator, max_rounds: int = 2
                       ) -> tuple[HarqSession, list[SegmentChannel]]:
    """Send round 1 of every segment; returns the session plus per-segment
    decoding channels for the punctured round-1 code."""
    mother = schedule.mother
    if mother.k != frame.segment_len * 8:
        raise ValueError("segment length does not match the mother code's k")
    session = HarqSession(schedule, snr_db, budget_bits, max_rounds)
    n_m = mother.n
    session.values = np.zeros((frame.q, n_m))
    session.received = np.zeros((frame.q, n_m), dtype=bool)
    pos1 = schedule.round_positions[0]
    code1 = puncture(schedule, 1)
    channels = []
    for bits in frame.segment_bits:
        cw = encode(mother, bits)
        session.codewords.append(cw)
        obs = transmit(modulate(cw[pos1]), snr_db, rng)
        i = len(session.codewords) - 1
        session.values[i, pos1] = obs.values
        session.received[i, pos1] = True
        session.rounds_seen.append(1)
        channels.append(SegmentChannel(code1, obs))
    return session, channels


def select_retransmissions(scores, t_harq: float, budget_segments: int,
                           policy: str, rng: np.random.Generator) -> list[int]:
    """Choose flagged segments for the next round.

    'confidence' takes the lowest scores first; 'random' draws uniformly
    among all flagged segments.  At most ``budget_segments`` are returned.
    """
    if policy == "confidence":
        return confidence.rank_for_retransmission(scores, t_harq, budget_segments)
    if policy == "random":
        flagged = confidence.form_error_set(scores, t_harq)
        if len(flagged) <= budget_segments:
            return flagged
        picked = rng.choice(len(flagged), size=budget_segments, replace=False)
        return sorted(int(flagged[i]) for i in picked)
    raise ValueError(f"unknown policy {policy!r}")


def retransmit_and_combine(session: HarqSession, indices,
                           rng: np.random.Generator
                           ) -> dict[int, SegmentChannel]:
    """Send the next round for the given segments and rebuild their channels
    over all received positions (ascending mother position order)."""
    out: dict[int, SegmentChannel] = {}
    sigma2 = snr_db_to_sigma2(session.snr_db)
    for i in indices:
        rnd = session.rounds_seen[i] + 1
        if rnd > session.schedule.rounds or rnd > session.max_rounds:
            raise ValueError(f"segment {i} has no further rounds")
        pos = session.schedule.round_positions[rnd - 1]
        if session.bits_spent + pos.size > session.budget_bits:
            raise BudgetExhaustedError(
                f"retransmitting segment {i} needs {pos.size} bits, "
                f"{session.budget_bits - session.bits_spent} left")
        session.bits_spent += pos.size
        obs = transmit(modulate(session.codewords[i][pos]), session.snr_db, rng)
        session.values[i, pos] = obs.values
        session.received[i, pos] = True
        session.rounds_seen[i] = rnd
        got = np.nonzero(session.received[i])[0]
        code = puncture(session.schedule, rnd)
        out[i] = SegmentChannel(code, SoftObservation(session.values[i, got],
                                                      sigma2))
    return out


@dataclass
class SharqResult:
    round1: PipelineResult
    final_text: str
    final_scores: list[float]
    retransmitted: list[int]
    bits_spent: int
    rounds_used: int


def run_sharq(schedule: MotherCodeSchedule, frame: SentenceFrame,
              provider: CandidateProvider, cfg: PipelineConfig,
              snr_db: float, t_harq: float, budget_bits: int, policy: str,
              rng: np.random.Generator, max_rounds: int = 2) -> SharqResult:
    """Full selective-retransmission flow for one sentence.

    Round 1 runs the three-stage pipeline; segments whose post-selection
    scores stay below ``t_harq`` compete for retransmission under the bit
    budget.  Retransmitted segments are re-decoded on the lower-rate code and
    the stitched sentence passes through correction and list decode again.
    """
    from .pipeline import decode_sentence, run_msc

    session, channels = first_transmission(schedule, frame, snr_db,
                                           budget_bits, rng, max_rounds)
    res1 = decode_sentence(channels, provider, cfg)
    if max_rounds < 2:
        return SharqResult(res1, res1.sld_text, res1.sld_scores, [], 0, 1)
    step = schedule.round_positions[1].size
    budget_segments = budget_bits // step
    selected = select_retransmissions(res1.sld_scores, t_harq,
                                      budget_segments, policy, rng)
    if not selected:
        return SharqResult(res1, res1.sld_text, res1.sld_scores, [], 0, 1)
    updated = retransmit_and_combine(session, selected, rng)
    for i, ch in updated.items():
        channels[i] = ch
    l = frame.segment_len
    base = [res1.sld_text[i * l:(i + 1) * l] for i in range(frame.q)]
    for i in selected:
        res = decode(channels[i].code, channels[i].obs, cfg.osd_order,
                     view=channels[i].view)
        base[i] = from_bits(res.info)
    msc2 = "".join(base)
    sec2, _ = run_sec(provider, msc2, l)
    err2, scores2 = identify_errors(channels, sec2, cfg.t_sec)
    sld2, final_scores, _ = run_sld(channels, provider, sec2, err2, scores2,
                                    cfg.num_candidates)
    return SharqResult(res1, sld2, final_scores, list(selected),
                       session.bits_spent, 2)


@dataclass
class CrcHarqResult:
    final_text: str
    crc_failures_round1: list[int]
    retransmitted: list[int]
    undetected_round1: list[int]
    bits_spent: int


def run_crc_harq(schedule: MotherCodeSchedule, frame: SentenceFrame,
                 crc_spec: str, snr_db: float, budget_bits: int,
                 osd_order: int, rng: np.random.Generator) -> CrcHarqResult:
    """Detection-based baseline: each segment carries a CRC inside the k
    information bits; CRC failures request retransmission (ascending index)
    within the budget.  No semantic stages are involved.

    The frame's segment length must equal the CRC payload (k - width bits).
    """
    mother = schedule.mother
    append, check = crc_augment(mother.k, crc_spec)
    width = mother.k - frame.segment_len * 8
    if width <= 0:
        raise ValueError("segment text leaves no room for the CRC")
    session = HarqSession(schedule, snr_db, budget_bits, 2)
    n_m = mother.n
    session.values = np.zeros((frame.q, n_m))
    session.received = np.zeros((frame.q, n_m), dtype=bool)
    pos1 = schedule.round_positions[0]
    code1 = puncture(schedule, 1)
    channels = []
    truths = []
    for bits in frame.segment_bits:
        word = append(bits)
        truths.append(word)
        cw = encode(mother, word)
        session.codewords.append(cw)
        obs = transmit(modulate(cw[pos1]), snr_db, rng)
        i = len(session.codewords) - 1
        session.values[i, pos1] = obs.values
        session.received[i, pos1] = True
        session.rounds_seen.append(1)
        channels.append(SegmentChannel(code1, obs))
    decoded = [decode(code1, ch.obs, osd_order, view=ch.view).info
               for ch in channels]
    failures = [i for i, word in enumerate(decoded) if not check(word)]
    undetected = [i for i, word in enumerate(decoded)
                  if check(word) and not np.array_equal(word, truths[i])]
    step = schedule.round_positions[1].size
    selected = failures[: budget_bits // step]
    updated = retransmit_and_combine(session, selected, rng)
    for i, ch in updated.items():
        decoded[i] = decode(ch.code, ch.obs, osd_order, view=ch.view).info
    payload = frame.segment_len * 8
    text = "".join(from_bits(word[:payload]) for word in decoded)
    return CrcHarqResult(text, failures, list(selected), undetected,
                         session.bits_spent)


# ---------------------------------------------------------------------------
# Long-code baseline wrapper
# ---------------------------------------------------------------------------

@dataclass
class LcHarqResult:
    bits: np.ndarray
    converged: bool
    rounds_used: int


def run_lc_harq(ldpc: LdpcCode, round_positions: list[np.ndarray],
                payload: np.ndarray, snr_db: float,
                rng: np.random.Generator) -> LcHarqResult:
    """Incremental-redundancy wrapper around BP decoding of one long
    codeword.  Unreceived positions enter BP with zero LLR; each extra round
    reveals more of the codeword until BP converges or rounds run out.
    """
    gen = nullspace(ldpc.h)
    if gen.shape[0] != ldpc.k:
        raise ValueError("parity-check null space does not match k")
    code = LinearCode(ldpc.n, ldpc.k, gen, source="ldpc-nullspace")
    cw = encode(code, payload)
    sigma2 = snr_db_to_sigma2(snr_db)
    values = np.zeros(ldpc.n)
    for rnd, pos in enumerate(round_positions, start=1):
        obs = transmit(modulate(cw[pos]), snr_db, rng)
        values[pos] = obs.values
        result = bp_decode(ldpc, SoftObservation(values, sigma2))
        if result.converged:
            return LcHarqResult(result.codeword, True, rnd)
    return LcHarqResult(result.codeword, False, len(round_positions))
