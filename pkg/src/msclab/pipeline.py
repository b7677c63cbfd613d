"""Three-stage receiver for segmented sentences.

Stage 1 (transmission decode) runs OSD independently per segment.  Stage 2
(correction) hands the stitched sentence to a candidate provider.  Stage 3
(list decode) re-checks every corrected segment against its own channel
evidence, masks the unconvincing ones, asks the provider for whole-sentence
candidates, and picks per-segment replacements by weighted Hamming distance.

All texts handled here have the frame's padded length; callers strip padding
via textcodec.reassemble when reporting.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import confidence, semantic
from .channel import SoftObservation, transmit_codeword
from .gf2codes import LinearCode, encode
from .osd import DecodeResult, PermutedView, decode, prepare, reencode_candidate
from .semantic import CandidateProvider, CorrectionRequest, ProviderError
from .textcodec import SentenceFrame, chars_to_bits, from_bits


@dataclass
class SegmentChannel:
    """Per-segment decoding context: the code it was sent with, the soft
    observation, and the shared permuted view reused by every stage."""

    code: LinearCode
    obs: SoftObservation
    view: PermutedView = field(init=False)

    def __post_init__(self):
        self.view = prepare(self.code, self.obs)


@dataclass
class PipelineConfig:
    osd_order: int
    t_sec: float = 0.001
    num_candidates: int = 20


@dataclass
class PipelineResult:
    msc_text: str
    sec_text: str
    sld_text: str
    error_set: list[int]
    sec_scores: list[float]
    sld_scores: list[float]
    sec_fallback: bool
    extraction_misses: list[int]
    decode_results: list[DecodeResult]
    timings_ms: dict[str, float]

    def stage_text(self, stage: str) -> str:
        return {"msc": self.msc_text, "sec": self.sec_text,
                "sld": self.sld_text}[stage]


def make_channels(code: LinearCode, frame: SentenceFrame, snr_db: float,
                  rng: np.random.Generator) -> list[SegmentChannel]:
    """Encode and transmit every segment of a frame at the given SNR."""
    if code.k != frame.segment_len * 8:
        raise ValueError(
            f"segment length {frame.segment_len} chars needs k="
            f"{frame.segment_len * 8}, code has k={code.k}")
    out = []
    for bits in frame.segment_bits:
        cw = encode(code, bits)
        out.append(SegmentChannel(code, transmit_codeword(cw, snr_db, rng)))
    return out


def run_msc(channels: list[SegmentChannel], osd_order: int
            ) -> tuple[str, list[DecodeResult]]:
    """Stage 1: per-segment OSD; returns the stitched padded sentence."""
    results = [decode(ch.code, ch.obs, osd_order, view=ch.view)
               for ch in channels]
    text = "".join(from_bits(r.info) for r in results)
    return text, results


def run_sec(provider: CandidateProvider, msc_text: str, segment_len: int
            ) -> tuple[str, bool]:
    """Stage 2: whole-sentence correction.  Any provider failure (error,
    wrong length, unencodable output) falls back to the stage-1 text."""
    req = CorrectionRequest(mode="correct", text=msc_text, masked_indices=(),
                            segment_len=segment_len, num_candidates=1)
    try:
        fixed = provider.correct(req)
    except ProviderError:
        return msc_text, True
    if len(fixed) != len(msc_text) or any(ord(c) > 255 for c in fixed):
        return msc_text, True
    return fixed, False


def identify_errors(channels: list[SegmentChannel], sec_text: str,
                    t_sec: float) -> tuple[list[int], list[float]]:
    """Stage 3a: score each corrected segment against its channel evidence;
    segments scoring below t_sec form the error set."""
    l = channels[0].code.k // 8
    scores = []
    for i, ch in enumerate(channels):
        info = chars_to_bits(sec_text[i * l:(i + 1) * l])
        cand_perm, _, _ = reencode_candidate(ch.code, ch.view, info)
        scores.append(confidence.success_probability(ch.view, cand_perm))
    return confidence.form_error_set(scores, t_sec), scores


def run_sld(channels: list[SegmentChannel], provider: CandidateProvider,
            sec_text: str, error_set: list[int], sec_scores: list[float],
            num_candidates: int
            ) -> tuple[str, list[float], list[int]]:
    """Stage 3b: mask, fill, extract, and re-select flagged segments by WHD.

    Returns (sld_text, per-segment scores after selection, segments whose
    candidates were unusable).  Non-flagged segments keep their correction
    and its score.
    """
    l = channels[0].code.k // 8
    segments = [sec_text[i * l:(i + 1) * l] for i in range(len(channels))]
    scores = list(sec_scores)
    misses: list[int] = []
    if not error_set:
        return sec_text, scores, misses
    masked = semantic.mask_segments(sec_text, error_set, l)
    req = CorrectionRequest(mode="fill", text=masked,
                            masked_indices=tuple(error_set), segment_len=l,
                            num_candidates=num_candidates)
    try:
        sentences = provider.fill(req)
    except ProviderError:
        return sec_text, scores, list(error_set)
    carved = semantic.extract(sentences, masked, error_set, l,
                              provider=provider.name)
    for i in error_set:
        cand_set = carved.get(i)
        best_text, best_whd, best_perm = None, float("inf"), None
        if cand_set is not None:
            for text in cand_set.candidates:
                if any(ord(c) > 127 for c in text):
                    continue
                cand_perm, _, w = reencode_candidate(
                    channels[i].code, channels[i].view, chars_to_bits(text))
                if w < best_whd:
                    best_text, best_whd, best_perm = text, w, cand_perm
        if best_text is None:
            misses.append(i)
            continue
        segments[i] = best_text
        scores[i] = confidence.success_probability(channels[i].view, best_perm)
    return "".join(segments), scores, misses


def decode_sentence(channels: list[SegmentChannel],
                    provider: CandidateProvider,
                    cfg: PipelineConfig) -> PipelineResult:
    """Run all three stages over one sentence's segment channels."""
    t0 = time.perf_counter()
    msc_text, results = run_msc(channels, cfg.osd_order)
    t1 = time.perf_counter()
    sec_text, fallback = run_sec(provider, msc_text,
                                 channels[0].code.k // 8)
    t2 = time.perf_counter()
    error_set, sec_scores = identify_errors(channels, sec_text, cfg.t_sec)
    t3 = time.perf_counter()
    sld_text, sld_scores, misses = run_sld(
        channels, provider, sec_text, error_set, sec_scores,
        cfg.num_candidates)
    t4 = time.perf_counter()
    return PipelineResult(
        msc_text=msc_text,
        sec_text=sec_text,
        sld_text=sld_text,
        error_set=error_set,
        sec_scores=sec_scores,
        sld_scores=sld_scores,
        sec_fallback=fallback,
        extraction_misses=misses,
        decode_results=results,
        timings_ms={
            "msc": (t1 - t0) * 1e3,
            "sec": (t2 - t1) * 1e3,
            "identify": (t3 - t2) * 1e3,
            "sld": (t4 - t3) * 1e3,
            "total": (t4 - t0) * 1e3,
        },
    )
