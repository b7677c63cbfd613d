"""Ordered-statistics decoding.

The decoder sorts positions by reliability, brings the generator to
systematic form over the most reliable basis (MRB), then re-encodes the
hard-decided MRB bits under every test error pattern (TEP) up to a given
Hamming weight.  Candidates are ranked by weighted Hamming distance (WHD):
the sum of reliabilities at positions where a candidate disagrees with the
hard decision.  Order-m decoding evaluates all TEPs of weight <= m.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .channel import SoftObservation
from .gf2 import systematic_form
from .gf2codes import LinearCode, encode

_MAX_TEPS = 1 << 24


@dataclass(frozen=True)
class PermutedView:
    """Receiver-side view of one observation in the sorted, systematic domain.

    ``pi1`` sorts positions by descending reliability (stable); ``pi2`` is the
    column fix-up applied during Gaussian elimination so that the first k
    sorted columns form an identity.  ``perm`` is their composition: permuted
    vectors are ``v[perm]``.
    """

    code: LinearCode
    pi1: np.ndarray
    pi2: np.ndarray
    perm: np.ndarray
    g_sys: np.ndarray
    y_t: np.ndarray
    alpha_t: np.ndarray
    r_t: np.ndarray
    noise_variance: float

    def unpermute(self, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[self.perm] = v
        return out


@dataclass(frozen=True)
class DecodeResult:
    codeword: np.ndarray
    info: np.ndarray
    whd: float
    tep_weight: int
    teps_evaluated: int


def prepare(code: LinearCode, obs: SoftObservation) -> PermutedView:
    """Sort by reliability and compute the systematic generator once; the
    view can be shared by any number of re-encoding passes on the same
    observation."""
    if len(obs) != code.n:
        raise ValueError(f"observation length {len(obs)} != n={code.n}")
    alpha = obs.reliabilities
    pi1 = np.argsort(-alpha, kind="stable")
    g_sys, pi2 = systematic_form(code.generator[:, pi1])
    perm = pi1[pi2]
    return PermutedView(
        code=code,
        pi1=pi1,
        pi2=pi2,
        perm=perm,
        g_sys=g_sys,
        y_t=obs.values[perm],
        alpha_t=alpha[perm],
        r_t=(obs.values[perm] < 0).astype(np.uint8),
        noise_variance=obs.noise_variance,
    )


def whd(codeword, obs: SoftObservation) -> float:
    """Weighted Hamming distance between a candidate codeword and the
    observation's hard decision."""
    c = np.asarray(codeword, dtype=np.uint8)
    if c.shape[0] != len(obs):
        raise ValueError("codeword/observation length mismatch")
    return float(obs.reliabilities[c != obs.hard_decision].sum())


@lru_cache(maxsize=32)
def tep_matrix(k: int, order: int) -> np.ndarray:
    """All test error patterns of weight <= order on k positions, ascending
    weight, and within each weight in lexicographic order of the support."""
    if order < 0 or order > k:
        raise ValueError(f"order must be in 0..{k}")
    total = sum(comb(k, w) for w in range(order + 1))
    if total > _MAX_TEPS:
        raise ValueError(f"{total} TEPs exceed the enumeration limit {_MAX_TEPS}")
    out = np.zeros((total, k), dtype=np.uint8)
    row = 1
    for w in range(1, order + 1):
        for support in combinations(range(k), w):
            out[row, list(support)] = 1
            row += 1
    return out


def evaluate_teps(view: PermutedView, teps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Re-encode the hard-decided MRB under each TEP.

    Returns (whds, candidates) where candidates[i] is the permuted-domain
    codeword for teps[i].
    """
    k = view.code.k
    cand_b = view.r_t[:k] ^ teps
    parity = (cand_b.astype(np.int64) @ view.g_sys[:, k:].astype(np.int64)) & 1
    cands = np.concatenate([cand_b, parity.astype(np.uint8)], axis=1)
    whds = (cands != view.r_t) @ view.alpha_t
    return whds, cands


def decode(code: LinearCode, obs: SoftObservation, order: int,
           view: PermutedView | None = None) -> DecodeResult:
    """Order-``order`` OSD decode.  Ties in WHD go to the earlier TEP, i.e.
    lower weight first, then lexicographic support order."""
    if view is None:
        view = prepare(code, obs)
    teps = tep_matrix(code.k, order)
    whds, cands = evaluate_teps(view, teps)
    best = int(np.argmin(whds))
    codeword = view.unpermute(cands[best])
    return DecodeResult(
        codeword=codeword,
        info=code.info_from_codeword(codeword),
        whd=float(whds[best]),
        tep_weight=int(teps[best].sum()),
        teps_evaluated=teps.shape[0],
    )


def reencode_candidate(code: LinearCode, view: PermutedView, info
                       ) -> tuple[np.ndarray, np.ndarray, float]:
    """Project an externally proposed information word into the decoder's
    permuted domain.

    Returns (permuted codeword, implied TEP over the MRB, WHD).  The implied
    TEP is the pattern that order-k OSD would have had to apply to reach this
    candidate.
    """
    c = encode(code, info)
    c_perm = c[view.perm]
    tep = c_perm[: code.k] ^ view.r_t[: code.k]
    w = float(view.alpha_t[c_perm != view.r_t].sum())
    return c_perm, tep, w
