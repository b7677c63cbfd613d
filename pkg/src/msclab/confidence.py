"""Success-probability scoring for re-encoded candidates.

Given a candidate codeword in the decoder's permuted domain, compare it with
the hard decision.  Let e be the induced MRB error pattern and d the full
difference pattern.  With per-position flip probabilities P(j) derived from
the reliabilities, the probability that the candidate's MRB hypothesis equals
the true channel error pattern is modelled as

    P(e) * L_par / (P(e) * L_par + (1 - P(e)) * 2^(k-n)),

where P(e) is the prior of the hypothesised MRB pattern and L_par is the
likelihood of the observed parity-position differences, i.e. the product of
P(j) where d_j = 1 and 1 - P(j) where d_j = 0 over the n-k parity positions.
The 2^(k-n) factor models parity differences as uniform when the hypothesis
is wrong.  Everything is evaluated in the log domain with each factor floored
at exp(-700); the result is always a finite float in [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from .osd import PermutedView

_LOG2 = log(2.0)


def _log1mexp(x: float) -> float:
    """log(1 - exp(x)) for x <= 0, stable at both ends."""
    if x >= 0.0:
        return float("-inf")
    if x > -_LOG2:
        return float(np.log(-np.expm1(x)))
    return float(np.log1p(-np.exp(x)))


def _log_flip_terms(alpha_t: np.ndarray, sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    t = 2.0 * alpha_t / sigma2
    log_p = np.maximum(-np.logaddexp(0.0, t), -700.0)
    log_q = np.maximum(-np.logaddexp(0.0, -t), -700.0)
    return log_p, log_q


def success_probability(view: PermutedView, candidate_perm: np.ndarray,
                        noise_variance: float | None = None) -> float:
    """Posterior-style score in [0, 1] for a permuted-domain candidate."""
    sigma2 = view.noise_variance if noise_variance is None else noise_variance
    cand = np.asarray(candidate_perm, dtype=np.uint8)
    n, k = view.code.n, view.code.k
    if cand.shape != (n,):
        raise ValueError(f"candidate must have length {n}")
    d = cand ^ view.r_t
    log_p, log_q = _log_flip_terms(view.alpha_t, sigma2)

    log_pe = float(np.where(d[:k] == 1, log_p[:k], log_q[:k]).sum())
    log_par = float(np.where(d[k:] == 1, log_p[k:], log_q[k:]).sum())

    log_num = _log1mexp(log_pe) + (k - n) * _LOG2   # wrong-hypothesis mass
    log_den = log_pe + log_par                      # right-hypothesis mass
    diff = log_num - log_den
    if diff > 700.0:
        return 0.0
    if diff < -700.0:
        return 1.0
    return float(1.0 / (1.0 + np.exp(diff)))


@dataclass(frozen=True)
class SegmentVerdict:
    index: int
    score: float
    flagged: bool


def form_error_set(scores, threshold: float) -> list[int]:
    """Indices (0-based) whose score falls below the threshold, ascending."""
    s = np.asarray(scores, dtype=np.float64)
    return [int(i) for i in np.nonzero(s < threshold)[0]]


def rank_for_retransmission(scores, threshold: float, budget_segments: int) -> list[int]:
    """Pick the lowest-scoring segments below ``threshold``, at most
    ``budget_segments`` of them, worst first.  Ties go to the lower index."""
    if budget_segments < 0:
        raise ValueError("budget must be non-negative")
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(s, kind="stable")
    picked = [int(i) for i in order if s[i] < threshold]
    return picked[:budget_segments]
