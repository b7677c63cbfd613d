"""Closed-form performance predictions for segmented short-code transmission.

Contains the finite-blocklength normal-approximation bound for binary-input
AWGN, the binomial law for the number of erroneous segments in a sentence,
recovery-profile bookkeeping, and the resulting exact/approximate sentence
error rates.  Monte Carlo segment error probabilities come with Wilson score
intervals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import channel as _channel
from . import osd as _osd
from .gf2codes import LinearCode, encode

_LN2 = math.log(2.0)


def q_function(x: float) -> float:
    """Standard normal tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def biawgn_capacity_dispersion(snr_db: float, nodes: int = 96) -> tuple[float, float]:
    """Capacity (bits/use) and dispersion (nats^2) of binary-input AWGN with
    unit-energy antipodal signalling and SNR = 1/sigma^2.

    Evaluates the moments of the information density
        i(y) = ln 2 - ln(1 + exp(-2 y / sigma^2)),  y ~ N(1, sigma^2)
    by Gauss-Hermite quadrature (>= 64 nodes for the advertised accuracy).
    """
    if nodes < 64:
        raise ValueError("use at least 64 quadrature nodes")
    sigma2 = _channel.snr_db_to_sigma2(snr_db)
    t, w = np.polynomial.hermite.hermgauss(nodes)
    y = 1.0 + math.sqrt(2.0 * sigma2) * t
    dens = _LN2 - np.logaddexp(0.0, -2.0 * y / sigma2)
    w = w / math.sqrt(math.pi)
    c_nats = float(w @ dens)
    second = float(w @ (dens * dens))
    v_nats = max(second - c_nats * c_nats, 0.0)
    return c_nats / _LN2, v_nats


def na_bound(n: int, k: int, snr_db: float, nodes: int = 96) -> float:
    """Normal-approximation block error rate for an (n, k) code on
    binary-input AWGN, clamped to the open interval (0, 1)."""
    if not 0 < k <= n:
        raise ValueError("need 0 < k <= n")
    c_bits, v = biawgn_capacity_dispersion(snr_db, nodes)
    v = max(v, 1e-300)
    arg = (n * c_bits * _LN2 - k * _LN2 + 0.5 * math.log(n)) / math.sqrt(n * v)
    return float(min(max(q_function(arg), 1e-300), 1.0 - 1e-16))


def segment_error_pmf(q: int, pe: float) -> np.ndarray:
    """Distribution of the number of erroneous segments among q independent
    segments, each failing with probability pe."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if not 0.0 <= pe <= 1.0:
        raise ValueError("pe must be a probability")
    return np.array([math.comb(q, i) * pe**i * (1.0 - pe) ** (q - i)
                     for i in range(q + 1)])


@dataclass(frozen=True)
class RecoveryProfile:
    """Probability that an erroneous segment is recovered by the semantic
    stages, as a function of how many segments in the sentence are erroneous.

    ``rates[i]`` is the recovery probability when i+1 segments are erroneous;
    beyond the measured range the profile conservatively reports 0.
    """

    rates: tuple[float, ...]
    label: str = ""
    q: int | None = None

    def __post_init__(self):
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("recovery rates must be probabilities")

    def rate(self, q_err: int) -> float:
        if q_err < 1:
            raise ValueError("q_err must be >= 1")
        return self.rates[q_err - 1] if q_err <= len(self.rates) else 0.0

    @staticmethod
    def from_json(text: str) -> "RecoveryProfile":
        doc = json.loads(text)
        rates = tuple(float(doc["p_rec"][str(i)])
                      for i in range(1, len(doc["p_rec"]) + 1))
        return RecoveryProfile(rates, label=doc.get("code", ""),
                               q=doc.get("q"))

    def to_json(self) -> str:
        doc: dict = {"code": self.label}
        if self.q is not None:
            doc["q"] = self.q
        doc["p_rec"] = {str(i + 1): r for i, r in enumerate(self.rates)}
        return json.dumps(doc, indent=2)


def recovery_rate(q: int, pe: float, profile: RecoveryProfile) -> float:
    """Average per-segment recovery rate: the profile weighted by the law of
    the erroneous-segment count (the q_err = 0 term contributes nothing)."""
    pmf = segment_error_pmf(q, pe)
    return float(sum(profile.rate(qe) * pmf[qe] for qe in range(1, q + 1)))


def bler_exact(q: int, pe: float, profile: RecoveryProfile) -> float:
    """Sentence error rate when each of q_err erroneous segments must be
    recovered independently with probability profile.rate(q_err)."""
    pmf = segment_error_pmf(q, pe)
    ok = pmf[0] + sum(pmf[qe] * profile.rate(qe) ** qe for qe in range(1, q + 1))
    return float(1.0 - ok)


def bler_approx(q: int, pe: float, eta: float) -> float:
    """Sentence error rate under the simplification that every erroneous
    segment is recovered independently with the average rate eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be a probability")
    return float(1.0 - (1.0 - pe * (1.0 - eta)) ** q)


def fano_lower_bound(conditional_entropy_bits: float, k: int) -> float:
    """Fano-style lower bound on residual error probability for k-bit
    payloads given the end-to-end conditional entropy."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return max(0.0, (conditional_entropy_bits - 1.0) / k)


def wilson_interval(errors: int, trials: int, z: float = 1.959963984540054
                    ) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= errors <= trials:
        raise ValueError("errors out of range")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # At the boundaries the exact bound is 0 (or 1); don't let floating-point
    # cancellation leave ~1e-17 residue in reports.
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def estimate_pe(code: LinearCode, snr_db: float, osd_order: int, frames: int,
                rng: np.random.Generator) -> tuple[float, float, float]:
    """Monte Carlo segment error probability under OSD decoding.

    Returns (pe, ci_lo, ci_hi) with a 95% Wilson interval.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    errors = 0
    for _ in range(frames):
        info = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        cw = encode(code, info)
        obs = _channel.transmit_codeword(cw, snr_db, rng)
        res = _osd.decode(code, obs, osd_order)
        errors += int(not np.array_equal(res.codeword, cw))
    lo, hi = wilson_interval(errors, frames)
    return errors / frames, lo, hi
