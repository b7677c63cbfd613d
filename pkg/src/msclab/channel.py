"""BPSK over AWGN.

Bits map to symbols via x = 1 - 2c, the channel adds N(0, sigma^2) noise, and
SNR is 1/sigma^2 (so sigma^2 = 10^(-snr_db/10)).  A SoftObservation bundles
the noisy symbols with the noise variance; reliabilities are |y| and the
posterior probability that hard decision j is wrong is

    P(j) = 1 / (1 + exp(2 |y_j| / sigma^2)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def snr_db_to_sigma2(snr_db: float) -> float:
    return float(10.0 ** (-snr_db / 10.0))


def modulate(codeword) -> np.ndarray:
    """Antipodal mapping: bit 0 -> +1, bit 1 -> -1."""
    c = np.asarray(codeword, dtype=np.uint8)
    return 1.0 - 2.0 * c.astype(np.float64)


@dataclass(frozen=True)
class SoftObservation:
    """Received symbol vector and the channel's noise variance."""

    values: np.ndarray
    noise_variance: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def reliabilities(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def hard_decision(self) -> np.ndarray:
        return (self.values < 0).astype(np.uint8)

    @property
    def llr(self) -> np.ndarray:
        """Log-likelihood ratios log P(c=0|y)/P(c=1|y) = 2y/sigma^2."""
        return 2.0 * self.values / self.noise_variance


def transmit(symbols, snr_db: float, rng: np.random.Generator) -> SoftObservation:
    """Send BPSK symbols through AWGN at the given SNR."""
    x = np.asarray(symbols, dtype=np.float64)
    sigma2 = snr_db_to_sigma2(snr_db)
    y = x + rng.normal(0.0, np.sqrt(sigma2), size=x.shape)
    return SoftObservation(y, sigma2)


def transmit_codeword(codeword, snr_db: float, rng: np.random.Generator) -> SoftObservation:
    return transmit(modulate(codeword), snr_db, rng)


def flip_probabilities(obs: SoftObservation) -> np.ndarray:
    """P(j) for every position, vectorized."""
    return 1.0 / (1.0 + np.exp(2.0 * obs.reliabilities / obs.noise_variance))


def bit_flip_probability(obs: SoftObservation, j: int) -> float:
    """Posterior probability that the hard decision at position j (0-based)
    is wrong, given its reliability."""
    if not 0 <= j < len(obs):
        raise ValueError(f"position {j} out of range for length {len(obs)}")
    a = float(obs.reliabilities[j])
    return float(1.0 / (1.0 + np.exp(2.0 * a / obs.noise_variance)))


def log_flip_probabilities(obs: SoftObservation) -> tuple[np.ndarray, np.ndarray]:
    """(log P(j), log(1 - P(j))) computed stably, each term floored at -700."""
    t = 2.0 * obs.reliabilities / obs.noise_variance
    log_p = -np.logaddexp(0.0, t)
    log_q = -np.logaddexp(0.0, -t)
    return np.maximum(log_p, -700.0), np.maximum(log_q, -700.0)
