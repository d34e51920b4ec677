"""BPSK modulation, AWGN corruption, and channel-LLR computation.

Noise variance follows the rate-adjusted convention for unit symbol
energy: sigma^2 = 1 / (2 * R * 10^(ebn0_db / 10)).
"""

from dataclasses import dataclass

import numpy as np


def sigma_from_ebn0(ebn0_db, rate):
    """Noise standard deviation for a given Eb/N0 (dB) and code rate."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return float(np.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))))


def ebn0_from_sigma(sigma, rate):
    """Inverse of sigma_from_ebn0."""
    if sigma <= 0 or rate <= 0:
        raise ValueError("sigma and rate must be positive")
    return float(10.0 * np.log10(1.0 / (2.0 * rate * sigma * sigma)))


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float
    sigma: float

    @classmethod
    def from_ebn0(cls, ebn0_db, rate):
        return cls(ebn0_db=ebn0_db, rate=rate, sigma=sigma_from_ebn0(ebn0_db, rate))


def modulate(x):
    """Map bits to BPSK symbols: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def add_noise(s, sigma, rng):
    """Add i.i.d. Gaussian noise with standard deviation sigma.

    The generator is caller-owned; the same seeded generator reproduces
    the same noise exactly.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s = np.asarray(s, dtype=np.float64)
    return s + rng.normal(0.0, sigma, size=s.shape)


def channel_llr(y, sigma):
    """Per-symbol LLR of a BPSK symbol in AWGN: 2*y / sigma^2."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / (sigma * sigma)
