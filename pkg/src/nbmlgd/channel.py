"""BPSK over AWGN / block Rayleigh fading, uniform quantization and hard
decisions for GF(2^r) symbols.

Frames are handled as ``(N, r)`` arrays: row ``j`` carries the ``r`` bits of
symbol ``j``, bit 0 first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .field import GF2m

CHANNEL_KINDS = ("awgn", "block_rayleigh")


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "awgn"
    ebn0_db: float = 4.0
    code_rate: float = 1.0
    omega: int = 6
    delta: float = 0.0625
    noiseless: bool = False

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}, expected one of {CHANNEL_KINDS}")
        if not 0 < self.code_rate <= 1:
            raise ValueError(f"code_rate must be in (0, 1], got {self.code_rate}")
        if self.omega < 1:
            raise ValueError(f"omega must be >= 1, got {self.omega}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def noise_var(self) -> float:
        if self.noiseless:
            return 0.0
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.ebn0_db / 10.0))

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.noise_var))

    def with_snr(self, ebn0_db: float) -> "ChannelConfig":
        return ChannelConfig(self.kind, float(ebn0_db), self.code_rate, self.omega, self.delta, self.noiseless)


@dataclass
class ReceivedFrame:
    y: np.ndarray
    q: np.ndarray
    z: np.ndarray
    fade: float | None = None


def modulate(x, field: GF2m) -> np.ndarray:
    """Map symbol bits to BPSK: 0 -> +1, 1 -> -1. Returns shape ``(N, r)``."""
    return 1.0 - 2.0 * field.bits(field.validate(x))


def quantize(y, omega: int = 6, delta: float = 0.0625) -> np.ndarray:
    """Mid-tread uniform quantizer, rounding half away from zero, saturating
    at ``-2**(omega-1)`` and ``2**(omega-1) - 1``."""
    v = np.asarray(y, dtype=np.float64) / delta
    levels = np.sign(v) * np.floor(np.abs(v) + 0.5)
    lo, hi = -(1 << (omega - 1)), (1 << (omega - 1)) - 1
    return np.clip(levels, lo, hi).astype(np.int64)


def hard_decide(y, field: GF2m) -> np.ndarray:
    """Per-bit sign decisions assembled into symbols; ``y == 0`` decides 0."""
    y = np.asarray(y, dtype=np.float64)
    return field.from_bits((y < 0).astype(np.int64))


def transmit(s, config: ChannelConfig, field: GF2m, rng: np.random.Generator, fade: float | None = None) -> ReceivedFrame:
    """Pass a modulated frame through the channel and quantize it.

    For block Rayleigh fading one gain (unit second moment) is drawn per
    frame, or taken from ``fade``; the receiver knows it and divides it out.
    """
    s = np.asarray(s, dtype=np.float64)
    noise = rng.standard_normal(s.shape) * config.sigma if config.sigma > 0 else np.zeros_like(s)
    g = None
    if config.kind == "block_rayleigh":
        g = float(rng.rayleigh(np.sqrt(0.5))) if fade is None else float(fade)
        y = (g * s + noise) / g
    else:
        y = s + noise
    return ReceivedFrame(y=y, q=quantize(y, config.omega, config.delta), z=hard_decide(y, field), fade=g)


class Quantizer(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping :func:`quantize` for pipeline use."""

    def __init__(self, omega: int = 6, delta: float = 0.0625):
        self.omega = omega
        self.delta = delta

    def fit(self, X, y=None):
        if self.omega < 1 or not self.delta > 0:
            raise ValueError("omega must be >= 1 and delta positive")
        return self

    def transform(self, X):
        return quantize(X, self.omega, self.delta)
