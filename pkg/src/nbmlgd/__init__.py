"""Reliability-based majority-logic decoding of non-binary LDPC codes."""

from .channel import ChannelConfig, Quantizer, hard_decide, modulate, quantize, transmit
from .code import (
    AlistError,
    ParityCheckMatrix,
    SystematicEncoder,
    generate_regular,
    load_alist,
    save_alist,
    syndrome,
    systematic_encode,
)
from .decoder import DecodeOutcome, MajorityLogicDecoder, channel_reliability, clip, extrinsic_sigma
from .field import GF2m
from .metrics import OpCounter, OpCounts, classify_failure, predict

__version__ = "0.1.0"

__all__ = [
    "AlistError",
    "ChannelConfig",
    "DecodeOutcome",
    "GF2m",
    "MajorityLogicDecoder",
    "OpCounter",
    "OpCounts",
    "ParityCheckMatrix",
    "Quantizer",
    "SystematicEncoder",
    "channel_reliability",
    "classify_failure",
    "clip",
    "extrinsic_sigma",
    "generate_regular",
    "hard_decide",
    "load_alist",
    "modulate",
    "predict",
    "quantize",
    "save_alist",
    "syndrome",
    "systematic_encode",
    "transmit",
]
