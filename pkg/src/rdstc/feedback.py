"""Limited feedback of the randomized code to the relays.

The destination quantizes every real and imaginary component of every R_k
with a uniform midrise quantizer, sends the labels over a binary symmetric
channel, and the relays rebuild and renormalize the code.

Packet layout: relay-major, then row-major over R_k, real part before the
imaginary part, b bits per component, most significant bit first.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import get_logger
from .channel import bsc_transmit
from .errors import InputError, MalformedPacketError
from .modem import BitBlock, as_bits
from .stc_relay import RandomizedCode, SpaceTimeCode, code_for, normalize_code

logger = get_logger(__name__)


class Labeling(str, Enum):
    NATURAL = "natural"
    GRAY = "gray"


def default_clip_range(p_r: float, n_r: int, n: int, t: int) -> float:
    """Twice the RMS real/imaginary component of a code that meets `p_r`."""
    squared_norm = p_r / (n * t)
    return 2 * float(np.sqrt(squared_norm / (2 * n_r * n * n)))


@dataclass(frozen=True)
class QuantizerSpec:
    bits_per_component: int
    clip_range: float
    labeling: Labeling = Labeling.NATURAL

    def __post_init__(self) -> None:
        if self.bits_per_component < 1:
            raise InputError(f"Need at least one bit, got {self.bits_per_component}")
        if not self.clip_range > 0:
            raise InputError(f"Clip range must be positive, got {self.clip_range}")
        object.__setattr__(self, "labeling", Labeling(self.labeling))

    @property
    def levels(self) -> int:
        return 2**self.bits_per_component

    @property
    def step(self) -> float:
        return 2 * self.clip_range / self.levels

    def index(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), -self.clip_range, self.clip_range)
        idx = np.floor((x + self.clip_range) / self.step).astype(np.int64)
        return np.clip(idx, 0, self.levels - 1)

    def level(self, idx) -> np.ndarray:
        return -self.clip_range + (np.asarray(idx) + 0.5) * self.step

    def encode_labels(self, idx: np.ndarray) -> np.ndarray:
        if self.labeling is Labeling.GRAY:
            return idx ^ (idx >> 1)
        return idx

    def decode_labels(self, labels: np.ndarray) -> np.ndarray:
        if self.labeling is Labeling.NATURAL:
            return labels
        idx = labels.copy()
        shift = labels >> 1
        while np.any(shift):
            idx ^= shift
            shift >>= 1
        return idx


@dataclass(frozen=True, eq=False)
class FeedbackPacket:
    bits: BitBlock
    spec: QuantizerSpec

    def __len__(self) -> int:
        return self.bits.size


def _shifts(spec: QuantizerSpec) -> np.ndarray:
    return np.arange(spec.bits_per_component - 1, -1, -1, dtype=np.int64)


def packet_length(n_r: int, n: int, spec: QuantizerSpec) -> int:
    return n_r * n * n * 2 * spec.bits_per_component


def quantize_code(code: RandomizedCode, spec: QuantizerSpec) -> FeedbackPacket:
    components = np.stack([code.r.real, code.r.imag], axis=-1).ravel()
    labels = spec.encode_labels(spec.index(components))
    bits = (labels[:, np.newaxis] >> _shifts(spec)) & 1
    return FeedbackPacket(bits.astype(np.uint8).ravel(), spec)


def reconstruct_levels(packet: FeedbackPacket, n_r: int, n: int) -> np.ndarray:
    """The relay matrices exactly as quantized, before renormalization."""
    spec = packet.spec
    expected = packet_length(n_r, n, spec)
    bits = as_bits(packet.bits)
    if bits.size != expected:
        raise MalformedPacketError(
            f"Feedback packet has {bits.size} bits, expected {expected} "
            f"for {n_r} relays with N={n} and b={spec.bits_per_component}"
        )

    labels = bits.reshape(-1, spec.bits_per_component).astype(np.int64) @ (
        1 << _shifts(spec)
    )
    components = spec.level(spec.decode_labels(labels)).reshape(n_r, n, n, 2)
    return components[..., 0] + 1j * components[..., 1]


def dequantize_code(
    packet: FeedbackPacket,
    n_r: int,
    n: int,
    p_r: float,
    structure: SpaceTimeCode | None = None,
) -> RandomizedCode:
    structure = structure or code_for(n)
    levels = reconstruct_levels(packet, n_r, n)
    return normalize_code(RandomizedCode(levels, p_r, structure))


def feedback_roundtrip(
    code: RandomizedCode, spec: QuantizerSpec, p: float, rng: np.random.Generator
) -> RandomizedCode:
    """The code the relays apply after quantization and a noisy feedback hop."""
    packet = quantize_code(code, spec)
    received = FeedbackPacket(bsc_transmit(packet.bits, p, rng), spec)
    flipped = int(np.count_nonzero(received.bits != packet.bits))
    if flipped:
        logger.debug("%d of %d feedback bits flipped", flipped, len(packet))
    return dequantize_code(received, code.n_r, code.n, code.p_r, code.structure)
