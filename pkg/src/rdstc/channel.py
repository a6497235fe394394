"""Quasi-static Rayleigh block fading, AWGN and the binary symmetric channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .modem import BitBlock, as_bits
from .numerics import ComplexMat, as_complex


def complex_gaussian(
    rng: np.random.Generator, shape: int | tuple[int, ...], variance: float = 1.0
) -> ComplexMat:
    """Circularly symmetric CN(0, variance) samples."""
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _frozen(a: ComplexMat) -> ComplexMat:
    a = as_complex(a).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One coherence block of channel gains.

    Attributes:
        - f: source to relay k, shape (n_r, N, N)
        - g: relay k to destination, shape (n_r, N, N)
        - h: source to destination, shape (N, N)
    """

    f: ComplexMat
    g: ComplexMat
    h: ComplexMat

    def __post_init__(self) -> None:
        f, g, h = _frozen(self.f), _frozen(self.g), _frozen(self.h)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InputError(f"Direct channel must be square, got {h.shape}")
        n = h.shape[0]
        if f.ndim != 3 or f.shape != g.shape or f.shape[1:] != (n, n) or not len(f):
            raise InputError(
                f"Relay channels must be (n_r, {n}, {n}), got {f.shape} and {g.shape}"
            )
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def n_r(self) -> int:
        return self.f.shape[0]


def draw_channel_set(n: int, n_r: int, rng: np.random.Generator) -> ChannelSet:
    if n < 1 or n_r < 1:
        raise InputError(f"Need at least one antenna and one relay, got {n}, {n_r}")

    return ChannelSet(
        f=complex_gaussian(rng, (n_r, n, n)),
        g=complex_gaussian(rng, (n_r, n, n)),
        h=complex_gaussian(rng, (n, n)),
    )


@dataclass(frozen=True)
class NoiseModel:
    """Noise variance per complex dimension; symbol power is fixed at 1."""

    sigma2: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise InputError(f"Noise variance must be finite and >= 0: {self.sigma2}")

    @classmethod
    def from_snr_db(cls, snr_db: float, sigma_s2: float = 1.0) -> NoiseModel:
        return cls(sigma_s2 * 10 ** (-snr_db / 10))

    @property
    def snr_db(self) -> float:
        return float("inf") if self.sigma2 == 0 else -10 * np.log10(self.sigma2)

    def draw(
        self, rng: np.random.Generator, shape: int | tuple[int, ...]
    ) -> ComplexMat:
        if self.sigma2 == 0:
            return np.zeros(shape, dtype=np.complex128)
        return complex_gaussian(rng, shape, self.sigma2)


def add_awgn(signal, noise: NoiseModel, rng: np.random.Generator) -> ComplexMat:
    signal = as_complex(signal)
    if noise.sigma2 == 0:
        return signal.copy()
    return signal + complex_gaussian(rng, signal.shape, noise.sigma2)


def bsc_transmit(bits, p: float, rng: np.random.Generator) -> BitBlock:
    if not 0 <= p <= 1:
        raise InputError(f"Crossover probability must be in [0, 1], got {p}")

    bits = as_bits(bits)
    flips = rng.random(bits.size) < p
    return bits ^ flips.astype(np.uint8)


def child_seeds(
    seed: np.random.SeedSequence, count: int
) -> list[np.random.SeedSequence]:
    """The first `count` children of `seed`, leaving `seed` untouched.

    `SeedSequence.spawn` advances the parent, so spawning twice from one seed
    would hand out different children.
    """
    return [
        np.random.SeedSequence(
            seed.entropy, spawn_key=seed.spawn_key + (i,), pool_size=seed.pool_size
        )
        for i in range(count)
    ]


@dataclass(frozen=True, eq=False)
class LinkStreams:
    """Independent random streams for the three hops of one trial.

    Attributes:
        - sr: source to relay noise
        - sd: source to destination noise
        - rd: relay to destination noise
    """

    sr: np.random.Generator
    sd: np.random.Generator
    rd: np.random.Generator

    @classmethod
    def from_seed(cls, seed: np.random.SeedSequence) -> LinkStreams:
        sr, sd, rd = (np.random.default_rng(s) for s in child_seeds(seed, 3))
        return cls(sr=sr, sd=sd, rd=rd)

    @classmethod
    def shared(cls, rng: np.random.Generator) -> LinkStreams:
        return cls(sr=rng, sd=rng, rd=rng)
