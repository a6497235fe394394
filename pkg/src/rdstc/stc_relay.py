"""Amplify-and-forward relaying with randomized distributed space-time coding.

The relay chain for one symbol vector `s` is

    s~_k = g (F_k s + n_k)                      amplify
    M_k  = encode(s~_k)                         N x T space-time block
    Y    = sum_k G_k R_k M_k + N_RD             randomize, relay to destination
    y    = front_end(Y)                         TN vector

The front end conjugates the slots in which the code carries conjugated
symbols, which makes `y` linear in `s`. `EquivalentChannel` is that linear
model: `r = D s + (noise)`, with the direct link `H s + n_SD` stacked on top
when it is enabled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import get_logger
from .channel import ChannelSet, LinkStreams, NoiseModel
from .errors import DegenerateCodeError, InputError, UnsupportedConfigurationError
from .numerics import ComplexMat, adjoint, as_complex, matmul, trace

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SpaceTimeCode:
    """A linear dispersion code in which every slot is either linear or
    conjugate-linear in the symbols.

    Column `t` of the code block is `X_t s`, or `conj(X_t s)` for the slots
    flagged in `conjugated`.
    """

    name: str
    dispersion: ComplexMat
    conjugated: tuple[bool, ...]

    def __post_init__(self) -> None:
        dispersion = as_complex(self.dispersion).copy()
        dispersion.flags.writeable = False
        assert dispersion.ndim == 3 and dispersion.shape[1] == dispersion.shape[2]
        assert len(self.conjugated) == dispersion.shape[0]
        object.__setattr__(self, "dispersion", dispersion)

    @property
    def n(self) -> int:
        return self.dispersion.shape[1]

    @property
    def t(self) -> int:
        return self.dispersion.shape[0]

    def encode(self, s: ComplexMat) -> ComplexMat:
        """(N,) -> (N, T) block, or (N, B) -> (N, T, B) for a batch."""
        s = as_complex(s)
        if s.shape[0] != self.n:
            raise InputError(f"{self.name} encodes {self.n} symbols, got {s.shape[0]}")

        block = np.einsum("tij,j...->it...", self.dispersion, s)
        for t, conj in enumerate(self.conjugated):
            if conj:
                block[:, t] = block[:, t].conj()
        return block


ALAMOUTI = SpaceTimeCode(
    name="alamouti",
    dispersion=np.array([[[1, 0], [0, 1]], [[0, -1], [1, 0]]]),
    conjugated=(False, True),
)

SUPPORTED_CODES: dict[tuple[int, int], SpaceTimeCode] = {(2, 2): ALAMOUTI}


def code_for(n: int, t: int = 2) -> SpaceTimeCode:
    try:
        return SUPPORTED_CODES[(n, t)]
    except KeyError:
        raise UnsupportedConfigurationError(
            f"No space-time code for N={n}, T={t}; supported: {list(SUPPORTED_CODES)}"
        )


def alamouti_encode(s) -> ComplexMat:
    s = as_complex(s)
    if s.shape != (2,):
        raise InputError(f"Alamouti encodes exactly 2 symbols, got shape {s.shape}")
    return ALAMOUTI.encode(s)


def front_end(y: ComplexMat, structure: SpaceTimeCode = ALAMOUTI) -> ComplexMat:
    """Destination slot processing: (N, T[, B]) received block -> (TN[, B]).

    Slots are stacked in time order, antennas within a slot.
    """
    y = as_complex(y).copy()
    for t, conj in enumerate(structure.conjugated):
        if conj:
            y[:, t] = y[:, t].conj()
    return np.swapaxes(y, 0, 1).reshape((structure.t * structure.n,) + y.shape[2:])


def draw_randomized_matrix(n: int, rng: np.random.Generator) -> ComplexMat:
    if n < 1:
        raise InputError(f"Randomized matrix needs N >= 1, got {n}")
    return np.exp(1j * rng.uniform(0, 2 * np.pi, (n, n)))


def apply_randomization(r: ComplexMat, m: ComplexMat) -> ComplexMat:
    """R M for a code block (N, T) or a batch of blocks (N, T, B)."""
    r, m = as_complex(r), as_complex(m)
    if m.ndim == 2:
        return matmul(r, m)
    if r.ndim != 2 or r.shape[1] != m.shape[0]:
        raise InputError(f"Cannot randomize a {m.shape} block with a {r.shape} matrix")
    return np.einsum("ij,j...->i...", r, m)


@dataclass(frozen=True)
class AmplifyGain:
    """Fixed-gain AF: every relay applies A_k = g I."""

    g: float
    n_r: int = 1

    def __post_init__(self) -> None:
        if not self.g > 0:
            raise InputError(f"Amplifier gain must be positive, got {self.g}")

    @classmethod
    def fixed(
        cls,
        n: int,
        noise: NoiseModel,
        *,
        n_r: int = 1,
        p_relay: float = 1.0,
        sigma_s2: float = 1.0,
    ) -> AmplifyGain:
        """Gain that brings the average per-antenna relay input power to
        `p_relay` over unit-variance fading."""
        return cls(float(np.sqrt(p_relay / (n * sigma_s2 + noise.sigma2))), n_r)

    def matrix(self, k: int, n: int) -> ComplexMat:
        if not 0 <= k < self.n_r:
            raise InputError(f"Relay index {k} out of range for {self.n_r} relays")
        return self.g * np.eye(n, dtype=np.complex128)


def amplify(r_sr, gain: AmplifyGain, relay_index: int) -> ComplexMat:
    r_sr = as_complex(r_sr)
    return matmul(gain.matrix(relay_index, r_sr.shape[0]), r_sr)


def default_budget(n: int, t: int) -> float:
    return float(n * t)


@dataclass(frozen=True, eq=False)
class RandomizedCode:
    """The randomized matrices of all relays and their power budget.

    Attributes:
        - r: one N x N matrix per relay, shape (n_r, N, N)
        - p_r: total relay power budget
        - structure: the space-time code the matrices are applied to
    """

    r: ComplexMat
    p_r: float
    structure: SpaceTimeCode = ALAMOUTI

    def __post_init__(self) -> None:
        r = as_complex(self.r).copy()
        if r.ndim == 2:
            r = r[np.newaxis]
        n = self.structure.n
        if r.ndim != 3 or r.shape[1:] != (n, n) or not len(r):
            raise InputError(f"Randomized code must be (n_r, {n}, {n}), got {r.shape}")
        if not self.p_r > 0:
            raise InputError(f"Relay power budget must be positive, got {self.p_r}")
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @property
    def n_r(self) -> int:
        return self.r.shape[0]

    @property
    def n(self) -> int:
        return self.r.shape[1]

    def slot_matrices(self, k: int) -> list[ComplexMat]:
        """R_k as seen by each slot after the destination front end."""
        return [self.r[k].conj() if c else self.r[k] for c in self.structure.conjugated]

    def equivalent_forms(self, k: int) -> list[ComplexMat]:
        """Per-symbol NT x NT equivalent randomized matrices of relay k.

        Every symbol sees the same block-diagonal replication of R_k over the
        slots, so the list holds N equal matrices.
        """
        block = scipy.linalg.block_diag(*self.slot_matrices(k))
        return [block] * self.n

    def equivalent_trace(self) -> float:
        total = 0.0
        for k in range(self.n_r):
            for form in self.equivalent_forms(k):
                total += trace(matmul(form, adjoint(form))).real
        return total

    def scaled(self, factor: float) -> RandomizedCode:
        return RandomizedCode(self.r * factor, self.p_r, self.structure)

    @classmethod
    def identity(
        cls, n_r: int, p_r: float, structure: SpaceTimeCode = ALAMOUTI
    ) -> RandomizedCode:
        eye = np.broadcast_to(np.eye(structure.n), (n_r, structure.n, structure.n))
        return normalize_code(cls(eye, p_r, structure))

    @classmethod
    def random(
        cls,
        n_r: int,
        p_r: float,
        rng: np.random.Generator,
        structure: SpaceTimeCode = ALAMOUTI,
    ) -> RandomizedCode:
        r = np.stack([draw_randomized_matrix(structure.n, rng) for _ in range(n_r)])
        return normalize_code(cls(r, p_r, structure))

    def __str__(self) -> str:
        trace = self.equivalent_trace()
        return f"RandomizedCode(n_r={self.n_r}, trace={trace:.6g}/{self.p_r:.6g})"


def normalize_code(code: RandomizedCode) -> RandomizedCode:
    """Scales every R_k by one factor so the equivalent trace equals P_R."""
    total = code.equivalent_trace()
    if not total > 0 or not np.isfinite(total):
        raise DegenerateCodeError(f"Cannot normalize a code with trace {total}")
    return code.scaled(np.sqrt(code.p_r / total))


@dataclass(frozen=True, eq=False)
class EquivalentChannel:
    """Linear model of one coherence block: `r = d s + noise`.

    Relay k contributes, in slot t, `g_eq[k, t] @ r_eq[k, t] @ u` where
    `u = c[k, t] @ s + c_noise[k, t] @ n_k` is what reaches the randomized
    matrix. Column j of `c[k, t]` is the part carried by symbol s_j.

    Attributes:
        - d: stacked per-symbol channel, shape (L, N), column j is d_j
        - h_eq: direct-link rows (the first N rows of d), or None
        - g_eq: relay to destination gains per slot, (n_r, T, N, N)
        - r_eq: randomized matrices per slot, (n_r, T, N, N)
        - c: amplified, encoded source to relay gains per slot, (n_r, T, N, N)
        - c_noise: the same map applied to relay noise, (n_r, T, N, N)
        - relay_noise_maps: how relay k's noise reaches r, (n_r, L, N)
    """

    d: ComplexMat
    h_eq: ComplexMat | None
    g_eq: ComplexMat
    r_eq: ComplexMat
    c: ComplexMat
    c_noise: ComplexMat
    relay_noise_maps: ComplexMat
    structure: SpaceTimeCode
    relay_link: bool = True

    @property
    def direct_link(self) -> bool:
        return self.h_eq is not None

    @property
    def length(self) -> int:
        return self.d.shape[0]

    @property
    def n(self) -> int:
        return self.d.shape[1]

    @property
    def n_r(self) -> int:
        return self.g_eq.shape[0]

    @property
    def relay_offset(self) -> int:
        """Row index of the first relay slot in r."""
        return self.n if self.direct_link else 0

    def slot_rows(self, t: int) -> slice:
        start = self.relay_offset + t * self.n
        return slice(start, start + self.n)

    def noise_covariance(self, noise: NoiseModel) -> ComplexMat:
        maps = self.relay_noise_maps
        amplified = np.einsum("kln,kmn->lm", maps, maps.conj())
        return noise.sigma2 * (np.eye(self.length) + amplified)

    def average_noise_power(self, noise: NoiseModel) -> float:
        """Mean per-entry noise power of the relay rows.

        This is sigma^2 (1 + ||R_eq G_eq A||_F^2 / (NT)); the exact covariance
        is generally not a scaled identity.
        """
        if not self.relay_link:
            return 0.0
        rows = slice(self.relay_offset, self.length)
        relay_part = self.relay_noise_maps[:, rows, :]
        spread = np.sum(np.abs(relay_part) ** 2) / relay_part.shape[1]
        return noise.sigma2 * (1 + spread)


def build_equivalent_channel(
    channels: ChannelSet,
    code: RandomizedCode,
    gain: AmplifyGain,
    direct_link: bool = True,
    *,
    relay_link: bool = True,
) -> EquivalentChannel:
    structure = code.structure
    if (structure.n, structure.t) not in SUPPORTED_CODES:
        raise UnsupportedConfigurationError(
            f"Unsupported code dimensions N={structure.n}, T={structure.t}"
        )
    if channels.n != structure.n or channels.n_r != code.n_r:
        raise UnsupportedConfigurationError(
            f"Code for {code.n_r} relays with N={structure.n} does not fit channels "
            f"with {channels.n_r} relays and N={channels.n}"
        )
    if not direct_link and not relay_link:
        raise InputError("At least one of the direct and relay links must be used")

    n, t, n_r = structure.n, structure.t, channels.n_r
    conj = np.array(structure.conjugated)[np.newaxis, :, np.newaxis, np.newaxis]

    g_eq = np.where(conj, channels.g.conj()[:, np.newaxis], channels.g[:, np.newaxis])
    r_eq = np.where(conj, code.r.conj()[:, np.newaxis], code.r[:, np.newaxis])
    c_noise = np.broadcast_to(gain.g * structure.dispersion, (n_r, t, n, n)).copy()
    c = np.einsum("ktij,kjl->ktil", c_noise, channels.f)

    # Per relay and slot, the matrix taking the input of R to the destination
    blocks = np.einsum("ktij,ktjl->ktil", g_eq, r_eq)

    rows = []
    noise_maps = []
    if direct_link:
        rows.append(channels.h)
        noise_maps.append(np.zeros((n_r, n, n), dtype=np.complex128))
    if relay_link:
        relay = np.einsum("ktij,ktjl->til", blocks, c).reshape(t * n, n)
        rows.append(relay)
        maps = np.einsum("ktij,ktjl->ktil", blocks, c_noise).reshape(n_r, t * n, n)
        noise_maps.append(maps)

    return EquivalentChannel(
        d=np.vstack(rows),
        h_eq=np.array(channels.h) if direct_link else None,
        g_eq=g_eq,
        r_eq=r_eq,
        c=c,
        c_noise=c_noise,
        relay_noise_maps=np.concatenate(noise_maps, axis=1),
        structure=structure,
        relay_link=relay_link,
    )


def relay_signal_chain(
    channels: ChannelSet,
    code: RandomizedCode,
    gain: AmplifyGain,
    s,
    n_sr: ComplexMat,
    n_sd: ComplexMat,
    n_rd: ComplexMat,
    direct_link: bool = True,
    *,
    relay_link: bool = True,
) -> ComplexMat:
    """The literal destination vector for given noise realizations.

    `s` is (N,) or a batch (N, B); the noise arrays carry the same trailing
    batch axis: `n_sr` (n_r, N[, B]), `n_sd` (N[, B]), `n_rd` (N, T[, B]).
    """
    s = as_complex(s)
    if s.shape[0] != channels.n:
        raise InputError(f"Expected {channels.n} symbols, got {s.shape[0]}")

    parts = []
    if direct_link:
        parts.append(np.einsum("ij,j...->i...", channels.h, s) + n_sd)
    if relay_link:
        y = as_complex(n_rd).copy()
        for k in range(channels.n_r):
            received = np.einsum("ij,j...->i...", channels.f[k], s) + n_sr[k]
            block = code.structure.encode(amplify(received, gain, k))
            sent = apply_randomization(code.r[k], block)
            y += np.einsum("ij,j...->i...", channels.g[k], sent)
        parts.append(front_end(y, code.structure))

    return np.concatenate(parts, axis=0)


def assemble_received_vector(
    channels: ChannelSet,
    code: RandomizedCode,
    gain: AmplifyGain,
    s,
    noise: NoiseModel,
    rng: np.random.Generator | LinkStreams,
    direct_link: bool = True,
    *,
    relay_link: bool = True,
) -> ComplexMat:
    streams = rng if isinstance(rng, LinkStreams) else LinkStreams.shared(rng)
    s = as_complex(s)
    batch = s.shape[1:]
    n, t = channels.n, code.structure.t

    n_sr = noise.draw(streams.sr, (channels.n_r, n) + batch) if relay_link else None
    n_sd = noise.draw(streams.sd, (n,) + batch) if direct_link else None
    n_rd = noise.draw(streams.rd, (n, t) + batch) if relay_link else None

    return relay_signal_chain(
        channels,
        code,
        gain,
        s,
        n_sr,  # type: ignore[arg-type]
        n_sd,  # type: ignore[arg-type]
        n_rd,  # type: ignore[arg-type]
        direct_link,
        relay_link=relay_link,
    )


class Link:
    """Transmission context of one coherence block.

    Holds the block's channels, gain and noise level together with the
    trial's per-hop random streams, so the adaptive receiver can ask for the
    same block to be sent again under an updated code.
    """

    def __init__(
        self,
        channels: ChannelSet,
        gain: AmplifyGain,
        noise: NoiseModel,
        streams: LinkStreams,
        *,
        direct_link: bool = True,
        relay_link: bool = True,
    ) -> None:
        if not direct_link and not relay_link:
            raise InputError("At least one of the direct and relay links must be used")
        self.channels = channels
        self.gain = gain
        self.noise = noise
        self.streams = streams
        self.direct_link = direct_link
        self.relay_link = relay_link

    @property
    def length(self) -> int:
        t = code_for(self.channels.n).t
        return self.channels.n * (int(self.direct_link) + t * int(self.relay_link))

    def equivalent(self, code: RandomizedCode) -> EquivalentChannel:
        return build_equivalent_channel(
            self.channels,
            code,
            self.gain,
            self.direct_link,
            relay_link=self.relay_link,
        )

    def transmit(self, code: RandomizedCode, symbols) -> ComplexMat:
        return assemble_received_vector(
            self.channels,
            code,
            self.gain,
            symbols,
            self.noise,
            self.streams,
            self.direct_link,
            relay_link=self.relay_link,
        )

    def __repr__(self) -> str:
        links = "+".join(
            name
            for name, used in (("direct", self.direct_link), ("relay", self.relay_link))
            if used
        )
        return f"Link({links}, n_r={self.channels.n_r}, sigma2={self.noise.sigma2:.4g})"
