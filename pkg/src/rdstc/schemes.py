"""Transmission schemes compared by the sweep.

Every scheme runs the same coherence block: draw the channels, train the
receive filters (and, depending on the scheme, the relay code) on pilots,
then detect a payload. They differ only in how the code is chosen and
whether the relays are used at all.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import get_logger
from .channel import LinkStreams, NoiseModel, child_seeds, draw_channel_set
from .config import Receiver, Scheme, SimConfig
from .feedback import QuantizerSpec, feedback_roundtrip
from .modem import BITS_PER_SYMBOL, count_bit_errors, demodulate, modulate
from .numerics import ComplexMat
from .receiver import (
    AdaptState,
    FilterBank,
    alrrmo_train,
    analytic_correlations,
    detect_symbols,
    joint_mmse_design,
    mmse_filters,
    track_decisions,
)
from .stc_relay import AmplifyGain, Link, RandomizedCode, code_for

logger = get_logger(__name__)

# Receiver state for the payload and the code the relays apply during it
Trained = tuple[AdaptState, RandomizedCode]


@dataclass(frozen=True, eq=False)
class TrialStreams:
    """Named random streams of one trial, all spawned from its seed."""

    channel: np.random.Generator
    code: np.random.Generator
    pilots: np.random.Generator
    payload: np.random.Generator
    feedback: np.random.Generator
    link: LinkStreams

    @classmethod
    def from_seed(cls, seed: np.random.SeedSequence) -> TrialStreams:
        channel, code, pilots, payload, feedback, link = child_seeds(seed, 6)
        return cls(
            channel=np.random.default_rng(channel),
            code=np.random.default_rng(code),
            pilots=np.random.default_rng(pilots),
            payload=np.random.default_rng(payload),
            feedback=np.random.default_rng(feedback),
            link=LinkStreams.from_seed(link),
        )


@dataclass(frozen=True)
class BlockResult:
    bits_sent: int
    bit_errors: int


def random_symbols(n: int, count: int, rng: np.random.Generator) -> tuple:
    """`count` QPSK vectors as an (N, count) array, with the bits behind them."""
    bits = rng.integers(0, 2, size=count * n * BITS_PER_SYMBOL, dtype=np.uint8)
    return bits, modulate(bits).reshape(count, n).T


class Transceiver(ABC):
    """One scheme's processing of a coherence block."""

    uses_relays = True

    def __init__(self, config: SimConfig, noise: NoiseModel) -> None:
        self.config = config
        self.noise = noise

    def make_link(self, streams: TrialStreams) -> Link:
        config = self.config
        channels = draw_channel_set(config.antennas, config.relays, streams.channel)
        gain = AmplifyGain.fixed(config.antennas, self.noise, n_r=config.relays)
        return Link(
            channels,
            gain,
            self.noise,
            streams.link,
            direct_link=config.direct_link,
            relay_link=self.uses_relays,
        )

    @abstractmethod
    def train(self, link: Link, streams: TrialStreams) -> Trained:
        raise NotImplementedError()

    def run_block(self, streams: TrialStreams) -> BlockResult:
        config = self.config
        link = self.make_link(streams)
        state, applied = self.train(link, streams)

        bits, symbols = random_symbols(config.antennas, config.payload, streams.payload)
        received = link.transmit(applied, symbols)
        if config.decision_directed:
            decisions = track_decisions(state, received)
        else:
            decisions = detect_symbols(state.filters, received)

        detected = demodulate(decisions.T.ravel())
        return BlockResult(bits.size, count_bit_errors(bits, detected))

    def _pilots(self, streams: TrialStreams) -> ComplexMat:
        config = self.config
        return random_symbols(config.antennas, config.pilots, streams.pilots)[1]

    def _fixed_code_state(
        self, link: Link, code: RandomizedCode, streams: TrialStreams
    ) -> AdaptState:
        """Receiver for a code that never changes: Wiener filters from the
        block statistics, or LMS filters trained on the pilots."""
        config = self.config
        eq = link.equivalent(code)
        if config.receiver is Receiver.MMSE:
            filters = mmse_filters(analytic_correlations(eq, self.noise))
            return AdaptState(filters, code, beta=config.beta, mu=0.0)

        state = AdaptState(FilterBank.matched(eq), code, beta=config.beta, mu=0.0)
        return alrrmo_train(state, link, self._pilots(streams))

    def _budget_code(self) -> RandomizedCode:
        config = self.config
        return RandomizedCode.identity(
            config.relays, config.p_r, code_for(config.antennas)
        )

    def _fed_back(
        self, code: RandomizedCode, streams: TrialStreams
    ) -> RandomizedCode:
        config = self.config
        if config.perfect_feedback:
            return code
        spec = QuantizerSpec(config.feedback_bits, config.clip_range, config.labeling)
        return feedback_roundtrip(
            code, spec, config.feedback_error_prob, streams.feedback
        )


class SpatialMultiplexing(Transceiver):
    """Direct link only; the relays stay silent."""

    uses_relays = False

    def train(self, link: Link, streams: TrialStreams) -> Trained:
        # Linear MMSE on H whatever the `receiver` setting
        code = self._budget_code()
        eq = link.equivalent(code)
        filters = mmse_filters(analytic_correlations(eq, self.noise))
        return AdaptState(filters, code, beta=self.config.beta, mu=0.0), code


class StcAf(Transceiver):
    """Plain distributed STC: every relay forwards with R_k = I."""

    def train(self, link: Link, streams: TrialStreams) -> Trained:
        code = self._budget_code()
        return self._fixed_code_state(link, code, streams), code


class RandomizedStc(Transceiver):
    """A random code drawn once per block and never adapted."""

    def train(self, link: Link, streams: TrialStreams) -> Trained:
        config = self.config
        code = RandomizedCode.random(
            config.relays, config.p_r, streams.code, code_for(config.antennas)
        )
        return self._fixed_code_state(link, code, streams), code


class Alrrmo(Transceiver):
    """Filters and code adapted jointly on the pilots, code fed back."""

    def train(self, link: Link, streams: TrialStreams) -> Trained:
        config = self.config
        code = RandomizedCode.random(
            config.relays, config.p_r, streams.code, code_for(config.antennas)
        )
        state = AdaptState(
            FilterBank.matched(link.equivalent(code)),
            code,
            beta=config.beta,
            mu=config.mu,
        )
        state = alrrmo_train(state, link, self._pilots(streams))
        return state, self._fed_back(state.code, streams)


class JointMmse(Transceiver):
    """Alternating closed-form design from the exact block statistics."""

    def train(self, link: Link, streams: TrialStreams) -> Trained:
        config = self.config
        code = RandomizedCode.random(
            config.relays, config.p_r, streams.code, code_for(config.antennas)
        )
        design = joint_mmse_design(link, code, config.closed_form_iterations)
        # The destination keeps the filters it designed; it cannot see the
        # feedback errors.
        state = AdaptState(design.filters, design.code, beta=config.beta, mu=0.0)
        return state, self._fed_back(design.code, streams)


TRANSCEIVERS: dict[Scheme, type[Transceiver]] = {
    Scheme.SM: SpatialMultiplexing,
    Scheme.STC_AF: StcAf,
    Scheme.RSTC_FIXED: RandomizedStc,
    Scheme.ALRRMO: Alrrmo,
    Scheme.JOINT_MMSE: JointMmse,
}


def make_transceiver(config: SimConfig, noise: NoiseModel) -> Transceiver:
    return TRANSCEIVERS[config.scheme](config, noise)
