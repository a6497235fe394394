import numpy as np
import pytest

from rdstc.errors import InputError, MalformedPacketError
from rdstc.feedback import (
    FeedbackPacket,
    Labeling,
    QuantizerSpec,
    default_clip_range,
    dequantize_code,
    feedback_roundtrip,
    packet_length,
    quantize_code,
    reconstruct_levels,
)
from rdstc.stc_relay import RandomizedCode

P_R = 4.0


class TestQuantizer:
    def test_example(self) -> None:
        spec = QuantizerSpec(2, 1.0)
        assert spec.index(0.3) == 2
        assert spec.level(2) == pytest.approx(0.25)

    def test_saturates(self) -> None:
        spec = QuantizerSpec(3, 1.0)
        assert spec.index(5.0) == spec.levels - 1
        assert spec.index(-5.0) == 0
        assert spec.index(1.0) == spec.levels - 1

    def test_error_within_half_step(self, rng) -> None:
        spec = QuantizerSpec(4, 0.7)
        x = rng.uniform(-0.7, 0.7, 1000)
        assert np.all(np.abs(spec.level(spec.index(x)) - x) <= spec.step / 2 + 1e-15)

    @pytest.mark.parametrize("labeling", list(Labeling))
    def test_labels_invert(self, labeling) -> None:
        spec = QuantizerSpec(5, 1.0, labeling)
        idx = np.arange(spec.levels)
        assert np.array_equal(spec.decode_labels(spec.encode_labels(idx)), idx)

    def test_gray_neighbors(self) -> None:
        spec = QuantizerSpec(4, 1.0, Labeling.GRAY)
        labels = spec.encode_labels(np.arange(spec.levels))
        for a, b in zip(labels, labels[1:]):
            assert bin(int(a) ^ int(b)).count("1") == 1

    def test_invalid(self) -> None:
        with pytest.raises(InputError):
            QuantizerSpec(0, 1.0)
        with pytest.raises(InputError):
            QuantizerSpec(2, 0.0)

    def test_default_clip_range(self) -> None:
        # unit-norm code over one relay: RMS component 1/sqrt(8)
        assert default_clip_range(4.0, 1, 2, 2) == pytest.approx(2 / np.sqrt(8))


class TestPacket:
    def test_length(self, rng) -> None:
        spec = QuantizerSpec(4, 1.0)
        code = RandomizedCode.random(2, P_R, rng)
        packet = quantize_code(code, spec)
        assert len(packet) == packet_length(2, 2, spec) == 2 * 4 * 2 * 4

    def test_layout(self) -> None:
        spec = QuantizerSpec(2, 1.0)
        r = np.array([[0.3 - 0.9j, 0.0], [0.0, 0.0]])
        bits = quantize_code(RandomizedCode(r, P_R), spec).bits
        # R[0, 0]: real 0.3 -> index 2, imaginary -0.9 -> index 0, MSB first
        assert list(bits[:4]) == [1, 0, 0, 0]

    def test_levels_round_trip(self, rng) -> None:
        spec = QuantizerSpec(6, 1.0)
        code = RandomizedCode.random(2, P_R, rng)
        levels = reconstruct_levels(quantize_code(code, spec), 2, 2)
        assert np.all(np.abs(levels.real - code.r.real) <= spec.step / 2 + 1e-12)
        assert np.all(np.abs(levels.imag - code.r.imag) <= spec.step / 2 + 1e-12)

    def test_truncated(self, rng) -> None:
        spec = QuantizerSpec(4, 1.0)
        packet = quantize_code(RandomizedCode.random(1, P_R, rng), spec)
        with pytest.raises(MalformedPacketError):
            reconstruct_levels(FeedbackPacket(packet.bits[:-3], spec), 1, 2)

    def test_all_zero_packet(self) -> None:
        spec = QuantizerSpec(4, 1.0)
        packet = FeedbackPacket(np.zeros(packet_length(1, 2, spec), np.uint8), spec)
        bottom = -spec.clip_range + spec.step / 2
        assert np.allclose(reconstruct_levels(packet, 1, 2), bottom * (1 + 1j))

        rebuilt = dequantize_code(packet, 1, 2, P_R)
        assert np.allclose(rebuilt.r, rebuilt.r[0, 0, 0])
        assert rebuilt.equivalent_trace() == pytest.approx(P_R, rel=1e-8)

    def test_fine_quantizer_round_trip(self, rng) -> None:
        spec = QuantizerSpec(12, 1.0)
        for _ in range(20):
            code = RandomizedCode.random(2, P_R, rng)
            levels = reconstruct_levels(quantize_code(code, spec), 2, 2)
            assert np.max(np.abs(levels.real - code.r.real)) <= 1e-3
            assert np.max(np.abs(levels.imag - code.r.imag)) <= 1e-3

    def test_dequantize_is_deterministic(self, rng) -> None:
        spec = QuantizerSpec(4, 1.0)
        packet = quantize_code(RandomizedCode.random(1, P_R, rng), spec)
        first = dequantize_code(packet, 1, 2, P_R)
        assert np.array_equal(first.r, dequantize_code(packet, 1, 2, P_R).r)

    def test_dequantized_meets_budget(self, rng) -> None:
        spec = QuantizerSpec(3, 1.0)
        code = RandomizedCode.random(1, P_R, rng)
        rebuilt = dequantize_code(quantize_code(code, spec), 1, 2, P_R)
        assert rebuilt.equivalent_trace() == pytest.approx(P_R, rel=1e-8)


class TestRoundTrip:
    @pytest.fixture
    def spec(self) -> QuantizerSpec:
        return QuantizerSpec(4, default_clip_range(P_R, 1, 2, 2))

    def test_noiseless_is_close(self, rng, spec) -> None:
        code = RandomizedCode.random(1, P_R, rng)
        rebuilt = feedback_roundtrip(code, spec, 0.0, rng)
        assert np.linalg.norm(rebuilt.r - code.r) <= 2 * spec.step * np.sqrt(8)

    def test_budget_after_errors(self, rng, spec) -> None:
        for p in (0.0, 1e-2, 0.5):
            for _ in range(20):
                code = RandomizedCode.random(1, P_R, rng)
                rebuilt = feedback_roundtrip(code, spec, p, rng)
                assert rebuilt.equivalent_trace() == pytest.approx(P_R, rel=1e-8)

    def test_more_bits_less_error(self, rng) -> None:
        errors = []
        for bits in (1, 2, 4, 6):
            spec = QuantizerSpec(bits, default_clip_range(P_R, 1, 2, 2))
            total = 0.0
            for _ in range(200):
                code = RandomizedCode.random(1, P_R, rng)
                received = feedback_roundtrip(code, spec, 0.0, rng)
                total += np.linalg.norm(received.r - code.r)
            errors.append(total)
        assert errors == sorted(errors, reverse=True)

    def test_random_feedback_is_independent(self, rng, spec) -> None:
        sent, received = [], []
        for _ in range(10_000):
            code = RandomizedCode.random(1, P_R, rng)
            sent.append(code.r.ravel())
            received.append(feedback_roundtrip(code, spec, 0.5, rng).r.ravel())
        sent_parts = np.concatenate([np.ravel(sent).real, np.ravel(sent).imag])
        received_parts = np.concatenate(
            [np.ravel(received).real, np.ravel(received).imag]
        )
        assert abs(np.corrcoef(sent_parts, received_parts)[0, 1]) < 0.02

    def test_error_grows_with_bit_errors(self, spec) -> None:
        errors = []
        for p in (0.0, 1e-3, 1e-2, 1e-1, 0.5):
            rng = np.random.default_rng(8)
            total = 0.0
            for _ in range(10_000):
                code = RandomizedCode.random(1, P_R, rng)
                received = feedback_roundtrip(code, spec, p, rng)
                total += np.linalg.norm(received.r - code.r)
            errors.append(total)
        assert errors == sorted(errors)
