import numpy as np
import pytest

from rdstc.errors import InputError
from rdstc.modem import (
    CONSTELLATION,
    count_bit_errors,
    demodulate,
    hard_detect,
    modulate,
)


class TestModulate:
    def test_examples(self) -> None:
        assert modulate([0, 0])[0] == pytest.approx((1 + 1j) / np.sqrt(2))
        assert modulate([1, 1])[0] == pytest.approx((-1 - 1j) / np.sqrt(2))

    def test_unit_energy(self) -> None:
        assert np.mean(np.abs(CONSTELLATION) ** 2) == pytest.approx(1.0)

    def test_gray_neighbors_differ_in_one_bit(self) -> None:
        labels = [(0, 0), (0, 1), (1, 0), (1, 1)]
        for a, la in zip(CONSTELLATION, labels):
            for b, lb in zip(CONSTELLATION, labels):
                if np.isclose(abs(a - b), np.sqrt(2)):
                    assert sum(x != y for x, y in zip(la, lb)) == 1

    def test_odd_length(self) -> None:
        with pytest.raises(InputError):
            modulate([0, 1, 1])

    def test_not_bits(self) -> None:
        with pytest.raises(InputError):
            modulate([0, 2])

    def test_inverse(self, rng) -> None:
        bits = rng.integers(0, 2, 400)
        assert np.array_equal(demodulate(modulate(bits)), bits)


class TestDetect:
    def test_tie_goes_positive(self) -> None:
        assert hard_detect(0) == pytest.approx((1 + 1j) / np.sqrt(2))

    def test_nearest_point(self, rng) -> None:
        z = rng.standard_normal(200) + 1j * rng.standard_normal(200)
        decided = hard_detect(z)
        distances = np.abs(z[:, np.newaxis] - CONSTELLATION[np.newaxis])
        nearest = CONSTELLATION[np.argmin(distances, axis=1)]
        assert np.allclose(decided, nearest)

    def test_idempotent(self, rng) -> None:
        z = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        once = hard_detect(z)
        assert np.array_equal(hard_detect(once), once)

    def test_demodulate_rejects_off_grid(self) -> None:
        with pytest.raises(InputError):
            demodulate([0.3 + 0.1j])


class TestCountBitErrors:
    def test_count(self) -> None:
        assert count_bit_errors([0, 1, 1, 0], [1, 1, 0, 0]) == 2

    def test_length_mismatch(self) -> None:
        with pytest.raises(InputError):
            count_bit_errors([0, 1], [0, 1, 1, 0])
