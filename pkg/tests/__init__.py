from abc import ABC, abstractmethod

import numpy as np
import pytest

STEP = 1e-6


def finite_difference_gradient(cost, x: np.ndarray, step: float = STEP) -> np.ndarray:
    """Central differences of a real cost over a complex array, returned as
    dJ/dRe + i dJ/dIm for every entry."""
    grad = np.zeros(x.shape, dtype=np.complex128)
    for idx in np.ndindex(x.shape):
        for unit in (1, 1j):
            delta = np.zeros(x.shape, dtype=np.complex128)
            delta[idx] = unit * step
            slope = (cost(x + delta) - cost(x - delta)) / (2 * step)
            grad[idx] += slope if unit == 1 else 1j * slope
    return grad


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(expected)), 1e-12)
    return float(np.linalg.norm(actual - expected)) / scale


class GradientTestBase(ABC):
    """Checks an analytic gradient with respect to conj(x) against central
    differences of the instantaneous cost on several random states.

    For a real cost J, dJ/dRe + i dJ/dIm equals twice the gradient with
    respect to conj(x).
    """

    states = 50
    tolerance = 1e-5

    @pytest.mark.dependency(name="cost_is_real")
    def test_cost_is_real(self) -> None:
        rng = np.random.default_rng(7)
        state = self.draw_state(rng)
        assert np.isrealobj(self.cost(state, self.point(state)))

    @pytest.mark.dependency(depends=["cost_is_real"])
    def test_matches_finite_differences(self) -> None:
        rng = np.random.default_rng(11)
        for _ in range(self.states):
            state = self.draw_state(rng)
            x = self.point(state)
            numeric = finite_difference_gradient(lambda v: self.cost(state, v), x)
            assert relative_error(2 * self.gradient(state), numeric) < self.tolerance

    @abstractmethod
    def draw_state(self, rng: np.random.Generator):
        raise NotImplementedError()

    @abstractmethod
    def point(self, state) -> np.ndarray:
        raise NotImplementedError()

    @abstractmethod
    def cost(self, state, x: np.ndarray) -> float:
        raise NotImplementedError()

    @abstractmethod
    def gradient(self, state) -> np.ndarray:
        raise NotImplementedError()
