import numpy as np
import pytest

from rdstc import numerics
from rdstc.channel import complex_gaussian
from rdstc.errors import InputError, SingularMatrixError
from rdstc.numerics import (
    adjoint,
    frobenius_norm,
    hermitian_solve,
    is_hermitian,
    matmul,
    trace,
)


def random_hpd(rng: np.random.Generator, size: int) -> np.ndarray:
    a = complex_gaussian(rng, (size, size))
    return a @ a.conj().T + size * np.eye(size)


class TestMatrixHelpers:
    def test_matmul_shapes(self) -> None:
        a = np.ones((2, 3))
        assert matmul(a, np.ones((3, 4))).shape == (2, 4)
        assert matmul(a, np.ones(3)).shape == (2,)

    def test_matmul_mismatch(self) -> None:
        with pytest.raises(InputError):
            matmul(np.ones((2, 3)), np.ones((2, 2)))

    def test_adjoint(self) -> None:
        a = np.array([[1 + 2j, 3], [4j, 5 - 1j]])
        assert np.array_equal(adjoint(a), np.array([[1 - 2j, -4j], [3, 5 + 1j]]))

    def test_frobenius_norm(self) -> None:
        assert frobenius_norm(np.array([[3, 4j]])) == pytest.approx(5.0)

    def test_trace_requires_square(self) -> None:
        assert trace(np.diag([1j, 2])) == 2 + 1j
        with pytest.raises(InputError):
            trace(np.ones((2, 3)))

    def test_is_hermitian(self, rng) -> None:
        assert is_hermitian(random_hpd(rng, 4))
        assert not is_hermitian(np.array([[1, 1j], [1j, 1]]))

    def test_matmul_associative(self, rng) -> None:
        for _ in range(100):
            a, b, c = (complex_gaussian(rng, (3, 3)) for _ in range(3))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert np.linalg.norm(left - right) <= 1e-10 * np.linalg.norm(left)

    def test_adjoint_of_product(self, rng) -> None:
        a, b = complex_gaussian(rng, (2, 3)), complex_gaussian(rng, (3, 4))
        assert np.allclose(adjoint(matmul(a, b)), matmul(adjoint(b), adjoint(a)))

    def test_frobenius_is_trace(self, rng) -> None:
        a = complex_gaussian(rng, (4, 4))
        assert frobenius_norm(a) ** 2 == pytest.approx(
            trace(matmul(a, adjoint(a))).real, rel=1e-12
        )


class TestHermitianSolve:
    def test_identity(self) -> None:
        b = np.array([1 + 1j, 2])
        assert np.allclose(hermitian_solve(np.eye(2), b), b, rtol=0, atol=1e-12)

    def test_residual(self, rng) -> None:
        for size in (2, 4, 8):
            a = random_hpd(rng, size)
            b = complex_gaussian(rng, (size, 3))
            x = hermitian_solve(a, b)
            assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_vector_rhs(self, rng) -> None:
        a = random_hpd(rng, 4)
        b = complex_gaussian(rng, 4)
        x = hermitian_solve(a, b)
        assert x.shape == (4,)
        assert np.allclose(a @ x, b)

    def test_zero_matrix_is_singular(self) -> None:
        with pytest.raises(SingularMatrixError):
            hermitian_solve(np.zeros((2, 2)), np.ones(2))

    def test_singular_is_linalg_error(self) -> None:
        with pytest.raises(np.linalg.LinAlgError):
            hermitian_solve(-np.eye(2), np.ones(2))

    def test_rank_deficient_is_loaded(self) -> None:
        v = np.array([1, 1j]) / np.sqrt(2)
        a = np.outer(v, v.conj())
        x = hermitian_solve(a, v)
        assert np.all(np.isfinite(x))

    def test_loading_is_not_a_warning(self, monkeypatch) -> None:
        warnings, debug = [], []
        monkeypatch.setattr(numerics.logger, "warning", lambda *a: warnings.append(a))
        monkeypatch.setattr(numerics.logger, "debug", lambda *a: debug.append(a))
        for _ in range(3):
            hermitian_solve(np.diag([1.0, 0.0]), np.array([1.0, 0.0]))
        assert not warnings
        assert len(debug) == 3

    def test_not_hermitian(self) -> None:
        with pytest.raises(InputError):
            hermitian_solve(np.array([[2, 1], [0, 2]]), np.ones(2))

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(InputError):
            hermitian_solve(np.eye(3), np.ones(2))
