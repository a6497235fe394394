"""Small dense complex linear algebra shared by every other module.

Matrices are plain `numpy` arrays of `complex128`; the helpers here add the
dimension checks and error types the simulator relies on. Vectors are 1-D
arrays and are accepted wherever a single column is.
"""

from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg

from . import get_logger
from .errors import InputError, SingularMatrixError

logger = get_logger(__name__)

ComplexMat = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-9
LOADING_FACTOR = 1e-9


def as_complex(a: Any) -> ComplexMat:
    return np.asarray(a, dtype=np.complex128)


def matmul(a: ComplexMat, b: ComplexMat) -> ComplexMat:
    a, b = as_complex(a), as_complex(b)
    if a.ndim != 2 or b.ndim not in (1, 2):
        raise InputError(f"Cannot multiply arrays of shapes {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise InputError(
            f"Dimension mismatch: {a.shape[0]}x{a.shape[1]} times {b.shape[0]} rows"
        )
    return a @ b


def adjoint(a: ComplexMat) -> ComplexMat:
    return as_complex(a).conj().T


def frobenius_norm(a: ComplexMat) -> float:
    return float(np.linalg.norm(as_complex(a)))


def trace(a: ComplexMat) -> complex:
    a = as_complex(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"Trace of a non-square array of shape {a.shape}")
    return complex(np.trace(a))


def is_hermitian(a: ComplexMat, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(frobenius_norm(a), np.finfo(float).tiny)
    return frobenius_norm(a - adjoint(a)) <= tol * scale


def hermitian_solve(a: ComplexMat, b: ComplexMat) -> ComplexMat:
    """Solves `a x = b` for Hermitian positive definite `a`.

    Uses a Cholesky factorization. If it fails the system is retried once with
    diagonal loading of 1e-9 times the mean diagonal; if that fails as well the
    matrix is treated as singular.
    """
    a, b = as_complex(a), as_complex(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"Cannot solve with a non-square matrix of shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise InputError(
            f"Right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}"
        )
    if not is_hermitian(a):
        raise InputError("Matrix is not Hermitian")

    a = (a + adjoint(a)) / 2
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        rows = a.shape[0]
        delta = LOADING_FACTOR * trace(a).real / rows
        logger.debug("Cholesky failed, retrying with diagonal loading %.3g", delta)
        try:
            if delta <= 0:
                raise np.linalg.LinAlgError("non-positive trace")
            factor = scipy.linalg.cho_factor(
                a + delta * np.eye(rows), lower=True, check_finite=False
            )
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(
                f"Matrix is not positive definite after loading: {e}"
            ) from e

    return scipy.linalg.cho_solve(factor, b, check_finite=False)
