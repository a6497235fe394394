"""Gray-mapped QPSK (4-QAM) with unit average symbol energy."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .errors import InputError
from .numerics import ComplexMat

BitBlock = npt.NDArray[np.uint8]

BITS_PER_SYMBOL = 2

_SCALE = 1 / np.sqrt(2)

# Indexed by the 2-bit label b0 b1 (b0 first): the first bit selects the sign
# of the imaginary part, the second the sign of the real part.
CONSTELLATION: ComplexMat = _SCALE * np.array(
    [1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j], dtype=np.complex128
)

_POINT_TOL = 1e-9


def as_bits(bits) -> BitBlock:
    bits = np.asarray(bits)
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise InputError("Bit blocks may only contain 0 and 1")
    return bits.astype(np.uint8).ravel()


def modulate(bits) -> ComplexMat:
    bits = as_bits(bits)
    if bits.size % BITS_PER_SYMBOL:
        raise InputError(f"Cannot map an odd number of bits ({bits.size})")

    pairs = bits.reshape(-1, BITS_PER_SYMBOL)
    return CONSTELLATION[2 * pairs[:, 0] + pairs[:, 1]]


def hard_detect(z) -> ComplexMat:
    """Minimum distance slicer.

    Ties on an axis go to the positive side, so 0 maps to (1+j)/sqrt(2).
    Works elementwise on arrays; a scalar in gives a 0-d array out.
    """
    z = np.asarray(z, dtype=np.complex128)
    re = np.where(z.real >= 0, 1.0, -1.0)
    im = np.where(z.imag >= 0, 1.0, -1.0)
    return _SCALE * (re + 1j * im)


def demodulate(symbols) -> BitBlock:
    symbols = np.atleast_1d(np.asarray(symbols, dtype=np.complex128)).ravel()
    if not np.allclose(hard_detect(symbols), symbols, rtol=0, atol=_POINT_TOL):
        raise InputError("Demodulator input contains non-constellation points")

    bits = np.empty((symbols.size, BITS_PER_SYMBOL), dtype=np.uint8)
    bits[:, 0] = symbols.imag < 0
    bits[:, 1] = symbols.real < 0
    return bits.ravel()


def count_bit_errors(sent, received) -> int:
    sent, received = as_bits(sent), as_bits(received)
    if sent.size != received.size:
        raise InputError(
            f"Bit blocks differ in length: {sent.size} sent, {received.size} received"
        )
    return int(np.count_nonzero(sent != received))
