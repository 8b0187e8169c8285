"""Exact amplitude bookkeeping for grid-aligned rational signals.

Amplitudes are stored as ``(coeff, turn)`` pairs meaning
``coeff * exp(2j*pi*turn)`` with both entries :class:`fractions.Fraction`.
Every operation the transform layer needs on such data -- translation,
modulation by a rational frequency, multiplication by a root of unity --
stays inside the representation, so identities that hold algebraically can
be verified with literally zero floating-point defect instead of the usual
1e-16 noise floor.

Canonical form keeps ``turn`` in ``[0, 1/2)`` and pushes signs into
``coeff``; equality of canonical pairs is structural equality.  A zero
amplitude is always ``(0, 0)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

Amp = Tuple[Fraction, Fraction]
ExactSamples = Dict[int, Amp]

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


def amp(coeff, turn=0) -> Amp:
    """Build a canonical amplitude ``coeff * exp(2j*pi*turn)``."""
    c = Fraction(coeff)
    if c == 0:
        return (_ZERO, _ZERO)
    t = Fraction(turn) % 1
    if t >= _HALF:
        return (-c, t - _HALF)
    return (c, t)


def amp_turned(a: Amp, dturn: Fraction) -> Amp:
    """Multiply an amplitude by ``exp(2j*pi*dturn)``."""
    c, t = a
    if c == 0:
        return a
    return amp(c, t + dturn)


def amp_scaled(a: Amp, factor: Fraction) -> Amp:
    c, t = a
    return amp(c * Fraction(factor), t)


def amp_abs2(a: Amp) -> Fraction:
    c = a[0]
    return c * c


def amp_to_complex(a: Amp) -> complex:
    c, t = a
    return float(c) * complex(np.exp(2j * np.pi * float(t)))


def exact_from_real(value) -> Optional[Amp]:
    """Exact amplitude for a real scalar, or None if it is not exactly rational.

    Python floats are dyadic rationals, so any real float converts exactly.
    Complex values with a nonzero imaginary part have no canonical rational
    turn in general and fall back to the float-only path.
    """
    if isinstance(value, (int, Fraction)):
        return amp(value)
    if isinstance(value, float):
        return amp(Fraction(value))
    if isinstance(value, complex):
        if value.imag == 0.0:
            return amp(Fraction(value.real))
        return None
    return None


def dense_from_exact(exact: ExactSamples, start: int, length: int) -> np.ndarray:
    """Realize a dense complex array from sparse exact samples."""
    out = np.zeros(length, dtype=np.complex128)
    if not exact:
        return out
    idx = np.fromiter(exact.keys(), dtype=np.int64, count=len(exact))
    coeffs = np.array([float(a[0]) for a in exact.values()])
    turns = np.array([float(a[1]) for a in exact.values()])
    out[idx - start] = coeffs * np.exp(2j * np.pi * turns)
    return out


def rational_sqrt(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None."""
    if x < 0:
        return None
    if x == 0:
        return _ZERO
    num = _isqrt_exact(x.numerator)
    den = _isqrt_exact(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _isqrt_exact(n: int) -> Optional[int]:
    r = math.isqrt(n)
    return r if r * r == n else None
