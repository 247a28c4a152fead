"""Closed-form integrals of polynomial times exponential on finite intervals.

Everything downstream (time-domain evaluation, frame coefficients, design
matrices) reduces to

    int_a^b p(xi) exp(s * xi) dxi

with ``p`` a low-degree complex polynomial. The moments

    J_j(z) = int_0^1 u**j exp(z u) du

are computed by a power series for small ``|z|`` and by integration-by-parts
recursion otherwise (forward when ``|z|`` dominates the degree, Miller-style
backward recursion in between), so no regime subtracts nearly equal numbers.
Polynomials are always re-expanded about the endpoint where the exponential
is largest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_DEGREE = 8
SERIES_SWITCH = 0.5
SERIES_TOL = 1e-18
# exp(709.78) overflows a double
MAX_EXPONENT = 700.0


class ExpRangeError(OverflowError):
    """An exponential factor would leave the representable range."""

    def __init__(self, magnitude: float):
        super().__init__(
            f"exponent real part {magnitude:.6g} exceeds overflow guard {MAX_EXPONENT}"
        )
        self.magnitude = magnitude


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial with ascending coefficients, trailing zeros trimmed."""

    coefficients: tuple[complex, ...]

    def __init__(self, coefficients: Sequence[complex] | np.ndarray = (0.0,)):
        c = [complex(x) for x in np.atleast_1d(np.asarray(coefficients, dtype=complex))]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(c) - 1} exceeds cap {MAX_DEGREE}")
        object.__setattr__(self, "coefficients", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coefficients[0] == 0

    def as_array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.as_array())

    def conj(self) -> "Polynomial":
        return Polynomial(np.conj(self.as_array()))

    def shifted(self, a: float) -> "Polynomial":
        """Return ``q`` with ``q(x) = p(x + a)``."""
        return Polynomial(taylor_shift(self.as_array(), a))


def taylor_shift(c, a):
    """Coefficients of ``x -> p(x + a)`` by repeated synthetic division.

    ``c`` may be 2-D (one polynomial per row) with ``a`` broadcasting over rows.
    """
    c = np.array(c, dtype=complex)
    n = c.shape[-1]
    if n == 1:
        return c
    a = np.asarray(a)
    if c.ndim == 2:
        a = a.reshape(-1)
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            c[..., k] += a * c[..., k + 1]
    return c


def reflect(c, h):
    """Coefficients of ``y -> q(h - y)``."""
    q = taylor_shift(c, h)
    return q * (-1.0) ** np.arange(q.shape[-1])


def unit_moments(z, n: int) -> np.ndarray:
    """Return ``J_0(z), ..., J_n(z)`` stacked along a new last axis.

    ``J_j(z) = int_0^1 u**j exp(z u) du``; ``z`` may be a scalar or an array.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    if z.size and np.max(z.real) > MAX_EXPONENT:
        raise ExpRangeError(float(np.max(z.real)))
    out = np.empty((z.size, n + 1), dtype=complex)
    az = np.abs(z)
    small = az < SERIES_SWITCH
    fwd = ~small & (az >= n)
    bwd = ~small & ~fwd
    if small.any():
        out[small] = _moments_series(z[small], n)
    if fwd.any():
        out[fwd] = _moments_forward(z[fwd], n)
    if bwd.any():
        out[bwd] = _moments_backward(z[bwd], n)
    return out.reshape(shape + (n + 1,))


def _moments_series(z: np.ndarray, n: int) -> np.ndarray:
    j = np.arange(n + 1)
    term = np.ones_like(z)  # z**m / m!
    total = np.broadcast_to(1.0 / (j + 1), (z.size, n + 1)).astype(complex)
    m = 0
    while True:
        m += 1
        term = term * z / m
        t = term[:, None] / (j + m + 1)
        total = total + t
        if np.max(np.abs(t)) < SERIES_TOL or m > 200:
            break
    return total


def _moments_forward(z: np.ndarray, n: int) -> np.ndarray:
    ez = np.exp(z)
    out = np.empty((z.size, n + 1), dtype=complex)
    out[:, 0] = np.expm1(z) / z
    for j in range(1, n + 1):
        out[:, j] = (ez - j * out[:, j - 1]) / z
    return out


def _moments_backward(z: np.ndarray, n: int) -> np.ndarray:
    # truncation error at the start index is damped by prod_{j<=top} |z|/j
    top = n + 40 + int(math.e * float(np.max(np.abs(z))))
    ez = np.exp(z)
    val = np.zeros_like(z)
    out = np.empty((z.size, n + 1), dtype=complex)
    for j in range(top, 0, -1):
        val = (ez - z * val) / j
        if j - 1 <= n:
            out[:, j - 1] = val
    return out


def piece_integrals(coeffs, lo, h, s, shift: float = 0.0) -> np.ndarray:
    """Integrate many local polynomials against many exponentials at once.

    Parameters
    ----------
    coeffs
        Array ``(P, d + 1)``; row ``i`` is a polynomial in the local variable
        ``x = xi - lo[i]``.
    lo, h
        Arrays ``(P,)`` of left endpoints and nonnegative lengths.
    s
        Array ``(L,)`` of complex rates.
    shift
        Reference point of the exponential, ``exp(s * (xi - shift))``.

    Returns
    -------
    ndarray
        ``(P, L)`` with entry ``int_{lo_i}^{lo_i+h_i} q_i(xi - lo_i) exp(s_l (xi - shift)) dxi``.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    P, d1 = coeffs.shape
    out = np.zeros((P, s.size), dtype=complex)
    if P == 0 or s.size == 0:
        return out
    a = lo - shift
    b = a + h
    peak = np.maximum(np.outer(a, s.real), np.outer(b, s.real))
    if np.max(peak) > MAX_EXPONENT:
        raise ExpRangeError(float(np.max(peak)))
    powers = h[:, None] ** np.arange(1, d1 + 1)  # (P, d+1)
    left = s.real <= 0
    if left.any():
        sl = s[left]
        mom = unit_moments(np.outer(h, sl), d1 - 1)  # (P, Ls, d+1)
        acc = np.einsum("pj,plj->pl", coeffs * powers, mom)
        out[:, left] = np.exp(np.outer(a, sl)) * acc
    if (~left).any():
        sr = s[~left]
        rc = reflect(coeffs, h)
        mom = unit_moments(-np.outer(h, sr), d1 - 1)
        acc = np.einsum("pj,plj->pl", rc * powers, mom)
        out[:, ~left] = np.exp(np.outer(b, sr)) * acc
    return out


def exp_poly_integral(p: Polynomial, s: complex, a: float, b: float) -> complex:
    """Integrate ``p(xi) * exp(s * xi)`` over ``[a, b]``.

    Parameters
    ----------
    p
        Polynomial in the global variable ``xi``.
    s
        Complex rate of the exponential.
    a, b
        Interval endpoints with ``a <= b``.

    Raises
    ------
    ExpRangeError
        If ``exp(s * xi)`` would overflow somewhere on ``[a, b]``.
    """
    if not a <= b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if p.is_zero or a == b:
        return 0j
    q = taylor_shift(p.as_array(), a)
    return complex(piece_integrals(q[None, :], [a], [b - a], [s])[0, 0])
