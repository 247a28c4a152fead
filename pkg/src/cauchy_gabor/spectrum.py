"""Signals represented by compactly supported piecewise-polynomial spectra.

A signal ``f`` is stored through its Fourier transform ``fhat`` with the
convention ``f(t) = int fhat(xi) exp(2 pi i xi t) dxi``. Each piece carries a
polynomial in the *local* variable ``x = xi - lo`` so that pieces far from
the origin stay well conditioned; translating a piece is exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfcinv

from .expquad import MAX_DEGREE, Polynomial, piece_integrals, taylor_shift
from .lattice import FrequencySet


class CoverageError(ValueError):
    """Spectral support escapes the band structure of M."""

    def __init__(self, message: str, escaped_mass: float):
        super().__init__(f"{message} (escaped mass {escaped_mass:.6g})")
        self.escaped_mass = escaped_mass


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    poly: Polynomial

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError(f"piece needs positive length, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def split(self, x: float) -> tuple["Piece", "Piece"]:
        left = Piece(self.lo, x, self.poly)
        right = Piece(x, self.hi, self.poly.shifted(x - self.lo))
        return left, right

    def translated(self, d: float) -> "Piece":
        return Piece(self.lo + d, self.hi + d, self.poly)


@dataclass(frozen=True)
class SpectralSignal:
    """Sorted, pairwise disjoint spectral pieces."""

    pieces: tuple[Piece, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        for p, q in zip(self.pieces, self.pieces[1:]):
            if q.lo < p.hi:
                raise ValueError(f"pieces overlap or are unsorted at {q.lo}")

    @property
    def support(self) -> tuple[float, float] | None:
        live = [p for p in self.pieces if not p.poly.is_zero]
        if not live:
            return None
        return live[0].lo, live[-1].hi

    @property
    def is_zero(self) -> bool:
        return all(p.poly.is_zero for p in self.pieces)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(coeffs (P, d+1), lo (P,), length (P,))`` with zero padding."""
        if not self.pieces:
            return np.zeros((0, 1), complex), np.zeros(0), np.zeros(0)
        d = max(p.poly.degree for p in self.pieces)
        coeffs = np.zeros((len(self.pieces), d + 1), dtype=complex)
        for i, p in enumerate(self.pieces):
            coeffs[i, : p.poly.degree + 1] = p.poly.coefficients
        lo = np.array([p.lo for p in self.pieces])
        h = np.array([p.length for p in self.pieces])
        return coeffs, lo, h

    def __call__(self, xi):
        """Pointwise spectral values on half-open pieces ``[lo, hi)``."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for p in self.pieces:
            m = (xi >= p.lo) & (xi < p.hi)
            if m.any():
                out[m] = p.poly(xi[m] - p.lo)
        return out

    def __add__(self, other: "SpectralSignal") -> "SpectralSignal":
        return combine([self, other], [1.0, 1.0])

    def __mul__(self, a: complex) -> "SpectralSignal":
        return SpectralSignal(
            tuple(Piece(p.lo, p.hi, Polynomial(a * p.poly.as_array())) for p in self.pieces)
        )

    __rmul__ = __mul__

    def translated(self, d: float) -> "SpectralSignal":
        return SpectralSignal(tuple(p.translated(d) for p in self.pieces))

    def restricted(self, a: float, b: float) -> "SpectralSignal":
        """Restriction to ``[a, b)``, splitting pieces at the cut points."""
        out = []
        for p in self.pieces:
            if p.hi <= a or p.lo >= b:
                continue
            if p.lo < a:
                p = p.split(a)[1]
            if p.hi > b:
                p = p.split(b)[0]
            out.append(p)
        return SpectralSignal(tuple(out))

    def to_csv(self) -> str:
        """Rows ``xi_lo, xi_hi, c0_re, c0_im, ...`` of local coefficients."""
        d = max([3] + [p.poly.degree for p in self.pieces])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["xi_lo", "xi_hi"]
        for j in range(d + 1):
            head += [f"c{j}_re", f"c{j}_im"]
        w.writerow(head)
        for p in self.pieces:
            c = list(p.poly.coefficients) + [0j] * (d + 1 - len(p.poly.coefficients))
            row = [repr(p.lo), repr(p.hi)]
            for x in c:
                row += [repr(x.real), repr(x.imag)]
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpectralSignal":
        rows = list(csv.reader(io.StringIO(text)))
        pieces = []
        for r in rows[1:]:
            v = [float(x) for x in r]
            c = [complex(v[i], v[i + 1]) for i in range(2, len(v), 2)]
            pieces.append(Piece(v[0], v[1], Polynomial(c)))
        return cls(tuple(pieces))


ZERO = SpectralSignal(())


def from_global(lo: float, hi: float, coefficients: Sequence[complex]) -> SpectralSignal:
    """Single piece ``fhat(xi) = sum c_j xi**j`` on ``[lo, hi)``."""
    local = taylor_shift(np.asarray(coefficients, dtype=complex), lo)
    return SpectralSignal((Piece(float(lo), float(hi), Polynomial(local)),))


def piecewise(breaks: Sequence[float], local_coeffs: Iterable[Sequence[complex]]) -> SpectralSignal:
    """Pieces on consecutive ``breaks`` with coefficients in local variables."""
    pieces = [
        Piece(float(a), float(b), Polynomial(c))
        for a, b, c in zip(breaks[:-1], breaks[1:], local_coeffs)
    ]
    return SpectralSignal(tuple(pieces))


def combine(signals: Sequence[SpectralSignal], weights: Sequence[complex]) -> SpectralSignal:
    """Linear combination on the common refinement of all breakpoints."""
    cuts = sorted({x for f in signals for p in f.pieces for x in (p.lo, p.hi)})
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        total = np.zeros(MAX_DEGREE + 1, dtype=complex)
        covered = False
        for f, wt in zip(signals, weights):
            for p in f.pieces:
                if p.lo <= a and b <= p.hi:
                    c = taylor_shift(p.poly.as_array(), a - p.lo)
                    total[: len(c)] += wt * c
                    covered = True
                    break
        if covered:
            pieces.append(Piece(a, b, Polynomial(total)))
    return SpectralSignal(tuple(pieces))


def norm_sq(f: SpectralSignal) -> float:
    """Exact ``int |fhat|^2`` (equal to ``||f||^2`` by Plancherel)."""
    total = 0.0
    for p in f.pieces:
        c = p.poly.as_array()
        prod = np.convolve(c, np.conj(c)).real
        k = np.arange(len(prod))
        total += float(np.sum(prod * p.length ** (k + 1) / (k + 1)))
    return total


def evaluate_time(f: SpectralSignal, z):
    """``f(z) = int fhat(xi) exp(2 pi i xi z) dxi`` for scalar or array ``z``."""
    z_arr = np.asarray(z, dtype=complex)
    flat = z_arr.reshape(-1)
    coeffs, lo, h = f.arrays()
    vals = piece_integrals(coeffs, lo, h, 2j * np.pi * flat).sum(axis=0)
    if z_arr.ndim == 0:
        return complex(vals[0])
    return vals.reshape(z_arr.shape)


@dataclass(frozen=True)
class BandSet:
    """Demodulated bands ``hhat_k`` on ``[0, beta_k)`` and their origins ``mu_k``."""

    bands: tuple[SpectralSignal, ...]
    origins: np.ndarray
    widths: np.ndarray

    def __len__(self) -> int:
        return len(self.bands)

    def reassemble(self) -> SpectralSignal:
        pieces = []
        for band, mu in zip(self.bands, self.origins):
            pieces.extend(band.translated(mu).pieces)
        return SpectralSignal(tuple(pieces))


def band_decompose(f: SpectralSignal, M: FrequencySet) -> BandSet:
    """Split ``fhat`` along consecutive points of M and translate each band to 0.

    Raises
    ------
    CoverageError
        If ``fhat`` has mass outside ``[min M, max M]``.
    """
    mu = M.points
    lo_out = f.restricted(-math.inf, mu[0]) if f.pieces and f.pieces[0].lo < mu[0] else ZERO
    hi_out = f.restricted(mu[-1], math.inf) if f.pieces and f.pieces[-1].hi > mu[-1] else ZERO
    escaped = norm_sq(lo_out) + norm_sq(hi_out)
    if escaped > 0:
        raise CoverageError(
            f"band_decompose: spectrum escapes [{mu[0]:g}, {mu[-1]:g}]", escaped
        )
    bands = tuple(
        f.restricted(a, b).translated(-a) for a, b in zip(mu[:-1], mu[1:])
    )
    return BandSet(bands, mu[:-1].copy(), np.diff(mu))


def _hermite_local(f0, f1, d0, d1, dx):
    c2 = (3 * (f1 - f0) / dx - 2 * d0 - d1) / dx
    c3 = (2 * (f0 - f1) / dx + d0 + d1) / dx**2
    return np.stack([f0, d0, c2, c3], axis=-1)


def gaussian_spectrum(center: float, halfwidth: float, tail_tol: float = 1e-6) -> SpectralSignal:
    """Piecewise-cubic model of ``exp(-pi ((xi - center)/halfwidth)**2)``.

    The spectrum is cut at ``|xi - center| = T`` where the discarded relative
    L2 norm is ``tail_tol / 2``; the cubic Hermite pieces are refined until the
    interpolation error is below ``tail_tol / 2`` as well. Nodes sit at
    ``center + k * dx`` computed from ``k * dx`` so the result is mirror
    symmetric about ``center``.
    """
    if not 0 < tail_tol <= 1e-3:
        raise ValueError("tail_tol must lie in (0, 1e-3]")
    if not halfwidth > 0:
        raise ValueError("halfwidth must be positive")
    # relative tail energy erfc(sqrt(2 pi) T / hw) = (tail_tol / 2)**2
    T = halfwidth * float(erfcinv((tail_tol / 2) ** 2)) / math.sqrt(2 * math.pi)
    g = lambda x: np.exp(-np.pi * (x / halfwidth) ** 2)
    dg = lambda x: -2 * np.pi * x / halfwidth**2 * g(x)
    total = halfwidth / math.sqrt(2)
    gl_x, gl_w = np.polynomial.legendre.leggauss(12)
    K = 4
    while True:
        dx = T / K
        nodes = np.arange(-K, K + 1) * dx
        coeffs = _hermite_local(g(nodes[:-1]), g(nodes[1:]), dg(nodes[:-1]), dg(nodes[1:]), dx)
        # L2 interpolation error on every piece by Gauss-Legendre
        xs = (gl_x + 1) / 2 * dx
        approx = np.polynomial.polynomial.polyval(xs, coeffs.T)  # (pieces, nodes)
        exact = g(nodes[:-1, None] + xs[None, :])
        err = math.sqrt(float(np.sum(gl_w * (approx - exact) ** 2) * dx / 2) / total)
        if err <= tail_tol / 2 or K > 4096:
            break
        K *= 2
    return piecewise(center + nodes, coeffs)
