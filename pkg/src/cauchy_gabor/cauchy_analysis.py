"""Frame coefficients of the Cauchy-kernel Gabor system.

The atoms are ``phi_{lam,mu}(t) = exp(-2 pi i mu t) / (t - lam - i w)`` with
``Re w > 0``. For a signal with spectrum ``fhat``, closing the contour in the
upper half-plane gives the half-line formula

    c_{lam,n} = int f(t) phi_{lam,mu_n}(t) dt
              = 2 pi i int_{mu_n}^inf fhat(xi) exp(2 pi i (xi - mu_n)(lam + i w)) dxi,

so a coefficient only sees the part of the spectrum above ``mu_n``. The
residue factor ``2 pi i`` is carried explicitly everywhere.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .expquad import ExpRangeError, piece_integrals
from .lattice import FrequencySet, PointSet
from .spectrum import SpectralSignal, band_decompose, evaluate_time

TWO_PI_I = 2j * np.pi


@dataclass(frozen=True)
class WindowParam:
    """Pole offset ``w`` of the Cauchy window; ``Re w > 0`` is required."""

    w: complex

    def __post_init__(self):
        w = complex(self.w)
        if not w.real > 0:
            raise ValueError(
                f"WindowParam: Re w must be > 0 (got {w}); use reflect_negative_w for Re w < 0"
            )
        object.__setattr__(self, "w", w)

    @property
    def rate(self) -> complex:
        """Decay rate ``2 pi w`` of the spectral weight ``exp(-2 pi xi w)``."""
        return 2 * np.pi * self.w


def reflect_negative_w(w: complex, lambdas, mus):
    """Map a system with ``Re w < 0`` to one with ``Re w > 0``.

    Under ``t -> -t`` the atom ``phi_{lam,mu}`` with parameter ``w`` becomes
    ``-phi_{-lam,-mu}`` with parameter ``-w``. Coefficients of ``f`` in the
    original system therefore equal minus the coefficients of ``t -> f(-t)``
    (spectrum mirrored) in the returned one, and frame bounds coincide.
    """
    w = complex(w)
    if w.real == 0:
        raise ValueError("Re w = 0 has no reflection")
    return WindowParam(-w), np.sort(-np.asarray(lambdas, float)), np.sort(-np.asarray(mus, float))


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients indexed by ``(lambda index, band index n)``."""

    values: np.ndarray
    lambdas: np.ndarray
    mus: np.ndarray
    w: complex
    twisted: bool = False
    descriptors: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.lambdas), len(self.mus)):
            raise ValueError("CoefficientTable: shape does not match the windows")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("CoefficientTable: non-finite entries")

    @property
    def frame_sum(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["lambda", "mu", "re", "im"])
        for i, lam in enumerate(self.lambdas):
            for n, mu in enumerate(self.mus):
                v = self.values[i, n]
                wr.writerow([repr(float(lam)), repr(float(mu)), repr(v.real), repr(v.imag)])
        return buf.getvalue()

    def to_json(self) -> str:
        blob = {
            "w": [self.w.real, self.w.imag],
            "twisted": self.twisted,
            "lambdas": [float(x) for x in self.lambdas],
            "mus": [float(x) for x in self.mus],
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
            "descriptors": dict(self.descriptors),
        }
        return json.dumps(blob, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        b = json.loads(text)
        vals = np.asarray(b["re"]) + 1j * np.asarray(b["im"])
        return cls(
            vals.reshape(len(b["lambdas"]), len(b["mus"])),
            np.asarray(b["lambdas"], float),
            np.asarray(b["mus"], float),
            complex(*b["w"]),
            b["twisted"],
            b["descriptors"],
        )


def _coefficient_column(f: SpectralSignal, lambdas: np.ndarray, mu: float, w: WindowParam):
    upper = f.restricted(mu, np.inf)
    if not upper.pieces:
        return np.zeros(len(lambdas), dtype=complex)
    coeffs, lo, h = upper.arrays()
    s = TWO_PI_I * (lambdas + 1j * w.w)
    return TWO_PI_I * piece_integrals(coeffs, lo, h, s, shift=mu).sum(axis=0)


def coefficient(f: SpectralSignal, lam: float, mu: float, w: WindowParam) -> complex:
    """Single frame coefficient ``c_{lam,n}`` by the half-line formula."""
    return complex(_coefficient_column(f, np.array([float(lam)]), float(mu), w)[0])


def _points(x) -> np.ndarray:
    return np.asarray(getattr(x, "points", x), dtype=float)


def analyze(f: SpectralSignal, Lambda: PointSet, M: FrequencySet, w: WindowParam) -> CoefficientTable:
    """All coefficients ``c_{lam,n}`` for ``lam`` in Lambda and ``mu_n`` in M."""
    lambdas = _points(Lambda)
    mus = _points(M)
    out = np.empty((len(lambdas), len(mus)), dtype=complex)
    for n, mu in enumerate(mus):
        try:
            out[:, n] = _coefficient_column(f, lambdas, mu, w)
        except ExpRangeError as exc:
            raise ExpRangeError(exc.magnitude) from ValueError(f"analyze: band n={n} (mu={mu})")
    desc = {}
    for name, obj in (("Lambda", Lambda), ("M", M)):
        d = getattr(obj, "descriptor", None)
        if d:
            desc[name] = dict(d)
    return CoefficientTable(out, lambdas, mus, w.w, False, desc)


def identity_side(f: SpectralSignal, lambdas, M: FrequencySet, w: WindowParam) -> np.ndarray:
    """Coefficients rebuilt from the band functions ``h_k(lam + i w)``.

    ``2 pi i exp(-2 pi i mu_n lam) sum_{k >= n} h_k(lam + i w)
    exp(2 pi i mu_k lam) exp(2 pi w (mu_n - mu_k))``
    """
    lambdas = _points(lambdas)
    bands = band_decompose(f, M)
    mus = M.points
    z = lambdas + 1j * w.w
    # omega_{lam,k} = h_k(lam + i w) exp(2 pi i mu_k lam)
    omega = np.zeros((len(lambdas), len(mus)), dtype=complex)
    for k, band in enumerate(bands.bands):
        if band.pieces:
            omega[:, k] = evaluate_time(band, z) * np.exp(TWO_PI_I * mus[k] * lambdas)
    out = np.zeros_like(omega)
    for n in range(len(mus)):
        weights = np.exp(-w.rate * (mus[n:] - mus[n]))
        out[:, n] = np.exp(-TWO_PI_I * mus[n] * lambdas) * (omega[:, n:] @ weights)
    return TWO_PI_I * out


def band_identity_residual(f: SpectralSignal, Lambda, M: FrequencySet, w: WindowParam) -> float:
    """Max deviation between the half-line coefficients and the band sum, scaled by the largest entry."""
    direct = analyze(f, Lambda, M, w).values
    rebuilt = identity_side(f, Lambda, M, w)
    scale = np.max(np.abs(direct)) if direct.size else 0.0
    if scale == 0:
        return float(np.max(np.abs(rebuilt), initial=0.0))
    return float(np.max(np.abs(direct - rebuilt)) / scale)


def phase_twist(c: CoefficientTable, sign: int = 1) -> CoefficientTable:
    """``d_{lam,n} = c_{lam,n} exp(2 pi i mu_n lam)``; ``sign=-1`` undoes it."""
    factor = np.exp(sign * TWO_PI_I * np.outer(c.lambdas, c.mus))
    twisted = c.twisted if sign == 0 else (sign > 0)
    return CoefficientTable(c.values * factor, c.lambdas, c.mus, c.w, twisted, c.descriptors)
