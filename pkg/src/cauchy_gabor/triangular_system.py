"""The gap matrices linking twisted coefficients to band samples.

Per time point, ``d = 2 pi i A omega`` where ``A`` is upper triangular with
``a_{n,k} = exp(-2 pi w (mu_k - mu_n))`` for ``k >= n``. ``A`` factors as
``(I - B)^{-1}`` with ``B`` carrying ``exp(-gamma_p)`` on the first
superdiagonal, ``gamma_p = 2 pi w (mu_{p+1} - mu_p)``. Inversion therefore
costs one subtraction per entry.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .cauchy_analysis import CoefficientTable, WindowParam
from .expquad import ExpRangeError
from .lattice import FrequencySet, make_frequency_set


@dataclass(frozen=True)
class GammaSequence:
    gammas: np.ndarray
    w: complex
    mus: np.ndarray


def gamma_sequence(M: FrequencySet, w: WindowParam) -> GammaSequence:
    return GammaSequence(w.rate * M.gaps, w.w, M.points)


@dataclass(frozen=True)
class TriangularSystem:
    mus: np.ndarray
    w: complex
    B: np.ndarray
    A: np.ndarray

    @property
    def size(self) -> int:
        return len(self.mus)

    @property
    def attenuations(self) -> np.ndarray:
        """``exp(-gamma_p)``, the superdiagonal of B."""
        return np.diag(self.B, 1)

    def to_csv(self, which: str = "A") -> str:
        mat = {"A": self.A, "B": self.B}[which]
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["row", "col", "re", "im"])
        for r, c in zip(*np.nonzero(mat)):
            v = mat[r, c]
            wr.writerow([int(r), int(c), repr(v.real), repr(v.imag)])
        return buf.getvalue()


def build_system(M: FrequencySet, w: WindowParam) -> TriangularSystem:
    """Matrices B and A on the window of M (dimension ``len(M)``)."""
    mus = M.points
    n = len(mus)
    # exponents only decay (Re w > 0, mu_k >= mu_n) and underflow harmlessly;
    # the exponent itself must still be a finite number
    span = float(w.rate.real) * float(mus[-1] - mus[0])
    if not math.isfinite(span):
        raise ExpRangeError(span)
    diff = mus[None, :] - mus[:, None]  # mu_k - mu_n
    upper = diff >= 0
    A = np.zeros((n, n), dtype=complex)
    A[upper] = np.exp(-w.rate * diff[upper])
    B = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    B[idx, idx + 1] = np.exp(-w.rate * M.gaps)
    return TriangularSystem(mus.copy(), w.w, B, A)


def neumann_norm(M: FrequencySet, w: WindowParam, N: int) -> tuple[float, bool | None]:
    """Operator norm of ``B**N`` and whether it obeys ``||B^N|| <= exp(-Re w)``.

    ``B**N`` lives on the N-th superdiagonal with entries
    ``exp(-2 pi w (mu_{p+N} - mu_p))``; the norm is the largest modulus. The
    bound is only asserted when every window ``mu_{p+N} - mu_p`` is at least 1;
    otherwise the flag is ``None``.
    """
    n = len(M)
    if not 1 <= N < n:
        raise ValueError(f"neumann_norm: N={N} outside [1, {n - 1}]")
    windows = M.points[N:] - M.points[:-N]
    shortest = float(np.min(windows))
    norm = math.exp(-w.rate.real * shortest)
    ok = norm <= math.exp(-w.w.real) if shortest >= 1 else None
    return norm, ok


def neumann_partial_sum(system: TriangularSystem, J: int) -> np.ndarray:
    """``I + B + ... + B**J``, used only to check the series against A."""
    n = system.size
    total = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for _ in range(J):
        term = term @ system.B
        total += term
    return total


def apply_A(omega: np.ndarray, system: TriangularSystem) -> np.ndarray:
    """Rows ``d_lam = A omega_lam`` for a ``(L, n)`` array of rows."""
    return omega @ system.A.T


def recover_rows(d: np.ndarray, attenuations: np.ndarray) -> np.ndarray:
    """Apply ``I - B`` to each row: ``omega_n = d_n - exp(-gamma_n) d_{n+1}``."""
    out = np.array(d, dtype=complex)
    out[:, :-1] -= attenuations[None, :] * d[:, 1:]
    return out


def recover_omega(d: CoefficientTable) -> CoefficientTable:
    """Exact bidiagonal inversion of ``d = A omega`` on the table's window.

    The top band keeps ``omega = d``: the band above the window is absent.
    """
    M = make_frequency_set(d.mus)
    att = np.exp(-2 * np.pi * complex(d.w) * M.gaps)
    return CoefficientTable(
        recover_rows(d.values, att), d.lambdas, d.mus, d.w, d.twisted, d.descriptors
    )
