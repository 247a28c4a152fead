"""Sampling in PW[0, beta]: spectral weights, least-squares recovery, constants.

The band functions of a signal are only ever observed at the shifted points
``lam + i w``. Since ``h(lam + i w) = g(lam)`` with
``ghat(xi) = hhat(xi) exp(-2 pi xi w)``, and the weight is bounded above and
below on ``[0, beta]``, complex sampling reduces to real sampling of ``g``.

The trial space for spectra on ``[0, beta]`` is the span of ``G`` hat
functions on a uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla

from .cauchy_analysis import WindowParam
from .expquad import MAX_EXPONENT, ExpRangeError, Polynomial, piece_integrals, taylor_shift
from .lattice import PointSet
from .spectrum import Piece, SpectralSignal

SHIFT_TOL = 1e-12
CONCENTRATION = 0.99
# composite Gauss-Legendre on the time axis: panel length in units of 1/beta
TIME_PANEL = 0.25
TIME_NODES = 8


class SolverError(RuntimeError):
    """Least-squares problem is rank deficient or otherwise unsolvable."""


# -- spectral weight ---------------------------------------------------------


def _weighted_pieces(piece: Piece, rate: complex, tol: float) -> list[Piece]:
    """Re-approximate ``q(xi - lo) exp(rate * xi)`` on one piece by degree-8 pieces.

    On each sub-piece the product's Taylor series about the midpoint is the
    convolution of both factors' series; it is cut at degree 8 and the
    discarded tail is bounded termwise. Sub-pieces are halved until that
    bound falls below ``tol`` (absolute).
    """
    q = piece.poly.as_array()
    extra = 8 + len(q) + 24
    j = np.arange(extra)
    inv_fact = np.array([1.0 / math.factorial(k) for k in j])
    out: list[Piece] = []
    stack = [(piece.lo, piece.hi)]
    while stack:
        a, b = stack.pop()
        h = b - a
        mid = a + h / 2
        P = taylor_shift(q, mid - piece.lo)
        E = np.exp(rate * mid) * rate**j * inv_fact
        series = np.convolve(P, E)
        radius = (h / 2) ** np.arange(len(series))
        tail = float(np.sum(np.abs(series[9:]) * radius[9:]))
        if tail <= tol or h <= piece.length * 2.0**-24:
            out.append(Piece(a, b, Polynomial(taylor_shift(series[:9], -h / 2))))
        else:
            stack.extend([(mid, b), (a, mid)])
    return out


def shift_weight(f: SpectralSignal, w: WindowParam, direction: str = "apply") -> SpectralSignal:
    """Multiply a band spectrum by ``exp(-2 pi xi w)`` (apply) or its inverse (remove).

    The product is re-approximated piecewise; the relative L2 error stays
    far below 1e-8.
    """
    if direction == "apply":
        rate = -w.rate
    elif direction == "remove":
        rate = w.rate
    else:
        raise ValueError(f"direction must be 'apply' or 'remove', got {direction!r}")
    if f.pieces:
        peak = max(rate.real * f.pieces[0].lo, rate.real * f.pieces[-1].hi)
        if peak > MAX_EXPONENT:
            raise ExpRangeError(peak)
    scale = 0.0
    for p in f.pieces:
        u = np.linspace(p.lo, p.hi, 33)
        scale = max(scale, float(np.max(np.abs(p.poly(u - p.lo) * np.exp(rate * u)))))
    pieces: list[Piece] = []
    for p in f.pieces:
        if p.poly.is_zero:
            pieces.append(p)
        else:
            pieces.extend(_weighted_pieces(p, rate, SHIFT_TOL * scale))
    return SpectralSignal(tuple(pieces))


# -- trial space -------------------------------------------------------------


def hat_grid(beta: float, G: int) -> np.ndarray:
    return np.linspace(0.0, beta, G)


def hat_design(z, beta: float, G: int) -> np.ndarray:
    """``D[l, j] = int hat_j(xi) exp(2 pi i xi z_l) dxi`` for the G-point hat basis."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    x = hat_grid(beta, G)
    dx = x[1] - x[0]
    lo = x[:-1]
    h = np.full(G - 1, dx)
    falling = np.tile([1.0, -1.0 / dx], (G - 1, 1))
    rising = np.tile([0.0, 1.0 / dx], (G - 1, 1))
    s = 2j * np.pi * z
    left = piece_integrals(falling, lo, h, s)
    right = piece_integrals(rising, lo, h, s)
    D = np.zeros((z.size, G), dtype=complex)
    D[:, :-1] += left.T
    D[:, 1:] += right.T
    return D


def hat_mass(beta: float, G: int, weight: complex | None = None) -> np.ndarray:
    """Gram matrix of the hat basis in ``L2(0, beta)``.

    With ``weight = w`` the basis is ``hat_j(xi) exp(-2 pi xi w)`` instead.
    """
    dx = beta / (G - 1)
    if weight is not None:
        lo = hat_grid(beta, G)[:-1]
        h = np.full(G - 1, dx)
        s = np.array([-4 * np.pi * complex(weight).real])
        prods = np.array([[1.0, -2 / dx, 1 / dx**2], [0.0, 1 / dx, -1 / dx**2], [0.0, 0.0, 1 / dx**2]])
        ints = [piece_integrals(np.tile(q, (G - 1, 1)), lo, h, s)[:, 0].real for q in prods]
        main = np.zeros(G)
        main[:-1] += ints[0]
        main[1:] += ints[2]
        return np.diag(main) + np.diag(ints[1], 1) + np.diag(ints[1], -1)
    main = np.full(G, 2 * dx / 3)
    main[[0, -1]] = dx / 3
    off = np.full(G - 1, dx / 6)
    return np.diag(main) + np.diag(off, 1) + np.diag(off, -1)


def hats_to_signal(coeffs: Sequence[complex], beta: float) -> SpectralSignal:
    """Piecewise-linear spectrum with nodal values ``coeffs`` on ``[0, beta]``."""
    c = np.asarray(coeffs, dtype=complex)
    x = hat_grid(beta, len(c))
    dx = x[1] - x[0]
    pieces = [
        Piece(float(x[i]), float(x[i + 1]), Polynomial([c[i], (c[i + 1] - c[i]) / dx]))
        for i in range(len(c) - 1)
    ]
    return SpectralSignal(tuple(pieces))


def time_quadrature(a: float, b: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on ``[a, b]`` resolving bandwidth beta."""
    n = max(1, int(math.ceil((b - a) * beta / TIME_PANEL)))
    edges = np.linspace(a, b, n + 1)
    gx, gw = np.polynomial.legendre.leggauss(TIME_NODES)
    half = (edges[1:] - edges[:-1])[:, None] / 2
    mid = (edges[1:] + edges[:-1])[:, None] / 2
    return (mid + half * gx).ravel(), (half * gw).ravel()


# -- problems ---------------------------------------------------------------


def matched_trial_size(window_length: float, beta: float, fill: float = 0.8) -> int:
    """Trial dimension matched to a time window: ``fill`` times its time-bandwidth product."""
    return max(2, int(round(fill * window_length * beta)) + 1)


def default_window(lambdas: np.ndarray) -> tuple[float, float]:
    """Hull of Lambda padded by half the end spacings."""
    if len(lambdas) < 2:
        return float(lambdas[0]) - 0.5, float(lambdas[0]) + 0.5
    return (
        float(lambdas[0] - (lambdas[1] - lambdas[0]) / 2),
        float(lambdas[-1] + (lambdas[-1] - lambdas[-2]) / 2),
    )


@dataclass(frozen=True)
class SamplingProblem:
    """Sampling of PW[0, beta] on a Lambda window with a G-dimensional trial space.

    ``eps=None`` selects ``1e-10 * sigma_max**2``. ``kappa`` is the time
    concentration threshold of the taper used by :func:`sampling_constants`;
    ``window`` defaults to the padded hull of Lambda. With ``weight = w`` the
    trial space is ``{hhat(xi) exp(-2 pi xi w)}`` for piecewise-linear ``hhat``;
    this suits spectra that carry the weight of a band function.
    """

    lambdas: np.ndarray
    beta: float
    G: int
    eps: float | None = None
    kappa: float = CONCENTRATION
    window: tuple[float, float] | None = None
    descriptor: dict[str, Any] = field(default_factory=dict)
    weight: complex | None = None

    def __post_init__(self):
        lam = np.asarray(getattr(self.lambdas, "points", self.lambdas), dtype=float)
        if isinstance(self.lambdas, PointSet) and not self.descriptor:
            object.__setattr__(self, "descriptor", dict(self.lambdas.descriptor))
        object.__setattr__(self, "lambdas", lam)
        if not self.beta > 0:
            raise ValueError("SamplingProblem: beta must be positive")
        if self.G < 2:
            raise ValueError("SamplingProblem: G must be >= 2")
        if self.eps is not None and self.eps < 0:
            raise ValueError("SamplingProblem: eps must be >= 0")
        if not 0 < self.kappa < 1:
            raise ValueError("SamplingProblem: kappa must lie in (0, 1)")
        if self.window is None:
            object.__setattr__(self, "window", default_window(lam))

    def design(self) -> np.ndarray:
        if self.weight is None:
            return hat_design(self.lambdas, self.beta, self.G)
        return hat_design(self.lambdas + 1j * complex(self.weight), self.beta, self.G)

    def mass(self) -> np.ndarray:
        return hat_mass(self.beta, self.G, self.weight)


def ls_reconstruct(samples, problem: SamplingProblem) -> SpectralSignal:
    """Regularized least-squares recovery of ``ghat`` on ``[0, beta]`` from point samples.

    ``samples`` is a sequence of ``(lam, value)`` pairs, or a pair of arrays.
    Minimizes ``sum |g(lam) - v|^2 + eps ||ghat||^2`` over the hat space,
    using the SVD of the design matrix in an L2-orthonormal coordinate system.
    """
    lam, vals = _unpack_samples(samples)
    if len(lam) < problem.G:
        raise SolverError(
            f"ls_reconstruct: {len(lam)} samples for a {problem.G}-dimensional trial space"
        )
    if problem.weight is None:
        D = hat_design(lam, problem.beta, problem.G)
    else:
        D = hat_design(lam + 1j * complex(problem.weight), problem.beta, problem.G)
    R = sla.cholesky(problem.mass(), lower=False)  # mass = R^H R
    Dt = sla.solve_triangular(R, D.T, trans="T", lower=False).T  # D R^{-1}
    U, sig, Vh = sla.svd(Dt, full_matrices=False)
    eps = 1e-10 * sig[0] ** 2 if problem.eps is None else problem.eps
    if eps == 0 and (sig[-1] <= 1e-13 * sig[0]):
        raise SolverError(
            "ls_reconstruct: design matrix is rank deficient; use eps > 0"
        )
    filt = sig / (sig**2 + eps) if sig[0] > 0 else np.zeros_like(sig)
    u = Vh.conj().T @ (filt * (U.conj().T @ vals))
    c = sla.solve_triangular(R, u, lower=False)
    out = hats_to_signal(c, problem.beta)
    if problem.weight is not None:
        out = shift_weight(out, WindowParam(problem.weight), "apply")
    return out


def _unpack_samples(samples):
    if isinstance(samples, tuple) and len(samples) == 2 and np.ndim(samples[0]) == 1:
        lam, vals = samples
    else:
        pairs = list(samples)
        lam = [p[0] for p in pairs]
        vals = [p[1] for p in pairs]
    return np.asarray(lam, dtype=float), np.asarray(vals, dtype=complex)


@dataclass(frozen=True)
class SamplingConstants:
    A_est: float
    B_est: float
    diagnostics: dict[str, Any]

    def __iter__(self):
        return iter((self.A_est, self.B_est))


def concentration_basis(problem: SamplingProblem) -> tuple[np.ndarray, np.ndarray]:
    """L2-orthonormal trial vectors sorted by time concentration in the window.

    Returns ``(rho, V)`` where column ``V[:, i]`` (hat coordinates) keeps the
    fraction ``rho[i]`` of its energy inside ``problem.window``.
    """
    a, b = problem.window
    t, wt = time_quadrature(a, b, problem.beta)
    shift = 0j if problem.weight is None else 1j * complex(problem.weight)
    E = hat_design(t + shift, problem.beta, problem.G)
    C = (E.conj().T * wt) @ E
    C = (C + C.conj().T) / 2
    rho, V = sla.eigh(C, problem.mass())
    return rho[::-1], V[:, ::-1]


def sampling_constants(problem: SamplingProblem) -> SamplingConstants:
    """Estimate the sampling constants of Lambda for PW[0, beta].

    The quadratic form ``f -> sum_lam |f(lam)|^2 / ||f||^2`` is restricted to
    trial functions keeping at least ``kappa`` of their energy inside the
    Lambda window (a hard taper in the time-concentration eigenbasis);
    functions living mostly outside a finite window say nothing about
    sampling. The constants are the extreme squared singular values of the
    design matrix on that subspace.
    """
    rho, V = concentration_basis(problem)
    keep = rho >= problem.kappa
    retained = int(np.count_nonzero(keep))
    if retained == 0:
        raise SolverError(
            "sampling_constants: no trial function is concentrated in the window; "
            "enlarge the window or lower kappa"
        )
    sig = sla.svd(problem.design() @ V[:, keep], compute_uv=False)
    diag = {
        "G": problem.G,
        "beta": problem.beta,
        "n_samples": int(len(problem.lambdas)),
        "window": list(problem.window),
        "taper": "time-concentration",
        "kappa": problem.kappa,
        "retained_dim": retained,
        "min_concentration": float(rho[keep][-1]),
    }
    return SamplingConstants(float(sig[-1] ** 2), float(sig[0] ** 2), diag)
