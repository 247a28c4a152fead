"""Empirical frame bounds of the Cauchy-kernel Gabor system on finite windows.

The analysis operator is assembled on a finite-dimensional spectral trial
space: piecewise-linear functions that are continuous inside each band
``[mu_k, mu_{k+1}]`` and may jump at the points of M (where the half-line
coefficients have their kinks). Near both ends of the trial interval the
spectra are multiplied by a C1 cubic ramp. After orthonormalizing the basis,
the extreme squared singular values of the analysis matrix are the extreme
Rayleigh quotients of the frame sum.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla

from .cauchy_analysis import TWO_PI_I, WindowParam
from .expquad import piece_integrals
from .lattice import PointSet, _validate_increasing, point_set, point_set_from_descriptor

SVD_LIMIT = 2000
ITER_TOL = 1e-8


@dataclass(frozen=True)
class FrameProblem:
    """Windows of Lambda and M, the window parameter, and the trial space.

    ``interval`` defaults to ``[min M, max M]``; ``taper`` is the ramp width
    at each end of the interval (``None`` picks the largest gap of M, ``0``
    disables the ramp).
    """

    Lambda: PointSet
    M: np.ndarray
    w: WindowParam
    G: int
    interval: tuple[float, float] | None = None
    taper: float | None = None

    def __post_init__(self):
        if self.G < 2:
            raise ValueError("FrameProblem: G must be >= 2")
        if not isinstance(self.Lambda, PointSet):
            object.__setattr__(self, "Lambda", point_set(np.atleast_1d(self.Lambda)))
        if len(self.Lambda) == 0:
            raise ValueError("FrameProblem: empty Lambda window")
        # a single frequency is allowed here (atom-level checks)
        mus = _validate_increasing(np.atleast_1d(getattr(self.M, "points", self.M)), "FrameProblem")
        if mus.size == 0:
            raise ValueError("FrameProblem: empty M window")
        object.__setattr__(self, "M", mus)
        if not isinstance(self.w, WindowParam):
            object.__setattr__(self, "w", WindowParam(self.w))
        if self.interval is None:
            object.__setattr__(self, "interval", (float(mus[0]), float(mus[-1])))
        a, b = (float(x) for x in self.interval)
        object.__setattr__(self, "interval", (a, b))
        if not b > a:
            raise ValueError("FrameProblem: empty trial interval")
        if self.taper is None:
            object.__setattr__(self, "taper", float(np.max(np.diff(mus))) if mus.size > 1 else 0.0)
        if self.taper < 0 or 2 * self.taper > b - a:
            raise ValueError("FrameProblem: taper must fit twice inside the trial interval")

    @property
    def lambdas(self) -> np.ndarray:
        return self.Lambda.points

    @property
    def mus(self) -> np.ndarray:
        return self.M


# -- trial space ---------------------------------------------------------------


@dataclass(frozen=True)
class TrialSpace:
    """Band-broken hat basis on ``[a, b]`` given as per-cell polynomial pieces.

    ``cell_lo``/``cell_h`` describe the cells; ``pieces`` lists
    ``(basis index, cell index, local coefficients)``.
    """

    cell_lo: np.ndarray
    cell_h: np.ndarray
    basis_cells: tuple[tuple[int, int, np.ndarray], ...]
    dim: int

    def coefficient_arrays(self):
        deg = max(len(c) for _, _, c in self.basis_cells)
        coeffs = np.zeros((len(self.basis_cells), deg), dtype=complex)
        for i, (_, _, c) in enumerate(self.basis_cells):
            coeffs[i, : len(c)] = c
        basis = np.array([j for j, _, _ in self.basis_cells])
        cells = np.array([k for _, k, _ in self.basis_cells])
        return coeffs, basis, cells

    def gram(self) -> np.ndarray:
        Gm = np.zeros((self.dim, self.dim), dtype=complex)
        by_cell: dict[int, list[tuple[int, np.ndarray]]] = {}
        for j, k, c in self.basis_cells:
            by_cell.setdefault(k, []).append((j, c))
        for k, items in by_cell.items():
            h = self.cell_h[k]
            for j1, c1 in items:
                for j2, c2 in items:
                    prod = np.convolve(c1, np.conj(c2))
                    p = np.arange(len(prod))
                    Gm[j1, j2] += np.sum(prod * h ** (p + 1) / (p + 1))
        return (Gm + Gm.conj().T) / 2

    def signal_coefficients_to_pieces(self, x: np.ndarray):
        """Per-cell local polynomials of the trial function with coordinates ``x``."""
        coeffs, basis, cells = self.coefficient_arrays()
        out = np.zeros((len(self.cell_lo), coeffs.shape[1]), dtype=complex)
        np.add.at(out, cells, coeffs * x[basis][:, None])
        return out


def _ramp_coeffs(lo: float, h: float, start: float, width: float, rising: bool) -> np.ndarray:
    """Local cubic of the C1 smoothstep on one cell (variable ``x = xi - lo``)."""
    # smoothstep s(u) = 3u^2 - 2u^3 with u = (xi - start)/width = (x + lo - start)/width
    a = (lo - start) / width
    k = 1.0 / width
    # u = a + k x ; s = 3u^2 - 2u^3
    u = np.array([a, k])
    u2 = np.convolve(u, u)
    u3 = np.convolve(u2, u)
    s = 3 * np.pad(u2, (0, 1)) - 2 * u3
    return s if rising else np.array([1.0, 0, 0, 0]) - s


def build_trial_space(problem: FrameProblem) -> TrialSpace:
    a, b = problem.interval
    breaks = [a] + [float(m) for m in problem.mus if a < m < b] + [b]
    tw = problem.taper
    if tw > 0:
        for x in (a + tw, b - tw):
            if not any(abs(x - y) < 1e-12 for y in breaks):
                breaks.append(x)
    breaks = sorted(breaks)
    # M points split the interval into segments; taper ends are only cell breaks
    seg_edges = [a] + [float(m) for m in problem.mus if a < m < b] + [b]
    n_seg = len(seg_edges) - 1
    total_cells = max(problem.G - n_seg, n_seg)
    lengths = np.diff(seg_edges)
    per_seg = np.maximum(1, np.round(total_cells * lengths / lengths.sum()).astype(int))

    cell_lo: list[float] = []
    cell_h: list[float] = []
    basis_cells: list[tuple[int, int, np.ndarray]] = []
    j0 = 0
    for s_idx in range(n_seg):
        sa, sb = seg_edges[s_idx], seg_edges[s_idx + 1]
        nodes = list(np.linspace(sa, sb, per_seg[s_idx] + 1))
        extra = [x for x in breaks if sa < x < sb and min(abs(x - y) for y in nodes) > 1e-12]
        cuts = sorted(nodes + extra)
        for c_lo, c_hi in zip(cuts[:-1], cuts[1:]):
            k = len(cell_lo)
            cell_lo.append(c_lo)
            cell_h.append(c_hi - c_lo)
            # enclosing node interval
            i = int(np.searchsorted(nodes, c_lo + 1e-12 * (sb - sa), side="right")) - 1
            n_lo, n_hi = nodes[i], nodes[i + 1]
            dn = n_hi - n_lo
            off = c_lo - n_lo
            falling = np.array([1 - off / dn, -1 / dn])
            rising = np.array([off / dn, 1 / dn])
            ramp = _taper_on_cell(c_lo, c_hi - c_lo, a, b, tw)
            for idx, poly in ((j0 + i, falling), (j0 + i + 1, rising)):
                coeffs = np.convolve(poly, ramp) if ramp is not None else poly
                basis_cells.append((idx, k, coeffs.astype(complex)))
        j0 += len(nodes)
    space = TrialSpace(np.array(cell_lo), np.array(cell_h), tuple(basis_cells), j0)
    return _drop_null(space)


def _taper_on_cell(lo, h, a, b, tw):
    if tw <= 0:
        return None
    mid = lo + h / 2
    if mid < a + tw:
        return _ramp_coeffs(lo, h, a, tw, rising=True)
    if mid > b - tw:
        return _ramp_coeffs(lo, h, b - tw, tw, rising=False)
    return None


def _drop_null(space: TrialSpace) -> TrialSpace:
    """Remove basis functions that the taper annihilates (the two end hats)."""
    Gm = space.gram()
    norms = np.real(np.diag(Gm))
    keep = norms > 1e-14 * np.max(norms)
    if keep.all():
        return space
    remap = -np.ones(space.dim, dtype=int)
    remap[keep] = np.arange(int(keep.sum()))
    cells = tuple((int(remap[j]), k, c) for j, k, c in space.basis_cells if keep[j])
    return TrialSpace(space.cell_lo, space.cell_h, cells, int(keep.sum()))


# -- analysis matrix -----------------------------------------------------------


def raw_analysis_matrix(problem: FrameProblem, space: TrialSpace | None = None) -> np.ndarray:
    """Rows ``(lam, n)`` (lam-major), columns: coefficients of the raw trial basis."""
    space = space or build_trial_space(problem)
    lambdas, mus = problem.lambdas, problem.mus
    s = TWO_PI_I * (lambdas + 1j * problem.w.w)
    coeffs, basis, cells = space.coefficient_arrays()
    local = piece_integrals(coeffs, np.zeros(len(basis)), space.cell_h[cells], s)  # (P, L)
    lo = space.cell_lo[cells]
    out = np.zeros((len(lambdas), len(mus), space.dim), dtype=complex)
    for n, mu in enumerate(mus):
        above = lo >= mu - 1e-12
        if not above.any():
            continue
        phase = np.exp(np.outer(lo[above] - mu, s))  # (P', L), modulus <= 1
        contrib = (local[above] * phase).T  # (L, P')
        col = np.zeros((len(lambdas), space.dim), dtype=complex)
        for p_idx, j in enumerate(basis[above]):
            col[:, j] += contrib[:, p_idx]
        out[:, n, :] = TWO_PI_I * col
    return out.reshape(len(lambdas) * len(mus), space.dim)


def assemble_analysis_matrix(problem: FrameProblem) -> np.ndarray:
    """Analysis matrix in an orthonormal trial basis (rows ``(lam, n)``, lam-major)."""
    space = build_trial_space(problem)
    D = raw_analysis_matrix(problem, space)
    R = sla.cholesky(space.gram(), lower=False)
    return sla.solve_triangular(R, D.T, trans="T", lower=False).T


# -- bounds ----------------------------------------------------------------------


@dataclass
class FrameReport:
    A_est: float
    B_est: float
    window: dict[str, Any]
    stability: dict[str, Any] = field(default_factory=dict)
    runtime: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "A_est": self.A_est,
                "B_est": self.B_est,
                "window": self.window,
                "stability": self.stability,
                "runtime": self.runtime,
                "error": self.error,
            },
            sort_keys=True,
        )

    def csv_row(self) -> dict[str, Any]:
        row = {k: v for k, v in self.window.items() if not isinstance(v, (list, dict))}
        row.update(A_est=self.A_est, B_est=self.B_est, error=self.error or "")
        for k, v in self.stability.items():
            row[f"stability_{k}"] = v
        return row


def _extreme_squared_singular_values(D: np.ndarray) -> tuple[float, float, str]:
    if min(D.shape) <= SVD_LIMIT:
        sig = sla.svd(D, compute_uv=False)
        return float(sig[-1] ** 2), float(sig[0] ** 2), "svd"
    K = D.conj().T @ D
    return (*_iterative_extremes(K), "power/inverse iteration")


def _iterative_extremes(K: np.ndarray, maxiter: int = 5000) -> tuple[float, float]:
    rng = np.random.default_rng(0)
    n = K.shape[0]
    v = rng.standard_normal(n) + 0j
    v /= np.linalg.norm(v)
    top = 0.0
    for _ in range(maxiter):
        u = K @ v
        new = float(np.real(np.vdot(v, u)))
        v = u / np.linalg.norm(u)
        if abs(new - top) <= ITER_TOL * abs(new):
            top = new
            break
        top = new
    cho = sla.cho_factor(K)
    v = rng.standard_normal(n) + 0j
    v /= np.linalg.norm(v)
    low_inv = 0.0
    for _ in range(maxiter):
        u = sla.cho_solve(cho, v)
        new = float(np.real(np.vdot(v, u)))
        v = u / np.linalg.norm(u)
        if abs(new - low_inv) <= ITER_TOL * abs(new):
            low_inv = new
            break
        low_inv = new
    return 1.0 / low_inv, top


def _window_meta(p: FrameProblem, dim: int) -> dict[str, Any]:
    return {
        "n_lambda": int(len(p.Lambda)),
        "lambda_window": [float(p.lambdas[0]), float(p.lambdas[-1])],
        "lambda_descriptor": dict(p.Lambda.descriptor),
        "n_mu": int(len(p.mus)),
        "mu_window": [float(p.mus[0]), float(p.mus[-1])],
        "w": [p.w.w.real, p.w.w.imag],
        "G": p.G,
        "trial_dim": dim,
        "interval": list(p.interval),
        "taper": p.taper,
    }


def doubled(problem: FrameProblem, scale_trial: bool = True) -> FrameProblem:
    """The same scenario on a Lambda window twice as long (trial size doubled too)."""
    desc = dict(problem.Lambda.descriptor)
    if desc.get("kind", "explicit") == "explicit":
        raise ValueError("doubling needs a generator descriptor for Lambda")
    a, b = desc["window"]
    c, r = (a + b) / 2, (b - a)
    desc["window"] = [c - r, c + r]
    G = problem.G * 2 if scale_trial else problem.G
    return replace(problem, Lambda=point_set_from_descriptor(desc), G=G)


def frame_bounds(problem: FrameProblem, check_doubling: bool = False) -> FrameReport:
    """Estimate ``A`` and ``B`` of the frame inequality on the discretized problem.

    With ``check_doubling`` the problem is re-solved on a doubled Lambda window
    (and doubled trial dimension) and the relative changes are reported.
    """
    t0 = time.perf_counter()
    D = assemble_analysis_matrix(problem)
    t1 = time.perf_counter()
    A, B, method = _extreme_squared_singular_values(D)
    t2 = time.perf_counter()
    report = FrameReport(
        A,
        B,
        _window_meta(problem, D.shape[1]),
        runtime={"assemble_s": t1 - t0, "decompose_s": t2 - t1},
    )
    report.window["method"] = method
    if check_doubling:
        big = frame_bounds(doubled(problem))
        report.stability = {
            "A_doubled": big.A_est,
            "B_doubled": big.B_est,
            "A_ratio": big.A_est / A if A > 0 else math.inf,
            "B_ratio": big.B_est / B if B > 0 else math.inf,
        }
    return report


# -- sweeps ----------------------------------------------------------------------

SWEEP_AXES = (
    "lambda.step",
    "lambda.gap_width",
    "lambda.multiplicity",
    "lambda.spread",
    "lambda.amplitude",
    "w.re",
    "w.im",
    "G",
)


def _with_param(base: FrameProblem, axis: str, value) -> FrameProblem:
    if axis.startswith("lambda."):
        key = axis.split(".", 1)[1]
        desc = dict(base.Lambda.descriptor)
        if desc.get("kind", "explicit") == "explicit":
            raise ValueError("sweeping Lambda needs a generator descriptor")
        desc[key] = int(value) if key == "multiplicity" else float(value)
        return replace(base, Lambda=point_set_from_descriptor(desc))
    if axis == "w.re":
        return replace(base, w=WindowParam(complex(float(value), base.w.w.imag)))
    if axis == "w.im":
        return replace(base, w=WindowParam(complex(base.w.w.real, float(value))))
    if axis == "G":
        return replace(base, G=int(value))
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep(base: FrameProblem, axis: str, values: Sequence, check_doubling: bool = False) -> list[FrameReport]:
    """One report per value, in input order; failures are recorded, not raised."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    reports = []
    for v in values:
        try:
            rep = frame_bounds(_with_param(base, axis, v), check_doubling)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            rep = FrameReport(math.nan, math.nan, {}, error=f"{type(exc).__name__}: {exc}")
        rep.window["sweep_axis"] = axis
        rep.window["sweep_value"] = v
        reports.append(rep)
    return reports


def reports_to_csv(reports: Sequence[FrameReport]) -> str:
    rows = [r.csv_row() for r in reports]
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()

