"""Reconstruction from frame coefficients and experiments at the frame boundary.

Reconstruction runs coefficients -> twisted coefficients -> per-band samples
-> band spectra -> spectrum:

1. ``d = c * exp(2 pi i mu_n lam)`` (phase twist);
2. ``omega = (I - B) d / (2 pi i)`` (exact bidiagonal inversion);
3. ``g_k(lam) = omega_{lam,k} exp(-2 pi i mu_k lam)`` equals ``h_k(lam + i w)``;
4. least squares for ``ghat_k`` on ``[0, beta_k]``, then the weight
   ``exp(-2 pi xi w)`` is removed;
5. bands are translated back to ``mu_k`` and concatenated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .cauchy_analysis import TWO_PI_I, CoefficientTable, WindowParam, analyze, phase_twist
from .framebounds import FrameProblem, FrameReport, frame_bounds
from .lattice import (
    FinitenessReport,
    FrequencySet,
    PointSet,
    finiteness_report,
    frequency_set_from_descriptor,
    generate_point_set,
    point_set_from_descriptor,
)
from .paley_wiener import (
    SamplingProblem,
    SolverError,
    ls_reconstruct,
    matched_trial_size,
    sampling_constants,
    shift_weight,
)
from .spectrum import (
    SpectralSignal,
    band_decompose,
    combine,
    evaluate_time,
    gaussian_spectrum,
    norm_sq,
)
from .triangular_system import recover_omega

# a lower bound "collapses" when one window doubling divides it by more than this
COLLAPSE_FACTOR = 2.0


@dataclass
class ReconstructionResult:
    recovered: SpectralSignal
    relative_l2_error: float | None
    band_residuals: list[float]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "relative_l2_error": self.relative_l2_error,
                "band_residuals": self.band_residuals,
                "diagnostics": self.diagnostics,
            },
            sort_keys=True,
        )


def _check_windows(c: CoefficientTable, lambdas: np.ndarray, mus: np.ndarray) -> None:
    if c.values.shape != (len(lambdas), len(mus)):
        raise ValueError("reconstruct: coefficient table does not match the Lambda and M windows")
    if not (np.allclose(c.lambdas, lambdas, rtol=0, atol=1e-12) and np.allclose(c.mus, mus, rtol=0, atol=1e-12)):
        raise ValueError("reconstruct: coefficient table was computed on different windows")


def band_samples(c: CoefficientTable) -> np.ndarray:
    """``omega_{lam,k} / (2 pi i)``, which equals ``h_k(lam + i w) exp(2 pi i mu_k lam)``.

    Column ``k`` is band ``[mu_k, mu_{k+1}]``; the last column belongs to
    no band and vanishes for spectra inside ``[min M, max M]``.
    """
    d = c if c.twisted else phase_twist(c)
    return recover_omega(d).values / TWO_PI_I


def reconstruct(
    c: CoefficientTable,
    Lambda,
    M: FrequencySet,
    w: WindowParam,
    G: int | Sequence[int] | None = None,
    eps: float | None = None,
    truth: SpectralSignal | None = None,
) -> ReconstructionResult:
    """Recover the spectrum from frame coefficients on finite windows.

    Parameters
    ----------
    G
        Trial dimension per band; a sequence gives one value per band. By
        default the dimension is matched to the Lambda window and band width.
    eps
        Tikhonov parameter passed to each band's least-squares solve.
    truth
        Ground truth for the error report, if known.
    """
    lambdas = np.asarray(getattr(Lambda, "points", Lambda), dtype=float)
    mus = M.points
    _check_windows(c, lambdas, mus)
    omega = band_samples(c)
    n_bands = len(mus) - 1
    widths = M.gaps
    span = float(lambdas[-1] - lambdas[0]) if len(lambdas) > 1 else 1.0
    if G is None:
        sizes = [matched_trial_size(span, b) for b in widths]
    elif np.ndim(G) == 0:
        sizes = [int(G)] * n_bands
    else:
        sizes = [int(g) for g in G]
        if len(sizes) != n_bands:
            raise ValueError(f"reconstruct: {len(sizes)} trial sizes for {n_bands} bands")

    samples = omega[:, :n_bands] * np.exp(-TWO_PI_I * np.outer(lambdas, mus[:n_bands]))
    # residuals are relative to the strongest band so empty bands report noise as noise
    scale = float(np.max(np.linalg.norm(samples, axis=0), initial=0.0))
    pieces = []
    residuals = []
    for k in range(n_bands):
        g = samples[:, k]
        problem = SamplingProblem(lambdas, float(widths[k]), sizes[k], eps=eps, weight=w.w)
        try:
            ghat = ls_reconstruct((lambdas, g), problem)
        except SolverError as exc:
            raise SolverError(f"reconstruct: band {k} (mu={mus[k]:g}): {exc}") from exc
        fit = evaluate_time(ghat, lambdas) if ghat.pieces else np.zeros_like(g)
        residuals.append(float(np.linalg.norm(fit - g) / scale) if scale > 0 else 0.0)
        pieces.extend(shift_weight(ghat, w, "remove").translated(float(mus[k])).pieces)
    recovered = SpectralSignal(tuple(pieces))

    peak = float(np.max(np.abs(omega))) if omega.size else 0.0
    edge = max(1, len(lambdas) // 10)
    outer = np.concatenate([omega[:edge, :-1], omega[-edge:, :-1]]).ravel()
    diagnostics = {
        "n_bands": n_bands,
        "trial_sizes": sizes,
        # omega above the last point of M must vanish when the support assumption holds
        "top_band_boundary": float(np.max(np.abs(omega[:, -1])) / peak) if peak > 0 else 0.0,
        # band samples still alive at the ends of the Lambda window
        "window_leakage": float(np.max(np.abs(outer)) / peak) if peak > 0 and outer.size else 0.0,
    }
    err = None
    if truth is not None:
        ref = norm_sq(truth)
        diff = norm_sq(combine([recovered, truth], [1.0, -1.0]))
        err = math.sqrt(diff / ref) if ref > 0 else math.sqrt(diff)
    return ReconstructionResult(recovered, err, residuals, diagnostics)


def sample_identity_residual(f: SpectralSignal, Lambda, M: FrequencySet, w: WindowParam) -> float:
    """Max gap between recovered band samples and ``h_k(lam + i w) exp(2 pi i mu_k lam)``."""
    lambdas = np.asarray(getattr(Lambda, "points", Lambda), dtype=float)
    omega = band_samples(analyze(f, lambdas, M, w))
    bands = band_decompose(f, M)
    z = lambdas + 1j * w.w
    ref = np.zeros_like(omega)
    for k, band in enumerate(bands.bands):
        if band.pieces:
            ref[:, k] = evaluate_time(band, z) * np.exp(TWO_PI_I * M.points[k] * lambdas)
    scale = float(np.max(np.abs(ref))) or 1.0
    return float(np.max(np.abs(omega - ref)) / scale)


# -- counterexamples -------------------------------------------------------------


@dataclass(frozen=True)
class CounterexampleCurve:
    parameters: tuple
    responses: tuple
    descriptor: Mapping[str, Any]

    def __post_init__(self):
        if len(self.parameters) != len(self.responses):
            raise ValueError("CounterexampleCurve: parameter and response lengths differ")
        if any(b <= a for a, b in zip(self.parameters, self.parameters[1:])):
            raise ValueError("CounterexampleCurve: parameters must be strictly increasing")

    def to_json(self) -> str:
        return json.dumps(
            {
                "parameters": list(self.parameters),
                "responses": list(self.responses),
                "descriptor": dict(self.descriptor),
            },
            sort_keys=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["parameter", "response"])
        for p, r in zip(self.parameters, self.responses):
            wr.writerow([repr(p), repr(float(r))])
        return buf.getvalue()


GAUSSIAN_HALFWIDTH = 1.0
GAUSSIAN_TAIL = 1e-6


def gap_counterexample(
    gap_widths: Sequence[float],
    base_step: float = 1.0,
    w: WindowParam | complex = 1.0,
    Lambda: PointSet | None = None,
    margin: float = 10.0,
) -> CounterexampleCurve:
    """Frame-sum ratio of a Gaussian placed in the middle of a gap of M.

    For each width ``G`` the frequency set is ``base_step * Z`` on
    ``[-margin, G + margin]`` with the open interval ``(0, G)`` removed, and the
    test spectrum is a Gaussian centred at ``G / 2``. The response is
    ``sum |c|^2 / ||f||^2`` over the fixed Lambda window.
    """
    w = w if isinstance(w, WindowParam) else WindowParam(w)
    if Lambda is None:
        Lambda = generate_point_set("arithmetic", [-40, 40], step=0.5)
    widths = [float(g) for g in gap_widths]
    if any(g < base_step for g in widths):
        raise ValueError("gap_counterexample: gap widths must be at least base_step")
    responses = []
    for g in widths:
        M = frequency_set_from_descriptor(
            {"kind": "gapped", "window": [-margin, g + margin], "step": base_step, "gap_center": g / 2, "gap_width": g}
        )
        f = gaussian_spectrum(g / 2, GAUSSIAN_HALFWIDTH, GAUSSIAN_TAIL)
        c = analyze(f, Lambda, M, w)
        responses.append(c.frame_sum / norm_sq(f))
    desc = {
        "scenario": "gap",
        "base_step": base_step,
        "w": [w.w.real, w.w.imag],
        "Lambda": dict(Lambda.descriptor),
        "M_margin": margin,
        "gaussian_halfwidth": GAUSSIAN_HALFWIDTH,
        "gaussian_tail_tol": GAUSSIAN_TAIL,
    }
    return CounterexampleCurve(tuple(widths), tuple(responses), desc)


def cluster_counterexample(
    multiplicities: Sequence[int],
    spread: float,
    Lambda: PointSet,
    M,
    w: WindowParam | complex = 1.0,
    G: int = 64,
    cluster_center: float = 0.0,
) -> CounterexampleCurve:
    """Upper frame bound as one Lambda point is replaced by ``m`` nearby points.

    ``Lambda`` must come from the arithmetic generator; the trial space is
    the same for every ``m``.
    """
    w = w if isinstance(w, WindowParam) else WindowParam(w)
    base = dict(Lambda.descriptor)
    if base.get("kind") != "arithmetic":
        raise ValueError("cluster_counterexample: base Lambda must be arithmetic")
    ms = [int(m) for m in multiplicities]
    if ms[0] < 1:
        raise ValueError("cluster_counterexample: multiplicities must be >= 1")
    responses = []
    for m in ms:
        desc = {
            "kind": "clustered",
            "window": base["window"],
            "step": base["step"],
            "cluster_center": cluster_center,
            "multiplicity": m,
            "spread": spread,
        }
        rep = frame_bounds(FrameProblem(point_set_from_descriptor(desc), M, w, G))
        responses.append(rep.B_est)
    mus = np.asarray(getattr(M, "points", M), dtype=float)
    desc = {
        "scenario": "cluster",
        "spread": spread,
        "cluster_center": cluster_center,
        "Lambda": base,
        "M": [float(mus[0]), float(mus[-1]), int(len(mus))],
        "w": [w.w.real, w.w.imag],
        "G": G,
    }
    return CounterexampleCurve(tuple(ms), tuple(responses), desc)


# -- theorem check -----------------------------------------------------------


def _collapses(small: float, big: float) -> bool:
    return big * COLLAPSE_FACTOR < small


def theorem_check(scenario: Mapping[str, Any]) -> dict[str, Any]:
    """Juxtapose the sampling-side conditions with empirical frame bounds.

    ``scenario`` keys: ``Lambda`` and ``M`` (generator descriptors), ``w``
    (complex or ``[re, im]``), optional ``frame_G`` (default 160) and
    ``sampling_G`` (default matched to the window). Each window is doubled
    once to judge stability; a lower bound that shrinks by more than
    ``COLLAPSE_FACTOR`` is flagged as collapsing. This is an empirical
    illustration only.
    """
    w_raw = scenario["w"]
    w = WindowParam(complex(*w_raw) if isinstance(w_raw, (list, tuple)) else complex(w_raw))
    lam_desc = dict(scenario["Lambda"])
    M = frequency_set_from_descriptor(scenario["M"])
    Lam = point_set_from_descriptor(lam_desc)
    a, b = lam_desc["window"]
    big_desc = dict(lam_desc, window=[(a + b) / 2 - (b - a), (a + b) / 2 + (b - a)])
    Lam2 = point_set_from_descriptor(big_desc)
    report: dict[str, Any] = {"scenario": {"Lambda": lam_desc, "M": dict(scenario["M"]), "w": [w.w.real, w.w.imag]}}

    fin: FinitenessReport = finiteness_report(M)
    report["finiteness"] = {
        "beta": fin.beta,
        "max_unit_count": fin.max_unit_count,
        "locally_finite": fin.is_locally_finite,
    }

    beta = fin.beta
    G_s = scenario.get("sampling_G")
    G1 = int(G_s) if G_s else matched_trial_size(b - a, beta)
    G2 = 2 * G1 - 1 if G_s else matched_trial_size(2 * (b - a), beta)
    s1 = sampling_constants(SamplingProblem(Lam, beta, G1))
    s2 = sampling_constants(SamplingProblem(Lam2, beta, G2))
    sampling_ok = s1.A_est > 0 and not _collapses(s1.A_est, s2.A_est)
    report["sampling"] = {
        "beta": beta,
        "G": [G1, G2],
        "A_est": [s1.A_est, s2.A_est],
        "B_est": [s1.B_est, s2.B_est],
        "stable_positive": bool(sampling_ok),
    }

    G_f = int(scenario.get("frame_G", 160))
    fr: FrameReport = frame_bounds(FrameProblem(Lam, M, w, G_f), check_doubling=True)
    A2 = fr.stability["A_doubled"]
    frame_ok = fr.A_est > 0 and not _collapses(fr.A_est, A2)
    report["frame"] = {
        "G": [G_f, 2 * G_f],
        "A_est": [fr.A_est, A2],
        "B_est": [fr.B_est, fr.stability["B_doubled"]],
        "stable_positive": bool(frame_ok),
    }

    condition = bool(fin.is_locally_finite and sampling_ok)
    if condition and frame_ok:
        verdict = "concordant: frame"
    elif not condition and not frame_ok:
        verdict = "concordant: not a frame"
    else:
        verdict = "discordant"
    report["verdict"] = verdict
    report["collapse_factor"] = COLLAPSE_FACTOR
    report["note"] = "windowed estimates; an empirical illustration, not a proof"
    return report
