import math

import numpy as np
import pytest
from scipy import integrate

from cauchy_gabor.lattice import make_frequency_set
from cauchy_gabor.spectrum import (
    ZERO,
    CoverageError,
    SpectralSignal,
    band_decompose,
    combine,
    evaluate_time,
    from_global,
    gaussian_spectrum,
    norm_sq,
    piecewise,
)
from conftest import random_signal
from oracles import gaussian_norm_sq


def test_norm_simple_cases():
    assert norm_sq(from_global(0, 2, [1])) == pytest.approx(2)
    assert norm_sq(from_global(0, 1, [0, 1])) == pytest.approx(1 / 3)
    assert norm_sq(ZERO) == 0


def test_norm_matches_quadrature(rng):
    for _ in range(5):
        f = random_signal(rng, -1.0, 2.5, degree=1)
        ref = sum(
            integrate.quad(lambda x: abs(f(np.array([x]))[0]) ** 2, p.lo, p.hi, epsabs=0, epsrel=1e-13)[0]
            for p in f.pieces
        )
        assert norm_sq(f) == pytest.approx(ref, rel=1e-10)


def test_zero_norm_iff_zero_pieces():
    z = piecewise([0, 1, 2], [[0], [0, 0]])
    assert z.is_zero and norm_sq(z) == 0
    assert not from_global(0, 1, [0, 1e-9]).is_zero


def test_overlapping_pieces_rejected():
    with pytest.raises(ValueError):
        SpectralSignal((from_global(0, 2, [1]).pieces[0], from_global(1, 3, [1]).pieces[0]))


def test_band_decompose_two_bands():
    bands = band_decompose(from_global(0, 2, [1]), make_frequency_set([0, 1, 2]))
    assert [norm_sq(b) for b in bands.bands] == pytest.approx([1, 1])
    assert np.allclose(bands.widths, [1, 1])


def test_band_decompose_empty_band():
    bands = band_decompose(from_global(0, 1, [1]), make_frequency_set([0, 1, 2]))
    assert bands.bands[1].is_zero


def test_band_decompose_translation():
    bands = band_decompose(from_global(0.5, 1.5, [0, 1]), make_frequency_set([0, 1, 2]))
    b0, b1 = bands.bands
    assert b0.support == (0.5, 1.0)
    assert b1.support == (0.0, 0.5)
    eta = np.array([0.0, 0.2, 0.4])
    assert np.allclose(b1(eta), eta + 1)
    assert np.allclose(b0(np.array([0.6, 0.9])), [0.6, 0.9])


def test_coverage_error_reports_mass():
    with pytest.raises(CoverageError) as info:
        band_decompose(from_global(-1, 1, [1]), make_frequency_set([0, 1, 2]))
    assert info.value.escaped_mass == pytest.approx(1.0)


def test_evaluate_time_closed_forms():
    f = from_global(0, 1, [1])
    assert evaluate_time(f, 0) == pytest.approx(1)
    for k in (1, -3, 7):
        assert abs(evaluate_time(f, k)) < 1e-14
    assert evaluate_time(f, 1j) == pytest.approx((1 - math.exp(-2 * math.pi)) / (2 * math.pi), rel=1e-14)
    assert evaluate_time(f, 1j).real == pytest.approx(0.15885, abs=1e-5)


def _quad_time(f, t):
    total = 0j
    for p in f.pieces:
        g = lambda x: f(np.array([x]))[0] * np.exp(2j * np.pi * x * t)
        total += integrate.quad(lambda x: g(x).real, p.lo, p.hi, epsabs=1e-14)[0]
        total += 1j * integrate.quad(lambda x: g(x).imag, p.lo, p.hi, epsabs=1e-14)[0]
    return total


def test_evaluate_time_matches_quadrature(rng):
    f = random_signal(rng, -0.5, 1.5)
    for t in (-2.3, 0.0, 0.7, 5.1):
        assert abs(evaluate_time(f, t) - _quad_time(f, t)) < 1e-10


def test_parseval_and_reassembly(rng):
    M = make_frequency_set(np.cumsum(np.r_[0, rng.uniform(0.2, 2, 7)]))
    for _ in range(5):
        f = random_signal(rng, M.points[0], M.points[-1], n_pieces=6)
        bands = band_decompose(f, M)
        assert sum(norm_sq(b) for b in bands.bands) == pytest.approx(norm_sq(f), rel=1e-12)
        t = rng.uniform(-5, 5, 20)
        direct = evaluate_time(f, t)
        parts = sum(np.exp(2j * np.pi * mu * t) * evaluate_time(b, t) for b, mu in zip(bands.bands, bands.origins))
        assert np.max(np.abs(direct - parts)) <= 1e-10 * np.max(np.abs(direct))
        assert norm_sq(combine([bands.reassemble(), f], [1, -1])) <= 1e-24 * norm_sq(f)


def test_translation_keeps_norm(rng):
    f = random_signal(rng, 0, 1)
    assert norm_sq(f.translated(17.25)) == pytest.approx(norm_sq(f), rel=1e-13)


def test_linear_combination(rng):
    f = random_signal(rng, 0, 2)
    g = random_signal(rng, 1, 3)
    h = combine([f, g], [2.0, -1j])
    x = rng.uniform(0, 3, 50)
    assert np.allclose(h(x), 2 * f(x) - 1j * g(x), atol=1e-12)
    assert np.allclose((f + g)(x), f(x) + g(x), atol=1e-12)
    assert np.allclose((3 * f)(x), 3 * f(x))


def test_csv_round_trip(rng):
    f = random_signal(rng, -1, 1)
    g = SpectralSignal.from_csv(f.to_csv())
    assert g == f
    header = f.to_csv().splitlines()[0].split(",")
    assert header[:4] == ["xi_lo", "xi_hi", "c0_re", "c0_im"]


def test_gaussian_norm_symmetry_and_scaling():
    g = gaussian_spectrum(0.0, 1.0, 1e-6)
    assert norm_sq(g) == pytest.approx(gaussian_norm_sq(1.0), rel=1e-6)
    lo, hi = g.support
    assert lo == pytest.approx(-hi, abs=1e-15)
    x = np.linspace(0, hi * 0.999, 37)
    assert np.allclose(g(x), g(-x), atol=1e-15)
    g2 = gaussian_spectrum(0.0, 2.0, 1e-6)
    assert norm_sq(g2) / norm_sq(g) == pytest.approx(2.0, rel=2e-6)


def test_gaussian_centre_and_accuracy():
    g = gaussian_spectrum(3.5, 0.7, 1e-8)
    x = np.linspace(2.5, 4.5, 101)
    assert np.max(np.abs(g(x) - np.exp(-np.pi * ((x - 3.5) / 0.7) ** 2))) < 1e-7


def test_gaussian_bad_arguments():
    with pytest.raises(ValueError):
        gaussian_spectrum(0, 1, 0.1)
    with pytest.raises(ValueError):
        gaussian_spectrum(0, -1, 1e-6)
