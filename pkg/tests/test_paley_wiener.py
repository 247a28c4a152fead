import math

import numpy as np
import pytest

from cauchy_gabor.cauchy_analysis import WindowParam
from cauchy_gabor.expquad import ExpRangeError
from cauchy_gabor.paley_wiener import (
    SamplingProblem,
    SolverError,
    hat_design,
    hat_mass,
    hats_to_signal,
    ls_reconstruct,
    matched_trial_size,
    sampling_constants,
    shift_weight,
)
from cauchy_gabor.spectrum import ZERO, combine, evaluate_time, from_global, gaussian_spectrum, norm_sq
from conftest import random_signal


def rel_err(a, b):
    return math.sqrt(norm_sq(combine([a, b], [1, -1])) / norm_sq(b))


# -- shift_weight ------------------------------------------------------------------


def test_apply_norm_oracle():
    g = shift_weight(from_global(0, 1, [1]), WindowParam(1), "apply")
    assert norm_sq(g) == pytest.approx((1 - math.exp(-4 * math.pi)) / (4 * math.pi), rel=1e-6)


def test_apply_then_remove(rng):
    w = WindowParam(1 + 0.7j)
    for _ in range(3):
        h = random_signal(rng, 0, 1.3)
        back = shift_weight(shift_weight(h, w, "apply"), w, "remove")
        assert rel_err(back, h) <= 1e-7


def test_two_evaluation_routes(rng):
    w = WindowParam(0.6 - 0.4j)
    h = random_signal(rng, 0, 1.5)
    g = shift_weight(h, w, "apply")
    lam = rng.uniform(-10, 10, 10)
    a = evaluate_time(g, lam)
    b = evaluate_time(h, lam + 1j * w.w)
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(b))


def test_shift_weight_guards():
    with pytest.raises(ValueError):
        shift_weight(from_global(0, 1, [1]), WindowParam(1), "sideways")
    with pytest.raises(ExpRangeError):
        shift_weight(from_global(0, 200, [1]), WindowParam(1), "remove")
    assert shift_weight(ZERO, WindowParam(1)).is_zero


# -- trial space ---------------------------------------------------------------------


def test_hat_mass_is_gram_matrix():
    G, beta = 9, 1.5
    x = np.linspace(0, beta, 4001)
    H = np.maximum(0, 1 - np.abs(x[None, :] - np.linspace(0, beta, G)[:, None]) / (beta / (G - 1)))
    ref = np.trapezoid(H[:, None, :] * H[None, :, :], x, axis=-1)
    assert np.allclose(hat_mass(beta, G), ref, atol=1e-6)


def test_hat_design_matches_signal_evaluation(rng):
    c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    z = rng.uniform(-5, 5, 7) + 0.3j
    assert np.allclose(hat_design(z, 2.0, 12) @ c, evaluate_time(hats_to_signal(c, 2.0), z), atol=1e-13)


def test_matched_trial_size():
    assert matched_trial_size(80, 1.0) == 65
    assert matched_trial_size(160, 1.0) == 129
    assert matched_trial_size(0.1, 1.0) == 2


# -- least squares -------------------------------------------------------------------


def test_delta_samples_recover_box():
    lam = np.arange(-40.0, 41.0)
    vals = (lam == 0).astype(complex)
    rec = ls_reconstruct((lam, vals), SamplingProblem(lam, 1.0, 64, eps=1e-10))
    assert rel_err(rec, from_global(0, 1, [1])) <= 1e-3


def test_pairs_input_and_zero_samples():
    lam = np.arange(-10.0, 11.0)
    rec = ls_reconstruct([(x, 0.0) for x in lam], SamplingProblem(lam, 1.0, 8, eps=1e-12))
    assert norm_sq(rec) == 0


def test_trial_member_reproduced(rng):
    lam = np.arange(-20.0, 20.5, 0.5)
    G = 16
    c = rng.standard_normal(G) + 1j * rng.standard_normal(G)
    truth = hats_to_signal(c, 1.0)
    samples = evaluate_time(truth, lam)
    rec = ls_reconstruct((lam, samples), SamplingProblem(lam, 1.0, G, eps=0))
    assert np.linalg.norm(evaluate_time(rec, lam) - samples) <= 1e-9 * np.linalg.norm(samples)
    assert rel_err(rec, truth) <= 1e-9


def test_weighted_trial_space(rng):
    lam = np.arange(-30.0, 30.5, 0.5)
    w = WindowParam(1 + 0.25j)
    c = rng.standard_normal(20)
    h = hats_to_signal(c, 1.0)
    samples = evaluate_time(h, lam + 1j * w.w)
    ghat = ls_reconstruct((lam, samples), SamplingProblem(lam, 1.0, 20, eps=0, weight=w.w))
    assert rel_err(shift_weight(ghat, w, "remove"), h) <= 1e-8


def test_solver_errors():
    lam = np.arange(-5.0, 6.0)
    with pytest.raises(SolverError, match="samples"):
        ls_reconstruct((lam, np.zeros(11)), SamplingProblem(lam, 1.0, 20))
    sparse = np.arange(-40.0, 41.0, 2.0)
    with pytest.raises(SolverError, match="eps > 0"):
        ls_reconstruct((sparse, np.ones(41)), SamplingProblem(sparse, 1.0, 41, eps=0))


def test_problem_validation():
    with pytest.raises(ValueError):
        SamplingProblem(np.arange(3.0), 0.0, 4)
    with pytest.raises(ValueError):
        SamplingProblem(np.arange(3.0), 1.0, 1)
    with pytest.raises(ValueError):
        SamplingProblem(np.arange(3.0), 1.0, 4, eps=-1)
    with pytest.raises(ValueError):
        SamplingProblem(np.arange(3.0), 1.0, 4, kappa=1.0)


def test_error_decreases_with_window():
    truth = gaussian_spectrum(0.5, 0.2, 1e-8)
    errs = []
    for W in (10, 20, 40):
        lam = np.arange(-W, W + 0.5, 0.5)
        samples = evaluate_time(truth, lam)
        rec = ls_reconstruct((lam, samples), SamplingProblem(lam, 1.0, matched_trial_size(2 * W, 1.0)))
        errs.append(rel_err(rec, truth))
    assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0]


# -- sampling constants ----------------------------------------------------------------


def test_shannon_tight_case():
    A, B = sampling_constants(SamplingProblem(np.arange(-40.0, 41.0), 1.0, 64))
    assert abs(A - 1) <= 0.02 and abs(B - 1) <= 0.02


def test_undersampled_collapse_resolvable_range():
    vals = []
    for W in (10, 20):
        lam = np.arange(-W, W + 1, 2.0)
        vals.append(sampling_constants(SamplingProblem(lam, 1.0, matched_trial_size(2 * W, 1.0))))
    assert vals[1].A_est * 5 <= vals[0].A_est
    assert vals[0].A_est <= 0.05 * vals[0].B_est
    assert abs(vals[1].B_est / vals[0].B_est - 1) <= 0.2


def test_undersampled_at_forty():
    sc = sampling_constants(SamplingProblem(np.arange(-40.0, 41.0, 2.0), 1.0, 65))
    assert sc.A_est <= 0.05 * sc.B_est


def test_oversampled_stable():
    a = sampling_constants(SamplingProblem(np.arange(-40, 40.5, 0.5), 1.0, 65))
    b = sampling_constants(SamplingProblem(np.arange(-80, 80.5, 0.5), 1.0, 129))
    assert abs(b.A_est / a.A_est - 1) <= 0.1
    assert 0 <= a.A_est <= a.B_est


def test_monotone_in_points(rng):
    lam = np.arange(-20.0, 21.0)
    extra = np.sort(np.concatenate([lam, rng.uniform(-19.5, 19.5, 15)]))
    p = SamplingProblem(lam, 1.0, 33)
    q = SamplingProblem(extra, 1.0, 33, window=p.window)
    a, b = sampling_constants(p), sampling_constants(q)
    assert b.A_est >= a.A_est * (1 - 1e-9)
    assert b.B_est >= a.B_est * (1 - 1e-9)


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_scaling_covariance(s):
    lam = np.arange(-30.0, 31.0) * 0.8
    base = sampling_constants(SamplingProblem(lam, 1.0, 49))
    scaled = sampling_constants(SamplingProblem(s * lam, 1.0 / s, 49))
    # f(x) -> f(x / s) maps PW[0, beta] onto PW[0, beta / s] and multiplies the norm by s
    assert scaled.A_est == pytest.approx(base.A_est / s, rel=0.01)
    assert scaled.B_est == pytest.approx(base.B_est / s, rel=0.01)


def test_no_concentrated_trial_function():
    with pytest.raises(SolverError):
        sampling_constants(SamplingProblem(np.array([0.0, 0.1]), 1.0, 40, kappa=0.999))
