import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cauchy_gabor.lattice import (
    LatticeError,
    finiteness_report,
    generate_point_set,
    make_frequency_set,
    point_set,
    point_set_from_descriptor,
)


def test_gaps_and_beta():
    M = make_frequency_set([0, 0.5, 1.7, 2.0])
    assert np.allclose(M.gaps, [0.5, 1.2, 0.3])
    assert M.beta == pytest.approx(1.2)
    assert make_frequency_set([0, 1, 2, 3]).beta == 1


def test_unsorted_input_is_sorted():
    assert list(make_frequency_set([2, 0, 1]).points) == [0, 1, 2]


@pytest.mark.parametrize("pts, idx", [([0, 0, 1], 1), ([0, 1, 2, 1], 3)])
def test_duplicates_name_the_index(pts, idx):
    with pytest.raises(LatticeError, match=f"index {idx}"):
        make_frequency_set(pts)


def test_non_finite_and_too_short():
    with pytest.raises(LatticeError, match="index 1"):
        make_frequency_set([0, np.nan, 2])
    with pytest.raises(LatticeError):
        make_frequency_set([1.0])


@pytest.mark.parametrize(
    "pts, count, beta",
    [([0, 1, 2, 3, 4], 1, 1.0), ([0, 0.1, 0.2, 5], 3, 4.8), ([0, 10], 1, 10.0)],
)
def test_finiteness_report(pts, count, beta):
    rep = finiteness_report(make_frequency_set(pts))
    assert rep.max_unit_count == count
    assert rep.beta == pytest.approx(beta)
    assert rep.is_locally_finite


def test_arithmetic_and_gapped():
    assert list(generate_point_set("arithmetic", [-2, 2], step=1).points) == [-2, -1, 0, 1, 2]
    g = generate_point_set("gapped", [-5, 5], step=1, gap_center=0, gap_width=4)
    assert list(g.points) == [-5, -4, -3, -2, 2, 3, 4, 5]


def test_jittered_is_deterministic_and_needs_seed():
    a = generate_point_set("jittered", [-3, 3], step=1, amplitude=0.2, seed=7)
    b = generate_point_set("jittered", [-3, 3], step=1, amplitude=0.2, seed=7)
    assert np.array_equal(a.points, b.points)
    assert np.all(np.abs(a.points - np.round(a.points)) <= 0.2)
    with pytest.raises(LatticeError):
        generate_point_set("jittered", [-3, 3], step=1, amplitude=0.2)
    with pytest.raises(LatticeError):
        generate_point_set("jittered", [-3, 3], step=1, amplitude=0.6, seed=1)


def test_clustered_replaces_one_point():
    c = generate_point_set("clustered", [-3, 3], step=1, cluster_center=0.2, multiplicity=4, spread=0.03)
    assert len(c) == 7 - 1 + 4
    near = c.points[np.abs(c.points) < 0.1]
    assert np.allclose(near, np.linspace(-0.015, 0.015, 4))


def test_clustered_spread_too_wide_breaks_monotonicity():
    with pytest.raises(LatticeError, match="monotonicity"):
        generate_point_set("clustered", [-3, 3], step=1, cluster_center=0, multiplicity=3, spread=3)


def test_periodic_pattern():
    p = generate_point_set("periodic", [0, 4], step=2, offsets=[0, 0.5])
    assert list(p.points) == [0, 0.5, 2, 2.5, 4]


def test_bad_parameters():
    with pytest.raises(LatticeError):
        generate_point_set("arithmetic", [1, 0], step=1)
    with pytest.raises(LatticeError):
        generate_point_set("arithmetic", [0, 1], step=0)
    with pytest.raises(LatticeError):
        generate_point_set("hexagonal", [0, 1], step=1)
    with pytest.raises(LatticeError):
        generate_point_set("arithmetic", [0, 1], step=1, extra=2)


def test_regeneration_is_bit_exact_and_csv():
    p = generate_point_set("jittered", [-10, 10], step=0.7, amplitude=0.3, seed=11)
    assert np.array_equal(p.regenerate().points, p.points)
    assert np.array_equal(point_set_from_descriptor(p.descriptor).points, p.points)
    rows = p.to_csv().splitlines()
    assert rows[0] == "lambda"
    assert np.array_equal(np.array([float(r) for r in rows[1:]]), p.points)
    with pytest.raises(LatticeError):
        point_set([0, 1]).regenerate()


pts_strategy = st.lists(st.floats(-50, 50), min_size=2, max_size=30, unique=True).filter(
    lambda xs: np.min(np.diff(np.sort(xs))) > 1e-6
)


# dyadic points keep translation exact in floating point
dyadic = st.lists(st.integers(-3200, 3200), min_size=2, max_size=30, unique=True).map(
    lambda ks: np.array(ks, dtype=float) / 64
)


@settings(max_examples=50, deadline=None)
@given(pts=dyadic, shift=st.integers(-20, 20))
def test_translation_invariance(pts, shift):
    M = make_frequency_set(pts)
    T = make_frequency_set(pts + shift)
    assert np.array_equal(M.gaps, T.gaps)
    assert M.beta == T.beta
    assert finiteness_report(M).max_unit_count == finiteness_report(T).max_unit_count


@settings(max_examples=50, deadline=None)
@given(pts=pts_strategy)
def test_reflection_reverses_gaps(pts):
    M = make_frequency_set(pts)
    R = make_frequency_set(-np.asarray(pts))
    assert np.allclose(R.gaps, M.gaps[::-1])
    assert R.beta == M.beta


@settings(max_examples=50, deadline=None)
@given(step=st.floats(0.05, 3), a=st.floats(-20, 20), length=st.floats(0, 30))
def test_arithmetic_count(step, a, length):
    # windows anchored at a lattice point: |points| = floor(L / step) + 1
    k = np.ceil(a / step)
    a0 = k * step
    pts = generate_point_set("arithmetic", [a0, a0 + length], step=step).points
    assert len(pts) == int(np.floor(length / step + 1e-9)) + 1
