import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bezea.indicators import (
    cover_rate,
    greedy_hss,
    hypervolume_2d,
    igdx,
    psp,
    set_smoothness,
    smoothness,
    uncrowded_distance,
)
from oracles import best_subset_hv, greedy_by_enumeration, hv_grid, igdx_brute, staircase_distance

fronts = arrays(float, st.tuples(st.integers(1, 12), st.just(2)), elements=st.floats(0, 1, width=32))


# --- hypervolume ---------------------------------------------------------------

def test_hv_unit_box():
    assert hypervolume_2d([[0, 0]], [1, 1]) == 1.0


def test_hv_two_points_inclusion_exclusion():
    assert hypervolume_2d([[0, 0.5], [0.5, 0]], [1, 1]) == pytest.approx(0.75)


def test_hv_empty_and_outside_ref_contribute_nothing():
    assert hypervolume_2d([], [1, 1]) == 0.0
    assert hypervolume_2d([[2, 0], [1, 1]], [1, 1]) == 0.0


@settings(max_examples=300)
@given(fronts)
def test_hv_matches_exact_grid_oracle(F):
    assert hypervolume_2d(F, [1.1, 1.1]) == pytest.approx(hv_grid(F, [1.1, 1.1]), rel=1e-9, abs=1e-12)


@given(fronts, st.tuples(st.floats(0, 1), st.floats(0, 1)))
def test_hv_monotone_under_adding_points(F, extra):
    ref = [1.1, 1.1]
    assert hypervolume_2d(np.vstack([F, extra]), ref) >= hypervolume_2d(F, ref) - 1e-12


# --- uncrowded distance -----------------------------------------------------------

def test_ud_single_point_front():
    assert uncrowded_distance([1, 1], [[0, 0]]) == pytest.approx(1.0)


def test_ud_point_on_staircase_is_zero():
    assert uncrowded_distance([0.5, 1.0], [[0, 1], [1, 0]]) == 0.0
    assert uncrowded_distance([1, 0], [[0, 1], [1, 0]]) == 0.0


def test_ud_nondominated_point_is_zero():
    assert uncrowded_distance([2, 2], [[0, 3], [3, 0]]) == 0.0


def test_ud_inside_notch_corner():
    # (4, 4) is dominated by both; the nearest free notch corner is (3, 3)
    assert uncrowded_distance([4, 4], [[0, 3], [3, 0]]) == pytest.approx(math.sqrt(2))


@settings(max_examples=300)
@given(fronts, st.tuples(st.floats(0, 1.5), st.floats(0, 1.5)))
def test_ud_matches_staircase_oracle(F, y):
    y = np.asarray(y)
    dominated = np.any(np.all(F <= y, axis=1))
    expected = staircase_distance(y, F) if dominated else 0.0
    assert uncrowded_distance(y, F) == pytest.approx(expected, abs=1e-9)


# --- greedy HSS -----------------------------------------------------------------

def test_ghss_singleton_prefers_largest_box():
    F = [[0, 2], [1, 1], [2, 0]]
    assert [hypervolume_2d([f], [3, 3]) for f in F] == [3, 4, 3]
    assert greedy_hss(F, 1, [3, 3]) == [1]


def test_ghss_tie_goes_to_lowest_index():
    F = [[0, 2], [1, 1], [2, 0]]
    assert hv_grid([F[1], F[0]], [3, 3]) == hv_grid([F[1], F[2]], [3, 3]) == 5
    assert greedy_hss(F, 2, [3, 3]) == [1, 0]


def test_ghss_k_at_least_n_returns_all():
    assert greedy_hss([[0, 1], [1, 0]], 5, [2, 2]) == [0, 1]


def test_ghss_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        greedy_hss([[0, 1]], 0, [2, 2])


def test_ghss_matches_enumeration_on_integer_fronts():
    # integer coordinates make marginal gains exact, so ties are frequent and real
    rng = np.random.default_rng(11)
    for n in range(1, 9):
        for _ in range(40):
            F = rng.integers(0, 6, size=(n, 2)).astype(float)
            for k in range(1, 4):
                got, want = greedy_hss(F, k, [6, 6]), greedy_by_enumeration(F, k, [6, 6])
                if k >= n:
                    got, want = sorted(got), sorted(want)
                assert got == want


@settings(max_examples=100)
@given(arrays(float, st.tuples(st.integers(1, 10), st.just(2)), elements=st.floats(0, 1, width=16)),
       st.integers(1, 4))
def test_ghss_within_greedy_guarantee(F, k):
    ref = [1.1, 1.1]
    got = hypervolume_2d(F[greedy_hss(F, k, ref)], ref)
    assert got >= (1 - 1 / math.e) * best_subset_hv(F, k, ref) - 1e-12
    assert got <= hypervolume_2d(F, ref) + 1e-12


# --- IGDX, cover rate, PSP ---------------------------------------------------------

def test_igdx_single_point():
    assert igdx([[0, 0]], [[0, 0], [1, 1]]) == pytest.approx(math.sqrt(2) / 2)


def test_igdx_superset_is_zero():
    assert igdx([[0, 0], [1, 1], [5, 5]], [[0, 0], [1, 1]]) == 0.0


def test_igdx_empty_rejected():
    with pytest.raises(ValueError):
        igdx([], [[0, 0]])


def test_igdx_matches_brute_force():
    rng = np.random.default_rng(5)
    for dim in (2, 3, 5):
        A, R = rng.normal(size=(30, dim)), rng.normal(size=(40, dim))
        assert igdx(A, R) == pytest.approx(igdx_brute(A, R), rel=1e-12)


def test_igdx_translation_and_scaling():
    rng = np.random.default_rng(6)
    A, R = rng.normal(size=(20, 3)), rng.normal(size=(25, 3))
    shift = rng.normal(size=3)
    assert igdx(A + shift, R + shift) == pytest.approx(igdx(A, R), rel=1e-12)
    assert igdx(3 * A, 3 * R) == pytest.approx(3 * igdx(A, R), rel=1e-12)


def test_cover_rate_full():
    R = [[0, 0], [1, 1]]
    assert cover_rate(R, R) == 1.0


def test_cover_rate_no_overlap():
    assert cover_rate([[2, 0], [3, 1]], [[0, 0], [1, 1]]) == 0.0


def test_cover_rate_half_each_dimension():
    assert (0.5**2 * 0.5**2) ** 0.25 == 0.5
    assert cover_rate([[0, 0], [0.5, 0.5]], [[0, 0], [1, 1]]) == pytest.approx(0.5)


def test_cover_rate_skips_degenerate_reference_dimension():
    assert cover_rate([[0, 3], [1, 3]], [[0, 5], [1, 5]]) == 1.0


def test_psp_ratio():
    A = [[0, 0], [1, 0]]
    R = [[0, 0], [1, 0], [0, 1]]
    assert cover_rate(A, R) == 0.0
    assert psp(A, R) == 0.0
    A = [[0, 0], [1, 1]]
    R = [[0, 0], [1, 1], [0.5, 0.5]]
    cr, d = cover_rate(A, R), igdx(A, R)
    assert cr == 1.0
    assert psp(A, R) == pytest.approx(cr / d)


def test_psp_cr_one_igdx_half():
    # edge midpoints of the unit square: full box cover, each corner 0.5 away
    A = [[0, 0.5], [1, 0.5], [0.5, 0], [0.5, 1]]
    R = [[0, 0], [1, 1]]
    assert cover_rate(A, R) == 1.0
    assert igdx(A, R) == pytest.approx(0.5)
    assert psp(A, R) == pytest.approx(2.0)


def test_psp_perfect_is_infinite():
    R = [[0, 0], [1, 1]]
    assert psp(R, R) == math.inf


# --- smoothness --------------------------------------------------------------------

def test_smoothness_colinear():
    assert smoothness([[[0, 0], [1, 1], [2, 2]]]) == 1.0


def test_smoothness_right_angle():
    assert set_smoothness([[0, 0], [1, 0], [1, 1]]) == pytest.approx(math.sqrt(2) / 2)


def test_smoothness_two_points():
    assert smoothness([[[0, 0], [5, 3]]]) == 1.0


def test_smoothness_averages_over_sets():
    assert smoothness([[[0, 0], [1, 0], [1, 1]], [[0, 0], [1, 1]]]) == pytest.approx((math.sqrt(2) / 2 + 1) / 2)


@given(arrays(float, st.tuples(st.integers(3, 10), st.just(3)), elements=st.floats(-5, 5, width=32)))
def test_smoothness_at_most_one(X):
    assert 0.0 <= set_smoothness(X) <= 1.0


@given(arrays(float, st.tuples(st.integers(2, 8), st.just(2)), elements=st.floats(-5, 5)),
       st.lists(st.floats(0, 1), min_size=3, max_size=30))
def test_smoothness_one_on_a_line_segment_in_order(ends, ts):
    a, b = ends[0], ends[1]
    pts = a + np.sort(ts)[:, None] * (b - a)
    assert set_smoothness(pts) == 1.0
