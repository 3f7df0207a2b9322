"""Tree bounds, tessellation counts, box counting, and slice scans."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ba_lab.core import BudgetError, DimensionError, ParameterError
from ba_lab.flows import FlowSpec
from ba_lab.fractal import (
    GridIndicator,
    TreeLevelData,
    ba_slice_scan,
    box_dim_estimate,
    expansion_dim_bound,
    tessellation_counts,
    tree_dim_lower_bound,
)


# ---------------------------------------------------------------------------
# tree-like lower bound

def cantor_levels(levels):
    return TreeLevelData(
        1,
        (Fraction(2, 3),) * levels,
        tuple(Fraction(1, 3) ** j for j in range(1, levels + 1)),
    )


def test_tree_bound_cantor():
    bound = tree_dim_lower_bound(cantor_levels(20))
    assert bound.value == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert len(bound.ratios) == 20


def test_tree_bound_full_density_is_ambient():
    for k in (1, 2, 5):
        data = TreeLevelData(k, (Fraction(1),) * 4,
                             tuple(Fraction(1, 2) ** j for j in range(1, 5)))
        assert tree_dim_lower_bound(data).value == float(k)


def test_tree_bound_deep_levels_do_not_underflow():
    bound = tree_dim_lower_bound(cantor_levels(400))
    assert bound.value == pytest.approx(math.log(2) / math.log(3), abs=1e-12)


def test_tree_bound_transient_large_diameters():
    data = TreeLevelData(1, (Fraction(1, 2), Fraction(1, 2)),
                         (Fraction(3, 2), Fraction(1, 2)))
    bound = tree_dim_lower_bound(data)
    assert math.isnan(bound.ratios[0])
    assert bound.value == pytest.approx(1 - 2.0, abs=1e-12)


def test_tree_bound_rejects_final_diameter_at_least_one():
    data = TreeLevelData(1, (Fraction(1, 2),), (Fraction(3, 2),))
    with pytest.raises(ParameterError):
        tree_dim_lower_bound(data)


def test_tree_level_data_validation():
    with pytest.raises(ParameterError):
        TreeLevelData(0, (Fraction(1, 2),), (Fraction(1, 2),))
    with pytest.raises(DimensionError):
        TreeLevelData(1, (), ())
    with pytest.raises(DimensionError):
        TreeLevelData(1, (Fraction(1, 2),), (Fraction(1, 2), Fraction(1, 4)))
    with pytest.raises(ParameterError):
        TreeLevelData(1, (Fraction(3, 2),), (Fraction(1, 2),))
    with pytest.raises(ParameterError):
        TreeLevelData(1, (Fraction(1, 2),), (Fraction(0),))


def test_tree_level_data_warns_on_nondecreasing_diameters():
    with pytest.warns(UserWarning):
        TreeLevelData(1, (Fraction(1, 2), Fraction(1, 2)),
                      (Fraction(1, 2), Fraction(1, 2)))


def test_expansion_dim_bound():
    assert expansion_dim_bound(2, Fraction(1), 1, 10.0) == 2.0
    weak = expansion_dim_bound(1, Fraction(1, 2), 1, 3.0)
    strong = expansion_dim_bound(1, Fraction(1, 2), 1, 30.0)
    assert weak < strong < 1.0
    with pytest.raises(ParameterError):
        expansion_dim_bound(1, Fraction(1, 2), 1, 1.0)  # rate*t < log 4
    with pytest.raises(ParameterError):
        expansion_dim_bound(1, Fraction(2), 1, 10.0)


# ---------------------------------------------------------------------------
# tessellation counts

def test_tessellation_base_example():
    fs = FlowSpec(1, 1)
    out = tessellation_counts(fs, Fraction(1, 2), expansion=10)
    assert out.interior == 891
    assert out.interior + out.boundary == 1111
    assert out.volume_ratio == Fraction(1000)
    assert out.axis_scales == (100, 10)


@pytest.mark.parametrize("expansion", [10, 30, 100])
def test_tessellation_volume_sandwich_exact(expansion):
    fs = FlowSpec(1, 1)
    out = tessellation_counts(fs, 1, expansion=expansion)
    volume = expansion ** 3
    assert out.interior <= volume <= out.interior + out.boundary
    assert out.volume_ratio == volume


def test_tessellation_float_time_matches_exact_here():
    fs = FlowSpec(1, 1)
    for e in (10, 30, 100):
        exact = tessellation_counts(fs, 1, expansion=e)
        lowered = tessellation_counts(fs, 1, t=math.log(e))
        assert (exact.interior, exact.boundary) == (lowered.interior, lowered.boundary)
        assert lowered.volume_ratio == pytest.approx(e ** 3, rel=1e-12)


def test_tessellation_counts_scale_free():
    fs = FlowSpec(2, 1)
    a = tessellation_counts(fs, 1, expansion=Fraction(73, 10))
    b = tessellation_counts(fs, Fraction(1, 3), expansion=Fraction(73, 10))
    assert (a.interior, a.boundary) == (b.interior, b.boundary)


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_tessellation_volume_sandwich_generic(m, n):
    fs = FlowSpec(m, n)
    out = tessellation_counts(fs, 1, expansion=7.3)
    volume = 7.3 ** (m + n + 1)
    assert out.interior <= volume * (1 + 1e-12)
    assert out.interior + out.boundary >= volume * (1 - 1e-12)


def test_tessellation_validates():
    fs = FlowSpec(1, 1)
    with pytest.raises(ParameterError):
        tessellation_counts(fs, 0, expansion=10)
    with pytest.raises(ParameterError):
        tessellation_counts(fs, 1)
    with pytest.raises(ParameterError):
        tessellation_counts(fs, 1, t=1.0, expansion=10)
    with pytest.raises(ParameterError):
        tessellation_counts(fs, 1, expansion=Fraction(1, 2))
    with pytest.raises(ParameterError):
        tessellation_counts(fs, 1, t=-1.0)
    with pytest.raises(BudgetError):
        tessellation_counts(fs, 1, expansion=10**4, budget=10**6)


# ---------------------------------------------------------------------------
# grids

def test_grid_indicator_centers():
    bm = np.zeros((4, 4), dtype=bool)
    bm[0, 1] = True
    bm[3, 2] = True
    g = GridIndicator(4, bm, ((0.0, 1.0), (0.0, 2.0)))
    centers = g.centers()
    assert centers.shape == (2, 2)
    assert centers[0] == pytest.approx([0.125, 0.75])
    assert centers[1] == pytest.approx([0.875, 1.25])


def test_grid_indicator_validates():
    with pytest.raises(DimensionError):
        GridIndicator(4, np.zeros((4, 3), dtype=bool), ((0, 1), (0, 1)))
    with pytest.raises(DimensionError):
        GridIndicator(4, np.zeros((4, 4), dtype=bool), ((0, 1),))
    with pytest.raises(ParameterError):
        GridIndicator(0, np.zeros((0, 0), dtype=bool), ((0, 1), (0, 1)))
    with pytest.raises(ParameterError):
        GridIndicator(2, np.zeros((2, 2), dtype=bool), ((0, 0), (0, 1)))


def test_pgm_header_and_size():
    bm = np.zeros((3, 3), dtype=bool)
    bm[1, 2] = True
    g = GridIndicator(3, bm, ((0, 1), (0, 1)))
    blob = g.to_pgm()
    assert blob.startswith(b"P5\n3 3\n255\n")
    body = blob[len(b"P5\n3 3\n255\n"):]
    assert len(body) == 9
    assert body[1 * 3 + 2] == 255 and sum(body) == 255


@settings(max_examples=25)
@given(st.integers(min_value=1, max_value=16), st.data())
def test_pgm_round_trip(res, data):
    bits = data.draw(st.lists(st.booleans(), min_size=res * res, max_size=res * res))
    bm = np.array(bits, dtype=bool).reshape(res, res)
    g = GridIndicator(res, bm, ((0.0, 1.0), (0.0, 1.0)))
    back = GridIndicator.from_pgm(g.to_pgm())
    assert back.resolution == res
    assert np.array_equal(back.bitmap, bm)


def test_from_pgm_tolerates_comments():
    blob = b"P5\n# made by hand\n2 2\n255\n" + bytes([255, 0, 0, 255])
    g = GridIndicator.from_pgm(blob)
    assert g.bitmap.tolist() == [[True, False], [False, True]]
    with pytest.raises(ParameterError):
        GridIndicator.from_pgm(b"P2\n2 2\n255\n....")
    with pytest.raises(ParameterError):
        GridIndicator.from_pgm(b"P5\n2 3\n255\n" + bytes(6))


# ---------------------------------------------------------------------------
# box counting

def cantor_cross_grid(depth):
    res = 3 ** depth
    keep = np.ones(res, dtype=bool)
    for i in range(res):
        x = i
        for _ in range(depth):
            if x % 3 == 1:
                keep[i] = False
                break
            x //= 3
    bm = np.zeros((res, res), dtype=bool)
    bm[keep, :] = True
    return GridIndicator(res, bm, ((0.0, 1.0), (0.0, 1.0)))


def test_box_dim_full_grid():
    g = GridIndicator(64, np.ones((64, 64), dtype=bool), ((0, 1), (0, 1)))
    est = box_dim_estimate(g, [Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)])
    assert est.slope == pytest.approx(2.0, abs=1e-12)
    assert est.counts == ((0.25, 16), (0.125, 64), (0.0625, 256))
    assert not est.degenerate


def test_box_dim_cantor_cross():
    g = cantor_cross_grid(5)
    scales = [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27)]
    est = box_dim_estimate(g, scales)
    assert [c for _, c in est.counts] == [6, 36, 216]
    assert est.slope == pytest.approx(math.log(6) / math.log(3), abs=1e-9)


def test_box_dim_empty_grid_degenerate():
    g = GridIndicator(27, np.zeros((27, 27), dtype=bool), ((0, 1), (0, 1)))
    est = box_dim_estimate(g, [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27)])
    assert est.degenerate and est.slope == 0.0


def test_box_dim_validates_scales():
    g = GridIndicator(16, np.ones((16, 16), dtype=bool), ((0, 1), (0, 1)))
    with pytest.raises(ParameterError):
        box_dim_estimate(g, [Fraction(1, 4), Fraction(1, 8)])
    with pytest.raises(ParameterError):
        box_dim_estimate(g, [Fraction(1, 3), Fraction(1, 4), Fraction(1, 8)])


# ---------------------------------------------------------------------------
# slice scans

def _reference_gap(a, b, q_max):
    best = None
    for q in range(-q_max, q_max + 1):
        x = a * q + b
        alpha = abs(x - math.ceil(x - 0.5))
        beta = abs(q)
        val = math.sqrt(alpha * beta) if beta >= alpha else alpha
        best = val if best is None else min(best, val)
    return best


def test_slice_scan_matches_reference():
    res, q_max, c = 4, 3, 0.05
    scan = ba_slice_scan(c, res, q_max)
    for ia in range(res):
        for ib in range(res):
            a = (ia + 0.5) / res
            b = (ib + 0.5) / res
            expected = _reference_gap(a, b, q_max) >= c
            assert scan.grid.bitmap[ia, ib] == expected
            refined = _reference_gap(a, b, 2 * q_max) >= c
            assert scan.grid_refined.bitmap[ia, ib] == refined


def test_slice_scan_zero_threshold_marks_everything():
    scan = ba_slice_scan(0.0, 8, 5)
    assert scan.grid.bitmap.all()
    assert scan.grid_refined.bitmap.all()


def test_slice_scan_refinement_is_subset():
    scan = ba_slice_scan(0.03, 16, 12)
    assert (scan.grid_refined.bitmap <= scan.grid.bitmap).all()
    assert scan.grid.bitmap.any() and not scan.grid.bitmap.all()


def test_slice_scan_threads_deterministic():
    one = ba_slice_scan(0.02, 32, 20, threads=1)
    many = ba_slice_scan(0.02, 32, 20, threads=5)
    assert np.array_equal(one.grid.bitmap, many.grid.bitmap)
    assert np.array_equal(one.grid_refined.bitmap, many.grid_refined.bitmap)


def test_slice_scan_validates():
    with pytest.raises(ParameterError):
        ba_slice_scan(-0.1, 8, 5)
    with pytest.raises(ParameterError):
        ba_slice_scan(0.1, 0, 5)
    with pytest.raises(ParameterError):
        ba_slice_scan(0.1, 8, 0)
    with pytest.raises(BudgetError):
        ba_slice_scan(0.1, 8, 5, budget=3)
