import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phipart.bounds import gamma_bounds
from phipart.errors import DimensionMismatch, DuplicateOverflow, IndivisibleSampleCount
from phipart.geometry import INF, Interval, Partition
from phipart.partitioner import (
    build_partition,
    cell_counts,
    classify_cells,
    count_infinitely_large,
    gamma_threshold,
    partition_l1_error,
)
from phipart.synthdata import uniform


SIX = np.array([1.0, 2, 3, 4, 5, 6])


def test_order_statistic_cuts():
    part = build_partition(SIX, 3)
    assert [c.sides[0] for c in part.cells] == [Interval(-INF, 2.0), Interval(2.0, 4.0), Interval(4.0, INF)]
    np.testing.assert_array_equal(cell_counts(part, SIX), [2, 2, 2])


def test_indivisible():
    with pytest.raises(IndivisibleSampleCount):
        build_partition([1.0], 2)
    with pytest.raises(IndivisibleSampleCount):
        build_partition(np.arange(10.0), 3)


def test_two_dim_equal_mass():
    x = np.random.default_rng(1).uniform(size=(16, 2))
    part = build_partition(x, 2)
    assert part.m == 4
    np.testing.assert_array_equal(cell_counts(part, x), [4, 4, 4, 4])


def test_ties_at_cut_raise_and_jitter_recovers():
    x = np.array([1.0, 1.0, 1.0, 2.0])
    with pytest.raises(DuplicateOverflow):
        build_partition(x, 2)
    part = build_partition(x, 2, jitter=1e-6, seed=0)
    assert part.m == 2


def test_ties_inside_a_slab_are_fine():
    x = np.array([1.0, 1.0, 2.0, 3.0])
    part = build_partition(x, 2)
    np.testing.assert_array_equal(cell_counts(part, x), [2, 2])


def test_counts():
    part = build_partition(SIX, 3)
    np.testing.assert_array_equal(cell_counts(part, [0.0, 3.0, 3.5, 10.0]), [1, 2, 1])
    np.testing.assert_array_equal(cell_counts(part, np.empty((0, 1))), [0, 0, 0])


def test_dimension_mismatch():
    part = build_partition(np.random.default_rng(0).normal(size=(8, 2)), 2)
    with pytest.raises(DimensionMismatch):
        cell_counts(part, np.zeros((3, 3)))


class TestL1Error:
    def test_hand_value_uniform_0_7(self):
        part = build_partition(SIX, 3)
        err = partition_l1_error(part, SIX, uniform(0.0, 7.0))
        assert err == pytest.approx(4 / 21, abs=1e-12)

    def test_self_oracle_is_zero(self):
        part = build_partition(SIX, 3)
        assert partition_l1_error(part, SIX, lambda cell: 1 / 3) == pytest.approx(0.0, abs=1e-15)

    def test_at_most_two(self):
        part = build_partition(SIX, 3)
        assert partition_l1_error(part, SIX, uniform(100.0, 101.0)) <= 2.0


class TestClassify:
    def test_hand_geometry(self):
        part = Partition.from_splits([np.array([[2.0, 4.0]])], 3, 1)
        g1, g2, g3 = classify_cells(part, 3.0)
        assert (g1, g2, g3) == ({0, 1}, {2}, set())

    def test_huge_radius_has_no_outside_cells(self):
        part = Partition.from_splits([np.array([[2.0, 4.0]])], 3, 1)
        g1, g2, _ = classify_cells(part, 1e6)
        assert g2 == set() and g1 == {0, 2}

    def test_threshold_d1(self):
        assert gamma_threshold(9, 1) == pytest.approx(9**-0.75)
        # width-1 interior cell is oversized at m = 9
        part = Partition.from_splits([np.array([[-5.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0]])], 9, 1)
        _, _, g3 = classify_cells(part, 10.0)
        assert {2, 3, 4, 5, 6} <= g3

    def test_disjoint(self):
        part = build_partition(np.random.default_rng(5).normal(size=(200, 2)), 5)
        g1, g2, g3 = classify_cells(part, 1.0)
        assert not (g1 & g2 or g1 & g3 or g2 & g3)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), m0=st.integers(2, 6), d=st.integers(1, 2), k=st.integers(1, 4))
def test_partition_invariants(seed, m0, d, k):
    rng = np.random.default_rng(seed)
    n = m0**d * k
    x = rng.standard_t(3, size=(n, d))
    part = build_partition(x, m0)
    m = part.m
    # equal mass
    np.testing.assert_array_equal(cell_counts(part, x), np.full(m, k))
    # determinism and permutation invariance
    again = build_partition(x[rng.permutation(n)], m0)
    assert again.cells == part.cells
    # infinitely large cells and class caps
    g1b, _ = gamma_bounds(m, d, 1.0)
    assert count_infinitely_large(part) <= g1b
    for R in (0.5, 2.0):
        g1, _, g3 = classify_cells(part, R)
        b1, b3 = gamma_bounds(m, d, R)
        assert len(g1) <= b1 and len(g3) <= b3


def test_levels_along_recursion():
    part = build_partition(np.random.default_rng(2).normal(size=(27, 3)), 3)
    for k, splits in enumerate(part.split_values):
        assert splits.shape == (3**k, 2)
        assert np.all(np.diff(splits, axis=1) > 0)
