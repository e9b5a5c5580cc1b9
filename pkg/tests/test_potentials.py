"""Cylinder-table potentials: sums, variation, cohomology operations."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbs_charts.errors import InsufficientDepth, NotStableRelated
from gibbs_charts.potentials import (Potential, TwoSidedTable, add_almost_coboundary,
                                     birkhoff_sum, constant_potential,
                                     periodic_birkhoff_sums, reduce_to_forward,
                                     transverse_cocycle, variation_profile)
from gibbs_charts.sft import build_sft, periodic_word_array


def random_table(spec, depth, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return Potential(spec, depth, scale * rng.normal(size=len(spec.level(depth))))


def test_constant_sum(golden):
    phi = constant_potential(golden, 0.7)
    assert birkhoff_sum(phi, (0, 1, 0, 0, 1), 5) == pytest.approx(3.5)


def test_depth_one_sum_oracle(full2):
    phi = Potential(full2, 1, [0.0, math.log(2)])
    assert birkhoff_sum(phi, (0, 1, 1, 0), 3) == pytest.approx(2 * math.log(2), abs=1e-15)


def test_sum_needs_enough_symbols(full2):
    phi = random_table(full2, 3, 0)
    with pytest.raises(InsufficientDepth):
        birkhoff_sum(phi, (0, 1, 1), 2)


def test_periodic_repetition(golden):
    phi = random_table(golden, 2, 1)
    p = (0, 1, 0)
    one = periodic_birkhoff_sums(phi, [p])[0]
    word = p * 4 + p[:1]
    assert birkhoff_sum(phi, word, 12) == pytest.approx(4 * one, abs=1e-12)


def test_variation_of_depth_one(golden):
    phi = Potential(golden, 1, [0.3, -0.4])
    prof = variation_profile(phi, 5)
    assert prof.var[0] == pytest.approx(0.7)
    assert np.all(prof.var[1:] == 0)
    assert prof.total == pytest.approx(0.7)


def test_variation_vanishes_at_table_depth(full2):
    prof = variation_profile(random_table(full2, 3, 2), 6)
    assert prof.var[3:].max() == 0.0
    assert prof.var[2] > 0.0
    # nonincreasing in n
    assert np.all(np.diff(prof.var) <= 1e-15)


def test_zero_transfer_is_identity(golden):
    phi = random_table(golden, 2, 3)
    psi = add_almost_coboundary(phi)
    assert np.array_equal(psi.values, phi.values)


def test_coboundary_of_zero_has_zero_periodic_sums(golden):
    u = random_table(golden, 1, 4)
    psi = add_almost_coboundary(constant_potential(golden), u)
    for n in range(1, 7):
        sums = periodic_birkhoff_sums(psi, periodic_word_array(golden, n))
        assert np.max(np.abs(sums)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.floats(-2, 2), st.integers(0, 10**6))
def test_almost_coboundary_shifts_periodic_sums_by_nK(kphi, ku, K, seed):
    spec = build_sft([[1, 1, 0], [0, 1, 1], [1, 1, 1]])
    phi = random_table(spec, kphi, seed)
    u = random_table(spec, ku, seed + 1)
    psi = add_almost_coboundary(phi, u, K)
    for n in range(1, 6):
        w = periodic_word_array(spec, n)
        d = periodic_birkhoff_sums(psi, w) - periodic_birkhoff_sums(phi, w)
        assert np.allclose(d, n * K, atol=1e-12)


def test_forward_table_reduces_to_itself(full2):
    phi = random_table(full2, 2, 5)
    plus, u = reduce_to_forward(phi)
    assert plus is phi and u is None


def test_two_sided_reduction_preserves_periodic_sums(full2):
    rng = np.random.default_rng(6)
    two = TwoSidedTable(full2, 1, 1, rng.normal(size=4))   # depends on x_{-1} x_0
    plus, u = reduce_to_forward(two)
    assert plus.depth == 2
    for n in range(1, 5):
        w = periodic_word_array(full2, n)
        # two-sided sum over a cycle: windows (x_{j-1}, x_j)
        direct = np.array([sum(two.at([row[(j - 1) % n]], [row[j]])[0] for j in range(n))
                           for row in w])
        assert np.allclose(periodic_birkhoff_sums(plus, w), direct, atol=1e-12)


def test_constant_two_sided_reduction(golden):
    two = TwoSidedTable(golden, 0, 1, [0.25, 0.25])
    plus, u = reduce_to_forward(two)
    assert u is None and np.allclose(plus.values, 0.25)


class TestTransverseCocycle:
    def test_equal_points(self, golden):
        phi = random_table(golden, 2, 7)
        assert transverse_cocycle(phi, (0, 1, 0, 0), (0, 1, 0, 0)) == 0.0

    def test_antisymmetric_and_additive(self, full2):
        phi = random_table(full2, 2, 8)
        x, y, z = (0, 0, 1, 1, 0, 1), (1, 0, 1, 1, 0, 1), (1, 1, 0, 1, 0, 1)
        xy = transverse_cocycle(phi, x, y)
        assert transverse_cocycle(phi, y, x) == pytest.approx(-xy, abs=1e-14)
        assert transverse_cocycle(phi, x, z) == pytest.approx(
            xy + transverse_cocycle(phi, y, z), abs=1e-13)

    def test_coboundary_changes_by_endpoint_values(self, full2):
        phi = random_table(full2, 2, 9)
        u = random_table(full2, 2, 10)
        psi = add_almost_coboundary(phi, u, 0.4)
        x, y = (0, 1, 1, 0, 1, 0, 0), (1, 0, 0, 0, 1, 0, 0)
        diff = transverse_cocycle(psi, x, y) - transverse_cocycle(phi, x, y)
        assert diff == pytest.approx(-u(y) + u(x), abs=1e-13)

    def test_unmerged_tails_raise(self, full2):
        phi = random_table(full2, 3, 11)
        with pytest.raises(NotStableRelated):
            transverse_cocycle(phi, (0, 0, 0, 1), (1, 1, 1, 1))
