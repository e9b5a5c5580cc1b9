import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbs_charts.errors import InsufficientDepth
from gibbs_charts.potentials import (Potential, add_almost_coboundary, constant_potential,
                                     periodic_birkhoff_sums)
from gibbs_charts.sft import build_sft, periodic_word_array
from gibbs_charts.thermo import (brs_measure, expansion_iterate, invariant_normalization,
                                 local_uniqueness_check, pressure, pressure_report,
                                 transfer_apply)

BERNOULLI = [0.0, math.log(2.0)]


def table(spec, depth, seed, scale=0.5):
    rng = np.random.default_rng(seed)
    return Potential(spec, depth, scale * rng.normal(size=len(spec.level(depth))))


def parry_masses(spec, n):
    """Closed form: mu[w] = u_{w0} v_{w_{n-1}} / (lam^(n-1) u.v)."""
    u, v, lam = spec.pf_left_vector, spec.pf_right_vector, spec.pf_eigenvalue
    w = spec.level(n).words
    return u[w[:, 0]] * v[w[:, -1]] / (lam ** (n - 1) * float(u @ v))


# -- transfer operator ----------------------------------------------------

def test_transfer_zero_full_shift(full2):
    out = transfer_apply(full2, constant_potential(full2), np.ones(4), 2)
    assert np.allclose(out, 2.0)


def test_transfer_zero_golden_counts_prepends(golden):
    lev = golden.level(3)
    out = transfer_apply(golden, constant_potential(golden), np.ones(len(lev)), 3)
    assert np.allclose(out, np.where(lev.words[:, 0] == 0, 2.0, 1.0))


def test_transfer_bernoulli(full2):
    out = transfer_apply(full2, Potential(full2, 1, BERNOULLI), np.ones(2), 1)
    assert np.allclose(out, 3.0)


def test_transfer_rejects_shallow_table(full2):
    with pytest.raises(InsufficientDepth):
        transfer_apply(full2, table(full2, 4, 0), np.ones(2), 1)


# -- pressure -------------------------------------------------------------

@pytest.mark.parametrize("spec_name", ["full2", "golden"])
def test_pressure_of_zero_is_entropy(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    P, err = pressure(spec, constant_potential(spec), 8)
    assert P == pytest.approx(spec.entropy, abs=1e-12)
    assert err < 1e-10


def test_bernoulli_pressure(full2):
    P, _ = pressure(full2, Potential(full2, 1, BERNOULLI), 10)
    assert abs(P - math.log(3)) < 1e-12


def test_depth_one_request_still_sees_transitions(golden):
    # a single-symbol working depth would forget the transition matrix
    P, _ = pressure(golden, constant_potential(golden), 1)
    assert P == pytest.approx(golden.entropy, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(-3, 3), st.integers(1, 3))
def test_pressure_shift_by_constant(seed, K, depth):
    spec = build_sft([[1, 1, 0], [1, 0, 1], [1, 1, 1]])
    phi = table(spec, depth, seed)
    assert pressure(spec, phi + K, 8)[0] == pytest.approx(pressure(spec, phi, 8)[0] + K,
                                                          abs=1e-10)


def test_pressure_coboundary_invariance(golden):
    phi = table(golden, 2, 3)
    u = table(golden, 2, 4)
    assert pressure(golden, add_almost_coboundary(phi, u), 8)[0] == pytest.approx(
        pressure(golden, phi, 8)[0], abs=1e-11)


def test_pressure_report_schema(full2):
    rep = pressure_report(full2, constant_potential(full2), 6)
    assert rep["schema_version"] == 1 and rep["depth"] == 6
    assert set(rep) >= {"P", "error_bound"}


# -- measures -------------------------------------------------------------

def test_uniform_measure(full2):
    nu = brs_measure(full2, constant_potential(full2), 6)
    for n in (1, 4, 9):
        assert np.allclose(nu.masses_at(n), 2.0 ** -n)


def test_bernoulli_masses(full2):
    nu = brs_measure(full2, Potential(full2, 1, BERNOULLI), 6)
    assert np.allclose(nu.masses_at(1), [1 / 3, 2 / 3], atol=1e-13)
    assert nu.mass((1, 0, 1)) == pytest.approx(4 / 27, abs=1e-13)


def test_golden_eigenmeasure_follows_right_vector(golden):
    # the eigenmeasure of zero is not invariant, but its one-symbol masses
    # follow the right Perron vector
    nu = brs_measure(golden, constant_potential(golden), 8)
    v = golden.pf_right_vector
    assert np.allclose(nu.masses_at(1), v / v.sum(), atol=1e-12)


def test_invariant_of_zero_is_parry(golden):
    phi_p, _, mu = invariant_normalization(golden, constant_potential(golden), 8)
    for n in (1, 2, 5):
        assert np.allclose(mu.masses_at(n), parry_masses(golden, n), atol=1e-12)
    # h is not constant here, so phi' is only cohomologous to -h_top
    for n in range(1, 6):
        sums = periodic_birkhoff_sums(phi_p, periodic_word_array(golden, n))
        assert np.allclose(sums, -n * golden.entropy, atol=1e-12)


def test_zero_on_full_shift_normalizes_to_minus_entropy(full2):
    phi_p, _, _ = invariant_normalization(full2, constant_potential(full2), 6)
    assert np.allclose(phi_p.values, -math.log(2), atol=1e-13)


def test_invariant_bernoulli(full2):
    phi = Potential(full2, 1, BERNOULLI)
    phi_p, _, mu = invariant_normalization(full2, phi, 6)
    assert np.allclose(mu.masses_at(1), [1 / 3, 2 / 3], atol=1e-13)
    assert np.allclose(phi_p.lift(2), phi.lift(2) - math.log(3), atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_invariant_measure_is_shift_invariant(golden, seed):
    _, _, mu = invariant_normalization(golden, table(golden, 3, seed), 8)
    n = 7
    lev = golden.level(n + 1)
    pushed = np.bincount(lev.tail, weights=mu.masses_at(n + 1), minlength=len(golden.level(n)))
    assert np.allclose(pushed, mu.masses_at(n), atol=1e-13)
    assert mu.masses_at(n).sum() == pytest.approx(1.0, abs=1e-12)


def test_normalized_potential_is_expanding(golden):
    phi_p, _, _ = invariant_normalization(golden, table(golden, 2, 9), 8)
    assert expansion_iterate(golden, phi_p) in (1, golden.mixing_time)


def test_word_masses_agree_with_levels(golden):
    nu = brs_measure(golden, table(golden, 2, 5), 6)
    w = golden.level(11).words[::37]
    assert np.allclose(nu.word_masses(w), nu.masses_at(11)[::37], rtol=1e-12)


class TestLocalUniqueness:
    cyl = [(0, 1), (1, 0)]

    def test_self_comparison(self, golden):
        mu = brs_measure(golden, table(golden, 2, 1), 8)
        rep = local_uniqueness_check(mu.mass, mu, self.cyl, 6)
        assert rep.deviation < 1e-12 and rep.constant == pytest.approx(1.0)

    def test_scaled_copy(self, golden):
        mu = brs_measure(golden, table(golden, 2, 1), 8)
        rep = local_uniqueness_check(lambda w: 2 * mu.mass(w), mu, self.cyl, 6)
        assert rep.deviation < 1e-12 and rep.constant == pytest.approx(2.0)

    def test_different_class_detected(self, golden):
        mu = brs_measure(golden, table(golden, 2, 1), 8)
        other = brs_measure(golden, table(golden, 2, 2), 8)
        rep = local_uniqueness_check(other.mass, mu, self.cyl, 6)
        assert rep.deviation > 0.1
