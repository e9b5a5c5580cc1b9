import math
from fractions import Fraction

import numpy as np
import pytest

from gibbs_charts.errors import NotHolonomyRelated, NotHyperbolic, NotUnimodular
from gibbs_charts.markov import (build_automorphism, decode_word, encode_point,
                                 load_partition, orbit_itinerary, periodic_orbits,
                                 save_partition, stable_holonomy, torus_periodic_points,
                                 unstable_segment_map, verify_partition)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


def test_cat_map_eigenvalue(aut):
    assert aut.lambda_u == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-12)
    assert aut.lambda_u * aut.lambda_s == pytest.approx(1.0)
    assert np.allclose(aut.matrix @ aut.e_u, aut.lambda_u * aut.e_u)
    assert np.allclose(aut.matrix @ aut.e_s, aut.lambda_s * aut.e_s)


def test_fibonacci_matrix_is_hyperbolic():
    f = build_automorphism([[1, 1], [1, 0]])
    assert abs(f.lambda_u) == pytest.approx(GOLDEN_RATIO)
    assert f.det == -1


@pytest.mark.parametrize("m", [[[1, 1], [0, 1]], [[0, -1], [1, 0]], [[1, 0], [0, 1]]])
def test_non_hyperbolic(m):
    with pytest.raises(NotHyperbolic):
        build_automorphism(m)


def test_non_unimodular():
    with pytest.raises(NotUnimodular):
        build_automorphism([[2, 0], [0, 1]])


def test_partition_shape(part):
    assert part.r == 5
    assert part.area == pytest.approx(1.0, abs=1e-12)
    assert part.lam_u == pytest.approx(2.618034, abs=1e-6)
    # 13 admissible two-symbol words
    assert part.transition_matrix.sum() == 13
    assert part.spec.mixing_time == 2


def test_partition_sampled_properties(part):
    rep = verify_partition(part, samples=10_000, seed=3)
    assert rep["stable_boundary_dev"] < 1e-9
    assert rep["unstable_boundary_dev"] < 1e-9


def test_partition_roundtrip(part, aut, tmp_path):
    path = tmp_path / "p.json"
    save_partition(part, path)
    back = load_partition(path, aut)
    assert np.allclose(back.rects, part.rects)
    assert np.array_equal(back.transition_matrix, part.transition_matrix)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 5), (3, 16), (4, 45)])
def test_periodic_point_counts(aut, n, count):
    # |det(L^n - I)| = L_{2n} - 2 with L_k the Lucas numbers
    pts = torus_periodic_points(aut, n)
    assert len(pts) == count
    assert len(set(pts)) == count


def test_fixed_point(aut):
    assert torus_periodic_points(aut, 1) == [(Fraction(0), Fraction(0))]


def test_origin_has_constant_itinerary(part):
    back, fwd = encode_point(part, [0.0, 0.0], 6)
    assert len(set(fwd)) == 1 and set(back) == set(fwd)


def test_period_two_itineraries(part, aut):
    orbits = periodic_orbits(aut, 2)
    assert sum(len(o) for o in orbits) == 4   # 5 points minus the fixed point
    for orb in orbits:
        w = orbit_itinerary(part, orb)
        xy = np.array([[float(c) for c in orb[0]]])
        _, fwd = encode_point(part, xy[0], 6)
        assert fwd == (w * 4)[:7]


def test_encode_decode_roundtrip(part, rng):
    for p in rng.random((50, 2)):
        back, fwd = encode_point(part, p, 10)
        q, radius = decode_word(part, back, fwd)
        d = (np.asarray(q) - p + 0.5) % 1.0 - 0.5
        assert np.hypot(*d) <= radius + 1e-12


def _walk(A, start, length, rng):
    out = [start]
    while len(out) < length:
        out.append(int(rng.choice(np.flatnonzero(A[out[-1]]))))
    return out


def test_agreeing_words_decode_close(part, rng):
    A = part.transition_matrix
    n, extra = 6, 6
    for _ in range(30):
        core = _walk(A, int(rng.integers(part.r)), 2 * n + 1, rng)
        pts = []
        for _ in range(2):
            fwd = _walk(A, core[-1], extra + 1, rng)
            back = _walk(A.T, core[0], extra + 1, rng)[::-1]
            word = back[:-1] + core + fwd[1:]
            pts.append(decode_word(part, word[:n + extra], word[n + extra:])[0])
        d = (np.asarray(pts[0]) - pts[1] + 0.5) % 1.0 - 0.5
        assert np.hypot(*d) < 2 * part.lam_u ** -n


def test_segment_tiles_at_each_level(part):
    seg = unstable_segment_map(part)
    for n in (1, 4, 7):
        lo, hi = seg.level_intervals(n)
        order = np.argsort(lo)
        assert lo[order][0] == pytest.approx(0.0, abs=1e-12)
        assert hi[order][-1] == pytest.approx(seg.length, abs=1e-10)
        assert np.allclose(lo[order][1:], hi[order][:-1], atol=1e-10)


class TestHolonomy:
    def test_same_fibre(self, part):
        assert stable_holonomy(part, (0, 0.0), (0, 0.0), 0.1) == 0.1

    def test_round_trip(self, part, rng):
        i = 0
        w = part.widths[i]
        for ups in rng.random(20) * part.heights[i]:
            there = stable_holonomy(part, (i, 0.0), (i, w), ups)
            back = stable_holonomy(part, (i, w), (i, 0.0), there)
            assert back == pytest.approx(ups, abs=1e-12)

    def test_far_fibres_rejected(self, part):
        with pytest.raises(NotHolonomyRelated):
            stable_holonomy(part, (0, 0.0), (1, 0.0), 0.05, reach=1e-6)
