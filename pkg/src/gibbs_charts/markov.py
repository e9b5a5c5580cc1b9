"""Markov partitions and symbolic coding for hyperbolic toral automorphisms.

Geometry is done in eigen-coordinates ``(s, u)``: a point of the plane is
``s * e_s + u * e_u``, so the automorphism acts as ``(s, u) -> (lam_s s,
lam_u u)``.  A rectangle is the image on the torus of the half-open box
``[s0, s0 + w) x [u0, u0 + h)``; local coordinates inside it are
``(sigma, upsilon) = (s - s0, u - u0)``.

For each allowed transition ``i -> j`` the image of ``R_i`` meets ``R_j`` in
one full-height strip.  Two numbers describe it:

* ``a[i, j]``: the preimage strip is ``upsilon in [a, a + h_j / lam_u)`` in ``R_i``
  and ``upsilon' = lam_u * (upsilon - a)``;
* ``c[i, j]``: the image strip starts at ``sigma' = c`` in ``R_j`` and
  ``sigma' = lam_s * sigma + c``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (InadmissibleWord, MarkovPropertyViolation,
                     NotHolonomyRelated, NotHyperbolic, NotUnimodular,
                     UnsupportedMatrix)
from .sft import SubshiftSpec, build_sft

__all__ = [
    "ToralAutomorphism", "build_automorphism", "MarkovPartition",
    "catmap_partition", "load_partition", "save_partition", "encode_point",
    "decode_word", "SegmentMap", "unstable_segment_map", "torus_periodic_points",
    "periodic_orbits", "orbit_itinerary", "stable_holonomy", "verify_partition",
    "CAT_MAP",
]

CAT_MAP = ((2, 1), (1, 1))
EDGE_EPS = 1e-11
CHECK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ToralAutomorphism:
    """Hyperbolic element of GL(2, Z) with its eigen-data.

    ``basis`` has columns ``e_s, e_u`` so that ``xy = basis @ (s, u)``.
    """

    matrix: np.ndarray
    lambda_u: float
    lambda_s: float
    e_u: np.ndarray
    e_s: np.ndarray
    basis: np.ndarray
    basis_inv: np.ndarray

    @property
    def entropy(self) -> float:
        return float(np.log(abs(self.lambda_u)))

    @property
    def det(self) -> int:
        return int(round(np.linalg.det(self.matrix)))

    def apply(self, xy, times: int = 1) -> np.ndarray:
        m = np.linalg.matrix_power(self.matrix, times) if times >= 0 else \
            np.linalg.matrix_power(self.inverse_matrix(), -times)
        out = np.asarray(xy, dtype=float) @ m.T.astype(float)
        return out - np.floor(out)

    def inverse_matrix(self) -> np.ndarray:
        (a, b), (c, d) = self.matrix
        det = a * d - b * c
        return np.array([[d, -b], [-c, a]], dtype=np.int64) * det

    def to_eigen(self, xy) -> np.ndarray:
        return np.asarray(xy, dtype=float) @ self.basis_inv.T

    def from_eigen(self, su) -> np.ndarray:
        return np.asarray(su, dtype=float) @ self.basis.T

    def power(self, p: int) -> "ToralAutomorphism":
        return build_automorphism(np.linalg.matrix_power(self.matrix, p))


def build_automorphism(matrix) -> ToralAutomorphism:
    """Validate an integer 2x2 matrix and compute its eigen-data.

    Raises
    ------
    NotUnimodular
        If ``|det| != 1``.
    NotHyperbolic
        If an eigenvalue has modulus one.
    """
    m = np.asarray(matrix)
    if m.shape != (2, 2) or not np.all(m == np.round(m)):
        raise ValueError("expected an integer 2x2 matrix")
    m = m.astype(np.int64)
    det = int(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    if abs(det) != 1:
        raise NotUnimodular("determinant is %d" % det)
    tr = int(m[0, 0] + m[1, 1])
    disc = tr * tr - 4 * det
    if disc <= 0:
        raise NotHyperbolic("complex eigenvalues on the unit circle")
    root = np.sqrt(float(disc))
    ev = [(tr + root) / 2.0, (tr - root) / 2.0]
    ev.sort(key=abs)
    lam_s, lam_u = ev
    if abs(abs(lam_u) - 1.0) < 1e-12 or abs(abs(lam_s) - 1.0) < 1e-12:
        raise NotHyperbolic("eigenvalue of modulus one")
    vecs = []
    for lam in (lam_s, lam_u):
        # (m - lam) v = 0: pick the better conditioned row
        r = m[0] if abs(m[0, 1]) + abs(m[0, 0] - lam) >= abs(m[1, 0]) + abs(m[1, 1] - lam) else m[1]
        if r is m[0]:
            v = np.array([m[0, 1], lam - m[0, 0]], dtype=float)
        else:
            v = np.array([lam - m[1, 1], m[1, 0]], dtype=float)
        vecs.append(v / np.linalg.norm(v))
    e_s, e_u = vecs
    if e_u[0] < 0:
        e_u = -e_u
    if e_s[1] < 0:
        e_s = -e_s
    basis = np.column_stack([e_s, e_u])
    m.setflags(write=False)
    return ToralAutomorphism(m, float(lam_u), float(lam_s), e_u, e_s, basis,
                             np.linalg.inv(basis))


def _lattice_box(aut, s_lo, s_hi, u_lo, u_hi):
    """Integer points whose eigen-coordinates may fall in the given box."""
    corners = aut.from_eigen(np.array([[s_lo, u_lo], [s_lo, u_hi], [s_hi, u_lo], [s_hi, u_hi]]))
    lo = np.floor(corners.min(axis=0)).astype(int)
    hi = np.ceil(corners.max(axis=0)).astype(int)
    return [(x, y) for x in range(lo[0], hi[0] + 1) for y in range(lo[1], hi[1] + 1)]


def _strips(aut, rects, tol=1e-9):
    """All pieces ``L(R_i) cap (R_j + v)``; each must be a full-height strip."""
    ls, lu = aut.lambda_s, aut.lambda_u
    out = []
    for i, (s0, u0, w, h) in enumerate(rects):
        img = (ls * s0, lu * u0, ls * w, lu * h)
        for j, (t0, v0, W, H) in enumerate(rects):
            cand = _lattice_box(aut, img[0] - t0 - W, img[0] + img[2] - t0,
                                img[1] - v0 - H, img[1] + img[3] - v0)
            for k in cand:
                vs, vu = aut.to_eigen(np.array(k, dtype=float))
                a = max(img[0], t0 + vs)
                b = min(img[0] + img[2], t0 + vs + W)
                c = max(img[1], v0 + vu)
                d = min(img[1] + img[3], v0 + vu + H)
                if b - a > tol and d - c > tol:
                    full_s = abs(b - a - img[2]) < tol
                    full_u = abs(d - c - H) < tol
                    if not (full_s and full_u):
                        raise MarkovPropertyViolation(
                            "image of rectangle %d meets rectangle %d in a partial strip" % (i, j))
                    out.append((i, j, k, img[0] - (t0 + vs), (v0 + vu) / lu - u0))
    return out


def _is_catmap_power(matrix):
    base = np.array(CAT_MAP, dtype=np.int64)
    for p in range(1, 9):
        if np.array_equal(np.linalg.matrix_power(base, p), matrix):
            return p
    return 0


@dataclass(frozen=True, eq=False)
class MarkovPartition:
    """Rectangles, transition data and boundary segments for a toral automorphism."""

    aut: ToralAutomorphism
    rects: np.ndarray                 # (r, 4): s0, u0, w, h
    transition_matrix: np.ndarray
    a: np.ndarray                     # (r, r) preimage strip offsets (nan if no transition)
    c: np.ndarray                     # (r, r) image strip offsets
    shift: np.ndarray                 # (r, r, 2) integer translations of the strips
    spec: SubshiftSpec
    swapped: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def r(self) -> int:
        return self.rects.shape[0]

    @property
    def lam_u(self) -> float:
        return self.aut.lambda_s ** -1 if self.swapped else self.aut.lambda_u

    @property
    def lam_s(self) -> float:
        return self.aut.lambda_u ** -1 if self.swapped else self.aut.lambda_s

    @property
    def widths(self) -> np.ndarray:
        return self.rects[:, 2]

    @property
    def heights(self) -> np.ndarray:
        return self.rects[:, 3]

    @property
    def area(self) -> float:
        return float(np.sum(self.rects[:, 2] * self.rects[:, 3]) * abs(np.linalg.det(self.aut.basis)))

    # -- coordinates -------------------------------------------------------
    def _su(self, xy):
        su = self.aut.to_eigen(xy)
        return su[:, ::-1] if self.swapped else su

    def _xy(self, su):
        su = np.asarray(su, dtype=float)
        if self.swapped:
            su = su[:, ::-1]
        out = self.aut.from_eigen(su)
        return out - np.floor(out)

    def locate(self, xy, eps: float = EDGE_EPS):
        """Return ``(rect, sigma, upsilon)`` arrays for points of the torus.

        Points within ``eps`` of a lower edge are assigned to it, so lattice
        points computed in floating point land on the intended side.
        """
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        xy = xy - np.floor(xy)
        n = xy.shape[0]
        rect = np.full(n, -1, dtype=np.int64)
        sig = np.zeros(n)
        ups = np.zeros(n)
        for k in itertools.product(range(-2, 3), repeat=2):
            su = self._su(xy + np.array(k, dtype=float))
            for i, (s0, u0, w, h) in enumerate(self.rects):
                ls = su[:, 0] - s0
                lu = su[:, 1] - u0
                hit = (rect < 0) & (ls >= -eps) & (ls < w - eps) & (lu >= -eps) & (lu < h - eps)
                rect[hit] = i
                sig[hit] = np.clip(ls[hit], 0.0, None)
                ups[hit] = np.clip(lu[hit], 0.0, None)
        if np.any(rect < 0):
            raise MarkovPropertyViolation("point not covered by any rectangle")
        return rect, sig, ups

    def count_cover(self, xy) -> np.ndarray:
        """Number of half-open rectangles containing each point (should be 1)."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        xy = xy - np.floor(xy)
        cnt = np.zeros(xy.shape[0], dtype=np.int64)
        for k in itertools.product(range(-2, 3), repeat=2):
            su = self._su(xy + np.array(k, dtype=float))
            for s0, u0, w, h in self.rects:
                ls = su[:, 0] - s0
                lu = su[:, 1] - u0
                cnt += (ls >= 0) & (ls < w) & (lu >= 0) & (lu < h)
        return cnt

    def to_torus(self, rect, sigma, upsilon) -> np.ndarray:
        rect = np.atleast_1d(rect)
        su = np.column_stack([self.rects[rect, 0] + sigma, self.rects[rect, 1] + upsilon])
        return self._xy(su)

    # -- symbolic dynamics -------------------------------------------------
    def forward_step(self, rect, sigma, upsilon):
        """Apply the map in local coordinates; returns the next rectangle too."""
        rect = np.asarray(rect)
        nxt = np.full(rect.shape, -1, dtype=np.int64)
        lo_all = self.a[rect]
        hi_all = lo_all + (self.heights / self.lam_u)[None, :]
        inside = (upsilon[:, None] >= lo_all - EDGE_EPS) & (upsilon[:, None] < hi_all - EDGE_EPS)
        inside &= self.transition_matrix[rect] == 1
        hit = inside.any(axis=1)
        nxt[hit] = np.argmax(inside[hit], axis=1)
        if not hit.all():
            raise MarkovPropertyViolation("orbit left the partition")
        a = self.a[rect, nxt]
        c = self.c[rect, nxt]
        return nxt, self.lam_s * sigma + c, np.maximum(self.lam_u * (upsilon - a), 0.0)

    def backward_step(self, rect, sigma, upsilon):
        rect = np.asarray(rect)
        prev = np.full(rect.shape, -1, dtype=np.int64)
        lo_all = self.c[:, rect].T
        hi_all = lo_all + (self.widths * self.lam_s)[None, :]
        inside = (sigma[:, None] >= lo_all - EDGE_EPS) & (sigma[:, None] < hi_all - EDGE_EPS)
        inside &= self.transition_matrix[:, rect].T == 1
        hit = inside.any(axis=1)
        prev[hit] = np.argmax(inside[hit], axis=1)
        if not hit.all():
            raise MarkovPropertyViolation("backward orbit left the partition")
        c = self.c[prev, rect]
        a = self.a[prev, rect]
        return prev, np.maximum((sigma - c) / self.lam_s, 0.0), upsilon / self.lam_u + a

    def forward_interval(self, word):
        """``(lo, length)`` of the upsilon-interval in ``R_{word[0]}`` coded by ``word``."""
        w = [int(s) for s in word]
        if not self.spec.is_admissible(w):
            raise InadmissibleWord("inadmissible word %r" % (tuple(w),))
        lo = 0.0
        length = self.heights[w[-1]]
        for x, y in zip(reversed(w[:-1]), reversed(w[1:])):
            lo = self.a[x, y] + lo / self.lam_u
            length /= self.lam_u
        return lo, length

    def backward_interval(self, word):
        """``(lo, length)`` of the sigma-interval in ``R_{x_0}``.

        ``word`` is ``(x_{-m}, ..., x_{-1}, x_0)``.
        """
        w = [int(s) for s in word]
        if not self.spec.is_admissible(w):
            raise InadmissibleWord("inadmissible word %r" % (tuple(w),))
        lo = 0.0
        length = self.widths[w[0]]
        for x, y in zip(w[:-1], w[1:]):
            lo = self.lam_s * lo + self.c[x, y]
            length *= self.lam_s
        return lo, length

    def level_intervals(self, n: int):
        """Vectorized ``forward_interval`` over ``spec.level(n)``: ``(lo, length)``."""
        key = ("levint", n)
        if key in self._cache:
            return self._cache[key]
        lev = self.spec.level(n)
        if n == 1:
            lo = np.zeros(len(lev))
        else:
            prev_lo, _ = self.level_intervals(n - 1)
            w = lev.words
            lo = self.a[w[:, 0], w[:, 1]] + prev_lo[lev.tail] / self.lam_u
        length = self.heights[lev.words[:, -1]] / self.lam_u ** (n - 1)
        self._cache[key] = (lo, length)
        return lo, length

    def base_coding(self, symbol: int, side: str, length: int) -> tuple:
        """Backward word ``(x_{-length}, ..., x_{-1})`` of the edge point of ``R_symbol``.

        ``side="left"`` follows the edge ``sigma = 0`` and ``side="right"`` the
        edge ``sigma = w``; each step picks the unique predecessor strip
        sharing that edge.
        """
        out = []
        cur = int(symbol)
        for _ in range(length):
            col = self.transition_matrix[:, cur] == 1
            if side == "left":
                cand = np.flatnonzero(col & (np.abs(self.c[:, cur]) < 1e-9))
            else:
                ends = self.c[:, cur] + self.lam_s * self.widths
                cand = np.flatnonzero(col & (np.abs(ends - self.widths[cur]) < 1e-9))
            if cand.size != 1:
                raise MarkovPropertyViolation("edge of rectangle %d has no unique predecessor" % cur)
            cur = int(cand[0])
            out.append(cur)
        return tuple(reversed(out))

    def inverse_view(self) -> "MarkovPartition":
        """The same partition seen from the stable side.

        Coordinates are swapped and the dynamics inverted, so the stable
        direction becomes the expanding one and the transition matrix is
        transposed.  All unstable-side machinery then applies verbatim.
        """
        if "inverse" not in self._cache:
            inv = MarkovPartition(self.aut, self.rects[:, [1, 0, 3, 2]].copy(),
                                  self.transition_matrix.T.copy(), self.c.T.copy(),
                                  self.a.T.copy(), -self.shift.transpose(1, 0, 2),
                                  build_sft(self.transition_matrix.T), not self.swapped)
            self._cache["inverse"] = inv
        return self._cache["inverse"]

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "automorphism": self.aut.matrix.tolist(),
            "rectangles": [{"corner": [float(r[0]), float(r[1])], "stable_extent": float(r[2]),
                            "unstable_extent": float(r[3])} for r in self.rects],
            "transition_matrix": self.transition_matrix.tolist(),
            "conventions": {"half_open": "lower stable and unstable edges included"},
        }


def _assemble(aut, rects, refine_cap=4):
    rects = [tuple(float(x) for x in r) for r in rects]
    for _ in range(refine_cap + 1):
        strips = _strips(aut, rects)
        r = len(rects)
        counts = np.zeros((r, r), dtype=np.int64)
        for i, j, *_ in strips:
            counts[i, j] += 1
        if counts.max() <= 1:
            break
        lu = aut.lambda_u
        new = []
        for i, (s0, u0, w, h) in enumerate(rects):
            pieces = sorted((a, rects[j][3] / lu) for ii, j, _, _, a in strips if ii == i)
            new.extend((s0, u0 + a, w, hh) for a, hh in pieces)
        rects = new
    else:
        raise MarkovPropertyViolation("refinement did not produce a 0/1 transition matrix")
    r = len(rects)
    A = np.zeros((r, r), dtype=np.int64)
    a = np.full((r, r), np.nan)
    c = np.full((r, r), np.nan)
    shift = np.zeros((r, r, 2), dtype=np.int64)
    for i, j, k, cc, aa in strips:
        A[i, j] = 1
        a[i, j] = aa
        c[i, j] = cc
        shift[i, j] = k
    spec = build_sft(A)
    part = MarkovPartition(aut, np.array(rects), A, a, c, shift, spec)
    return part


def verify_partition(part: MarkovPartition, samples: int = 10_000, seed: int = 0) -> dict:
    """Sampled checks of cover, both boundary invariances and the transition rule.

    Returns the worst deviations; raises :class:`MarkovPropertyViolation` on failure.
    """
    rng = np.random.default_rng(seed)
    aut = part.aut
    report = {}
    if abs(part.area - 1.0) > 1e-9:
        raise MarkovPropertyViolation("rectangle areas sum to %.12f" % part.area)
    report["area"] = part.area
    pts = rng.random((samples, 2))
    cover = part.count_cover(pts)
    if np.any(cover != 1):
        raise MarkovPropertyViolation("%d sample points not covered exactly once"
                                      % int(np.sum(cover != 1)))
    report["cover_samples"] = samples

    r = part.r
    fwd = -1 if part.swapped else 1
    m = max(samples // (2 * r), 1)
    worst_s = worst_u = 0.0
    for i, (s0, u0, w, h) in enumerate(part.rects):
        sig = rng.random(m) * w
        for ups in (np.zeros(m), np.full(m, h)):
            img = aut.apply(part.to_torus(np.full(m, i), sig, ups), times=fwd)
            j, _, u2 = part.locate(img, eps=1e-8)
            dev = np.minimum(np.abs(u2), np.abs(part.heights[j] - u2))
            worst_s = max(worst_s, float(dev.max()))
        ups = rng.random(m) * h
        for sg in (np.zeros(m), np.full(m, w)):
            img = aut.apply(part.to_torus(np.full(m, i), sg, ups), times=-fwd)
            j, s2, _ = part.locate(img, eps=1e-8)
            dev = np.minimum(np.abs(s2), np.abs(part.widths[j] - s2))
            worst_u = max(worst_u, float(dev.max()))
    if part.swapped:
        worst_s, worst_u = worst_u, worst_s
    report["stable_boundary_dev"] = worst_s
    report["unstable_boundary_dev"] = worst_u
    if worst_s > CHECK_TOL or worst_u > CHECK_TOL:
        raise MarkovPropertyViolation("boundary invariance fails (%.3g, %.3g)" % (worst_s, worst_u))

    seen = np.zeros((r, r), dtype=bool)
    for i, (s0, u0, w, h) in enumerate(part.rects):
        sig = (0.001 + 0.998 * rng.random(m)) * w
        ups = (0.001 + 0.998 * rng.random(m)) * h
        j, _, _ = part.locate(aut.apply(part.to_torus(np.full(m, i), sig, ups), times=fwd))
        seen[i, np.unique(j)] = True
    if np.any(seen & (part.transition_matrix == 0)):
        raise MarkovPropertyViolation("sampled transition outside the transition matrix")
    report["transitions_seen"] = int(seen.sum())
    return report


def catmap_partition(aut: ToralAutomorphism, path=None, check: bool = True) -> MarkovPartition:
    """Markov partition for the cat map or one of its powers.

    Starts from the two-square tiling cut out by stable and unstable segments
    through the origin, then refines by pulling back image strips until the
    transition matrix is 0/1.  Other automorphisms need a partition file.

    Raises
    ------
    UnsupportedMatrix
        For matrices without a built-in construction when no file is given.
    """
    if path is not None:
        return load_partition(path, aut)
    if not _is_catmap_power(aut.matrix):
        raise UnsupportedMatrix("no built-in partition for %s; supply a partition file"
                                % aut.matrix.tolist())
    phi = (1 + 5 ** 0.5) / 2
    c = 1.0 / np.sqrt(1 + phi * phi)
    rects = [(0.0, 0.0, phi * c, phi * c), (-c, (phi - 1) * c, c, c)]
    part = _assemble(aut, rects)
    if check:
        verify_partition(part)
    return part


def load_partition(path, aut: ToralAutomorphism | None = None, check: bool = True) -> MarkovPartition:
    """Read a partition file.

    Rectangles are given either as ``corner``/``stable_extent``/``unstable_extent``
    or as a list of four ``vertices`` in eigen-coordinates.  Coarse partitions
    are refined automatically; only automorphisms with positive eigenvalues
    are accepted.
    """
    with open(path) as fh:
        data = json.load(fh)
    if aut is None:
        aut = build_automorphism(data["automorphism"])
    elif "automorphism" in data and not np.array_equal(np.asarray(data["automorphism"]), aut.matrix):
        raise ValueError("partition file is for a different automorphism")
    if aut.lambda_s <= 0 or aut.lambda_u <= 0:
        raise UnsupportedMatrix("orientation-reversing eigenvalues are not supported")
    rects = []
    for rec in data["rectangles"]:
        if "vertices" in rec:
            v = np.asarray(rec["vertices"], dtype=float)
            s0, u0 = v.min(axis=0)
            s1, u1 = v.max(axis=0)
            rects.append((s0, u0, s1 - s0, u1 - u0))
        else:
            s0, u0 = rec["corner"]
            rects.append((s0, u0, rec["stable_extent"], rec["unstable_extent"]))
    part = _assemble(aut, rects)
    if "transition_matrix" in data and len(data["rectangles"]) == part.r:
        if not np.array_equal(np.asarray(data["transition_matrix"]), part.transition_matrix):
            raise MarkovPropertyViolation("declared transition matrix disagrees with geometry")
    if check:
        verify_partition(part)
    return part


def save_partition(part: MarkovPartition, path) -> None:
    with open(path, "w") as fh:
        json.dump(part.to_json(), fh, indent=2)


def encode_point(part: MarkovPartition, point, n: int):
    """Itinerary of a torus point.

    Returns ``(backward, forward)`` with ``backward = (x_{-n}, ..., x_{-1})``
    and ``forward = (x_0, ..., x_n)``.  Boundary points follow the half-open
    convention (lower edges belong to the rectangle).
    """
    rect, sig, ups = part.locate(np.atleast_2d(point))
    fwd = [int(rect[0])]
    r, s, u = rect, sig, ups
    for _ in range(n):
        r, s, u = part.forward_step(r, s, u)
        fwd.append(int(r[0]))
    bwd = []
    r, s, u = rect, sig, ups
    for _ in range(n):
        r, s, u = part.backward_step(r, s, u)
        bwd.append(int(r[0]))
    return tuple(reversed(bwd)), tuple(fwd)


def decode_word(part: MarkovPartition, backward, forward):
    """Centre of the parallelogram coded by ``backward + forward`` and a radius bound.

    The forward word pins the unstable coordinate, the backward word the
    stable one.  The radius is the half-diagonal of the coded box.
    """
    fwd = tuple(int(s) for s in forward)
    bwd = tuple(int(s) for s in backward)
    if not fwd:
        raise InadmissibleWord("forward word must contain x_0")
    lo_u, len_u = part.forward_interval(fwd)
    lo_s, len_s = part.backward_interval(bwd + (fwd[0],))
    pt = part.to_torus([fwd[0]], np.array([lo_s + len_s / 2]), np.array([lo_u + len_u / 2]))[0]
    radius = 0.5 * float(np.hypot(len_s, len_u)) * float(np.linalg.norm(part.aut.basis, 2))
    return pt, radius


@dataclass(frozen=True, eq=False)
class SegmentMap:
    """Coding of the unstable segment through the origin by one-sided words.

    ``offset[i]`` is the arclength at which the chosen edge of ``R_i`` starts
    on the segment; the word ``x`` is sent to ``offset[x_0] + upsilon(x)``.
    """

    part: MarkovPartition
    side: str
    offset: np.ndarray
    length: float

    def position(self, word) -> float:
        lo, _ = self.part.forward_interval(word)
        return float(self.offset[int(word[0])] + lo)

    def interval(self, word) -> tuple[float, float]:
        lo, ln = self.part.forward_interval(word)
        start = float(self.offset[int(word[0])] + lo)
        return start, start + ln

    def level_intervals(self, n: int):
        lo, ln = self.part.level_intervals(n)
        start = self.offset[self.part.spec.level(n).words[:, 0]] + lo
        return start, start + ln

    def edge_sigma(self, symbol: int) -> float:
        return 0.0 if self.side == "left" else float(self.part.widths[symbol])

    def point(self, t: float) -> np.ndarray:
        """Torus point at arclength ``t`` on the segment."""
        i, ups = self.locate(t)
        return self.part.to_torus([i], np.array([self.edge_sigma(i)]), np.array([ups]))[0]

    def locate(self, t: float):
        """``(rect, upsilon)`` of arclength ``t`` (half-open at the top)."""
        t = float(t)
        for i in np.argsort(self.offset):
            if self.offset[i] - 1e-12 <= t < self.offset[i] + self.part.heights[i] - 1e-12:
                return int(i), max(t - float(self.offset[i]), 0.0)
        raise ValueError("arclength %r outside the segment" % t)

    def encode(self, t: float, n: int) -> tuple:
        i, ups = self.locate(t)
        r, s, u = np.array([i]), np.array([self.edge_sigma(i)]), np.array([ups])
        out = [i]
        for _ in range(n - 1):
            r, s, u = self.part.forward_step(r, s, u)
            out.append(int(r[0]))
        return tuple(out)


def unstable_segment_map(part: MarkovPartition, side: str = "clockwise") -> SegmentMap:
    """Segment map ``pi_1`` (``clockwise``, left edges) or ``pi_2`` (right edges).

    Each rectangle's chosen edge lies on the unstable line through some
    integer point; its arclength position relative to that point is the
    rectangle's offset, and the offsets of all rectangles tile one segment.
    """
    key = ("segment", side)
    if key in part._cache:
        return part._cache[key]
    if side in ("clockwise", "left", 1):
        edge = "left"
    elif side in ("counterclockwise", "right", 2):
        edge = "right"
    else:
        raise ValueError("side must be 'clockwise' or 'counterclockwise'")
    offsets = np.zeros(part.r)
    for i, (s0, u0, w, h) in enumerate(part.rects):
        s_edge = s0 if edge == "left" else s0 + w
        found = None
        for k in itertools.product(range(-4, 5), repeat=2):
            su = part._su(np.array([k], dtype=float))[0]
            if abs(su[0] - s_edge) < 1e-9:
                found = su
                break
        if found is None:
            raise MarkovPropertyViolation("edge of rectangle %d is not on an unstable line "
                                          "through an integer point" % i)
        offsets[i] = u0 - found[1]
    order = np.argsort(offsets)
    starts = offsets[order]
    ends = starts + part.heights[order]
    if np.max(np.abs(starts[1:] - ends[:-1])) > 1e-9:
        raise MarkovPropertyViolation("rectangle edges do not tile a segment")
    offsets = offsets - starts[0]
    seg = SegmentMap(part, edge, offsets, float(part.heights.sum()))
    part._cache[key] = seg
    return seg


# -- periodic points ------------------------------------------------------

def _hnf_reps(mat):
    """Representatives of Z^2 / mat Z^2 via a column Hermite form."""
    p, q = int(mat[0][0]), int(mat[0][1])
    r, s = int(mat[1][0]), int(mat[1][1])

    def egcd(x, y):
        if y == 0:
            return (abs(x), (1 if x >= 0 else -1), 0)
        g, a, b = egcd(y, x % y)
        return g, b, a - (x // y) * b

    g, x, y = egcd(r, s)      # x r + y s = g
    if g == 0:
        raise ValueError("singular matrix")
    # unimodular U with (r, s) U = (0, g): columns (s/g, -r/g) and (x, y)
    u = [[s // g, x], [-r // g, y]]
    a11 = p * u[0][0] + q * u[1][0]
    a12 = p * u[0][1] + q * u[1][1]
    reps = []
    for k2 in range(abs(g)):
        for k1 in range(abs(a11)):
            reps.append((k1, k2))
    return reps, abs(a11 * g)


def torus_periodic_points(aut: ToralAutomorphism, n: int) -> list[tuple[Fraction, Fraction]]:
    """All ``x`` in ``[0,1)^2`` with ``L^n x = x`` mod 1, as exact fractions."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mn = [[int(v) for v in row] for row in np.linalg.matrix_power(aut.matrix, n)]
    m = [[mn[0][0] - 1, mn[0][1]], [mn[1][0], mn[1][1] - 1]]
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    reps, count = _hnf_reps(m)
    assert count == abs(det)
    pts = set()
    for k1, k2 in reps:
        x = Fraction(m[1][1] * k1 - m[0][1] * k2, det)
        y = Fraction(-m[1][0] * k1 + m[0][0] * k2, det)
        pts.add((x - (x.numerator // x.denominator), y - (y.numerator // y.denominator)))
    return sorted(pts)


def _apply_exact(aut, pt):
    (a, b), (c, d) = aut.matrix
    x, y = pt
    nx = int(a) * x + int(b) * y
    ny = int(c) * x + int(d) * y
    return (nx - (nx.numerator // nx.denominator), ny - (ny.numerator // ny.denominator))


def periodic_orbits(aut: ToralAutomorphism, n: int, exact: bool = True) -> list[list]:
    """Orbits of the period-``n`` points; with ``exact`` only least period ``n``."""
    remaining = set(torus_periodic_points(aut, n))
    orbits = []
    for p in sorted(remaining):
        if p not in remaining:
            continue
        orb = [p]
        q = _apply_exact(aut, p)
        while q != p:
            orb.append(q)
            q = _apply_exact(aut, q)
        remaining.difference_update(orb)
        if not exact or len(orb) == n:
            orbits.append(orb)
    return orbits


def orbit_itinerary(part: MarkovPartition, orbit) -> tuple:
    """Symbols of the orbit points in order (one period).

    For an inverse view the orbit is traversed backwards, matching its
    dynamics.
    """
    if part.swapped:
        orbit = [orbit[0]] + list(orbit[:0:-1])
    xy = np.array([[float(x), float(y)] for x, y in orbit])
    rect, _, _ = part.locate(xy)
    word = tuple(int(s) for s in rect)
    if not part.spec.is_admissible(word + word[:1]):
        raise MarkovPropertyViolation("orbit itinerary is not admissible")
    return word


# -- holonomy -------------------------------------------------------------

def stable_holonomy(part: MarkovPartition, source, target, upsilon: float, reach: float | None = None):
    """Slide a point along the stable direction between unstable fibres.

    ``source`` and ``target`` are ``(rect, sigma)`` pairs naming fibres
    ``{sigma} x [0, h)``.  Returns the target's ``upsilon``.  The slide must
    be shorter than ``reach`` (default: the largest rectangle width).

    Raises
    ------
    NotHolonomyRelated
        If no short stable segment joins the point to the target fibre.
    """
    i, sa = int(source[0]), float(source[1])
    j, sb = int(target[0]), float(target[1])
    reach = float(part.widths.max()) if reach is None else reach
    if i == j and sa == sb:
        return float(upsilon)
    s_src = part.rects[i, 0] + sa
    u_src = part.rects[i, 1] + upsilon
    best = None
    for k in itertools.product(range(-3, 4), repeat=2):
        v = part._su(np.array([k], dtype=float))[0]
        u_t = u_src - (part.rects[j, 1] + v[1])
        d = part.rects[j, 0] + v[0] + sb - s_src
        if -1e-12 <= u_t < part.heights[j] and abs(d) <= reach + 1e-12:
            if best is None or abs(d) < abs(best[1]):
                best = (max(u_t, 0.0), d)
    if best is None:
        raise NotHolonomyRelated("fibres are not joined by a local stable segment")
    return float(best[0])
