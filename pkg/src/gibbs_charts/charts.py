"""Gibbs charts: coordinate functions from one-sided Gibbs measures.

For the unstable side the invariant Gibbs measure of the reduced potential
``phi_u^+`` lives on the one-sided shift of the partition and is pushed to
the unstable segment through the origin by the segment map.  Inside every
rectangle the cumulative measure is rescaled to the rectangle's own
unstable length, so rectangles keep their footprint and the zero potential
gives the identity.  The stable side is the same construction on the
inverse view of the partition (transposed shift, inverse map).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDepth, OrderingFailure
from .markov import (MarkovPartition, SegmentMap, orbit_itinerary,
                     unstable_segment_map)
from .potentials import Potential, constant_potential, periodic_birkhoff_sums
from .thermo import GibbsMeasure, brs_measure, invariant_normalization
from .torus import TorusFunction, forward_table

__all__ = [
    "BoundaryMeasure", "boundary_measure", "CoordinateFunction",
    "coordinate_function", "SmoothStructure", "synthesize_structure",
    "apply_h", "apply_h_inverse", "conjugated_map", "measured_eigenvalues",
    "predicted_eigenvalues", "comparison_distortion", "write_curve_csv",
]

BISECT_STEPS = 60
SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Gibbs data for one side: reduced table, eigenmeasure and invariant measure."""

    view: MarkovPartition
    segment: SegmentMap
    table: Potential
    pressure: float
    eigen: GibbsMeasure
    invariant: GibbsMeasure
    normalized: Potential
    side: str

    @property
    def depth(self) -> int:
        return self.eigen.depth


def _as_table(potential, view, depth, edge):
    if potential is None:
        return constant_potential(view.spec, 0.0)
    if isinstance(potential, (int, float)):
        return constant_potential(view.spec, float(potential))
    if isinstance(potential, TorusFunction):
        if potential.freqs.shape[0] == 0:
            return constant_potential(view.spec, potential.const)
        return forward_table(potential, view, depth, edge)
    if isinstance(potential, Potential):
        if potential.spec.r != view.spec.r or not np.array_equal(
                potential.spec.matrix, view.spec.matrix):
            raise ValueError("table potential lives on a different shift")
        return potential
    raise TypeError("unsupported potential type %r" % type(potential).__name__)


def boundary_measure(part: MarkovPartition, potential, side: str = "u", depth: int = 12,
                     edge: str = "clockwise") -> BoundaryMeasure:
    """Gibbs measure of the reduced potential on the ``side`` boundary segment.

    ``potential`` is a :class:`TorusFunction`, a table on the side's shift, a
    constant or ``None`` (zero).  The pressure is subtracted internally.
    """
    if side not in ("u", "s"):
        raise ValueError("side must be 'u' or 's'")
    view = part if side == "u" else part.inverse_view()
    seg = unstable_segment_map(view, edge)
    table = _as_table(potential, view, depth, seg.side)
    work = max(depth, table.depth)
    eig = brs_measure(view.spec, table, work)
    phi_prime, _, inv = invariant_normalization(view.spec, table, work)
    return BoundaryMeasure(view, seg, table, eig.pressure, eig, inv, phi_prime, side)


@dataclass(frozen=True, eq=False)
class CoordinateFunction:
    """Monotone cumulative measure along a boundary segment.

    ``breakpoints`` are arclengths of the depth-``depth`` cylinder images in
    increasing order and ``cumulative`` the measure to their left; values in
    between are linear.  ``scale[i]`` converts measure inside rectangle ``i``
    to normalized length.
    """

    segment: SegmentMap
    measure: GibbsMeasure
    depth: int
    breakpoints: np.ndarray
    cumulative: np.ndarray
    scale: np.ndarray
    order: np.ndarray
    resolution: float
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.breakpoints, self.cumulative)

    @property
    def length(self) -> float:
        return float(self.breakpoints[-1])

    def evaluate(self, t: float, depth: int | None = None) -> float:
        """Value at ``t`` refining the cylinder containing it down to ``depth``.

        Child masses come from the Gibbs extension of the measure, so the
        result is exact at every cylinder endpoint up to that depth.
        """
        depth = self.depth if depth is None else depth
        t = float(t)
        bp = self.breakpoints
        if t <= bp[0]:
            return 0.0
        if t >= bp[-1]:
            return 1.0
        idx = int(np.searchsorted(bp, t, side="right")) - 1
        lev = self.measure.spec.level(self.depth)
        word = [int(s) for s in lev.words[self.order[idx]]]
        cum = float(self.cumulative[idx])
        lo = float(bp[idx])
        part = self.segment.part
        length = float(bp[idx + 1] - bp[idx])
        mass = float(self.cumulative[idx + 1] - self.cumulative[idx])
        sc = self.scale[word[0]]
        A = part.transition_matrix
        for n in range(self.depth, depth):
            last = word[-1]
            kids = [b for b in np.argsort(part.a[last]) if A[last, b] == 1]
            unit = part.lam_u ** -(n - 1)
            cands = np.array([word + [int(b)] for b in kids])
            kid_mass = self.measure.word_masses(cands) * sc
            for b, km in zip(kids, kid_mass):
                c_lo = lo + part.a[last, b] * unit
                c_len = part.heights[b] * unit / part.lam_u
                if t < c_lo + c_len or b == kids[-1]:
                    word.append(int(b))
                    lo, length, mass = c_lo, c_len, float(km)
                    break
                cum += float(km)
        frac = min(max((t - lo) / length, 0.0), 1.0)
        return cum + frac * mass

    def inverse(self, y) -> np.ndarray:
        """Monotone bisection inverse (``BISECT_STEPS`` halvings)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        lo = np.full(y.shape, self.breakpoints[0])
        hi = np.full(y.shape, self.breakpoints[-1])
        for _ in range(BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            below = self(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def cylinder_length(self, word) -> float:
        """Normalized F-length of the image of the cylinder ``word``."""
        w = np.asarray(word, dtype=np.int64)[None, :]
        return float(self.measure.word_masses(w)[0] * self.scale[int(word[0])])


def coordinate_function(measure: GibbsMeasure, segment: SegmentMap, depth: int,
                        tol: float = 1e-9) -> CoordinateFunction:
    """Integrate ``measure`` along ``segment`` using depth-``depth`` cylinders.

    Raises
    ------
    OrderingFailure
        If the cylinder images do not tile the segment.
    """
    spec = measure.spec
    lev = spec.level(depth)
    starts, ends = segment.level_intervals(depth)
    order = np.argsort(starts, kind="stable")
    s_sorted = starts[order]
    e_sorted = ends[order]
    if abs(s_sorted[0]) > tol or abs(e_sorted[-1] - segment.length) > tol \
            or np.any(np.abs(s_sorted[1:] - e_sorted[:-1]) > tol):
        raise OrderingFailure("cylinder images overlap or leave gaps")
    m1 = measure.masses_at(1)
    scale = segment.part.heights / m1 / segment.length
    masses = measure.masses_at(depth) * scale[lev.words[:, 0]]
    cum = np.concatenate([[0.0], np.cumsum(masses[order])])
    total = cum[-1]
    cum = cum / total
    bp = np.concatenate([s_sorted, [segment.length]])
    return CoordinateFunction(segment, measure, depth, bp, cum, scale / total, order,
                              float(masses.max() / total))


@dataclass(frozen=True, eq=False)
class SmoothStructure:
    """Coordinate functions and pressure constants of a synthesized structure."""

    part: MarkovPartition
    F_u: CoordinateFunction
    F_s: CoordinateFunction
    P_u: float
    P_s: float
    side_u: BoundaryMeasure
    side_s: BoundaryMeasure
    depth: int
    phi_u: object = None
    phi_s: object = None

    @property
    def resolution(self) -> float:
        return max(self.F_u.resolution, self.F_s.resolution)

    def summary(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "P_u": self.P_u, "P_s": self.P_s,
                "depth": self.depth, "resolution_u": self.F_u.resolution,
                "resolution_s": self.F_s.resolution,
                "table_error_u": self.side_u.table.approx_error,
                "table_error_s": self.side_s.table.approx_error,
                "certified": bool(self.side_u.table.certified and self.side_s.table.certified),
                "rectangles": int(self.part.r)}


def synthesize_structure(part: MarkovPartition, phi_u=None, phi_s=None, depth: int = 12,
                         edge: str = "clockwise") -> SmoothStructure:
    """Build ``F_u``, ``F_s`` and ``P_u``, ``P_s`` from raw potentials."""
    bu = boundary_measure(part, phi_u, "u", depth, edge)
    bs = boundary_measure(part, phi_s, "s", depth, edge)
    F_u = coordinate_function(bu.invariant, bu.segment, depth)
    F_s = coordinate_function(bs.invariant, bs.segment, depth)
    return SmoothStructure(part, F_u, F_s, bu.pressure, bs.pressure, bu, bs, depth,
                           phi_u, phi_s)


def _chart(structure, xy):
    part = structure.part
    rect, sig, ups = part.locate(xy)
    su = structure.F_u.segment
    ss = structure.F_s.segment
    total_u, total_s = su.length, ss.length
    new_u = structure.F_u(su.offset[rect] + ups) * total_u - su.offset[rect]
    new_s = structure.F_s(ss.offset[rect] + sig) * total_s - ss.offset[rect]
    new_u = np.clip(new_u, 0.0, part.heights[rect])
    new_s = np.clip(new_s, 0.0, part.widths[rect])
    return rect, new_s, new_u


def apply_h(structure: SmoothStructure, xy) -> np.ndarray:
    """Chart coordinates ``(F_s, F_u)`` of points, placed back on the torus.

    Each rectangle is mapped to itself; inside it the stable and unstable
    coordinates are replaced by the normalized coordinate functions.
    """
    rect, s, u = _chart(structure, np.atleast_2d(xy))
    return structure.part.to_torus(rect, s, u)


def apply_h_inverse(structure: SmoothStructure, xy) -> np.ndarray:
    part = structure.part
    rect, sig, ups = part.locate(np.atleast_2d(xy))
    su = structure.F_u.segment
    ss = structure.F_s.segment
    t_u = structure.F_u.inverse((su.offset[rect] + ups) / su.length)
    t_s = structure.F_s.inverse((ss.offset[rect] + sig) / ss.length)
    ups0 = np.clip(t_u - su.offset[rect], 0.0, part.heights[rect])
    sig0 = np.clip(t_s - ss.offset[rect], 0.0, part.widths[rect])
    return part.to_torus(rect, sig0, ups0)


def conjugated_map(structure: SmoothStructure, aut, xy) -> np.ndarray:
    """``g = h o L o h^{-1}``."""
    return apply_h(structure, aut.apply(apply_h_inverse(structure, xy)))


def _side_expansion(side: BoundaryMeasure, F: CoordinateFunction, orbit, scale_depth):
    view = side.view
    word = orbit_itinerary(view, orbit)
    n = len(word)
    m = scale_depth
    if m < n + 1:
        raise InsufficientDepth("scale depth %d too small for period %d" % (m, n))
    full = (word * (m // n + 2))[:m]
    lo, ln = view.forward_interval(full)
    lo2, ln2 = view.forward_interval(full[n:])
    off = F.segment.offset[full[0]]
    big = F.evaluate(off + lo2 + ln2, m) - F.evaluate(off + lo2, m)
    small = F.evaluate(off + lo + ln, m) - F.evaluate(off + lo, m)
    return big / small


def measured_eigenvalues(structure: SmoothStructure, aut, orbit, scale_depth: int | None = None):
    """Expansion ``F_u(L^n I) / F_u(I)`` and contraction ``F_s(J) / F_s(L^{-n} J)``.

    ``I`` is the depth-``scale_depth`` cylinder interval of the periodic
    point on its unstable fibre (default ``depth + n``), ``J`` the mirror
    interval on the stable fibre.
    """
    n = len(orbit)
    m = scale_depth if scale_depth is not None else structure.depth + n
    lam_u = _side_expansion(structure.side_u, structure.F_u, orbit, m)
    lam_s_inv = _side_expansion(structure.side_s, structure.F_s, orbit, m)
    return lam_u, 1.0 / lam_s_inv


def _orbit_sum(phi, orbit, view):
    if phi is None:
        return 0.0
    if isinstance(phi, (int, float)):
        return float(phi) * len(orbit)
    if isinstance(phi, TorusFunction):
        return phi.periodic_sum(orbit)
    word = orbit_itinerary(view, orbit)
    return float(periodic_birkhoff_sums(phi, [word])[0])


def predicted_eigenvalues(phi_u, phi_s, P_u: float, P_s: float, orbit, part=None):
    """``exp(-S_n phi_u + n P_u)`` and ``exp(S_n phi_s - n P_s)`` along ``orbit``.

    Table potentials need ``part`` to code the orbit.
    """
    n = len(orbit)
    su = _orbit_sum(phi_u, orbit, part)
    ss = _orbit_sum(phi_s, orbit, part.inverse_view() if part is not None else None)
    return float(np.exp(-su + n * P_u)), float(np.exp(ss - n * P_s))


def comparison_distortion(structure: SmoothStructure, levels=range(3, 10)) -> float:
    """Distortion ``D`` of the change of presentation between the two edges.

    Builds the unstable coordinate function again from the opposite edge and
    returns the largest ratio (or inverse ratio) of increments over dyadic
    pairs of the segment.
    """
    part = structure.part
    other = "counterclockwise" if structure.F_u.segment.side == "left" else "clockwise"
    bm = boundary_measure(part, structure.phi_u, "u", structure.depth, other)
    F2 = coordinate_function(bm.invariant, bm.segment, structure.depth)
    F1 = structure.F_u
    L = F1.length
    worst = 1.0
    for lev in levels:
        grid = np.linspace(0.0, L, 2 ** lev + 1)
        d1 = np.diff(F1(grid))
        d2 = np.diff(F2(grid))
        ok = (d1 > 0) & (d2 > 0)
        r = d1[ok] / d2[ok]
        worst = max(worst, float(r.max()), float(1.0 / r.min()))
    return worst


def write_curve_csv(path, F: CoordinateFunction, header: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        wr = csv.writer(fh)
        wr.writerow(["arclength", "F"])
        for t, y in zip(F.breakpoints, F.cumulative):
            wr.writerow([repr(float(t)), repr(float(y))])
