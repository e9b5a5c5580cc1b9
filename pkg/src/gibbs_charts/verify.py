"""Property checks for the thermodynamic and geometric pipeline.

Each check returns a :class:`CheckReport` with the worst deviation found,
the bound it was held to and the parameters used, so a run can be audited
from its JSON-lines output alone.  Every check is deterministic given its
seed, depth and sample count.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .charts import boundary_measure, coordinate_function
from .errors import BackendMismatch
from .markov import MarkovPartition, periodic_orbits
from .potentials import (Potential, add_almost_coboundary, periodic_birkhoff_sums, prefix_index,
                         variation_profile)
from .sft import SubshiftSpec, periodic_word_array
from .thermo import (GibbsMeasure, brs_measure, invariant_normalization, pressure)
from .torus import TorusFunction, forward_table, forward_values, torus_transverse_cocycle

__all__ = [
    "CheckReport", "livshitz_check", "gibbs_onesided_check", "rn_identity_check",
    "bowen_estimate_check", "bowen_constants", "holonomy_rn_check",
    "partition_geometry_check", "quasisymmetry_check", "quasisymmetry_constants",
    "boundary_mass_check", "boundary_adjacent", "variational_check",
    "periodic_orbit_masses", "entropy_estimate", "run_suite", "write_reports",
    "summary_table",
]

SCHEMA_VERSION = 1


@dataclass
class CheckReport:
    """Outcome of one check: ``passed`` iff ``deviation <= bound``."""

    name: str
    passed: bool
    deviation: float
    bound: float
    samples: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deviation = float(self.deviation)
        self.bound = float(self.bound)
        if not (math.isfinite(self.deviation) and math.isfinite(self.bound)):
            raise ValueError("%s: deviation and bound must be finite" % self.name)
        self.passed = bool(self.passed) and self.deviation <= self.bound

    def to_json(self) -> dict:
        out = asdict(self)
        out["schema_version"] = SCHEMA_VERSION
        out["params"] = _jsonable(self.params)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# -- periodic orbits ------------------------------------------------------

def livshitz_check(system, phi, psi, max_period: int = 6, tol: float = 1e-9) -> CheckReport:
    """Compare periodic sums of two potentials through ``max_period``.

    ``system`` is a :class:`SubshiftSpec` for cylinder tables or a toral
    automorphism for :class:`TorusFunction` potentials (exact periodic points).
    """
    worst, count, per_period = 0.0, 0, {}
    for n in range(1, max_period + 1):
        if isinstance(phi, TorusFunction):
            orbits = periodic_orbits(system, n, exact=False)
            d = np.array([phi.periodic_sum(o) - psi.periodic_sum(o) for o in orbits])
        else:
            words = periodic_word_array(system, n)
            if len(words) == 0:
                continue
            d = periodic_birkhoff_sums(phi, words) - periodic_birkhoff_sums(psi, words)
        if d.size:
            per_period[n] = float(np.max(np.abs(d)))
            worst = max(worst, per_period[n])
            count += d.size
    return CheckReport("livshitz", worst <= tol, worst, tol, count,
                       {"max_period": max_period, "per_period": per_period})


# -- Gibbs identities -----------------------------------------------------

def gibbs_onesided_check(measure: GibbsMeasure, depth: int | None = None, steps: int = 1,
                         tol: float = 1e-10) -> CheckReport:
    """``log mu(C) - log mu(sigma^s C) = S_s phi(C) - s P`` on every depth cylinder.

    For invariant measures the eigenfunction ratio ``h(C) / h(sigma^s C)``
    enters as well.  Cylinders must be long enough to determine ``S_s phi``.
    """
    spec, phi = measure.spec, measure.potential
    n = depth or max(measure.depth, phi.depth + steps + 5)
    if n < steps + phi.depth - 1:
        raise ValueError("depth too small for %d-step Birkhoff sums" % steps)
    lev = spec.level(n)
    w = lev.words
    logm = np.log(measure.masses_at(n))
    tail = spec.level(n - steps).index(w[:, steps:])
    log_tail = np.log(measure.masses_at(n - steps))[tail]
    s = np.zeros(len(lev))
    for j in range(steps):
        s += phi.values[spec.level(phi.depth).index(w[:, j:j + phi.depth])]
    expected = s - steps * measure.pressure
    if measure.kind == "invariant":
        hd = measure.h_depth
        lh = np.log(measure.h)
        expected += lh[spec.level(hd).index(w[:, :hd])] - lh[
            spec.level(hd).index(w[:, steps:steps + hd])]
    dev = float(np.max(np.abs(logm - log_tail - expected)))
    return CheckReport("gibbs_onesided", True, dev, tol, len(lev),
                       {"depth": n, "steps": steps, "kind": measure.kind})


def rn_identity_check(part: MarkovPartition, potential, depth: int = 12,
                      edge: str = "left", seed: int = 0, tol: float = 1e-10) -> CheckReport:
    """Mass ratios ``nu(sigma C) / nu(C)`` against ``exp(-phi + P)``.

    A cylinder table is checked exactly at ``depth``.  For a torus function
    the table of its reduced potential is built at ``depth`` and every
    cylinder is compared with the exact reduced potential at a random point
    inside it; the bound is the table's approximation error.
    """
    if isinstance(potential, Potential):
        rep = gibbs_onesided_check(brs_measure(part.spec, potential, depth), depth, 1, tol)
        rep.name = "rn_identity"
        return rep
    table = forward_table(potential, part, depth, edge, seed=seed)
    nu = brs_measure(part.spec, table, depth)
    lev = part.spec.level(depth)
    w = lev.words
    masses = nu.masses_at(depth)
    tails = nu.masses_at(depth - 1)[lev.tail]
    lo, ln = part.level_intervals(depth)
    rng = np.random.default_rng(seed + 1)
    ups = lo + ln * rng.random(len(lev))
    exact = forward_values(potential, part, w[:, 0], w[:, 1], ups, edge)
    dev = np.abs(np.log(tails / masses) - (-exact + nu.pressure))
    bound = table.approx_error + tol
    return CheckReport("rn_identity", table.certified, float(dev.max()), bound, len(lev),
                       {"depth": depth, "edge": edge, "seed": seed,
                        "approx_error": table.approx_error, "certified": table.certified})


def _extension_extrema(spec: SubshiftSpec, phi: Potential):
    """Max and min over continuations of the last ``k - 1`` window terms.

    ``B[j][v]`` is the best sum of ``j`` windows starting at the positions
    of the length-``k - 1`` word ``v``, over all admissible continuations.
    """
    k = phi.depth
    if k == 1:
        z = np.zeros(len(spec.level(1)))
        return [z], [z]
    lev = spec.level(k)
    nv = len(spec.level(k - 1))
    hi, lo = [np.zeros(nv)], [np.zeros(nv)]
    for _ in range(k - 1):
        cand_hi = phi.values + hi[-1][lev.tail]
        cand_lo = phi.values + lo[-1][lev.tail]
        new_hi = np.full(nv, -np.inf)
        new_lo = np.full(nv, np.inf)
        np.maximum.at(new_hi, lev.parent, cand_hi)
        np.minimum.at(new_lo, lev.parent, cand_lo)
        hi.append(new_hi)
        lo.append(new_lo)
    return hi, lo


def birkhoff_extrema(spec: SubshiftSpec, phi: Potential, n: int):
    """Exact ``(min, max)`` of ``S_n phi`` over each length-``n`` cylinder."""
    k = phi.depth
    m = max(n, k - 1)
    lev = spec.level(m)
    w = lev.words
    inside = np.zeros(len(lev))
    for j in range(0, min(n, m - k + 1)):
        inside += phi.values[spec.level(k).index(w[:, j:j + k])]
    count = n - max(0, m - k + 1)
    hi, lo = _extension_extrema(spec, phi)
    if k > 1 and count > 0:
        v = spec.level(k - 1).index(w[:, m - k + 1:])
        s_hi, s_lo = inside + hi[count][v], inside + lo[count][v]
    else:
        s_hi = s_lo = inside
    if m == n:
        return s_lo, s_hi
    grp = prefix_index(spec, m, n)
    out_hi = np.full(len(spec.level(n)), -np.inf)
    out_lo = np.full(len(spec.level(n)), np.inf)
    np.maximum.at(out_hi, grp, s_hi)
    np.minimum.at(out_lo, grp, s_lo)
    return out_lo, out_hi


def bowen_constants(spec: SubshiftSpec, phi_prime: Potential, max_depth: int = 12):
    """``(c1, c2, var, sup)`` for the cylinder estimate of a normalized potential."""
    var = variation_profile(phi_prime, max(max_depth, phi_prime.depth)).total
    sup = phi_prime.sup_norm
    m = spec.mixing_time
    return math.exp(-m * sup - var), math.exp(var), var, sup


def bowen_estimate_check(spec: SubshiftSpec, potential: Potential, max_depth: int = 12,
                         tol: float = 1e-13) -> CheckReport:
    """``c1 <= mu(C_n) / exp(S_n phi'(x)) <= c2`` for every cylinder and every ``x``.

    ``phi'`` is the invariant normalization of ``potential`` and ``mu`` its
    equilibrium state.  Extremes over ``x`` in the cylinder are exact.  The
    deviation is the distance of the log ratio from the centre of
    ``[log c1, log c2]`` and the bound is its half width.
    """
    phi_prime, _, mu = invariant_normalization(spec, potential, tol=tol)
    c1, c2, var, sup = bowen_constants(spec, phi_prime, max_depth)
    l1, l2 = math.log(c1), math.log(c2)
    centre, half = 0.5 * (l1 + l2), 0.5 * (l2 - l1)
    worst, violations, count = 0.0, 0, 0
    ratio_range = [np.inf, -np.inf]
    for n in range(1, max_depth + 1):
        s_lo, s_hi = birkhoff_extrema(spec, phi_prime, n)
        lm = np.log(mu.masses_at(n))
        r_lo, r_hi = lm - s_hi, lm - s_lo
        worst = max(worst, float(np.max(np.abs(r_lo - centre))),
                    float(np.max(np.abs(r_hi - centre))))
        violations += int(np.sum((r_lo < l1) | (r_hi > l2)))
        ratio_range = [min(ratio_range[0], float(r_lo.min())),
                       max(ratio_range[1], float(r_hi.max()))]
        count += r_lo.size
    return CheckReport("bowen_estimate", violations == 0, worst, half, count,
                       {"max_depth": max_depth, "c1": c1, "c2": c2, "var": var,
                        "sup_norm": sup, "mixing_time": spec.mixing_time,
                        "violations": violations, "log_ratio_range": ratio_range})


# -- holonomy -------------------------------------------------------------

def boundary_adjacent(part: MarkovPartition, word, delta: float) -> bool:
    """True when the forward cylinder ``word`` reaches within ``delta`` of a stable edge."""
    lo, ln = part.forward_interval(word)
    return bool(lo < delta or lo + ln > part.heights[int(word[0])] - delta)


def holonomy_rn_check(part: MarkovPartition, potential=None, depth: int = 12,
                      sub_depth: int = 8, samples: int = 1000, seed: int = 0,
                      edge: str = "clockwise", match_rate: float = 0.99,
                      refine: int = 10) -> CheckReport:
    """Interval masses under stable holonomy against ``exp(Phi)``.

    A depth-``sub_depth`` cylinder ``U`` on the edge fibre of ``R_i`` slides
    along the stable direction onto the edge fibre of the neighbouring
    rectangle.  Its image ``V`` is measured with the eigenmeasure of the same
    reduced potential (cumulative masses refined ``refine`` levels past
    ``depth``) and compared with the transverse cocycle at the centre of
    ``U``.  The per-pair bound is the oscillation of the cocycle over ``U``
    plus the table error accumulated over ``sub_depth`` steps.  Pairs whose
    image leaves the target rectangle are flagged as boundary adjacent.
    """
    if isinstance(potential, Potential):
        raise BackendMismatch("the holonomy check slides torus points; pass a torus "
                              "function or a constant")
    f = potential if isinstance(potential, TorusFunction) else TorusFunction.constant(
        float(potential or 0.0))
    bm = boundary_measure(part, f, "u", depth, edge)
    nu = bm.eigen
    F = coordinate_function(nu, bm.segment, depth)
    seg = bm.segment
    aut = part.aut
    sign = 1.0 if seg.side == "left" else -1.0
    lev = part.spec.level(sub_depth)
    lo_all, ln_all = part.level_intervals(sub_depth)
    rng = np.random.default_rng(seed)
    pick = rng.integers(0, len(lev), size=samples)
    table_term = 2.0 * sub_depth * bm.table.approx_error
    matched = flagged = unexplained = 0
    worst_ratio = 0.0
    one_step = 0.0
    records = []
    for idx in pick:
        word = tuple(int(s) for s in lev.words[idx])
        i = word[0]
        lo, ln = float(lo_all[idx]), float(ln_all[idx])
        s_src = seg.edge_sigma(i)
        ups = np.array([lo, lo + 0.5 * ln, lo + ln])
        src = part.to_torus(np.full(3, i), np.full(3, s_src), ups)
        shift = sign * part.widths[i] * aut.e_s
        dst = src + shift[None, :]
        rect, sig, ups_t = part.locate(dst[:2])
        j = int(rect[0])
        v_lo = float(ups_t[0])
        v_hi = v_lo + ln
        if rect[1] != j or v_hi > part.heights[j] + 1e-12 or abs(sig[0] - seg.edge_sigma(j)) > 1e-8:
            flagged += 1
            continue
        mass_u = nu.mass(word)
        off = seg.offset[j]
        top = depth + refine
        mass_v = (F.evaluate(off + v_hi, top) - F.evaluate(off + v_lo, top)) / F.scale[j]
        phis = np.array([torus_transverse_cocycle(f, aut, src[q], dst[q],
                                                  reach=part.widths[i] + 1e-9)
                         for q in range(3)])
        measured = math.log(mass_v / mass_u)
        dev = abs(measured - phis[1])
        resolution = (F.resolution / F.scale[j]) * part.lam_u ** -refine / mass_v
        bound = float(np.max(np.abs(phis - phis[1]))) + table_term + 2 * resolution + 1e-12
        if len(word) > bm.table.depth:
            step = abs(math.log(nu.mass(word[1:]) / mass_u)
                       - (-bm.table(word[:bm.table.depth]) + nu.pressure))
            one_step = max(one_step, step)
        ratio = dev / bound
        worst_ratio = max(worst_ratio, ratio)
        records.append(ratio)
        if dev <= bound:
            matched += 1
        elif boundary_adjacent(part, word, ln):
            flagged += 1
        else:
            unexplained += 1
    rate = matched / samples
    passed = rate >= match_rate and unexplained == 0
    return CheckReport("holonomy_rn", passed, max(match_rate - rate, 0.0), 0.0, samples,
                       {"depth": depth, "sub_depth": sub_depth, "seed": seed, "edge": edge,
                        "matched": matched, "flagged_boundary": flagged,
                        "unexplained": unexplained, "match_rate": rate,
                        "worst_dev_over_bound": float(worst_ratio),
                        "one_step_deviation": one_step, "table_term": table_term})


# -- partition geometry ---------------------------------------------------

def _segment_lengths(part: MarkovPartition, n: int, side: str = "clockwise"):
    from .markov import unstable_segment_map
    seg = unstable_segment_map(part, side)
    _, ln = part.level_intervals(n)
    return ln / seg.length, seg


def partition_geometry_check(part: MarkovPartition, max_depth: int = 14,
                             side: str = "clockwise") -> list[CheckReport]:
    """The three partition-geometry inequalities for normalized arclength.

    Returns reports ``geometry_decreasing`` (nested ratio at most
    ``lambda^(M - m)``), ``geometry_child`` (child over parent at least
    ``lambda^-(M+1)``) and ``geometry_nearby`` (adjacent intervals within
    ``lambda^(+-M)``).  Deviations are log ratios, bounds are the matching
    powers of ``lambda`` in log form.
    """
    spec = part.spec
    log_lam = spec.entropy
    M = spec.mixing_time
    lengths = {n: _segment_lengths(part, n, side)[0] for n in range(1, max_depth + 1)}
    seg = _segment_lengths(part, 1, side)[1]

    # nested pairs: log(child / parent) - (M - m) log(lambda) <= 0
    dec_worst, dec_count, literal_ok = -np.inf, 0, True
    child_worst, child_count = -np.inf, 0
    for n in range(1, max_depth):
        for m in range(1, max_depth - n + 1):
            r = np.log(lengths[n + m]) - np.log(lengths[n])[prefix_index(spec, n + m, n)]
            top = float(r.max())
            dec_worst = max(dec_worst, top - (M - m) * log_lam)
            literal_ok &= top <= (m - M) * log_lam
            dec_count += r.size
            if m == 1:
                child_worst = max(child_worst, -(M + 1) * log_lam - float(r.min()))
                child_count += r.size

    near_worst, near_count = 0.0, 0
    for n in range(1, max_depth + 1):
        s, _ = seg.level_intervals(n)
        order = np.argsort(s, kind="stable")
        q = np.abs(np.diff(np.log(lengths[n][order])))
        if q.size:
            near_worst = max(near_worst, float(q.max()))
            near_count += q.size

    common = {"max_depth": max_depth, "M": M, "lambda": math.exp(log_lam), "side": side}
    # deviations are shifted so that the bound is the log-power of lambda itself
    return [
        CheckReport("geometry_decreasing", dec_worst <= 0.0, max(dec_worst, 0.0), 0.0,
                    dec_count, dict(common, margin_log=-dec_worst,
                                    literal_increasing_form_holds=bool(literal_ok))),
        CheckReport("geometry_child", child_worst <= 0.0, max(child_worst, 0.0), 0.0,
                    child_count, dict(common, margin_log=-child_worst)),
        CheckReport("geometry_nearby", near_worst <= M * log_lam, near_worst, M * log_lam,
                    near_count, common),
    ]


# -- quasisymmetry --------------------------------------------------------

def quasisymmetry_constants(spec: SubshiftSpec, phi_prime: Potential, max_depth: int = 12):
    """``(log L, N, log K_bound, var, sup)`` for a normalized potential."""
    var = variation_profile(phi_prime, max(max_depth, phi_prime.depth)).total
    sup = phi_prime.sup_norm
    M = spec.mixing_time
    N = math.ceil(4 * M + 1 + math.log(2) / spec.entropy)
    log_L = 2 * var + M * sup
    log_K = (2 * N + 2) * log_L + (2 * N + 1) * sup
    return log_L, N, log_K, var, sup


def quasisymmetry_check(F, levels=None, phi_prime: Potential | None = None) -> CheckReport:
    """Empirical quasisymmetry constant of ``F`` against the theoretical bound.

    Adjacent equal-arclength pairs are the dyadic triples ``x, z, y`` with
    ``z`` the midpoint, at every level in ``levels`` (default ``3`` to
    ``depth - 2``).  Both the ratio and its reciprocal count, so the
    empirical constant is at least one.  Deviation and bound are reported
    in log form (``log K``).
    """
    measure = F.measure
    spec = measure.spec
    if levels is None:
        levels = range(3, max(F.depth - 1, 4))
    if phi_prime is None:
        phi_prime, _, _ = invariant_normalization(spec, measure.potential, measure.depth)
    log_L, N, log_bound, var, sup = quasisymmetry_constants(spec, phi_prime, F.depth)
    worst, count = 0.0, 0
    for lev in levels:
        grid = np.linspace(0.0, F.length, 2 ** lev + 1)
        d = np.diff(F(grid))
        ok = (d[1:] > 0) & (d[:-1] > 0)
        r = np.abs(np.log(d[1:][ok] / d[:-1][ok]))
        if r.size:
            worst = max(worst, float(r.max()))
            count += r.size
    return CheckReport("quasisymmetry", True, worst, log_bound, count,
                       {"levels": list(levels), "K_empirical": math.exp(worst),
                        "log_L": log_L, "N": N, "var": var, "sup_norm": sup,
                        "log_scale": True})


# -- boundary mass --------------------------------------------------------

def boundary_mass_check(part: MarkovPartition, measure: GibbsMeasure, deltas=None,
                        threshold: float = 0.02, depth: int | None = None) -> CheckReport:
    """Mass of ``delta``-neighbourhoods of the partition boundary.

    The neighbourhood of the stable edges is covered by the forward cylinders
    reaching into it and that of the unstable edges by backward cylinders;
    the two masses are added.  Passes when the estimate does not increase as
    ``delta`` shrinks and stays below ``threshold`` at the smallest ``delta``.
    """
    spec = part.spec
    n = depth or measure.depth
    if deltas is None:
        deltas = [part.lam_u ** -k for k in range(4, 11)]
    deltas = sorted((float(d) for d in deltas), reverse=True)
    lev = spec.level(n)
    mass = measure.masses_at(n)
    lo, ln = part.level_intervals(n)
    h = part.heights[lev.words[:, 0]]
    inv = part.inverse_view()
    ilev = inv.spec.level(n)
    ilo, iln = inv.level_intervals(n)
    iw = inv.heights[ilev.words[:, 0]]
    imass = mass[lev.index(ilev.words[:, ::-1])]
    out = []
    for d in deltas:
        fwd = (lo < d) | (lo + ln > h - d)
        bwd = (ilo < d) | (ilo + iln > iw - d)
        out.append(float(mass[fwd].sum() + imass[bwd].sum()))
    monotone = all(b <= a + 1e-15 for a, b in zip(out, out[1:]))
    return CheckReport("boundary_mass", monotone, out[-1], threshold, len(lev),
                       {"depth": n, "deltas": deltas, "masses": out,
                        "monotone": monotone, "threshold": threshold})


# -- variational principle -------------------------------------------------

def _entropy_sum(m):
    m = m[m > 0]
    return float(-np.sum(m * np.log(m)))


def entropy_estimate(masses, n: int) -> float:
    """``H_{n+1} - H_n`` from the Shannon sums of a cylinder-mass callable."""
    return _entropy_sum(masses(n + 1)) - _entropy_sum(masses(n))


def periodic_orbit_masses(spec: SubshiftSpec, word):
    """Cylinder masses of the invariant measure on the orbit of ``word^infinity``."""
    w = [int(s) for s in word]
    p = len(w)

    def masses(n):
        rows = [[w[(j + i) % p] for i in range(n)] for j in range(p)]
        idx = spec.level(n).index(np.array(rows))
        return np.bincount(idx, minlength=len(spec.level(n))) / p

    return masses


def variational_check(spec: SubshiftSpec, potential: Potential, candidates=None,
                      depth: int | None = None, tol: float = 1e-8,
                      max_period: int = 3) -> CheckReport:
    """``h(nu) + int phi dnu <= P(phi)`` for candidate invariant measures.

    ``candidates`` maps names to callables ``n -> masses`` on
    ``spec.level(n)``; by default the equilibrium state, the Parry measure
    and all periodic-orbit measures through ``max_period`` are used.  The
    deviation is the largest negative deficit together with the
    equilibrium state's deficit; both must stay below ``tol``.
    """
    k = potential.depth
    n = max(depth or k, k)
    P, p_err = pressure(spec, potential, n)
    if candidates is None:
        _, _, eq = invariant_normalization(spec, potential, n)
        _, _, parry = invariant_normalization(spec, Potential(spec, 1, np.zeros(spec.r)), 1)
        candidates = {"equilibrium": eq.masses_at, "parry": parry.masses_at}
        for p in range(1, max_period + 1):
            for w in periodic_word_array(spec, p):
                candidates["orbit:" + "".join(str(int(s)) for s in w)] = \
                    periodic_orbit_masses(spec, w)
    deficits = {}
    for name, masses in candidates.items():
        ent = entropy_estimate(masses, n)
        integral = float(np.dot(masses(k), potential.values))
        deficits[name] = P - (ent + integral)
    neg = max(0.0, -min(deficits.values()))
    eq_def = abs(deficits.get("equilibrium", 0.0))
    bound = tol + p_err
    return CheckReport("variational", True, max(neg, eq_def), bound, len(deficits),
                       {"depth": n, "pressure": P, "deficits": deficits,
                        "equilibrium_deficit": deficits.get("equilibrium")})


# -- suite ----------------------------------------------------------------

def run_suite(part: MarkovPartition, phi_u=None, phi_s=None, depth: int = 12,
              seed: int = 0, thresholds: dict | None = None) -> list[CheckReport]:
    """Default battery of checks, ordered by name.

    ``thresholds`` may override ``livshitz_tol``, ``boundary_threshold``,
    ``holonomy_samples``, ``geometry_depth``, ``variational_tol`` and
    ``max_period``.  The holonomy check needs torus geometry and is left out
    when ``phi_u`` is a cylinder table.
    """
    th = {"livshitz_tol": 1e-9, "boundary_threshold": 0.02, "holonomy_samples": 1000,
          "geometry_depth": 14, "variational_tol": 1e-8,
          "max_period": 6}
    th.update(thresholds or {})
    reports = list(partition_geometry_check(part, th["geometry_depth"]))
    for side, phi in (("u", phi_u), ("s", phi_s)):
        bm = boundary_measure(part, phi, side, depth)
        view = bm.view
        table = bm.table
        tag = "_" + side
        for rep in (
            gibbs_onesided_check(bm.eigen, max(depth, table.depth)),
            rn_identity_check(view, phi if isinstance(phi, TorusFunction) else table,
                              depth, seed=seed),
            bowen_estimate_check(view.spec, table, depth),
            quasisymmetry_check(coordinate_function(bm.invariant, bm.segment, depth),
                                phi_prime=bm.normalized),
            boundary_mass_check(view, bm.invariant, threshold=th["boundary_threshold"]),
            variational_check(view.spec, table, tol=th["variational_tol"]),
        ):
            rep.name += tag
            reports.append(rep)
        rng = np.random.default_rng(seed)
        if isinstance(phi, TorusFunction):
            u = TorusFunction.from_terms([(1, 1, 0.05, 0.02), (0, 1, 0.03, 0.0)])
            partner = phi.add_almost_coboundary(u, 0.0, view.aut.matrix)
            rep = livshitz_check(view.aut, phi, partner, th["max_period"], th["livshitz_tol"])
        else:
            u = Potential(view.spec, 2, 0.1 * rng.standard_normal(len(view.spec.level(2))))
            partner = add_almost_coboundary(table, u)
            rep = livshitz_check(view.spec, table, partner, th["max_period"],
                                 th["livshitz_tol"])
        rep.name += tag
        reports.append(rep)
    if not isinstance(phi_u, Potential):
        reports.append(holonomy_rn_check(part, phi_u, depth,
                                         samples=th["holonomy_samples"], seed=seed))
    return sorted(reports, key=lambda r: r.name)


def write_reports(path_or_file, reports) -> None:
    """One JSON object per line."""
    lines = "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in reports)
    if hasattr(path_or_file, "write"):
        path_or_file.write(lines)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(lines)


def summary_table(reports) -> str:
    width = max([len(r.name) for r in reports] + [5])
    rows = ["%-*s  %-4s  %12s  %12s  %8s" % (width, "check", "ok", "deviation", "bound",
                                             "samples")]
    for r in reports:
        rows.append("%-*s  %-4s  %12.4g  %12.4g  %8d" % (width, r.name,
                                                        "PASS" if r.passed else "FAIL",
                                                        r.deviation, r.bound, r.samples))
    return "\n".join(rows)
