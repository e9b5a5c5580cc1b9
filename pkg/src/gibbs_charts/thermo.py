"""Transfer operators, pressure and Gibbs measures for cylinder-table potentials.

Everything here is exact for locally constant potentials: a depth-``k`` table
has an eigenmeasure whose cylinder masses satisfy

    exp(P) * nu[w] = exp(phi(w[:k])) * nu[w[1:]]     (len(w) >= k)

and an eigenfunction depending on ``k - 1`` symbols, so power iteration on
the finite word tables never truncates anything.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (ConvergenceError, InsufficientDepth, PositivityFailure)
from .potentials import Potential, prefix_index
from .sft import SubshiftSpec

__all__ = [
    "transfer_apply", "pressure", "brs_measure", "invariant_normalization",
    "GibbsMeasure", "local_uniqueness_check", "LocalUniquenessReport",
    "write_masses_csv", "pressure_report",
]

ITER_CAP = 10**4
SCHEMA_VERSION = 1


def transfer_apply(spec: SubshiftSpec, potential: Potential, g: np.ndarray,
                   m: int) -> np.ndarray:
    """``(L g)(w) = sum_a exp(phi(a w)) g(a w)`` as a table over length-``m`` words.

    ``g`` is indexed by ``spec.level(m)``; the value at ``a w`` is read off
    its length-``m`` prefix.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m < potential.depth - 1:
        raise InsufficientDepth("table over length-%d words is shallower than the "
                                "potential (depth %d)" % (m, potential.depth))
    g = np.asarray(g, dtype=float)
    if g.shape != (len(spec.level(m)),):
        raise ValueError("g must have one entry per admissible length-%d word" % m)
    up = spec.level(m + 1)
    weights = np.exp(potential.lift(m + 1)) * g[up.parent]
    return np.bincount(up.tail, weights=weights, minlength=len(spec.level(m)))


def _eigenmeasure(spec, potential, n, tol, start=None):
    """Power iteration for the dual operator on length-``n`` cylinder masses."""
    lev = spec.level(n)
    weights = np.exp(potential.lift(n))
    tail = np.ascontiguousarray(lev.tail, dtype=np.int64)
    parent = np.ascontiguousarray(lev.parent, dtype=np.int64)
    n_prev = len(spec.level(n - 1))
    nu = np.full(len(lev), 1.0 / len(lev)) if start is None else np.asarray(start, float)
    nu = nu / nu.sum()
    ratio = 0.0
    for _ in range(ITER_CAP):
        new = kernels.adjoint_step(weights, nu, tail, parent, n_prev)
        ratio = new.sum()
        new /= ratio
        resid = np.max(np.abs(new - nu))
        nu = new
        if resid <= tol * np.max(nu):
            return float(np.log(ratio)), nu, float(resid / np.max(nu))
    raise ConvergenceError("eigenmeasure iteration did not converge at depth %d" % n)


def _eigenfunction(spec, potential, tol):
    """Right eigenfunction on words of length ``max(k - 1, 1)``, normalized by max."""
    hd = max(potential.depth - 1, 1)
    up = spec.level(hd + 1)
    weights = np.exp(potential.lift(hd + 1))
    tail = np.ascontiguousarray(up.tail, dtype=np.int64)
    ident = np.arange(len(spec.level(hd)), dtype=np.int64)
    h = np.ones(len(spec.level(hd)))
    for _ in range(ITER_CAP):
        new = kernels.transfer_step(weights, h[up.parent], tail, ident, len(ident))
        lam = new.max() / h.max()
        new /= new.max()
        if np.max(np.abs(new - h)) <= tol:
            return hd, new, float(np.log(lam))
        h = new
    raise ConvergenceError("eigenfunction iteration did not converge")


def pressure(spec: SubshiftSpec, potential: Potential, depth: int | None = None,
             tol: float = 1e-13) -> tuple[float, float]:
    """Topological pressure and an error bound.

    The bound adds the spectral residual, the disagreement between working
    depths ``n`` and ``n + 1`` and the approximation error carried by the
    potential (for tables sampled from torus functions).
    """
    n = max(depth or potential.depth, potential.depth, 2)
    p_n, _, res_n = _eigenmeasure(spec, potential, n, tol)
    try:
        p_next, _, res_next = _eigenmeasure(spec, potential, n + 1, tol)
        drift = abs(p_n - p_next)
    except Exception:  # depth cap reached; report residual only
        res_next, drift = 0.0, 0.0
    err = res_n + res_next + drift + potential.approx_error
    return p_n, float(err)


@dataclass(frozen=True, eq=False)
class GibbsMeasure:
    """Cylinder masses of a Gibbs measure at a working depth.

    ``nu`` is the eigenmeasure of the dual transfer operator at ``depth``.
    For ``kind == "invariant"`` the measure is ``h * nu`` where ``h`` is the
    positive eigenfunction (stored on words of length ``h_depth``).
    """

    spec: SubshiftSpec
    potential: Potential
    pressure: float
    depth: int
    nu: np.ndarray
    kind: str = "brs_eigenmeasure"
    h: np.ndarray | None = None
    h_depth: int = 0
    error_bound: float = 0.0
    certified: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def cylinder_mass(self) -> np.ndarray:
        return self.masses_at(self.depth)

    def _nu_at(self, n):
        key = ("nu", n)
        if key in self._cache:
            return self._cache[key]
        if n <= self.depth:
            out = np.bincount(prefix_index(self.spec, self.depth, n), weights=self.nu,
                              minlength=len(self.spec.level(n)))
        else:
            prev = self._nu_at(n - 1)
            lev = self.spec.level(n)
            out = np.exp(self.potential.lift(n) - self.pressure) * prev[lev.tail]
        self._cache[key] = out
        return out

    def masses_at(self, n: int) -> np.ndarray:
        """Masses of all admissible length-``n`` cylinders (Gibbs-extended past depth)."""
        key = ("mu", n)
        if key in self._cache:
            return self._cache[key]
        if self.kind != "invariant":
            out = self._nu_at(n)
        elif n >= self.h_depth:
            out = self._nu_at(n) * self.h[prefix_index(self.spec, n, self.h_depth)]
        else:
            top = self.masses_at(self.h_depth)
            out = np.bincount(prefix_index(self.spec, self.h_depth, n), weights=top,
                              minlength=len(self.spec.level(n)))
        self._cache[key] = out
        return out

    def mass(self, word) -> float:
        w = tuple(int(s) for s in word)
        if len(w) == 0:
            return 1.0
        return float(self.masses_at(len(w))[self.spec.level(len(w)).index([w])[0]])

    def word_masses(self, words) -> np.ndarray:
        """Masses of equal-length words of any length, without building deep levels."""
        w = np.atleast_2d(np.asarray(words, dtype=np.int64))
        n = w.shape[1]
        if n <= self.depth:
            return self.masses_at(n)[self.spec.level(n).index(w)]
        k = self.potential.depth
        tab = self.spec.level(k)
        log_scale = np.zeros(w.shape[0])
        for j in range(n - self.depth):
            log_scale += self.potential.values[tab.index(w[:, j:j + k])] - self.pressure
        out = np.exp(log_scale) * self._nu_at(self.depth)[
            self.spec.level(self.depth).index(w[:, n - self.depth:])]
        if self.kind == "invariant":
            out = out * self.h[self.spec.level(self.h_depth).index(w[:, :self.h_depth])]
        return out

    def eigenfunction_at(self, n: int) -> np.ndarray:
        if self.h is None:
            return np.ones(len(self.spec.level(n)))
        if n < self.h_depth:
            raise InsufficientDepth("eigenfunction needs %d symbols" % self.h_depth)
        return self.h[prefix_index(self.spec, n, self.h_depth)]


def brs_measure(spec: SubshiftSpec, potential: Potential, depth: int | None = None,
                tol: float = 1e-13, start=None) -> GibbsMeasure:
    """Probability eigenmeasure of the dual transfer operator.

    Satisfies ``log(mass(sigma C) / mass(C)) = -phi(C) + P`` on cylinders of
    length at least the table depth.
    """
    n = max(depth or potential.depth, potential.depth, 2)
    p, nu, res = _eigenmeasure(spec, potential, n, tol, start=start)
    return GibbsMeasure(spec, potential, p, n, nu, error_bound=res + potential.approx_error,
                        certified=potential.certified)


def invariant_normalization(spec: SubshiftSpec, potential: Potential,
                            depth: int | None = None, tol: float = 1e-13):
    """Return ``(phi_prime, h, mu)`` with ``phi' = phi + log h - log h o sigma - P``.

    ``mu = h * nu`` is shift invariant and is the eigenmeasure of ``phi'``
    (with pressure zero).  ``phi'`` is checked to be expanding: it must be
    negative, or at least have negative ``M``-step Birkhoff sums when the
    shift is not full (``M`` the mixing time).

    Raises
    ------
    PositivityFailure
        If even the ``M``-step sums of ``phi'`` fail to be negative.
    """
    nu_measure = brs_measure(spec, potential, depth, tol)
    hd, h, _ = _eigenfunction(spec, potential, tol)
    h_at = h[prefix_index(spec, nu_measure.depth, hd)] if nu_measure.depth >= hd else None
    norm = float(np.dot(nu_measure.nu, h_at))
    h = h / norm
    k = potential.depth
    d = max(k, hd + 1)
    lev = spec.level(d)
    log_h = np.log(h)
    vals = (potential.lift(d) + log_h[prefix_index(spec, d, hd)]
            - log_h[prefix_index(spec, d - 1, hd)[lev.tail]] - nu_measure.pressure)
    phi_prime = Potential(spec, d, vals, approx_error=potential.approx_error,
                          certified=potential.certified)
    _check_expanding(spec, phi_prime)
    mu = GibbsMeasure(spec, potential, nu_measure.pressure, nu_measure.depth,
                      nu_measure.nu, kind="invariant", h=h, h_depth=hd,
                      error_bound=nu_measure.error_bound, certified=potential.certified)
    return phi_prime, h, mu


def expansion_iterate(spec: SubshiftSpec, phi_prime: Potential) -> int:
    """Smallest ``m`` in ``{1, M}`` with ``S_m phi' < 0`` everywhere (0 if neither)."""
    if np.all(phi_prime.values < 0):
        return 1
    m = spec.mixing_time
    n = m + phi_prime.depth - 1
    lev = spec.level(n)
    sums = np.zeros(len(lev))
    for j in range(m):
        sums += phi_prime.values[spec.level(phi_prime.depth).index(
            lev.words[:, j:j + phi_prime.depth])]
    return m if np.all(sums < 0) else 0


def _check_expanding(spec, phi_prime):
    if expansion_iterate(spec, phi_prime) == 0:
        raise PositivityFailure(
            "normalized potential is not expanding (max value %.3g)"
            % float(phi_prime.values.max()))


@dataclass(frozen=True)
class LocalUniquenessReport:
    constant: float
    deviation: float
    n_cylinders: int


def local_uniqueness_check(candidate, measure: GibbsMeasure, cylinders,
                           depth: int | None = None) -> LocalUniquenessReport:
    """Compare a candidate measure with ``measure`` on the cylinders refining ``V``.

    ``candidate`` maps a word (tuple) to its mass.  ``cylinders`` lists the
    words whose union is ``V``; each is refined to ``depth`` symbols.  The
    deviation is ``log(max ratio / min ratio)``, zero exactly when the two
    measures agree on ``V`` up to a constant factor.
    """
    n = depth or max(len(c) for c in cylinders)
    lev = measure.spec.level(n)
    ratios = []
    for c in cylinders:
        lo, hi = lev.block(tuple(c))
        for w in lev.words[lo:hi]:
            word = tuple(int(s) for s in w)
            ratios.append(candidate(word) / measure.mass(word))
    ratios = np.asarray(ratios)
    return LocalUniquenessReport(float(np.exp(np.mean(np.log(ratios)))),
                                 float(np.log(ratios.max() / ratios.min())),
                                 int(ratios.size))


def pressure_report(spec, potential, depth, tol=1e-13) -> dict:
    p, err = pressure(spec, potential, depth, tol)
    return {"schema_version": SCHEMA_VERSION, "P": p, "error_bound": err,
            "depth": int(max(depth, potential.depth))}


def write_masses_csv(path, measure: GibbsMeasure, n: int, phi: Potential | None = None,
                     bounds: tuple[float, float] | None = None) -> None:
    """Dump ``word, mass, S_n phi, bound_ok`` rows for all length-``n`` cylinders.

    ``S_n phi`` is evaluated on the lexicographically first extension of each
    word when ``phi`` looks past the cylinder.
    """
    phi = phi or measure.potential
    lev = measure.spec.level(n)
    masses = measure.masses_at(n)
    ext = lev.n + phi.depth - 1
    full = measure.spec.level(ext)
    first = prefix_index(measure.spec, ext, n)
    pick = np.full(len(lev), -1, dtype=np.int64)
    pick[first[::-1]] = np.arange(len(full))[::-1]
    words = full.words[pick]
    sums = np.zeros(len(lev))
    for j in range(n):
        sums += phi.values[measure.spec.level(phi.depth).index(words[:, j:j + phi.depth])]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["word", "mass", "S_n_phi", "bound_ok"])
        for w, m, s in zip(lev.words, masses, sums):
            ok = ""
            if bounds is not None:
                r = m / np.exp(s)
                ok = int(bounds[0] <= r <= bounds[1])
            wr.writerow(["".join(str(int(x)) for x in w) if measure.spec.r <= 10
                         else "-".join(str(int(x)) for x in w), repr(float(m)),
                         repr(float(s)), ok])


def write_pressure_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
