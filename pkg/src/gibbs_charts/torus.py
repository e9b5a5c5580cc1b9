"""Trigonometric potentials on the torus and their pull-back to the coding.

A :class:`TorusFunction` is ``const + sum a cos(2 pi k.x) + b sin(2 pi k.x)``.
Composition with an integer matrix is exact (``k -> M^T k``), so
coboundaries ``u o L - u`` are again trigonometric polynomials.

:func:`forward_table` turns a torus function into a one-sided cylinder table
on a partition's shift.  It uses the retraction onto one edge of every
rectangle: with ``rho_i(upsilon)`` the point of the chosen edge of ``R_i``,

    phi_plus(x) = phi(rho_{x0}(ups)) + sum_k phi(L^k(Q + d e_s)) - phi(L^k Q)

where ``Q = rho_{x1}(ups')`` and ``d`` is the stable offset of ``L rho_{x0}(ups)``
from the edge of ``R_{x1}``.  The series converges like ``lam_s**k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BackendMismatch, NonSummableVariation, NotStableRelated
from .potentials import Potential, VariationProfile

__all__ = [
    "TorusFunction", "forward_table", "series_terms", "edge_transfer",
    "torus_transverse_cocycle", "torus_variation_profile", "CodedTorusPotential",
    "trig_from_json",
]

SERIES_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class TorusFunction:
    """Real trigonometric polynomial on the torus."""

    freqs: np.ndarray
    a: np.ndarray
    b: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(-1))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        object.__setattr__(self, "const", float(self.const))
        if not (len(self.a) == len(self.b) == f.shape[0]):
            raise ValueError("one (a, b) pair per frequency")

    @classmethod
    def from_terms(cls, terms, const: float = 0.0) -> "TorusFunction":
        """``terms`` is a list of ``(m, n, a, b)``."""
        terms = list(terms)
        if not terms:
            return cls(np.zeros((0, 2), np.int64), [], [], const)
        arr = np.asarray(terms, dtype=float)
        return cls(arr[:, :2].astype(np.int64), arr[:, 2], arr[:, 3], const)

    @classmethod
    def constant(cls, c: float = 0.0) -> "TorusFunction":
        return cls.from_terms([], c)

    def __call__(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        return kernels.trig_eval(np.ascontiguousarray(xy), self.freqs, self.a, self.b,
                                 self.const)

    @property
    def lipschitz(self) -> float:
        """Bound on the gradient norm."""
        if self.freqs.shape[0] == 0:
            return 0.0
        return float(2 * np.pi * np.sum(np.linalg.norm(self.freqs, axis=1)
                                        * np.hypot(self.a, self.b)))

    @property
    def sup_bound(self) -> float:
        return float(abs(self.const) + np.sum(np.hypot(self.a, self.b)))

    def compose(self, matrix) -> "TorusFunction":
        """``f o M`` for an integer matrix ``M``."""
        m = np.asarray(matrix, dtype=np.int64)
        return TorusFunction(self.freqs @ m, self.a, self.b, self.const)

    def _merge(self, other, sign):
        if isinstance(other, TorusFunction):
            return TorusFunction(np.vstack([self.freqs, other.freqs]),
                                 np.concatenate([self.a, sign * other.a]),
                                 np.concatenate([self.b, sign * other.b]),
                                 self.const + sign * other.const).simplified()
        if np.isscalar(other):
            return TorusFunction(self.freqs, self.a, self.b, self.const + sign * float(other))
        return NotImplemented

    def __add__(self, other):
        return self._merge(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._merge(other, -1.0)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return TorusFunction(self.freqs, c * self.a, c * self.b, c * self.const)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def simplified(self) -> "TorusFunction":
        """Combine repeated frequencies and fold ``-k`` onto ``k``."""
        acc: dict = {}
        const = self.const
        for (m, n), a, b in zip(self.freqs, self.a, self.b):
            m, n = int(m), int(n)
            if m == 0 and n == 0:
                const += a
                continue
            if (m, n) < (0, 0) or (m == 0 and n < 0):
                m, n, b = -m, -n, -b
            pa, pb = acc.get((m, n), (0.0, 0.0))
            acc[(m, n)] = (pa + a, pb + b)
        terms = [(m, n, a, b) for (m, n), (a, b) in sorted(acc.items())
                 if abs(a) > 0 or abs(b) > 0]
        return TorusFunction.from_terms(terms, const)

    def add_almost_coboundary(self, u, K: float = 0.0, matrix=None) -> "TorusFunction":
        """``self + u o L - u + K``; ``matrix`` is the automorphism ``L``."""
        if u is None:
            return self + float(K)
        if not isinstance(u, TorusFunction):
            raise BackendMismatch("torus potentials need a torus transfer function")
        if matrix is None:
            raise ValueError("composition needs the automorphism matrix")
        return self + u.compose(matrix) - u + float(K)

    def periodic_sum(self, orbit) -> float:
        """Sum over the points of a periodic orbit (given in orbit order)."""
        xy = np.array([[float(x), float(y)] for x, y in orbit])
        return float(self(xy).sum())

    def to_json(self) -> dict:
        return {"trig": {"terms": [[int(m), int(n), float(a), float(b)]
                                   for (m, n), a, b in zip(self.freqs, self.a, self.b)],
                         "const": self.const}}


def trig_from_json(data: dict) -> TorusFunction:
    """Parse ``{"trig": {"terms": [[m, n, a, b], ...], "const": c}}``.

    The coefficient-map form ``{"a": {"m,n": val}, "b": {...}}`` is accepted too.
    """
    t = data["trig"]
    if "terms" in t:
        terms = []
        for row in t["terms"]:
            if len(row) != 4:
                raise ValueError("trig terms are [m, n, a, b]")
            terms.append((int(row[0]), int(row[1]), float(row[2]), float(row[3])))
        return TorusFunction.from_terms(terms, float(t.get("const", 0.0)))
    keys = set(t.get("a", {})) | set(t.get("b", {}))
    terms = []
    for key in sorted(keys):
        m, n = (int(v) for v in str(key).split(","))
        terms.append((m, n, float(t.get("a", {}).get(key, 0.0)),
                      float(t.get("b", {}).get(key, 0.0))))
    return TorusFunction.from_terms(terms, float(t.get("const", 0.0)))


def series_terms(f: TorusFunction, part, width: float | None = None,
                 tol: float = SERIES_TOL) -> int:
    """Number of stable-series terms so that the neglected tail is below ``tol``."""
    lam = abs(part.lam_s)
    w = float(part.widths.max()) if width is None else width
    lip = f.lipschitz
    if lip == 0.0:
        return 0
    k = 0
    while lip * w * lam ** k / (1 - lam) >= tol:
        k += 1
    return k


def _forward_matrix(part):
    return part.aut.inverse_matrix() if part.swapped else part.aut.matrix


def _stable_dir(part):
    return part.aut.e_u if part.swapped else part.aut.e_s


def _stable_sum(f, part, base_xy, offsets, tol):
    n = series_terms(f, part, float(np.max(np.abs(offsets))) if len(offsets) else 0.0, tol)
    if n == 0 or base_xy.shape[0] == 0:
        return np.zeros(base_xy.shape[0])
    direction = _stable_dir(part)
    # in the inverse view "sigma" is the e_u coordinate, scaled the same way
    return kernels.stable_series(np.ascontiguousarray(base_xy, dtype=float),
                                 np.ascontiguousarray(offsets, dtype=float),
                                 np.ascontiguousarray(direction, dtype=float),
                                 float(part.lam_s), _forward_matrix(part).astype(float),
                                 int(n), f.freqs, f.a, f.b)


def _edge_sigma(part, rect, edge):
    return np.zeros(len(rect)) if edge == "left" else part.widths[rect]


def forward_values(f: TorusFunction, part, x0, x1, ups, edge: str = "left",
                   tol: float = SERIES_TOL) -> np.ndarray:
    """Exact ``phi_plus`` at one-sided points given by ``(x0, x1, upsilon)``."""
    x0 = np.asarray(x0, dtype=np.int64)
    x1 = np.asarray(x1, dtype=np.int64)
    ups = np.asarray(ups, dtype=float)
    sig0 = _edge_sigma(part, x0, edge)
    p0 = part.to_torus(x0, sig0, ups)
    ups1 = part.lam_u * (ups - part.a[x0, x1])
    sig1 = _edge_sigma(part, x1, edge)
    q = part.to_torus(x1, sig1, ups1)
    d = part.lam_s * sig0 + part.c[x0, x1] - sig1
    return f(p0) + _stable_sum(f, part, q, d, tol)


def edge_transfer(f: TorusFunction, part, rect, sigma, ups, edge: str = "left",
                  tol: float = SERIES_TOL) -> np.ndarray:
    """Transfer function ``u(y) = sum_k f(L^k y) - f(L^k r(y))``.

    ``r(y)`` slides ``y = (rect, sigma, ups)`` along the stable direction to
    the chosen edge of its rectangle.
    """
    rect = np.atleast_1d(np.asarray(rect, dtype=np.int64))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    ups = np.atleast_1d(np.asarray(ups, dtype=float))
    ref = _edge_sigma(part, rect, edge)
    base = part.to_torus(rect, ref, ups)
    return _stable_sum(f, part, base, sigma - ref, tol)


def forward_table(f: TorusFunction, part, depth: int, edge: str = "left",
                  tol: float = SERIES_TOL, samples: int = 20000, seed: int = 0,
                  strict: bool = False) -> Potential:
    """Cylinder table of ``phi_plus`` at ``depth`` (values at cylinder centres).

    ``approx_error`` is twice the largest sampled gap between the table and
    the exact reduced potential inside its cylinders.  The table is flagged
    non-certified when the sampled variation of ``f`` along the coding does
    not decay up to ``depth``.

    Raises
    ------
    NonSummableVariation
        With ``strict=True`` when the variation does not decay.
    """
    if depth < 2:
        raise ValueError("forward tables of torus functions need depth >= 2")
    spec = part.spec
    lev = spec.level(depth)
    lo, ln = part.level_intervals(depth)
    w = lev.words
    vals = forward_values(f, part, w[:, 0], w[:, 1], lo + ln / 2, edge, tol)

    rng = np.random.default_rng(seed)
    pick = rng.integers(0, len(lev), size=min(samples, len(lev)))
    ups = lo[pick] + ln[pick] * rng.random(pick.size)
    exact = forward_values(f, part, w[pick, 0], w[pick, 1], ups, edge, tol)
    approx = 2.0 * float(np.max(np.abs(exact - vals[pick]))) if pick.size else 0.0

    prof = torus_variation_profile(f, part, depth, samples=min(samples, 400), seed=seed)
    if strict and not prof.decaying:
        raise NonSummableVariation("variation of the torus potential does not decay "
                                   "up to depth %d" % depth)
    return Potential(spec, depth, vals, approx_error=approx + tol, certified=prof.decaying)


def torus_variation_profile(f: TorusFunction, part, max_depth: int, samples: int = 400,
                            seed: int = 0, safety: float = 1.5) -> VariationProfile:
    """Sampled variation of ``f`` over two-sided cylinders of the coding.

    ``var[n]`` is ``safety`` times the largest observed oscillation of ``f``
    between two points sharing ``x_{-n} .. x_n``.  The profile counts as
    decaying when ``var[max_depth] <= var[ceil(max_depth / 2)] / 2``.
    """
    rng = np.random.default_rng(seed)
    spec = part.spec
    var = np.zeros(max_depth + 1)
    var[0] = 2.0 * f.sup_bound
    for n in range(1, max_depth + 1):
        lev = spec.level(n)
        lo, ln = part.level_intervals(n)
        pick = rng.integers(0, len(lev), size=samples)
        rect = lev.words[pick, 0].astype(np.int64)
        # the stable extent of a depth-n two-sided cylinder scales like lam_s**n
        width = part.widths[rect] * abs(part.lam_s) ** (n - 1)
        s_lo = rng.random(samples) * (part.widths[rect] - width)
        pts = []
        for _ in range(2):
            sig = s_lo + width * rng.random(samples)
            ups = lo[pick] + ln[pick] * rng.random(samples)
            pts.append(f(part.to_torus(rect, sig, ups)))
        var[n] = safety * float(np.max(np.abs(pts[0] - pts[1])))
    tail = var[-1] * abs(part.lam_s) / (1 - abs(part.lam_s))
    half = (max_depth + 1) // 2
    decaying = bool(var[max_depth] <= 0.5 * var[max(half, 1)]) or var[max_depth] < 1e-12
    return VariationProfile(var, float(var.sum() + tail), float(tail), decaying)


def torus_transverse_cocycle(f: TorusFunction, aut, x, y, tol: float = SERIES_TOL,
                             reach: float = 1.0) -> float:
    """``sum_k f(L^k y) - f(L^k x)`` for points on one local stable leaf."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    best = None
    for k in ((i, j) for i in range(-2, 3) for j in range(-2, 3)):
        d = aut.to_eigen(y + np.array(k) - x)
        if abs(d[1]) < 1e-9 and abs(d[0]) <= reach and (best is None or abs(d[0]) < abs(best)):
            best = d[0]
    if best is None:
        raise NotStableRelated("points are not on a common local stable leaf")
    lam = abs(aut.lambda_s)
    n = 0
    while f.lipschitz * abs(best) * lam ** n / (1 - lam) >= tol and n < 200:
        n += 1
    if n == 0:
        return 0.0
    return float(kernels.stable_series(np.ascontiguousarray(x[None, :]), np.array([best]),
                                       np.ascontiguousarray(aut.e_s), float(aut.lambda_s),
                                       aut.matrix.astype(float), n, f.freqs, f.a, f.b)[0])


@dataclass(frozen=True, eq=False)
class CodedTorusPotential:
    """A torus function seen on a partition's shift, for the generic potential API."""

    f: TorusFunction
    part: object
    depth: int = 10
    edge: str = "left"

    def variation_profile(self, max_depth: int) -> VariationProfile:
        return torus_variation_profile(self.f, self.part, max_depth)

    def reduce_to_forward(self, tol: float = SERIES_TOL):
        table = forward_table(self.f, self.part, self.depth, self.edge, tol, strict=True)

        def transfer(rect, sigma, ups):
            return edge_transfer(self.f, self.part, rect, sigma, ups, self.edge, tol)

        return table, transfer

    def transverse_cocycle(self, x, y, tol: float = SERIES_TOL):
        return torus_transverse_cocycle(self.f, self.part.aut, x, y, tol)

    def add_almost_coboundary(self, u, K: float = 0.0):
        g = self.f.add_almost_coboundary(getattr(u, "f", u), K, _forward_matrix(self.part))
        return CodedTorusPotential(g, self.part, self.depth, self.edge)
