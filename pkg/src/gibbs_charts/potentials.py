"""Locally constant potentials on a one-sided shift and their algebra.

A :class:`Potential` is a cylinder table: one value per admissible word of a
fixed depth ``k``, so ``phi(x)`` depends on ``x_0 ... x_{k-1}``.  Two-sided
tables (:class:`TwoSidedTable`) additionally look ``b`` symbols into the past
and are turned into forward tables by :func:`reduce_to_forward`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (BackendMismatch, InsufficientDepth, NonSummableVariation,
                     NotStableRelated)
from .sft import SubshiftSpec

__all__ = [
    "Potential", "TwoSidedTable", "VariationProfile", "prefix_index",
    "window_index", "constant_potential", "birkhoff_sum",
    "periodic_birkhoff_sums", "variation_profile", "add_almost_coboundary",
    "reduce_to_forward", "transverse_cocycle", "potential_from_json",
]


def prefix_index(spec: SubshiftSpec, n: int, k: int) -> np.ndarray:
    """Map each depth-``n`` word to the index of its length-``k`` prefix."""
    if k > n:
        raise ValueError("prefix longer than word")
    cache = spec._levels.setdefault(("prefix",), {})
    key = (n, k)
    if key not in cache:
        idx = np.arange(len(spec.level(n)), dtype=np.int64)
        for m in range(n, k, -1):
            idx = spec.level(m).parent[idx]
        cache[key] = idx
    return cache[key]


def window_index(spec: SubshiftSpec, words: np.ndarray, start: int, k: int,
                 cyclic: bool = False) -> np.ndarray:
    """Level-``k`` indices of ``words[:, start:start+k]`` (cyclically if asked)."""
    p = words.shape[1]
    cols = np.arange(start, start + k)
    if cyclic:
        cols %= p
    elif cols[-1] >= p:
        raise InsufficientDepth("window runs past the end of the word")
    return spec.level(k).index(words[:, cols])


@dataclass(frozen=True, eq=False)
class Potential:
    """Cylinder-table potential of depth ``depth`` on ``spec``.

    ``values[i]`` is the value on the i-th admissible word of length
    ``depth`` (lexicographic order).
    """

    spec: SubshiftSpec
    depth: int
    values: np.ndarray
    holder_constant: float | None = None
    holder_rate: float = 0.5
    approx_error: float = 0.0
    certified: bool = True

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.spec.level(self.depth)),):
            raise ValueError("table needs one value per admissible word of length %d"
                             % self.depth)
        object.__setattr__(self, "values", vals)
        if self.holder_constant is None:
            prof = variation_profile(self, self.depth)
            c = max(v * self.holder_rate ** -n for n, v in enumerate(prof.var))
            object.__setattr__(self, "holder_constant", float(c))

    @classmethod
    def from_function(cls, spec: SubshiftSpec, depth: int, func) -> "Potential":
        """Tabulate ``func(words)`` (vectorized over rows) at ``depth``."""
        return cls(spec, depth, np.asarray(func(spec.level(depth).words), dtype=float))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def lift(self, n: int) -> np.ndarray:
        """Values on every depth-``n`` word, ``n >= depth``."""
        if n < self.depth:
            raise InsufficientDepth("cannot restrict a depth-%d table to depth %d"
                                    % (self.depth, n))
        return self.values[prefix_index(self.spec, n, self.depth)]

    def at(self, words) -> np.ndarray:
        w = np.atleast_2d(np.asarray(words))
        if w.shape[1] < self.depth:
            raise InsufficientDepth("words shorter than table depth")
        return self.values[self.spec.level(self.depth).index(w[:, :self.depth])]

    def __call__(self, word: Sequence[int]) -> float:
        return float(self.at([tuple(word)[:self.depth]])[0])

    def _combine(self, other, op) -> "Potential":
        if isinstance(other, Potential):
            if other.spec is not self.spec:
                raise BackendMismatch("potentials live on different shifts")
            d = max(self.depth, other.depth)
            return Potential(self.spec, d, op(self.lift(d), other.lift(d)),
                             approx_error=self.approx_error + other.approx_error,
                             certified=self.certified and other.certified)
        if np.isscalar(other):
            return Potential(self.spec, self.depth, op(self.values, float(other)),
                             holder_constant=self.holder_constant,
                             holder_rate=self.holder_rate,
                             approx_error=self.approx_error,
                             certified=self.certified)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return Potential(self.spec, self.depth, float(c) * self.values,
                         approx_error=abs(float(c)) * self.approx_error,
                         certified=self.certified)

    __rmul__ = __mul__

    def shifted(self) -> "Potential":
        """The composition ``phi o sigma`` as a table of depth ``depth + 1``."""
        d = self.depth + 1
        tail = self.spec.level(d).tail
        return Potential(self.spec, d, self.values[tail])

    def to_json(self) -> dict:
        words = self.spec.level(self.depth).words
        return {"table": {"depth": self.depth,
                          "values": {",".join(map(str, w)): float(v)
                                     for w, v in zip(words, self.values)}}}


def constant_potential(spec: SubshiftSpec, c: float = 0.0) -> Potential:
    return Potential(spec, 1, np.full(spec.r, float(c)), holder_constant=0.0)


@dataclass(frozen=True, eq=False)
class TwoSidedTable:
    """Potential depending on ``x_{-back} ... x_{fwd-1}``.

    ``values`` is indexed by the admissible words of length ``back + fwd``
    read from ``x_{-back}``.
    """

    spec: SubshiftSpec
    back: int
    fwd: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.spec.level(self.back + self.fwd)),):
            raise ValueError("two-sided table has the wrong length")
        object.__setattr__(self, "values", vals)

    def at(self, backward, forward) -> np.ndarray:
        b = np.atleast_2d(np.asarray(backward))
        f = np.atleast_2d(np.asarray(forward))
        if b.shape[1] < self.back or f.shape[1] < self.fwd:
            raise InsufficientDepth("need %d backward and %d forward symbols"
                                    % (self.back, self.fwd))
        w = np.concatenate([b[:, b.shape[1] - self.back:], f[:, :self.fwd]], axis=1)
        return self.values[self.spec.level(self.back + self.fwd).index(w)]


@dataclass(frozen=True)
class VariationProfile:
    """``var[n]`` for ``n = 0..max_depth`` plus the summed variation.

    ``tail_bound`` bounds the unmaterialized part of the sum (zero for tables).
    """

    var: np.ndarray
    total: float
    tail_bound: float
    decaying: bool = True


def birkhoff_sum(potential: Potential, word: Sequence[int], n: int) -> float:
    """``S_n phi`` at any sequence extending ``word``.

    Raises
    ------
    InsufficientDepth
        If ``len(word) < n + depth - 1``.
    """
    if not isinstance(potential, Potential):
        raise BackendMismatch("symbolic Birkhoff sums need a cylinder table")
    k = potential.depth
    w = tuple(int(s) for s in word)
    if len(w) < n + k - 1:
        raise InsufficientDepth("word of length %d cannot determine S_%d of a depth-%d table"
                                % (len(w), n, k))
    if n == 0:
        return 0.0
    wins = np.array([w[j:j + k] for j in range(n)])
    return float(potential.at(wins).sum())


def periodic_birkhoff_sums(potential: Potential, words) -> np.ndarray:
    """Birkhoff sums over one period for each row of ``words`` (cyclic words)."""
    w = np.atleast_2d(np.asarray(words))
    p = w.shape[1]
    k = potential.depth
    total = np.zeros(w.shape[0])
    for j in range(p):
        total += potential.values[window_index(potential.spec, w, j, k, cyclic=True)]
    return total


def variation_profile(potential, max_depth: int) -> VariationProfile:
    """Variations ``var_n = sup |phi(x) - phi(y)|`` over pairs agreeing on n symbols.

    Exact for cylinder tables (``var_n = 0`` for ``n >= depth``); other
    backends supply their own ``variation_profile`` method.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if not isinstance(potential, Potential):
        return potential.variation_profile(max_depth)
    spec, k = potential.spec, potential.depth
    var = np.zeros(max_depth + 1)
    vals = potential.values
    for n in range(0, min(k, max_depth + 1)):
        if n == 0:
            var[0] = vals.max() - vals.min()
            continue
        grp = prefix_index(spec, k, n)
        starts = np.flatnonzero(np.r_[True, grp[1:] != grp[:-1]])
        hi = np.maximum.reduceat(vals, starts)
        lo = np.minimum.reduceat(vals, starts)
        var[n] = float(np.max(hi - lo))
    return VariationProfile(var, float(var.sum()), 0.0)


def add_almost_coboundary(phi, u=None, K: float = 0.0):
    """Return ``phi + u o sigma - u + K``.

    ``u`` may be ``None`` (zero transfer function) or a table on the same
    shift; torus-function backends implement the same operation themselves.
    """
    if not isinstance(phi, Potential):
        if hasattr(phi, "add_almost_coboundary"):
            return phi.add_almost_coboundary(u, K)
        raise BackendMismatch("unsupported potential backend")
    if u is None:
        return phi + float(K)
    if not isinstance(u, Potential) or u.spec is not phi.spec:
        raise BackendMismatch("transfer function must be a table on the same shift")
    d = max(phi.depth, u.depth + 1)
    spec = phi.spec
    u_now = u.lift(d)
    u_next = u.values[prefix_index(spec, d - 1, u.depth)[spec.level(d).tail]]
    return Potential(spec, d, phi.lift(d) + u_next - u_now + float(K),
                     approx_error=phi.approx_error + 2 * u.approx_error,
                     certified=phi.certified and u.certified)


def reduce_to_forward(two_sided, tol: float = 1e-9):
    """Bowen's reduction: a cohomologous potential depending on ``x_0, x_1, ...``.

    Returns ``(phi_plus, u)`` with ``phi_plus = phi + u o sigma - u``.  For a
    two-sided table looking ``b`` symbols back, the series defining ``u`` is
    finite and the reduction is exact; the base point for symbol ``i`` is the
    lexicographically minimal backward extension of ``i``.
    """
    if isinstance(two_sided, Potential):
        return two_sided, None
    if not isinstance(two_sided, TwoSidedTable):
        if hasattr(two_sided, "reduce_to_forward"):
            return two_sided.reduce_to_forward(tol)
        raise BackendMismatch("unsupported potential backend")
    spec, b, f = two_sided.spec, two_sided.back, two_sided.fwd
    if b == 0:
        return Potential(spec, f, two_sided.values), None
    width = b + f
    lev_w = spec.level(width)
    base = np.array([spec.backward_base_word(i, b) for i in range(spec.r)], dtype=np.uint8)

    def phi_window(seq, j):
        return two_sided.values[lev_w.index(seq[:, j:j + width])]

    d = b + f
    x = spec.level(d).words
    z = np.concatenate([base[x[:, 0]], x], axis=1)
    zp = np.concatenate([base[x[:, 1]], x[:, 1:]], axis=1) if d > 1 else None
    plus = sum(phi_window(z, j) for j in range(b + 1))
    if zp is not None:
        plus = plus - sum(phi_window(zp, j) for j in range(b))
    phi_plus = Potential(spec, d, plus)

    # u(y) = sum_{k<b} phi(sigma^k y) - phi(sigma^k r y), y read from y_{-b}
    uw = spec.level(b + d - 1).words
    ry = np.concatenate([base[uw[:, b]], uw[:, b:]], axis=1)
    u_vals = sum(phi_window(uw, k) - phi_window(ry, k) for k in range(b))
    transfer = TwoSidedTable(spec, b, d - 1, u_vals)
    return phi_plus, transfer


def transverse_cocycle(potential, x, y, tol: float = 1e-9, **kwargs) -> float:
    """``sum_k phi(sigma^k y) - phi(sigma^k x)`` for stable-related x, y.

    For tables, ``x`` and ``y`` are equal-length forward words whose tails
    coincide from some index on; terms after the merge vanish exactly.
    """
    if not isinstance(potential, Potential):
        return potential.transverse_cocycle(x, y, tol, **kwargs)
    xs = tuple(int(s) for s in x)
    ys = tuple(int(s) for s in y)
    if len(xs) != len(ys):
        raise NotStableRelated("words must have equal length")
    k, n = potential.depth, len(xs)
    merge = n
    while merge > 0 and xs[merge - 1] == ys[merge - 1]:
        merge -= 1
    if merge == 0:
        return 0.0
    if merge - 1 + k > n:
        raise NotStableRelated("forward tails do not merge within the given words")
    xw = np.array([xs[j:j + k] for j in range(merge)])
    yw = np.array([ys[j:j + k] for j in range(merge)])
    return float(potential.at(yw).sum() - potential.at(xw).sum())


def check_decay(profile: VariationProfile) -> None:
    if not profile.decaying:
        raise NonSummableVariation("measured variation profile does not decay")


def potential_from_json(spec: SubshiftSpec, data: dict) -> Potential:
    """Parse ``{"table": {"depth": k, "values": {...} or [...]}}``."""
    if "table" not in data:
        raise ValueError("expected a 'table' potential")
    t = data["table"]
    k = int(t["depth"])
    vals = t["values"]
    lev = spec.level(k)
    if isinstance(vals, dict):
        arr = np.full(len(lev), np.nan)
        for key, v in vals.items():
            w = [int(s) for s in str(key).replace(" ", "").split(",") if s != ""]
            if len(w) != k:
                raise ValueError("table key %r has wrong length" % key)
            arr[lev.index([w])[0]] = float(v)
        if np.isnan(arr).any():
            raise ValueError("table is missing admissible words")
    else:
        arr = np.asarray(vals, dtype=float)
    return Potential(spec, k, arr, holder_constant=t.get("holder_constant"),
                     holder_rate=float(t.get("holder_rate", 0.5)))
