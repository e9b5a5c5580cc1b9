"""Subshifts of finite type: spectral data, admissible and periodic words.

Words are plain tuples of symbols.  Bulk enumerations are kept as
``(count, n)`` uint8 arrays in lexicographic order, together with integer
codes (base ``r`` digits) so that index lookups are a ``searchsorted``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (ConvergenceError, DepthTooLarge, InadmissibleWord,
                     NotMixing, ZeroRowOrColumn)

__all__ = [
    "SubshiftSpec", "WordLevel", "build_sft", "admissible_words",
    "periodic_words", "periodic_word_array", "check_word", "word_distance", "load_matrix",
    "write_words_csv", "DEFAULT_WORD_CAP", "MAX_MIXING_SEARCH",
]

DEFAULT_WORD_CAP = 10**7
MAX_MIXING_SEARCH = 64
POWER_ITER_CAP = 10**4


@dataclass(frozen=True)
class WordLevel:
    """All admissible words of one length, with shift/prefix bookkeeping.

    ``parent[i]`` is the index of ``words[i][:-1]`` and ``tail[i]`` the index
    of ``words[i][1:]``, both in the level one shorter.
    """

    n: int
    words: np.ndarray
    codes: np.ndarray
    parent: np.ndarray
    tail: np.ndarray
    base: int

    def __len__(self) -> int:
        return self.words.shape[0]

    def code_of(self, words) -> np.ndarray:
        w = np.atleast_2d(np.asarray(words, dtype=np.int64))
        powers = self.base ** np.arange(w.shape[1] - 1, -1, -1, dtype=np.int64)
        return w @ powers

    def index(self, words) -> np.ndarray:
        """Indices of ``words`` (rows) in this level; raises on unknown words."""
        codes = self.code_of(words)
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, len(self.codes) - 1)
        if not np.all(self.codes[idx] == codes):
            raise InadmissibleWord("word not admissible at depth %d" % self.n)
        return idx

    def block(self, prefix: Sequence[int]) -> tuple[int, int]:
        """Half-open index range of the words extending ``prefix``."""
        k = len(prefix)
        if k > self.n:
            raise ValueError("prefix longer than level")
        lo = sum(int(s) * self.base ** (self.n - 1 - i) for i, s in enumerate(prefix))
        hi = lo + self.base ** (self.n - k)
        return (int(np.searchsorted(self.codes, lo)),
                int(np.searchsorted(self.codes, hi)))


@dataclass(frozen=True, eq=False)
class SubshiftSpec:
    """Validated transition matrix with its Perron-Frobenius data."""

    matrix: np.ndarray
    pf_eigenvalue: float
    pf_left_vector: np.ndarray
    pf_right_vector: np.ndarray
    entropy: float
    mixing_time: int
    word_cap: int = DEFAULT_WORD_CAP
    _levels: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def alphabet_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def r(self) -> int:
        return self.matrix.shape[0]

    def transpose(self) -> "SubshiftSpec":
        return build_sft(self.matrix.T, word_cap=self.word_cap)

    def word_count(self, n: int) -> int:
        """Number of admissible words of length ``n`` (exact integer)."""
        if n == 0:
            return 1
        a = [[int(v) for v in row] for row in self.matrix]
        vec = [1] * self.r
        for _ in range(n - 1):
            vec = [sum(a[i][j] * vec[j] for j in range(self.r)) for i in range(self.r)]
        return sum(vec)

    def level(self, n: int) -> WordLevel:
        """Cached enumeration of the admissible words of length ``n``."""
        if n < 0:
            raise ValueError("depth must be non-negative")
        lev = self._levels.get(n)
        if lev is not None:
            return lev
        if self.word_count(n) > self.word_cap:
            raise DepthTooLarge(
                "%d words at depth %d exceed cap %d"
                % (self.word_count(n), n, self.word_cap))
        if n == 0:
            lev = WordLevel(0, np.zeros((1, 0), np.uint8), np.zeros(1, np.int64),
                            np.zeros(1, np.int64), np.zeros(1, np.int64), self.r)
        else:
            prev = self.level(n - 1)
            lev = _extend_level(prev, self.matrix)
        self._levels[n] = lev
        return lev

    def is_admissible(self, word: Sequence[int]) -> bool:
        w = list(word)
        if any(s < 0 or s >= self.r for s in w):
            return False
        return all(self.matrix[a, b] for a, b in zip(w[:-1], w[1:]))

    def backward_base_word(self, symbol: int, length: int) -> tuple:
        """Lexicographically minimal admissible backward extension of ``symbol``.

        Returned in reading order ``(x_{-length}, ..., x_{-1})``.
        """
        out = []
        cur = symbol
        for _ in range(length):
            cur = int(np.flatnonzero(self.matrix[:, cur])[0])
            out.append(cur)
        return tuple(reversed(out))


def _extend_level(prev: WordLevel, matrix: np.ndarray) -> WordLevel:
    r = matrix.shape[0]
    n = prev.n + 1
    if prev.n == 0:
        words = np.arange(r, dtype=np.uint8)[:, None]
        parent = np.zeros(r, np.int64)
        tail = np.zeros(r, np.int64)
        return WordLevel(1, words, np.arange(r, dtype=np.int64), parent, tail, r)
    deg = matrix.sum(axis=1).astype(np.int64)
    succ = np.concatenate([np.flatnonzero(matrix[i]) for i in range(r)])
    ptr = np.concatenate([[0], np.cumsum(deg)[:-1]])
    last = prev.words[:, -1].astype(np.int64)
    counts = deg[last]
    parent = np.repeat(np.arange(len(prev), dtype=np.int64), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    within = np.arange(parent.size, dtype=np.int64) - np.repeat(offsets, counts)
    new_sym = succ[np.repeat(ptr[last], counts) + within]
    words = np.empty((parent.size, n), np.uint8)
    words[:, :-1] = prev.words[parent]
    words[:, -1] = new_sym
    codes = prev.codes[parent] * r + new_sym
    if n == 1:
        tail = np.zeros(parent.size, np.int64)
    else:
        tail_codes = codes - words[:, 0].astype(np.int64) * r ** (n - 1)
        tail = np.searchsorted(prev.codes, tail_codes)
    return WordLevel(n, words, codes, parent, tail, r)


def _power_iteration(a: np.ndarray) -> tuple[float, np.ndarray]:
    v = np.ones(a.shape[0])
    lam = 0.0
    for _ in range(POWER_ITER_CAP):
        w = a @ v
        lam = np.max(w) / np.max(v)
        w /= np.max(w)
        if np.max(np.abs(a @ w - lam * w)) <= 1e-13 * np.max(w):
            return float(lam), w
        v = w
    raise ConvergenceError("power iteration did not converge")


def build_sft(matrix, word_cap: int = DEFAULT_WORD_CAP) -> SubshiftSpec:
    """Validate a 0/1 transition matrix and compute its spectral data.

    Raises
    ------
    ZeroRowOrColumn
        If some symbol has no successor or no predecessor.
    NotMixing
        If no power up to 64 is strictly positive.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("transition matrix must be square")
    if a.shape[0] < 2:
        raise ValueError("alphabet must have at least two symbols")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("transition matrix must have 0/1 entries")
    a = a.astype(np.int64)
    if np.any(a.sum(axis=0) == 0) or np.any(a.sum(axis=1) == 0):
        raise ZeroRowOrColumn("every symbol needs a successor and a predecessor")
    p = a.copy()
    mixing = None
    for m in range(1, MAX_MIXING_SEARCH + 1):
        if np.all(p > 0):
            mixing = m
            break
        p = ((p @ a) > 0).astype(np.int64)
    if mixing is None:
        raise NotMixing("no power of A up to %d is positive" % MAX_MIXING_SEARCH)
    af = a.astype(float)
    lam, right = _power_iteration(af)
    _, left = _power_iteration(af.T)
    a.setflags(write=False)
    return SubshiftSpec(a, lam, left / left.sum(), right / right.sum(),
                        float(np.log(lam)), mixing, word_cap)


def admissible_words(spec: SubshiftSpec, n: int) -> list[tuple]:
    """All admissible words of length ``n`` in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [tuple(int(s) for s in w) for w in spec.level(n).words]


def periodic_words(spec: SubshiftSpec, n: int) -> list[tuple]:
    """Admissible length-``n`` words whose cyclic closure is admissible."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w = spec.level(n).words
    keep = spec.matrix[w[:, -1], w[:, 0]] == 1
    return [tuple(int(s) for s in row) for row in w[keep]]


def periodic_word_array(spec: SubshiftSpec, n: int) -> np.ndarray:
    w = spec.level(n).words
    return w[spec.matrix[w[:, -1], w[:, 0]] == 1]


def check_word(spec: SubshiftSpec, word: Sequence[int]) -> tuple:
    w = tuple(int(s) for s in word)
    if not spec.is_admissible(w):
        raise InadmissibleWord("inadmissible word %r" % (w,))
    return w


def word_distance(x: Sequence[int], y: Sequence[int]) -> float:
    """One-sided metric: sum of 2**-i over positions where x and y differ."""
    return float(sum(2.0 ** -i for i, (a, b) in enumerate(zip(x, y)) if a != b))


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return np.asarray(json.load(fh), dtype=np.int64)


def write_words_csv(path, words) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for w in words:
            writer.writerow([int(s) for s in w])
