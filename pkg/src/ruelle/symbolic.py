"""One-sided subshifts of finite type.

Symbols are 1-based everywhere in the public API (``1 <= s <= q``).  A word
is a plain tuple of symbols.  A word of length ``L`` labels the cylinder that
fixes coordinates ``0 .. L-1``; the cylinder ``C_m[x]`` of the theory, which
fixes coordinates ``0 .. m``, is therefore the word ``x[:m+1]``.

Admissible words of a given length are always listed in lexicographic order.
That order is the canonical vector index used by every matrix downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence, Tuple

import numpy as np

from .exceptions import (
    DegenerateColumn,
    DegenerateRow,
    InadmissibleWord,
    InvalidTransitionMatrix,
    NotAperiodic,
    SizeLimit,
)

Word = Tuple[int, ...]

DEFAULT_MAX_WORDS = 10**6


@dataclass(frozen=True)
class TransitionMatrix:
    """An aperiodic 0/1 matrix together with its primitivity exponent.

    Build instances with :func:`check_aperiodic`; the constructor does not
    validate.

    Attributes
    ----------
    entries : tuple of tuple of int
        Row ``i`` lists which symbols may follow symbol ``i + 1``.
    M : int
        Least ``M >= 1`` with every entry of ``A**M`` positive.
    """

    entries: Tuple[Tuple[int, ...], ...]
    M: int

    @property
    def q(self) -> int:
        return len(self.entries)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.entries, dtype=np.int64)
        a.setflags(write=False)
        return a

    def allows(self, a: int, b: int) -> bool:
        """Whether symbol ``b`` may follow symbol ``a`` (1-based)."""
        return self.entries[a - 1][b - 1] == 1

    def is_admissible(self, w: Sequence[int]) -> bool:
        if len(w) == 0:
            return False
        if any(not 1 <= s <= self.q for s in w):
            return False
        return all(self.allows(a, b) for a, b in zip(w[:-1], w[1:]))

    def to_list(self):
        return [list(row) for row in self.entries]


def _boolean_power_exponent(a: np.ndarray, limit: int):
    # Boolean semiring: entries stay in {0, 1}, no overflow for any power.
    b = a.astype(bool)
    power = b.copy()
    for m in range(1, limit + 1):
        if power.all():
            return m
        power = (power.astype(np.int64) @ b.astype(np.int64)) > 0
    return None


def check_aperiodic(entries) -> TransitionMatrix:
    """Validate a 0/1 matrix and compute its primitivity exponent.

    The search stops at the Wielandt bound ``(q - 1)**2 + 1``.

    Raises
    ------
    InvalidTransitionMatrix
        Non-square, ``q < 2`` or entries outside {0, 1}.
    DegenerateRow, DegenerateColumn
        An all-zero row or column.
    NotAperiodic
        No power up to the Wielandt bound is strictly positive.
    """
    a = np.asarray(entries)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidTransitionMatrix(f"transition matrix must be square, got shape {a.shape}")
    q = a.shape[0]
    if q < 2:
        raise InvalidTransitionMatrix("alphabet size must be at least 2")
    if not np.all((a == 0) | (a == 1)):
        raise InvalidTransitionMatrix("transition matrix entries must be 0 or 1")
    a = a.astype(np.int64)
    for i in range(q):
        if not a[i].any():
            raise DegenerateRow(f"row {i + 1} has no allowed successor")
        if not a[:, i].any():
            raise DegenerateColumn(f"column {i + 1} has no allowed predecessor")
    limit = (q - 1) ** 2 + 1
    M = _boolean_power_exponent(a, limit)
    if M is None:
        raise NotAperiodic(f"no power A^M with M <= {limit} is strictly positive")
    return TransitionMatrix(tuple(tuple(int(x) for x in row) for row in a), M)


def full_shift(q: int) -> TransitionMatrix:
    return check_aperiodic(np.ones((q, q), dtype=np.int64))


def golden_mean_shift() -> TransitionMatrix:
    return check_aperiodic([[1, 1], [1, 0]])


def count_admissible(A: TransitionMatrix, m: int) -> int:
    """Number of admissible words of length ``m`` (path counting, exact ints)."""
    a = [list(row) for row in A.entries]
    counts = [1] * A.q
    for _ in range(m - 1):
        counts = [sum(counts[j] for j in range(A.q) if a[i][j]) for i in range(A.q)]
    return sum(counts)


@lru_cache(maxsize=256)
def _word_array(A: TransitionMatrix, m: int, cap: int) -> np.ndarray:
    if m < 1:
        raise ValueError("word length must be >= 1")
    total = count_admissible(A, m)
    if total > cap:
        raise SizeLimit(f"{total} admissible words of length {m} exceed the cap {cap}")
    arr = A.array.astype(bool)
    words = np.arange(1, A.q + 1, dtype=np.int64)[:, None]
    for _ in range(m - 1):
        # np.nonzero walks row-major, so each word's children come out in
        # increasing symbol order and lexicographic order is preserved.
        parent, nxt = np.nonzero(arr[words[:, -1] - 1])
        words = np.hstack([words[parent], (nxt + 1)[:, None]])
    words.setflags(write=False)
    return words


def word_array(A: TransitionMatrix, m: int, cap: int = DEFAULT_MAX_WORDS) -> np.ndarray:
    """Admissible words of length ``m`` as a read-only ``(N, m)`` int array."""
    return _word_array(A, m, cap)


def admissible_words(A: TransitionMatrix, m: int, cap: int = DEFAULT_MAX_WORDS) -> list:
    """All admissible words of length ``m`` in lexicographic order.

    Raises
    ------
    SizeLimit
        If more than ``cap`` words would be produced.
    """
    return [tuple(int(s) for s in row) for row in word_array(A, m, cap)]


def extend_word(A: TransitionMatrix, w: Sequence[int]) -> list:
    """Children of the cylinder ``[w]`` under one step of ``sigma``-preimage.

    Returns every admissible ``(a, w_0, ..., w_{L-1})``, i.e. symbols are
    prepended, in increasing order of ``a``.
    """
    w = tuple(int(s) for s in w)
    if not A.is_admissible(w):
        raise InadmissibleWord(f"word {list(w)} is not admissible")
    return [(a,) + w for a in range(1, A.q + 1) if A.allows(a, w[0])]


def _fits_codes(q: int, m: int) -> bool:
    return q**m < 2**62


def _codes(words: np.ndarray, q: int) -> np.ndarray:
    codes = np.zeros(words.shape[0], dtype=np.int64)
    for col in range(words.shape[1]):
        codes = codes * q + (words[:, col] - 1)
    return codes


@lru_cache(maxsize=256)
def _sorted_codes(A: TransitionMatrix, m: int, cap: int):
    words = _word_array(A, m, cap)
    if _fits_codes(A.q, m):
        return _codes(words, A.q)
    return {tuple(int(s) for s in row): i for i, row in enumerate(words)}


def index_of(A: TransitionMatrix, words: np.ndarray, cap: int = DEFAULT_MAX_WORDS) -> np.ndarray:
    """Positions of the rows of ``words`` in the canonical order.

    Raises
    ------
    InadmissibleWord
        If some row is not an admissible word.
    """
    words = np.asarray(words, dtype=np.int64)
    if words.ndim == 1:
        words = words[None, :]
    m = words.shape[1]
    if words.size and (words.min() < 1 or words.max() > A.q):
        raise InadmissibleWord("symbol outside 1..q")
    table = _sorted_codes(A, m, cap)
    if isinstance(table, dict):
        try:
            return np.array([table[tuple(int(s) for s in row)] for row in words], dtype=np.int64)
        except KeyError as exc:
            raise InadmissibleWord(f"word {list(exc.args[0])} is not admissible") from None
    codes = _codes(words, A.q)
    idx = np.searchsorted(table, codes)
    idx_clipped = np.minimum(idx, len(table) - 1)
    bad = table[idx_clipped] != codes
    if bad.any():
        row = words[np.argmax(bad)]
        raise InadmissibleWord(f"word {row.tolist()} is not admissible")
    return idx_clipped


@lru_cache(maxsize=1024)
def _window_index(A: TransitionMatrix, length: int, start: int, width: int, cap: int) -> np.ndarray:
    words = _word_array(A, length, cap)
    idx = index_of(A, words[:, start:start + width], cap)
    idx.setflags(write=False)
    return idx


def window_index(
    A: TransitionMatrix, length: int, start: int, width: int, cap: int = DEFAULT_MAX_WORDS
) -> np.ndarray:
    """For each admissible word ``w`` of ``length``, the index of ``w[start:start+width]``."""
    if start < 0 or width < 1 or start + width > length:
        raise ValueError("window does not fit inside the word")
    return _window_index(A, length, start, width, cap)


def random_aperiodic(q: int, rng: np.random.Generator, density: float = 0.6, max_tries: int = 10_000) -> TransitionMatrix:
    """Rejection-sample an aperiodic 0/1 matrix with i.i.d. Bernoulli(density) entries."""
    for _ in range(max_tries):
        candidate = (rng.random((q, q)) < density).astype(np.int64)
        try:
            return check_aperiodic(candidate)
        except InvalidTransitionMatrix:
            continue
    raise RuntimeError(f"no aperiodic {q}x{q} matrix found in {max_tries} draws")
