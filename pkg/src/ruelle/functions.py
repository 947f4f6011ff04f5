"""Locally constant real functions on a subshift and their exact norms.

A function of memory ``m`` depends on coordinates ``0 .. m-1`` only and is
stored as one value per admissible word of length ``m``.  All seminorms are
exact finite maxima over those tables.

General Hoelder functions must be truncated by the caller.  Truncating at
memory ``d`` moves the function by at most ``|f|_theta * theta**(d-1)`` in
sup norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .exceptions import AlphabetMismatch, InadmissibleWord, WordTooShort
from .symbolic import (
    DEFAULT_MAX_WORDS,
    TransitionMatrix,
    Word,
    admissible_words,
    index_of,
    window_index,
    word_array,
)


@dataclass(frozen=True)
class NormReport:
    holder_seminorm: float
    sup_norm: float
    total: float


@dataclass(frozen=True, eq=False)
class LocallyConstantFn:
    """A real function of the first ``memory`` coordinates.

    Parameters
    ----------
    shift : TransitionMatrix
        The subshift the function lives on.
    memory : int
        Number of leading coordinates the function reads (``>= 1``).
    values : ndarray
        One finite value per admissible word of length ``memory``, in the
        canonical lexicographic order.
    theta : float
        The Hoelder exponent base in ``(0, 1)`` used by the norms.
    """

    shift: TransitionMatrix
    memory: int
    values: np.ndarray
    theta: float

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta!r}")
        values = np.array(self.values, dtype=float)
        n = word_array(self.shift, self.memory).shape[0]
        if values.shape != (n,):
            raise ValueError(f"expected {n} values for memory {self.memory}, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, shift: TransitionMatrix, c: float, theta: float) -> "LocallyConstantFn":
        return cls(shift, 1, np.full(shift.q, float(c)), theta)

    @classmethod
    def from_table(cls, shift: TransitionMatrix, table: Mapping, theta: float) -> "LocallyConstantFn":
        """Build from a mapping ``word -> value`` covering every admissible word once."""
        if not table:
            raise ValueError("empty table")
        keys = [tuple(int(s) for s in k) for k in table]
        memory = len(keys[0])
        if any(len(k) != memory for k in keys):
            raise ValueError("all words in a table must have the same length")
        words = admissible_words(shift, memory)
        lookup = dict(zip(keys, table.values()))
        for k in keys:
            if not shift.is_admissible(k):
                raise InadmissibleWord(f"word {list(k)} is not admissible")
        missing = [w for w in words if w not in lookup]
        if missing:
            raise ValueError(f"table is missing word {list(missing[0])}")
        return cls(shift, memory, np.array([float(lookup[w]) for w in words]), theta)

    @classmethod
    def from_callable(
        cls, shift: TransitionMatrix, memory: int, func: Callable[[Word], float], theta: float
    ) -> "LocallyConstantFn":
        return cls(shift, memory, np.array([float(func(w)) for w in admissible_words(shift, memory)]), theta)

    @classmethod
    def indicator(cls, shift: TransitionMatrix, word: Sequence[int], theta: float) -> "LocallyConstantFn":
        """Indicator of the cylinder ``[word]``."""
        word = tuple(int(s) for s in word)
        if not shift.is_admissible(word):
            raise InadmissibleWord(f"word {list(word)} is not admissible")
        return cls.from_callable(shift, len(word), lambda w: float(w == word), theta)

    # -- views ---------------------------------------------------------------

    @property
    def words(self) -> list:
        return admissible_words(self.shift, self.memory)

    def table(self) -> dict:
        return dict(zip(self.words, self.values.tolist()))

    def values_at(self, memory: int) -> np.ndarray:
        """Values listed over admissible words of a longer length ``memory``."""
        if memory < self.memory:
            raise ValueError(f"cannot view a memory-{self.memory} function at memory {memory}")
        if memory == self.memory:
            return self.values
        return self.values[window_index(self.shift, memory, 0, self.memory)]

    def refine(self, memory: int) -> "LocallyConstantFn":
        """The same function stored with a longer memory."""
        return LocallyConstantFn(self.shift, memory, self.values_at(memory), self.theta)

    def __call__(self, w: Sequence[int]) -> float:
        return evaluate(self, w)

    # -- norms ---------------------------------------------------------------

    def norms(self) -> NormReport:
        return holder_norms(self)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def holder_seminorm(self) -> float:
        return holder_norms(self).holder_seminorm

    @property
    def norm(self) -> float:
        return holder_norms(self).total

    # -- pointwise algebra -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, LocallyConstantFn):
            return add(self, other)
        return affine(self, 1.0, float(other))

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, LocallyConstantFn):
            return add(self, scale(other, -1.0))
        return affine(self, 1.0, -float(other))

    def __rsub__(self, other):
        return affine(self, -1.0, float(other))

    def __mul__(self, other):
        if isinstance(other, LocallyConstantFn):
            return multiply(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return scale(self, 1.0 / float(c))

    def __repr__(self):
        return f"LocallyConstantFn(q={self.shift.q}, memory={self.memory}, theta={self.theta})"


def _check_compatible(*fns: LocallyConstantFn):
    first = fns[0]
    for g in fns[1:]:
        if g.shift != first.shift:
            raise AlphabetMismatch("operands live on different subshifts")
        if g.theta != first.theta:
            raise AlphabetMismatch(f"operands carry different theta ({first.theta} vs {g.theta})")


def evaluate(g: LocallyConstantFn, w: Sequence[int]) -> float:
    """Value of ``g`` on any point whose prefix is ``w``."""
    w = tuple(int(s) for s in w)
    if not g.shift.is_admissible(w):
        raise InadmissibleWord(f"word {list(w)} is not admissible")
    if len(w) < g.memory:
        raise WordTooShort(f"need at least {g.memory} symbols, got {len(w)}")
    idx = index_of(g.shift, np.array([w[: g.memory]]))[0]
    return float(g.values[idx])


def var_k(g: LocallyConstantFn, k: int) -> float:
    """Largest oscillation of ``g`` over points agreeing on coordinates ``0..k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k >= g.memory - 1:
        return 0.0
    group = window_index(g.shift, g.memory, 0, k + 1)
    n_groups = int(group.max()) + 1
    hi = np.full(n_groups, -np.inf)
    lo = np.full(n_groups, np.inf)
    np.maximum.at(hi, group, g.values)
    np.minimum.at(lo, group, g.values)
    return float(np.max(hi - lo))


def holder_norms(g: LocallyConstantFn) -> NormReport:
    """Exact ``|g|_theta``, ``|g|_inf`` and their sum ``||g||_theta``."""
    semi = 0.0
    for k in range(g.memory - 1):
        semi = max(semi, var_k(g, k) / g.theta**k)
    sup = float(np.max(np.abs(g.values)))
    return NormReport(semi, sup, semi + sup)


def birkhoff_sum(f: LocallyConstantFn, w: Sequence[int], n: int) -> float:
    """``f(w) + f(sigma w) + ... + f(sigma^{n-1} w)``; zero for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0.0
    w = tuple(int(s) for s in w)
    need = n + f.memory - 1
    if len(w) < need:
        raise WordTooShort(f"a Birkhoff sum of {n} terms needs {need} symbols, got {len(w)}")
    if not f.shift.is_admissible(w):
        raise InadmissibleWord(f"word {list(w)} is not admissible")
    windows = np.array([w[j:j + f.memory] for j in range(n)])
    return float(np.sum(f.values[index_of(f.shift, windows)]))


def birkhoff_sums(f: LocallyConstantFn, length: int, n: int) -> np.ndarray:
    """Birkhoff sums of ``n`` terms for every admissible word of ``length``."""
    if n == 0:
        return np.zeros(word_array(f.shift, length).shape[0])
    if length < n + f.memory - 1:
        raise WordTooShort(f"a Birkhoff sum of {n} terms needs {n + f.memory - 1} symbols")
    total = np.zeros(word_array(f.shift, length).shape[0])
    for j in range(n):
        total += f.values[window_index(f.shift, length, j, f.memory)]
    return total


# -- pointwise algebra ----------------------------------------------------------


def add(*fns: LocallyConstantFn) -> LocallyConstantFn:
    _check_compatible(*fns)
    memory = max(g.memory for g in fns)
    values = sum(g.values_at(memory) for g in fns)
    return LocallyConstantFn(fns[0].shift, memory, values, fns[0].theta)


def multiply(*fns: LocallyConstantFn) -> LocallyConstantFn:
    _check_compatible(*fns)
    memory = max(g.memory for g in fns)
    values = np.ones(word_array(fns[0].shift, memory).shape[0])
    for g in fns:
        values = values * g.values_at(memory)
    return LocallyConstantFn(fns[0].shift, memory, values, fns[0].theta)


def scale(g: LocallyConstantFn, c: float) -> LocallyConstantFn:
    return LocallyConstantFn(g.shift, g.memory, c * g.values, g.theta)


def exp(g: LocallyConstantFn) -> LocallyConstantFn:
    return LocallyConstantFn(g.shift, g.memory, np.exp(g.values), g.theta)


def affine(g: LocallyConstantFn, a: float, c: float) -> LocallyConstantFn:
    """``a * g + c``."""
    return LocallyConstantFn(g.shift, g.memory, a * g.values + c, g.theta)


_OPS = {"add": add, "scale": scale, "exp": exp, "affine": affine, "multiply": multiply}


def combine(op: str, *inputs, **kwargs) -> LocallyConstantFn:
    """Dispatch a pointwise operation by name.

    ``combine("add", g, h)``, ``combine("scale", g, 2.5)``,
    ``combine("exp", g)``, ``combine("affine", g, a, c)``.
    """
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}; expected one of {sorted(_OPS)}") from None
    return fn(*inputs, **kwargs)


def random_function(
    shift: TransitionMatrix,
    memory: int,
    theta: float,
    rng: np.random.Generator,
    low: float = -2.0,
    high: float = 2.0,
) -> LocallyConstantFn:
    n = word_array(shift, memory, DEFAULT_MAX_WORDS).shape[0]
    return LocallyConstantFn(shift, memory, rng.uniform(low, high, size=n), theta)
