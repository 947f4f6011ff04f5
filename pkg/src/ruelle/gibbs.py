"""Eigenmeasure ``nu`` and the invariant Gibbs measure ``nu_hat = h nu``.

Masses of cylinders up to the lift level are stored.  Longer cylinders follow
from ``L_f^* nu = lambda nu``: for a word ``w`` of length ``level + k``

    nu([w]) = lambda**-k * exp(f_k(w)) * nu([w_k ... w_{L-1}])

where ``f_k`` is the Birkhoff sum of ``k`` terms.  The product is formed in
log space so deep cylinders do not underflow.

Sampling uses :func:`numpy.random.default_rng` (PCG64) seeded with the given
integer, or with ``[seed, stream]`` for independent parallel streams.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import InadmissibleWord, OrbitTooShort
from .functions import LocallyConstantFn, _check_compatible, birkhoff_sum, birkhoff_sums
from .symbolic import index_of, window_index, word_array
from .transfer import PerronData, iterate_normalized

_WHICH = ("nu", "nu_hat")


@dataclass(frozen=True, eq=False)
class GibbsMeasure:
    """Cylinder masses of ``nu`` and ``nu_hat`` at the lift level.

    Attributes
    ----------
    potential : LocallyConstantFn
    level : int
    nu_masses, nu_hat_masses : ndarray
        Indexed by admissible words of length ``level``.
    h : LocallyConstantFn
    lam : float
    """

    potential: LocallyConstantFn
    level: int
    nu_masses: np.ndarray
    nu_hat_masses: np.ndarray
    h: LocallyConstantFn
    lam: float

    @classmethod
    def from_perron(cls, pd: PerronData) -> "GibbsMeasure":
        nu = np.array(pd.nu, dtype=float)
        nu_hat = pd.h.values * nu
        return cls(pd.potential, pd.level, nu, nu_hat, pd.h, pd.lam)

    @property
    def shift(self):
        return self.potential.shift

    @property
    def theta(self) -> float:
        return self.potential.theta

    def masses(self, length: int, which: str = "nu_hat") -> np.ndarray:
        return masses(self, length, which)

    def integrate(self, g: LocallyConstantFn, which: str = "nu_hat") -> float:
        return integrate(self, g, which)


def gibbs_measure(pd: PerronData) -> GibbsMeasure:
    return GibbsMeasure.from_perron(pd)


def _check_which(which: str):
    if which not in _WHICH:
        raise ValueError(f"which must be one of {_WHICH}, got {which!r}")


def masses(gm: GibbsMeasure, length: int, which: str = "nu_hat") -> np.ndarray:
    """Masses of every admissible cylinder of the given word length."""
    _check_which(which)
    if length < 1:
        raise ValueError("length must be >= 1")
    shift, level = gm.shift, gm.level
    stored = gm.nu_hat_masses if which == "nu_hat" else gm.nu_masses
    if length <= level:
        group = window_index(shift, level, 0, length)
        size = word_array(shift, length).shape[0]
        return np.bincount(group, weights=stored, minlength=size)
    k = length - level
    log_mass = (
        -k * math.log(gm.lam)
        + birkhoff_sums(gm.potential, length, k)
        + np.log(gm.nu_masses[window_index(shift, length, k, level)])
    )
    if which == "nu_hat":
        log_mass += np.log(gm.h.values[window_index(shift, length, 0, level)])
    return np.exp(log_mass)


def cylinder_mass(gm: GibbsMeasure, w: Sequence[int], which: str = "nu_hat") -> float:
    """Mass of the cylinder ``[w]`` under ``nu`` or ``nu_hat``."""
    _check_which(which)
    w = tuple(int(s) for s in w)
    if not gm.shift.is_admissible(w):
        raise InadmissibleWord(f"word {list(w)} is not admissible")
    level = gm.level
    if len(w) <= level:
        idx = index_of(gm.shift, np.array([w]))[0]
        return float(masses(gm, len(w), which)[idx])
    k = len(w) - level
    tail = index_of(gm.shift, np.array([w[k:]]))[0]
    log_mass = -k * math.log(gm.lam) + birkhoff_sum(gm.potential, w, k) + math.log(gm.nu_masses[tail])
    if which == "nu_hat":
        log_mass += math.log(gm.h.values[index_of(gm.shift, np.array([w[:level]]))[0]])
    return math.exp(log_mass)


def integrate(gm: GibbsMeasure, g: LocallyConstantFn, which: str = "nu_hat") -> float:
    """Exact integral of a locally constant function."""
    _check_compatible(gm.potential, g)
    length = max(g.memory, gm.level)
    return float(np.dot(g.values_at(length), masses(gm, length, which)))


def check_shift_invariance(gm: GibbsMeasure, depth: int = 4) -> float:
    """Worst ``|nu_hat(sigma^-1 [w]) - nu_hat([w])|`` over words of length ``<= depth``."""
    worst = 0.0
    finer = masses(gm, 1, "nu_hat")
    for length in range(1, depth + 1):
        coarse, finer = finer, masses(gm, length + 1, "nu_hat")
        preimage = np.bincount(
            window_index(gm.shift, length + 1, 1, length), weights=finer, minlength=coarse.size
        )
        worst = max(worst, float(np.max(np.abs(preimage - coarse))))
    return worst


def correlation(gm: GibbsMeasure, u: LocallyConstantFn, v: LocallyConstantFn, n: int) -> float:
    """``integral u (v o sigma^n) dnu_hat - integral u dnu_hat * integral v dnu_hat``.

    Evaluated as ``integral v T^n(u h) dnu`` with ``T = L_f / lambda``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    _check_compatible(gm.potential, u, v)
    pushed = iterate_normalized(gm.potential, u * gm.h, n, gm.lam)
    joint = integrate(gm, v * pushed, "nu")
    return joint - integrate(gm, u, "nu_hat") * integrate(gm, v, "nu_hat")


def transition_kernel(gm: GibbsMeasure) -> np.ndarray:
    """Probabilities of prepending a symbol to a length-``level`` state.

    ``P[u, w]`` is the chance that state ``u`` is followed (to the left) by
    state ``w = (a, u)[:level]``, equal to
    ``exp(f(a u)) h(w) / (lambda h(u))``.  Rows sum to one because
    ``L_f h = lambda h``.
    """
    state, new_state, probs = _kernel_entries(gm)
    dim = gm.nu_masses.size
    P = np.zeros((dim, dim))
    np.add.at(P, (state, new_state), probs)
    return P


def _kernel_entries(gm: GibbsMeasure):
    shift, level = gm.shift, gm.level
    state = window_index(shift, level + 1, 1, level)
    new_state = window_index(shift, level + 1, 0, level)
    weights = np.exp(gm.potential.values_at(level + 1))
    probs = weights * gm.h.values[new_state] / (gm.lam * gm.h.values[state])
    return state, new_state, probs


def sample_orbit(gm: GibbsMeasure, length: int, seed: int, stream: Optional[int] = None) -> np.ndarray:
    """Draw a ``nu_hat``-distributed word ``xi_0 ... xi_{length-1}``.

    The last ``level`` symbols come from the stationary ``nu_hat`` marginal;
    earlier symbols are prepended one at a time with
    :func:`transition_kernel`.  The resulting word has exactly the
    ``nu_hat`` law on cylinders of its length, so no burn-in is needed.

    Parameters
    ----------
    seed : int
        Seed for :func:`numpy.random.default_rng`.
    stream : int, optional
        Task index; ``default_rng([seed, stream])`` gives an independent stream.
    """
    level = gm.level
    if length < level:
        raise ValueError(f"length must be at least the level {level}")
    rng = np.random.default_rng(seed if stream is None else [seed, stream])
    words = word_array(gm.shift, level)
    start = int(rng.choice(words.shape[0], p=gm.nu_hat_masses / gm.nu_hat_masses.sum()))

    state, new_state, probs = _kernel_entries(gm)
    symbols = word_array(gm.shift, level + 1)[:, 0]
    cum, targets, letters = [], [], []
    for s in range(words.shape[0]):
        rows = np.flatnonzero(state == s)
        cum.append(np.cumsum(probs[rows]).tolist())
        targets.append(new_state[rows].tolist())
        letters.append(symbols[rows].tolist())

    uniforms = rng.random(length - level).tolist()
    prepended = []
    current = start
    for x in uniforms:
        c = cum[current]
        j = min(bisect.bisect_right(c, x * c[-1]), len(c) - 1)
        prepended.append(letters[current][j])
        current = targets[current][j]
    prepended.reverse()
    return np.array(prepended + words[start].tolist(), dtype=np.int64)


def empirical_average(orbit: Sequence[int], g: LocallyConstantFn) -> float:
    """Mean of ``g`` over every length-``g.memory`` window of the orbit."""
    orbit = np.asarray(orbit, dtype=np.int64)
    if orbit.size <= g.memory:
        raise OrbitTooShort(f"orbit of length {orbit.size} is too short for memory {g.memory}")
    windows = np.lib.stride_tricks.sliding_window_view(orbit, g.memory)
    return float(np.mean(g.values[index_of(g.shift, windows)]))
