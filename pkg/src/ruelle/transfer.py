"""The Ruelle transfer operator on locally constant functions.

``(L_f g)(x) = sum over symbols a with A(a, x_0) = 1 of exp(f(a x)) g(a x)``.

Memory-``l`` functions form an ``L_f``-invariant space as soon as
``l >= f.memory - 1``, so the operator is represented there exactly by a
nonnegative matrix (the *lift*) indexed by admissible words of length ``l``.
The Perron eigendata of that matrix is the eigendata of ``L_f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse

from .exceptions import EigenFailure, LevelTooSmall, NoConvergence, SizeLimit
from .functions import LocallyConstantFn, _check_compatible
from .symbolic import DEFAULT_MAX_WORDS, word_array, window_index

DENSE_LIMIT = 2000
MAX_ITER = 10**6


def canonical_level(f: LocallyConstantFn) -> int:
    """Smallest level on which ``L_f`` acts invariantly."""
    return max(1, f.memory - 1)


def apply_transfer(f: LocallyConstantFn, g: LocallyConstantFn) -> LocallyConstantFn:
    """Exact ``L_f g``.

    The result has memory ``max(f.memory, g.memory) - 1``, floored at 1.
    """
    _check_compatible(f, g)
    shift = f.shift
    out_memory = max(max(f.memory, g.memory) - 1, 1)
    n = out_memory + 1
    weights = np.exp(f.values_at(n)) * g.values_at(n)
    target = window_index(shift, n, 1, out_memory)
    size = word_array(shift, out_memory).shape[0]
    values = np.bincount(target, weights=weights, minlength=size)
    return LocallyConstantFn(shift, out_memory, values, f.theta)


def iterate_normalized(f: LocallyConstantFn, g: LocallyConstantFn, n: int, pd) -> LocallyConstantFn:
    """``lambda**-n L_f**n g``, dividing by ``lambda`` at every step.

    ``pd`` is a :class:`PerronData` for ``f`` or the eigenvalue itself.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    lam = pd.lam if isinstance(pd, PerronData) else float(pd)
    for _ in range(n):
        g = apply_transfer(f, g)
        g = LocallyConstantFn(g.shift, g.memory, g.values / lam, g.theta)
    return g


@dataclass(frozen=True, eq=False)
class TransferLift:
    """Matrix of ``L_f`` on memory-``level`` functions.

    ``entries[u, w]`` is the weight with which the value at source word ``w``
    contributes to target word ``u``.  Dense for dimensions up to
    ``DENSE_LIMIT``, CSR sparse above.
    """

    level: int
    words: np.ndarray
    entries: object
    potential: LocallyConstantFn

    @property
    def dimension(self) -> int:
        return self.words.shape[0]

    @property
    def is_dense(self) -> bool:
        return isinstance(self.entries, np.ndarray)

    def toarray(self) -> np.ndarray:
        return self.entries if self.is_dense else self.entries.toarray()

    def __matmul__(self, v):
        return self.entries @ v


def lift_matrix(
    f: LocallyConstantFn, level: Optional[int] = None, cap: int = DEFAULT_MAX_WORDS
) -> TransferLift:
    """Finite matrix representing ``L_f`` on memory-``level`` functions.

    Raises
    ------
    LevelTooSmall
        ``level < max(1, f.memory - 1)``.
    SizeLimit
        Too many admissible words.
    """
    min_level = canonical_level(f)
    level = min_level if level is None else int(level)
    if level < min_level:
        raise LevelTooSmall(f"level {level} is below the invariant level {min_level}")
    shift = f.shift
    words = word_array(shift, level, cap)
    dim = words.shape[0]
    word_array(shift, level + 1, cap)
    rows = window_index(shift, level + 1, 1, level)
    cols = window_index(shift, level + 1, 0, level)
    vals = np.exp(f.values_at(level + 1))
    if dim <= DENSE_LIMIT:
        entries = np.zeros((dim, dim))
        entries[rows, cols] = vals
    else:
        entries = scipy.sparse.csr_array((vals, (rows, cols)), shape=(dim, dim))
    return TransferLift(level, words, entries, f)


def collatz_wielandt(
    matrix, tol: float = 1e-12, max_iter: int = MAX_ITER
) -> Tuple[float, np.ndarray, Tuple[float, float], int]:
    """Power iteration from the all-ones vector with a Collatz-Wielandt bracket.

    For a primitive nonnegative matrix and a positive vector ``v`` the ratios
    ``(Mv)_i / v_i`` straddle the Perron root.  Iteration stops once the
    bracket is narrower than ``tol`` times its upper end.

    Returns
    -------
    lam : float
        Midpoint of the final bracket.
    v : ndarray
        Positive Perron vector, scaled to max 1.
    bracket : (float, float)
    iterations : int
    """
    n = matrix.shape[0]
    v = np.ones(n)
    for it in range(1, max_iter + 1):
        w = matrix @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        v = w / w.max()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi), v, (lo, hi), it
    raise NoConvergence(f"power iteration did not reach relative width {tol} in {max_iter} steps")


@dataclass(frozen=True, eq=False)
class PerronData:
    """Leading eigendata of ``L_f`` computed on a lift.

    Attributes
    ----------
    lam : float
        Leading eigenvalue; ``log(lam)`` is the pressure of ``f``.
    h : LocallyConstantFn
        Positive eigenfunction normalised so that ``integral of h dnu = 1``.
    nu : ndarray
        Masses of the cylinders of length ``level`` under the eigenmeasure.
    second_modulus : float
        Largest modulus among the remaining eigenvalues of the lift.
    residual : float
        ``max |L h - lam h| / max h`` at termination.
    """

    lam: float
    h: LocallyConstantFn
    nu: np.ndarray
    second_modulus: float
    residual: float
    level: int
    bracket: Tuple[float, float]
    iterations: int
    lift: TransferLift

    @property
    def pressure(self) -> float:
        return math.log(self.lam)

    @property
    def potential(self) -> LocallyConstantFn:
        return self.lift.potential

    @property
    def gap_ratio(self) -> float:
        return self.second_modulus / self.lam


def _sorted_spectrum(eigs: np.ndarray) -> np.ndarray:
    eigs = np.asarray(eigs, dtype=complex)
    order = np.lexsort((-eigs.imag, -eigs.real, -np.abs(eigs)))
    return eigs[order]


def spectrum_of_lift(lift: TransferLift) -> np.ndarray:
    """All eigenvalues of the lift, by descending modulus.

    Raises
    ------
    SizeLimit
        The lift is too large for a dense decomposition.
    EigenFailure
        LAPACK did not converge.
    """
    if lift.dimension > DENSE_LIMIT:
        raise SizeLimit(f"dense spectrum limited to dimension {DENSE_LIMIT}, got {lift.dimension}")
    try:
        eigs = np.linalg.eigvals(lift.toarray())
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return _sorted_spectrum(eigs)


def _second_modulus_dense(lift: TransferLift, lam: float) -> float:
    eigs = spectrum_of_lift(lift)
    lead = int(np.argmin(np.abs(eigs - lam)))
    rest = np.delete(eigs, lead)
    return float(np.max(np.abs(rest))) if rest.size else 0.0


def _second_modulus_deflated(lift: TransferLift, lam: float, h: np.ndarray, nu: np.ndarray, steps: int = 2000) -> float:
    # Power iteration on M - lam h nu^T; growth rate of the norm estimates |z_2|.
    rng = np.random.default_rng(0)
    v = rng.standard_normal(lift.dimension)
    v -= h * (nu @ v)
    v /= np.linalg.norm(v)
    logs = []
    for _ in range(steps):
        w = lift @ v
        w -= lam * h * (nu @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        logs.append(math.log(norm))
        v = w / norm
    tail = logs[steps // 2:]
    return math.exp(sum(tail) / len(tail))


def perron_data(
    f: LocallyConstantFn,
    level: Optional[int] = None,
    tol: float = 1e-12,
    max_iter: int = MAX_ITER,
    cap: int = DEFAULT_MAX_WORDS,
) -> PerronData:
    """Leading eigenvalue, eigenfunction and eigenmeasure of ``L_f``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lift = lift_matrix(f, level, cap)
    lam, right, bracket, iters = collatz_wielandt(lift.entries, tol, max_iter)
    _, left, _, iters_left = collatz_wielandt(lift.entries.T, tol, max_iter)
    # Two-sided Rayleigh quotient is second-order accurate; keep it inside the bracket.
    rq = float(left @ (lift @ right)) / float(left @ right)
    lam = min(max(rq, bracket[0]), bracket[1])
    nu = left / left.sum()
    h_values = right / float(nu @ right)
    residual = float(np.max(np.abs(lift @ h_values - lam * h_values)) / np.max(h_values))
    if lift.dimension <= DENSE_LIMIT:
        second = _second_modulus_dense(lift, lam)
    else:
        second = _second_modulus_deflated(lift, lam, h_values, nu)
    h = LocallyConstantFn(f.shift, lift.level, h_values, f.theta)
    nu.setflags(write=False)
    return PerronData(lam, h, nu, second, residual, lift.level, bracket, max(iters, iters_left), lift)


def pressure(f: LocallyConstantFn, tol: float = 1e-12) -> float:
    """Topological pressure ``log lambda_f``."""
    return perron_data(f, tol=tol).pressure


def lambda_bounds(f: LocallyConstantFn, q: Optional[int] = None) -> Tuple[float, float]:
    """A priori bracket ``exp(-|f|_inf) <= lambda <= q exp(|f|_inf)``."""
    q = f.shift.q if q is None else q
    s = f.sup_norm
    return math.exp(-s), q * math.exp(s)
