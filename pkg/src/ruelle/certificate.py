"""Explicit constants of the Ruelle-Perron-Frobenius theorem and their checks.

Every constant is an elementary formula in ``theta``, ``q``, the primitivity
exponent ``M``, ``|f|_inf`` and ``b = max(1, |f|_theta)``.  The constants
get astronomically large (``K`` easily exceeds ``1e30``).  That means
``beta = 1 - (1-theta)/(4K^3)`` and ``rho = 1 - (1-theta)/(8K^3)`` both round
to ``1.0`` in double precision.  For that reason the gaps ``1 - beta`` and
``1 - rho`` are stored alongside, powers ``beta**n`` are formed as
``exp(n * log1p(-gap))``, and the large constants carry their logarithms.

Every check produces a :class:`CheckRow` of the form ``actual <= bound``.
Lower bounds are rewritten as upper bounds, e.g. ``1/K <= min h`` becomes
``1/min h <= K``.  A row passes when ``bound - actual >= -1e-9 * |bound|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .exceptions import BoundViolated, ConeViolation, NotNormalized
from .functions import LocallyConstantFn, random_function
from .gibbs import GibbsMeasure, check_shift_invariance, integrate
from .symbolic import TransitionMatrix, window_index
from .transfer import PerronData, iterate_normalized, lambda_bounds

RELATIVE_SLACK = 1e-9
NORMALIZATION_TOL = 1e-10
MAX_STEPS = 10_000


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


# -- constants -------------------------------------------------------------------

FORMULAS = {
    "b": "max(1, |f|_theta)",
    "m0": "theta**m0 < 1/b <= theta**(m0-1)",
    "M": "least M with A**M > 0",
    "r0": "(log q + 2|f|_inf) / |log theta|",
    "B": "exp(2 theta/(1-theta)) q**(M+1) exp(2(M+1)|f|_inf) / (1-theta)",
    "K": "B * b**r0",
    "mu": "(1-theta) / (4 K**2 exp(2 theta/(1-theta)))",
    "A": "4 K**2",
    "beta": "1 - (1-theta)/(4 K**3)",
    "rho": "1 - (1-theta)/(8 K**3)",
    "A1": "8 K**2 b",
    "A2": "100 K**5 b**3 / (1-theta)",
    "Df": "100 K**5 b**3 / (1-theta)",
    "Kprime": "B_m0 lambda**(m0+M) exp((m0+M)|f|_inf)",
    "betaprime": "(1-mu)**(1/(m0+M))",
}


@dataclass(frozen=True)
class ConeSpec:
    """Parameters of the invariant cone.

    ``B(m) = exp(2 theta**(m - m0 + 1) / (1 - theta))`` for ``m >= m0``; a
    member ``g`` must satisfy ``g(y) <= B(m) g(x)`` whenever ``x`` and ``y``
    agree on coordinates ``0..m``.
    """

    m0: int
    theta: float

    def B(self, m: int) -> float:
        if m < self.m0:
            raise ValueError(f"cone ratios are only defined for m >= m0 = {self.m0}")
        return math.exp(2.0 * self.theta ** (m - self.m0 + 1) / (1.0 - self.theta))


@dataclass(frozen=True)
class BoundConstants:
    theta: float
    q: int
    M: int
    sup_f: float
    holder_f: float
    b: float
    m0: int
    r0: float
    log_B: float
    B: float
    log_K: float
    K: float
    mu: float
    A: float
    beta: float
    beta_gap: float
    rho: float
    rho_gap: float
    A1: float
    log_A2: float
    A2: float
    Df: float
    Kprime: Optional[float] = None
    betaprime: float = 1.0
    betaprime_gap: float = 0.0

    @property
    def cone(self) -> ConeSpec:
        return ConeSpec(self.m0, self.theta)

    @property
    def B_m0(self) -> float:
        return math.exp(2.0 * self.theta / (1.0 - self.theta))

    def log_beta_power(self, n: int) -> float:
        return n * math.log1p(-self.beta_gap)

    def log_rho_power(self, n: int) -> float:
        return n * math.log1p(-self.rho_gap)

    def as_dict(self) -> dict:
        return asdict(self)


def find_m0(b: float, theta: float) -> int:
    """The integer ``m0 >= 1`` with ``theta**m0 < 1/b <= theta**(m0-1)``."""
    if b < 1:
        raise ValueError("b must be >= 1")
    m0 = max(1, int(math.floor(math.log(b) / -math.log(theta))) + 1)
    while not theta**m0 < 1.0 / b:
        m0 += 1
    while m0 > 1 and not 1.0 / b <= theta ** (m0 - 1):
        m0 -= 1
    return m0


def bound_constants(
    theta: float, q: int, M: int, sup_f: float, holder_f: float, lam: Optional[float] = None
) -> BoundConstants:
    """All explicit constants from the five scalars that determine them."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    b = max(1.0, holder_f)
    m0 = find_m0(b, theta)
    log_theta = abs(math.log(theta))
    r0 = (math.log(q) + 2.0 * sup_f) / log_theta
    log_B = 2.0 * theta / (1.0 - theta) + (M + 1) * math.log(q) + 2.0 * (M + 1) * sup_f - math.log1p(-theta)
    log_K = log_B + r0 * math.log(b)
    K = _exp(log_K)
    log_mu = math.log1p(-theta) - math.log(4.0) - 2.0 * log_K - 2.0 * theta / (1.0 - theta)
    mu = math.exp(log_mu)
    beta_gap = math.exp(math.log1p(-theta) - math.log(4.0) - 3.0 * log_K)
    rho_gap = beta_gap / 2.0
    log_A2 = math.log(100.0) + 5.0 * log_K + 3.0 * math.log(b) - math.log1p(-theta)
    A2 = _exp(log_A2)
    steps = m0 + M
    Kprime = None
    if lam is not None:
        Kprime = _exp(2.0 * theta / (1.0 - theta) + steps * (math.log(lam) + sup_f))
    betaprime_gap = -math.expm1(math.log1p(-mu) / steps)
    return BoundConstants(
        theta=theta,
        q=q,
        M=M,
        sup_f=sup_f,
        holder_f=holder_f,
        b=b,
        m0=m0,
        r0=r0,
        log_B=log_B,
        B=_exp(log_B),
        log_K=log_K,
        K=K,
        mu=mu,
        A=_exp(math.log(4.0) + 2.0 * log_K),
        beta=1.0 - beta_gap,
        beta_gap=beta_gap,
        rho=1.0 - rho_gap,
        rho_gap=rho_gap,
        A1=_exp(math.log(8.0) + 2.0 * log_K + math.log(b)),
        log_A2=log_A2,
        A2=A2,
        Df=A2,
        Kprime=Kprime,
        betaprime=1.0 - betaprime_gap,
        betaprime_gap=betaprime_gap,
    )


def compute_constants(
    f: LocallyConstantFn, A: Optional[TransitionMatrix] = None, lam: Optional[float] = None
) -> BoundConstants:
    """Constants for the potential ``f``; ``lam`` is only needed for ``Kprime``."""
    A = f.shift if A is None else A
    norms = f.norms()
    return bound_constants(f.theta, A.q, A.M, norms.sup_norm, norms.holder_seminorm, lam)


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRow:
    bound_id: str
    n: Optional[int]
    bound_value: float
    actual_value: float
    margin: float
    passed: bool

    def as_dict(self) -> dict:
        return asdict(self)


def check_row(bound_id: str, bound: float, actual: float, n: Optional[int] = None) -> CheckRow:
    """Row for ``actual <= bound``."""
    bound, actual = float(bound), float(actual)
    margin = math.inf if math.isinf(bound) and bound > 0 else bound - actual
    passed = margin >= -RELATIVE_SLACK * abs(bound)
    return CheckRow(bound_id, n, bound, actual, margin, bool(passed))


@dataclass
class Report:
    rows: List[CheckRow] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def violations(self) -> List[CheckRow]:
        return [r for r in self.rows if not r.passed]

    def worst_margin(self, bound_id: Optional[str] = None) -> float:
        margins = [r.margin for r in self.rows if bound_id is None or r.bound_id == bound_id]
        return min(margins) if margins else math.inf

    def extend(self, other: "Report") -> "Report":
        self.rows.extend(other.rows)
        self.extras.update(other.extras)
        return self

    def raise_for_violations(self):
        bad = self.violations
        if bad:
            raise BoundViolated(bad[0], self)

    def _finish(self, strict: bool) -> "Report":
        if strict:
            self.raise_for_violations()
        return self


def _as_measure(source: Union[GibbsMeasure, PerronData]) -> GibbsMeasure:
    return source if isinstance(source, GibbsMeasure) else GibbsMeasure.from_perron(source)


# -- cone ------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeCheck:
    member: bool
    margin: float
    integral: float
    reason: Optional[str] = None


def cone_ratio_excess(g: LocallyConstantFn, cone: ConeSpec) -> float:
    """``max (max_u g / min_u g) / B(m)`` over cylinders ``u`` of length ``m+1``.

    Only ``m0 <= m <= g.memory - 2`` can fail; for larger ``m`` both points
    see the same value.  Returns 0 when no condition applies.
    """
    worst = 0.0
    for m in range(cone.m0, g.memory - 1):
        group = window_index(g.shift, g.memory, 0, m + 1)
        size = int(group.max()) + 1
        hi = np.full(size, -np.inf)
        lo = np.full(size, np.inf)
        np.maximum.at(hi, group, g.values)
        np.minimum.at(lo, group, g.values)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(hi == lo, 1.0, hi / lo)
        worst = max(worst, float(np.max(ratio)) / cone.B(m))
    return worst


def check_lambda_membership(
    g: LocallyConstantFn,
    cone: ConeSpec,
    nu: Union[GibbsMeasure, PerronData],
    strict: bool = True,
) -> ConeCheck:
    """Decide whether ``g`` lies in the invariant cone.

    The margin is ``1 - worst ratio / B(m)`` (``inf`` when no ratio condition
    applies).

    Raises
    ------
    NotNormalized
        ``|integral g dnu - 1| > 1e-10`` (only when ``strict``).
    ConeViolation
        ``g`` has a negative value or breaks a ratio condition (only when
        ``strict``).
    """
    gm = _as_measure(nu)
    integral = integrate(gm, g, "nu")
    excess = cone_ratio_excess(g, cone) if g.values.min() >= 0 else math.inf
    margin = 1.0 - excess if excess > 0 else math.inf
    reason, exc = None, None
    if g.values.min() < 0:
        reason, exc = "negative value", ConeViolation
    elif abs(integral - 1.0) > NORMALIZATION_TOL:
        reason, exc = f"integral {integral!r} differs from 1", NotNormalized
    elif excess > 1.0 + RELATIVE_SLACK:
        reason, exc = f"cylinder ratio exceeds B_m by factor {excess!r}", ConeViolation
    if exc is not None and strict:
        raise exc(reason)
    return ConeCheck(reason is None, margin, integral, reason)


def normalize(g: LocallyConstantFn, nu: Union[GibbsMeasure, PerronData]) -> LocallyConstantFn:
    return g / integrate(_as_measure(nu), g, "nu")


def cone_members(
    pd: PerronData,
    c: BoundConstants,
    count: int,
    rng: np.random.Generator,
    max_memory: int = 3,
    max_iterates: int = 3,
) -> List[LocallyConstantFn]:
    """Random members of the cone, built by three constructions.

    * a strictly positive function of memory ``<= m0 + 1``, normalized; all
      its ratio conditions are vacuous;
    * ``(C g + 1)`` normalized, with ``g >= 0`` random and
      ``C = 2 / ((1 - theta) b |g|_theta)``, which satisfies every ratio
      condition at any memory;
    * images of either under up to ``max_iterates`` steps of ``T``, which
      maps the cone into itself.
    """
    f = pd.potential
    gm = GibbsMeasure.from_perron(pd)
    members = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            memory = int(rng.integers(1, min(c.m0 + 1, max_memory) + 1))
            g = random_function(f.shift, memory, f.theta, rng, 0.1, 2.0)
        else:
            memory = int(rng.integers(1, max_memory + 1))
            raw = random_function(f.shift, memory, f.theta, rng, 0.0, 2.0)
            semi = raw.holder_seminorm
            g = raw + 1.0 if semi == 0 else raw * (2.0 / ((1.0 - f.theta) * c.b * semi)) + 1.0
        g = normalize(g, gm)
        if kind == 2:
            g = iterate_normalized(f, g, int(rng.integers(1, max_iterates + 1)), pd)
        members.append(g)
    return members


# -- checks ----------------------------------------------------------------------


def verify_constants(c: BoundConstants, strict: bool = True) -> Report:
    """Orderings the constants must satisfy.

    ``theta < beta < rho < 1``, ``mu < 1/(4K^2)``, ``Kprime <= K`` and
    ``betaprime <= beta``; orderings near 1 are compared through the gaps.
    """
    rep = Report()
    rep.rows.append(check_row("theta_below_beta", 1.0 - c.theta, c.beta_gap))
    rep.rows.append(check_row("beta_below_rho", c.beta_gap, c.rho_gap))
    rep.rows.append(check_row("rho_below_one", c.rho_gap, 0.0))
    rep.rows.append(check_row("mu_bound", _exp(-math.log(4.0) - 2.0 * c.log_K), c.mu))
    if c.Kprime is not None:
        rep.rows.append(check_row("kprime_below_K", c.K, c.Kprime))
    rep.rows.append(check_row("betaprime_below_beta", c.betaprime_gap, c.beta_gap))
    return rep._finish(strict)


def verify_perron_bounds(
    pd: PerronData,
    c: BoundConstants,
    f: Optional[LocallyConstantFn] = None,
    cone_members: Sequence[LocallyConstantFn] = (),
    strict: bool = True,
) -> Report:
    """Eigenvalue bracket, eigenfunction bounds, spectral gap and the cone Hoelder bound."""
    f = pd.potential if f is None else f
    rep = Report()
    lo, hi = lambda_bounds(f, c.q)
    rep.rows.append(check_row("lambda_lower", 1.0 / lo, 1.0 / pd.lam))
    rep.rows.append(check_row("lambda_upper", hi, pd.lam))
    h = pd.h.norms()
    rep.rows.append(check_row("h_lower", c.K, 1.0 / float(pd.h.values.min())))
    rep.rows.append(check_row("h_upper", c.K, float(pd.h.values.max())))
    rep.rows.append(check_row("h_holder", c.B * c.b * c.K, h.holder_seminorm))
    rep.rows.append(check_row("spectral_gap", 1.0 - pd.second_modulus / pd.lam, c.rho_gap))
    for g in cone_members:
        rep.rows.append(check_row("cone_holder", c.B * c.b * c.K, g.holder_seminorm))
    return rep._finish(strict)


def verify_basic_inequalities(
    f: LocallyConstantFn,
    g: LocallyConstantFn,
    pd: PerronData,
    c: BoundConstants,
    N: int,
    strict: bool = True,
) -> Report:
    """Growth bounds for ``L^n g``, ``n = 0..N``.

    Both sides are divided by ``lambda**n`` before reporting, so the actual
    values are norms of ``T^n g``.
    """
    if not 0 <= N <= MAX_STEPS:
        raise ValueError(f"N must lie in 0..{MAX_STEPS}")
    rep = Report()
    g_norms = g.norms()
    K2 = _exp(2.0 * c.log_K)
    coef = 2.0 * c.holder_f / (1.0 - c.theta)
    norm_factor = 4.0 * c.b * K2 / (1.0 - c.theta)
    current = g
    for n in range(N + 1):
        if n:
            current = iterate_normalized(f, current, 1, pd)
        now = current.norms()
        rep.rows.append(check_row("sup_growth", K2 * g_norms.sup_norm, now.sup_norm, n))
        rep.rows.append(
            check_row(
                "holder_growth",
                K2 * (coef * g_norms.sup_norm + c.theta**n * g_norms.holder_seminorm),
                now.holder_seminorm,
                n,
            )
        )
        rep.rows.append(check_row("norm_growth", norm_factor * g_norms.total, now.total, n))
    return rep._finish(strict)


def _decay_rate(series: Sequence[float]) -> Optional[float]:
    s = np.asarray(series, dtype=float)
    scale = float(s.max()) if s.size else 0.0
    if scale == 0.0:
        return None
    n = np.arange(s.size)
    keep = (n >= 1) & (s > 1e-12 * scale)
    if keep.sum() < 3:
        return None
    slope = np.polyfit(n[keep], np.log(s[keep]), 1)[0]
    return float(math.exp(slope))


def verify_convergence(
    f: LocallyConstantFn,
    g: LocallyConstantFn,
    pd: PerronData,
    c: BoundConstants,
    N: int,
    strict: bool = True,
) -> Report:
    """Exponential convergence of ``T^n g`` to ``h * integral g dnu``.

    Checks the sup-norm rate ``A1 beta^n ||g||`` and the full-norm rate
    ``A2 rho^n ||g||`` for every ``n <= N``.  When ``g`` is a cone member it
    also checks ``|T^n g - h|_inf <= A beta^n``.  ``extras`` records the
    empirical decay rate of ``||r_n||_theta``, ``rho`` and
    ``second_modulus / lambda``.
    """
    if not 0 <= N <= MAX_STEPS:
        raise ValueError(f"N must lie in 0..{MAX_STEPS}")
    gm = GibbsMeasure.from_perron(pd)
    rep = Report()
    g_norm = g.norm
    alpha = integrate(gm, g, "nu")
    target = pd.h * alpha
    in_cone = check_lambda_membership(g, c.cone, gm, strict=False).member
    log_g = math.log(g_norm) if g_norm > 0 else -math.inf
    series = []
    current = g
    for n in range(N + 1):
        if n:
            current = iterate_normalized(f, current, 1, pd)
        r = (current - target).norms()
        series.append(r.total)
        log_beta_n = c.log_beta_power(n)
        rep.rows.append(check_row("sup_convergence", _exp(math.log(c.A1) + log_beta_n + log_g), r.sup_norm, n))
        rep.rows.append(check_row("norm_convergence", _exp(c.log_A2 + c.log_rho_power(n) + log_g), r.total, n))
        if in_cone:
            rep.rows.append(check_row("cone_convergence", _exp(math.log(c.A) + log_beta_n), r.sup_norm, n))
    rep.extras.update(
        empirical_rate=_decay_rate(series),
        rho=c.rho,
        rho_gap=c.rho_gap,
        gap_ratio=pd.second_modulus / pd.lam,
        residual_norms=series,
    )
    return rep._finish(strict)


def verify_decomposition(
    f: LocallyConstantFn,
    g: LocallyConstantFn,
    pd: PerronData,
    c: BoundConstants,
    strict: bool = True,
) -> Report:
    """Splitting ``T^(m0+M) g = mu h + (1 - mu) g_tilde`` for a cone member ``g``.

    Verifies ``|g|_inf <= K``, ``1/K <= min T^(m0+M) g``, that
    ``mu h < min T^(m0+M) g`` so ``g_tilde`` is positive, that ``g_tilde``
    integrates to one and lies in the cone.
    """
    gm = GibbsMeasure.from_perron(pd)
    check_lambda_membership(g, c.cone, gm, strict=True)
    steps = c.m0 + c.M
    pushed = iterate_normalized(f, g, steps, pd)
    g_tilde = (pushed - pd.h * c.mu) / (1.0 - c.mu)
    rep = Report()
    pushed_min = float(pushed.values.min())
    rep.rows.append(check_row("cone_sup", c.K, g.sup_norm))
    rep.rows.append(check_row("pushed_min", c.K, 1.0 / pushed_min))
    rep.rows.append(check_row("mu_h_below_min", pushed_min, c.mu * float(pd.h.values.max())))
    rep.rows.append(check_row("tilde_positive", 0.0, -float(g_tilde.values.min())))
    rep.rows.append(check_row("tilde_normalized", NORMALIZATION_TOL, abs(integrate(gm, g_tilde, "nu") - 1.0)))
    rep.rows.append(check_row("tilde_cone", 1.0, cone_ratio_excess(g_tilde, c.cone)))
    rep.extras["g_tilde"] = g_tilde
    return rep._finish(strict)


def verify_all(
    pd: PerronData,
    observables: Optional[dict] = None,
    steps: int = 40,
    depth: int = 4,
    c: Optional[BoundConstants] = None,
) -> Report:
    """Every check on one potential; never raises on a violation.

    ``observables`` maps names to test functions; the constant ``1`` is
    always checked under the name ``"one"``.  Convergence summaries land in
    ``extras["convergence"][name]``.
    """
    f = pd.potential
    c = compute_constants(f, lam=pd.lam) if c is None else c
    gm = GibbsMeasure.from_perron(pd)
    one = LocallyConstantFn.constant(f.shift, 1.0, f.theta)
    tests = {"one": one, **(observables or {})}
    rep = Report()
    rep.extend(verify_constants(c, strict=False))
    rep.extend(verify_perron_bounds(pd, c, f, cone_members=[one, pd.h], strict=False))
    convergence = {}
    for name, g in tests.items():
        rep.extend(verify_basic_inequalities(f, g, pd, c, steps, strict=False))
        conv = verify_convergence(f, g, pd, c, steps, strict=False)
        rep.rows.extend(conv.rows)
        convergence[name] = conv.extras
    for g in (one, pd.h):
        rep.rows.extend(verify_decomposition(f, g, pd, c, strict=False).rows)
    rep.rows.append(check_row("shift_invariance", NORMALIZATION_TOL, check_shift_invariance(gm, depth)))
    rep.extras["convergence"] = convergence
    return rep


__all__ = [
    "FORMULAS",
    "BoundConstants",
    "CheckRow",
    "ConeCheck",
    "ConeSpec",
    "Report",
    "bound_constants",
    "check_lambda_membership",
    "check_row",
    "compute_constants",
    "cone_members",
    "cone_ratio_excess",
    "find_m0",
    "normalize",
    "verify_all",
    "verify_basic_inequalities",
    "verify_constants",
    "verify_convergence",
    "verify_decomposition",
    "verify_perron_bounds",
]
