import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ruelle.certificate import (
    ConeSpec,
    bound_constants,
    check_lambda_membership,
    check_row,
    compute_constants,
    cone_members,
    cone_ratio_excess,
    find_m0,
    verify_all,
    verify_basic_inequalities,
    verify_constants,
    verify_convergence,
    verify_decomposition,
    verify_perron_bounds,
)
from ruelle.exceptions import BoundViolated, ConeViolation, NotNormalized
from ruelle.functions import LocallyConstantFn, random_function
from ruelle.gibbs import gibbs_measure
from ruelle.symbolic import admissible_words, random_aperiodic
from ruelle.transfer import perron_data


@pytest.fixture
def flat(full2):
    f = LocallyConstantFn.constant(full2, 0.0, 0.5)
    pd = perron_data(f)
    return f, pd, compute_constants(f, lam=pd.lam)


def test_constants_full_shift(flat):
    _, _, c = flat
    e = math.e
    assert (c.b, c.m0, c.M) == (1.0, 1, 1)
    assert c.r0 == pytest.approx(1.0, rel=1e-12)
    assert c.B == pytest.approx(8 * e**2, rel=1e-12)
    assert c.K == pytest.approx(8 * e**2, rel=1e-12)
    assert c.mu == pytest.approx(1 / (512 * e**6), rel=1e-12)
    assert c.beta_gap == pytest.approx(1 / (4096 * e**6), rel=1e-12)
    assert c.rho_gap == pytest.approx(0.5 / (8 * 512 * e**6), rel=1e-12)
    assert c.A == pytest.approx(4 * c.K**2, rel=1e-12)
    assert c.A1 == pytest.approx(8 * c.K**2, rel=1e-12)
    assert c.A2 == pytest.approx(100 * c.K**5 / 0.5, rel=1e-12)
    assert c.Df == c.A2
    assert c.Kprime == pytest.approx(math.exp(2) * 2**2, rel=1e-12)


@pytest.mark.parametrize("b, theta, m0", [(1, 0.5, 1), (8, 0.5, 4), (7.9, 0.5, 3), (2, 0.5, 2), (1, 0.8, 1), (100, 0.3, 4)])
def test_find_m0(b, theta, m0):
    assert find_m0(b, theta) == m0
    assert theta**m0 < 1 / b <= theta ** (m0 - 1)


def test_cone_spec():
    cone = ConeSpec(2, 0.5)
    assert cone.B(2) == pytest.approx(math.exp(2.0))
    values = [cone.B(m) for m in range(2, 30)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(ValueError):
        cone.B(1)


@settings(max_examples=60, deadline=None)
@given(
    theta=st.sampled_from([0.3, 0.5, 0.8]),
    q=st.integers(2, 4),
    M=st.integers(1, 10),
    sup_f=st.floats(0, 2),
    holder_f=st.floats(0, 50),
)
def test_constant_orderings(theta, q, M, sup_f, holder_f):
    c = bound_constants(theta, q, M, sup_f, holder_f, lam=math.exp(sup_f))
    assert c.b >= 1 and c.m0 >= 1 and c.K >= 1
    assert theta**c.m0 < 1 / c.b <= theta ** (c.m0 - 1)
    assert 0 < c.mu
    assert math.log(c.mu) < -math.log(4) - 2 * c.log_K
    assert 0 < c.rho_gap < c.beta_gap < 1 - theta
    # sqrt(beta) <= rho, in gap form: 1 - sqrt(1 - x) >= x / 2
    assert -math.expm1(0.5 * math.log1p(-c.beta_gap)) >= c.rho_gap * (1 - 1e-12)
    assert verify_constants(c).passed


@settings(max_examples=40, deadline=None)
@given(sup_f=st.floats(0, 2), holder_f=st.floats(0, 20), bump=st.floats(0.01, 1))
def test_K_monotone(sup_f, holder_f, bump):
    base = bound_constants(0.5, 3, 2, sup_f, holder_f)
    assert bound_constants(0.5, 3, 2, sup_f + bump, holder_f).log_K >= base.log_K
    assert bound_constants(0.5, 3, 2, sup_f, holder_f + bump).log_K >= base.log_K


def test_check_row_semantics():
    assert check_row("x", 1.0, 1.0 + 1e-10).passed
    assert not check_row("x", 1.0, 1.0 + 1e-8).passed
    r = check_row("x", math.inf, 5.0)
    assert r.passed and r.margin == math.inf


def test_membership_examples(flat, golden):
    f, pd, c = flat
    assert check_lambda_membership(LocallyConstantFn.constant(f.shift, 1.0, 0.5), c.cone, pd).member
    rng = np.random.default_rng(3)
    for _ in range(5):
        A = random_aperiodic(3, rng)
        g = random_function(A, 3, 0.5, rng)
        pdg = perron_data(g)
        cg = compute_constants(g, lam=pdg.lam)
        assert check_lambda_membership(pdg.h, cg.cone, pdg).member


def test_cone_violation_fixture(flat):
    # m0 = 1 here, so a ratio condition first bites on pairs agreeing on two
    # coordinates, which needs memory m0 + 2.
    f, pd, c = flat
    B = c.cone.B(c.m0)
    words = admissible_words(f.shift, 3)
    raw = LocallyConstantFn.from_callable(f.shift, 3, lambda w: 2 * B if w == (1, 1, 2) else 1.0, 0.5)
    g = raw / gibbs_measure(pd).integrate(raw, "nu")
    assert len(words) == 8
    assert cone_ratio_excess(g, c.cone) == pytest.approx(2.0)
    with pytest.raises(ConeViolation):
        check_lambda_membership(g, c.cone, pd)
    res = check_lambda_membership(g, c.cone, pd, strict=False)
    assert not res.member and res.margin == pytest.approx(-1.0)


def test_not_normalized_and_negative(flat):
    f, pd, c = flat
    with pytest.raises(NotNormalized):
        check_lambda_membership(LocallyConstantFn.constant(f.shift, 2.0, 0.5), c.cone, pd)
    neg = LocallyConstantFn.from_table(f.shift, {(1,): -1.0, (2,): 3.0}, 0.5)
    with pytest.raises(ConeViolation):
        check_lambda_membership(neg, c.cone, pd)


def test_memory_two_is_vacuous_when_m0_is_one(flat):
    f, pd, c = flat
    raw = LocallyConstantFn.from_table(f.shift, {(1, 1): 100.0, (1, 2): 0.01, (2, 1): 1.0, (2, 2): 1.0}, 0.5)
    g = raw / gibbs_measure(pd).integrate(raw, "nu")
    assert check_lambda_membership(g, c.cone, pd).member


def test_perron_bounds_full_shift(flat):
    f, pd, c = flat
    rep = verify_perron_bounds(pd, c)
    assert rep.passed
    upper = [r for r in rep.rows if r.bound_id == "lambda_upper"][0]
    assert upper.actual_value == pytest.approx(2.0) and abs(upper.margin) < 1e-12


def test_bound_violated_raised(flat):
    f, pd, c = flat
    tight = bound_constants(0.5, 2, 1, 0.0, 0.0)
    fake = type(tight)(**{**tight.as_dict(), "K": 0.5, "log_K": math.log(0.5)})
    with pytest.raises(BoundViolated) as info:
        verify_perron_bounds(pd, fake)
    assert info.value.row.bound_id in {"h_lower", "h_upper", "h_holder", "cone_holder"}
    assert not verify_perron_bounds(pd, fake, strict=False).passed


def test_basic_inequalities_for_one_and_h():
    rng = np.random.default_rng(21)
    A = random_aperiodic(3, rng)
    f = random_function(A, 3, 0.5, rng)
    pd = perron_data(f)
    c = compute_constants(f, lam=pd.lam)
    one = LocallyConstantFn.constant(A, 1.0, 0.5)
    assert verify_basic_inequalities(f, one, pd, c, 30).passed
    rep = verify_basic_inequalities(f, pd.h, pd, c, 10)
    sups = [r.actual_value for r in rep.rows if r.bound_id == "sup_growth"]
    assert np.allclose(sups, pd.h.sup_norm, rtol=1e-9)


def test_convergence_full_shift_exact(flat):
    f, pd, c = flat
    rng = np.random.default_rng(0)
    g = random_function(f.shift, 3, 0.5, rng)
    rep = verify_convergence(f, g, pd, c, 8)
    assert rep.passed
    series = rep.extras["residual_norms"]
    assert all(s < 1e-14 for s in series[3:])
    rep = verify_convergence(f, pd.h, pd, c, 5)
    assert max(rep.extras["residual_norms"]) < 1e-14


def test_empirical_rate_tracks_gap():
    rng = np.random.default_rng(4)
    A = random_aperiodic(3, rng)
    f = random_function(A, 2, 0.5, rng)
    pd = perron_data(f)
    c = compute_constants(f, lam=pd.lam)
    g = random_function(A, 2, 0.5, rng)
    rep = verify_convergence(f, g, pd, c, 60)
    rate = rep.extras["empirical_rate"]
    if rate is not None:
        assert rate <= pd.gap_ratio * 1.2 + 1e-3
        assert rate < c.rho


def test_decomposition_trivial_case(flat):
    f, pd, c = flat
    one = LocallyConstantFn.constant(f.shift, 1.0, 0.5)
    rep = verify_decomposition(f, one, pd, c)
    assert np.allclose(rep.extras["g_tilde"].values, 1.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_generated_cone_members(seed):
    rng = np.random.default_rng(seed)
    A = random_aperiodic(int(rng.integers(2, 5)), rng)
    f = random_function(A, int(rng.integers(1, 4)), float(rng.choice([0.3, 0.5, 0.8])), rng)
    pd = perron_data(f)
    c = compute_constants(f, lam=pd.lam)
    members = cone_members(pd, c, 9, rng)
    for g in members:
        assert check_lambda_membership(g, c.cone, pd).member
        assert verify_decomposition(f, g, pd, c).passed
    assert verify_perron_bounds(pd, c, cone_members=members).passed


def test_verify_all_never_raises_and_passes(golden):
    pd = perron_data(LocallyConstantFn.constant(golden, 0.0, 0.5))
    x = LocallyConstantFn.from_table(golden, {(1, 1): 1.0, (1, 2): 0.0, (2, 1): 0.5}, 0.5)
    rep = verify_all(pd, {"x": x}, steps=20)
    assert rep.passed
    assert set(rep.extras["convergence"]) == {"one", "x"}
    ids = {r.bound_id for r in rep.rows}
    assert {"lambda_lower", "h_holder", "spectral_gap", "sup_growth", "norm_convergence", "tilde_cone", "shift_invariance"} <= ids
