import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from harnack_fde.core_params import derive_params
from harnack_fde.fde_bounds import ConfigError
from harnack_fde.lognum import DomainError, TowerScalar
from harnack_fde.threshold import (NU_EXPANSION, T_eps, ThresholdInputs, _grow, a_exponent,
                                   barenblatt_gradient_sup, barenblatt_shifted, c_time,
                                   envelope_bounds, lambda_bounds, lambdas_from_envelopes,
                                   log_eps_a_kappa2, log_geometric_ratio, log_kappa2, radius_R,
                                   rho_over, rho_over_sandwich, rho_under, run_threshold, t_star,
                                   theta_from_nu)


@pytest.fixture(scope="module")
def res3():
    p = derive_params(3, 5 / 6)
    return run_threshold(ThresholdInputs(p, 1e-3))


def test_radius_R():
    assert radius_R(0.0, 1.5) == 1.0
    assert radius_R(3.0, 1.0) == pytest.approx(4.0)
    assert radius_R(4.0, 2.0) == pytest.approx(3.0)
    with pytest.raises(DomainError):
        radius_R(-1.0, 1.5)


def test_rho_over_hand_value():
    assert rho_over(0.5, 1.0, 1.0) == pytest.approx(math.sqrt((math.sqrt(2) + 1) / (math.sqrt(2) - 1)))
    assert rho_over(0.5, 1.0, 1.0) == pytest.approx(2.414, abs=1e-3)


@given(st.floats(0.05, 0.99), st.floats(1e-9, 0.499), st.floats(0.1, 10.0))
def test_rho_over_sandwich(m, eps, mu):
    lo, hi = rho_over_sandwich(m, mu, eps)
    r = rho_over(m, mu, eps)
    assert lo <= r * (1 + 1e-12) and r <= hi * (1 + 1e-12)


def test_rho_under_near_threshold():
    one_minus = TowerScalar.from_float(0.5)  # eps_under = 1/2
    for eps in [0.1, 0.4, 0.5 - 1e-6]:
        r = rho_under(0.7, 1.0, eps, one_minus)
        assert r.sign == 1 and math.isfinite(r.to_float())
    with pytest.raises(DomainError):
        rho_under(0.7, 1.0, 0.5, one_minus)


def test_T_eps_zero_tail():
    p = derive_params(3, 5 / 6)
    t = T_eps(ThresholdInputs(p, 1e-3), 10.0, 470.0)
    assert t.t0 == 0.0 and t.T_over.sign == 0
    assert t.T.to_float() == pytest.approx(t.T_under)
    shrink = 1 - (1 - 1e-3) ** (1 - p.m)
    assert t.T_under == pytest.approx((2 / p.alpha) / shrink, rel=1e-12)


def test_T_under_monotone():
    p = derive_params(2, 0.8)
    base = T_eps(ThresholdInputs(p, 1e-3, A=1.0), 10.0, 100.0).T_under
    assert T_eps(ThresholdInputs(p, 1e-3, A=2.0), 10.0, 100.0).T_under > base
    assert T_eps(ThresholdInputs(p, 2e-3, A=1.0), 10.0, 100.0).T_under < base


def test_c_time_branches():
    p = derive_params(3, 5 / 6)
    assert c_time(p, TowerScalar.from_log(-1e4)) == TowerScalar.from_float(1.0)
    big = c_time(p, TowerScalar.from_log(100.0))
    expected = (5 - p.m) * math.log(2) + (1 - p.m) * 100 + p.alpha * math.log(p.b_const)
    assert big.log().to_float() == pytest.approx(expected, rel=1e-13)


def test_inputs_validation():
    p = derive_params(3, 5 / 6)
    with pytest.raises(DomainError):
        ThresholdInputs(p, 0.0)
    with pytest.raises(DomainError):
        ThresholdInputs(p, 1e-3, A=-1)
    with pytest.raises(ConfigError):
        ThresholdInputs(p, 1e-3, C_over=0.5, C_under=1.0)
    with pytest.raises(DomainError):
        run_threshold(ThresholdInputs(p, 0.01))  # beyond chi*eta


def test_inner_sup_bracket_hand_value():
    p = derive_params(3, 5 / 6)
    env = envelope_bounds(p)
    assert math.exp(env.log_sup_inner) == pytest.approx(p.b_const**3 * 4**2, rel=1e-13)


@pytest.mark.parametrize("d,m", [(1, 0.6), (2, 0.75), (3, 5 / 6), (4, 0.9)])
def test_envelope_bounds_against_grid(d, m):
    """Sampled extremes of the envelopes must lie inside the closed-form bounds."""
    p = derive_params(d, m)
    env = envelope_bounds(p)
    t = np.linspace(0.25, 2.0, 60)[:, None, None]
    ks = np.geomspace(1.0, 1e6, 40)[None, None, :]
    inner = np.linspace(0.0, 8.0, 200)[None, :, None]
    annulus = np.linspace(0.25, 8.0, 200)[None, :, None]
    k1 = barenblatt_shifted(p, t, inner, 1.0)
    assert np.log(k1.max()) <= env.log_sup_inner + 1e-12
    assert np.log(k1.max()) == pytest.approx(env.log_sup_inner, rel=1e-12, abs=1e-12)
    assert np.log(k1.min()) >= env.log_inf_inner - 1e-12
    ann = barenblatt_shifted(p, t, annulus, ks)
    assert np.log(ann.max()) <= env.log_sup_annulus + 1e-12
    assert np.log(ann.max()) >= env.log_sup_annulus - 1e-3
    assert np.log(ann.min()) >= env.log_inf_annulus - 1e-12
    ann1 = barenblatt_shifted(p, t, annulus, 1.0)
    assert np.log(ann1.max()) <= env.log_sup_annulus_k1 + 1e-12
    assert env.log_sup_annulus_k1 <= env.log_sup_annulus
    # envelopes increase with k
    assert np.all(np.diff(barenblatt_shifted(p, t, inner, ks), axis=2) >= 0)


def test_lambda_bounds_properties():
    for d, m in [(1, 0.6), (2, 0.75), (3, 5 / 6), (6, 0.95)]:
        lam = lambda_bounds(derive_params(d, m))
        assert 0 < lam.lambda0 <= lam.lambda1 < math.inf
        assert lam.lambda1 + 1 / lam.lambda0 >= 2 * math.sqrt(lam.lambda1 / lam.lambda0)
    l0, l1 = lambdas_from_envelopes(0.8, 1.0, 1.0, 2.0, 2.0)
    assert l0 == pytest.approx(l1)
    with pytest.raises(ConfigError):
        lambdas_from_envelopes(0.8, 0.0, 1.0, 1.0, 1.0)


def test_theta_from_nu():
    assert theta_from_nu(3, 0.0).exp().to_float() == pytest.approx(0.25)


def test_geometric_ratio_expansion():
    nu = 1e-9
    assert nu < NU_EXPANSION
    val, err = log_geometric_ratio(math.log(nu))
    with mpmath.workdps(40):
        two = mpmath.mpf(2) ** mpmath.mpf(nu)
        ref = mpmath.log(two / (two - 1))
    assert abs(val.to_float() - float(ref)) <= err
    assert err <= nu / 2 * (1 + 1e-12)
    val, err = log_geometric_ratio(math.log(0.3))
    assert err == 0.0
    assert val.to_float() == pytest.approx(math.log(2**0.3 / (2**0.3 - 1)), rel=1e-14)


def gradient_oracle(p):
    """Max of |d/dr B(1 - 1/alpha, r)| by dense sampling plus a local refinement."""
    r = np.linspace(0, 20, 200001)
    u = barenblatt_shifted(p, 1.0, r)
    g = np.abs(np.gradient(u, r, edge_order=2))
    i = int(np.argmax(g))
    rr = np.linspace(r[max(i - 2, 0)], r[i + 2], 20001)
    h = 1e-6
    dd = np.abs(barenblatt_shifted(p, 1.0, rr + h) - barenblatt_shifted(p, 1.0, rr - h)) / (2 * h)
    return dd.max()


@pytest.mark.parametrize("d,m", [(1, 0.5), (2, 0.75), (3, 5 / 6)])
def test_gradient_sup_closed_form(d, m):
    from harnack_fde.core_params import Profile
    p = derive_params(d, m, Profile.FDE_BOUNDS)
    assert barenblatt_gradient_sup(p) == pytest.approx(gradient_oracle(p), rel=1e-7)


def test_gradient_sup_hand_value_d1():
    from harnack_fde.core_params import Profile
    p = derive_params(1, 0.5, Profile.FDE_BOUNDS)
    # alpha = 3/2, mu = (1/2)^(2/3); closed form evaluated term by term
    mu, a = 0.5 ** (2 / 3), 1.5
    hand = (mu / a ** (2 / 3)) ** 2 * 2.0**-2 / math.sqrt(0.5 * 2.5) * (2.5 / 1.5) ** 3
    assert barenblatt_gradient_sup(p) == pytest.approx(hand, rel=1e-14)


def test_eps_a_kappa2_invariant(res3):
    p = res3.inputs.params
    lk, lt = res3.K.log(), res3.log_theta
    ref = log_eps_a_kappa2(p, 1e-3, lk, lt)
    for eps in [5e-4, 1e-5, 1e-9]:
        v = log_eps_a_kappa2(p, eps, lk, lt)
        assert (v - ref).sign == 0 or abs((v - ref).to_float()) <= 1e-10 * abs(ref.to_float())
        assert v == ref


def test_eps_a_kappa2_invariant_moderate_scale():
    """Same identity where every quantity is a plain float, against direct evaluation."""
    p = derive_params(3, 5 / 6)
    log_theta = TowerScalar.from_float(math.log(0.2))
    log_K = TowerScalar.from_float(3.0)
    a = a_exponent(p, log_theta).to_float()
    for eps in [1e-2, 5e-3]:
        direct = a * math.log(eps) + log_kappa2(p, eps, log_K, log_theta).to_float()
        assert direct == pytest.approx(log_eps_a_kappa2(p, eps, log_K, log_theta).to_float(),
                                       rel=1e-10)


def test_unit_bracket(res3):
    ts = res3.tstar
    assert ts.bracket == 1.0
    expected = res3.cstar.c_star.log() + res3.a_exp * (-math.log(1e-3))
    assert ts.log_t_star == expected


def test_c_star_dominates_parts(res3):
    cs = res3.cstar
    for part in [cs.term1_over.value, cs.term1_under.value, cs.term2, cs.term3.value]:
        assert part <= cs.c_star
    p = res3.inputs.params
    lim = 2 ** (3 - p.m) * res3.kappa_star / (1 - p.m)
    assert cs.term1_under.value.to_float() == pytest.approx(lim, rel=1e-6)
    assert cs.term1_under.grid_sup <= cs.term1_under.value


def test_t_star_monotone_grid(res3):
    p = res3.inputs.params
    eps_grid = np.geomspace(1e-8, 0.9 * p.chi * p.eta, 5)
    A_grid = [0.0, 0.5, 1.0, 10.0, 1e3]
    G_grid = [0.0, 0.1, 1.0, 5.0, 1e2]
    cs, ae = res3.cstar.c_star, res3.a_exp
    T = {(i, j, k): t_star(cs, ae, e, A, G, p)
         for (i, e), (j, A), (k, G) in itertools.product(enumerate(eps_grid), enumerate(A_grid),
                                                         enumerate(G_grid))}
    for i, j, k in itertools.product(range(5), repeat=3):
        if i < 4:
            assert T[i + 1, j, k].compare(T[i, j, k]) < 0
        if j < 4:
            assert T[i, j + 1, k].compare(T[i, j, k]) > 0
        if k < 4:
            assert T[i, j, k + 1].compare(T[i, j, k]) > 0


def test_log_ratio_exact():
    p = derive_params(3, 5 / 6)
    cs = TowerScalar.from_log(TowerScalar.from_log(300.0))
    ae = TowerScalar.from_log(200.0)
    t1 = t_star(cs, ae, 1e-3, 0.0, 0.0, p)
    t2 = t_star(cs, ae, 2e-3, 0.0, 0.0, p)
    assert t1.log_ratio(t2) == ae * math.log(2.0)


def test_overflow_reported_for_d8():
    p = derive_params(8, 0.95)
    with pytest.raises(OverflowError, match="d = 8"):
        run_threshold(ThresholdInputs(p, 1e-4))


def test_notes_record_alternative_chi(res3):
    assert res3.notes["chi_alternative"] == pytest.approx((5 / 6) / (266 + 56 * 5 / 6))


def test_grow_no_cancellation():
    assert float(_grow(1e-20, 0.5)) == pytest.approx(0.5e-20, rel=1e-12)
