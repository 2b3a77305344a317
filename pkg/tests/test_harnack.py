import math
from dataclasses import replace

import mpmath
import pytest
from hypothesis import given, strategies as st

from harnack_fde.core_params import Profile, derive_params
from harnack_fde.harnack import (Cylinder, GeometryError, SigmaResult, bgm_kappa0,
                                 harnack_constants, harnack_h, hbar, holder_bound,
                                 holder_exponent, log_c0, log_estimate_c2, log_h_from,
                                 log_holder_exponent, log_moser_c1, moser_c1, parabolic_distance,
                                 sigma_series)
from harnack_fde.lognum import DomainError, TowerScalar, normalize
from harnack_fde.threshold import lambda_bounds


def sigma_oracle(d, n_terms=10_000):
    """Brute-force partial sum in 40-digit arithmetic."""
    with mpmath.workdps(40):
        s = mpmath.mpf(0)
        q = mpmath.mpf(3) / 4
        for j in range(n_terms):
            s += q**j * mpmath.mpf((2 + j) * (1 + j)) ** (2 * d + 4)
        return s


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sigma_matches_brute_force(d):
    s = sigma_series(d, 1e-12)
    ref = sigma_oracle(d)
    assert abs(mpmath.mpf(s.value) - ref) <= 1e-10 * ref
    assert s.value <= float(ref) * (1 + 1e-13) and float(ref) <= (s.value + s.tail_bound) * (1 + 1e-13)


def test_sigma_first_term():
    assert (2 * 1) ** (2 * 1 + 4) == 64
    assert sigma_series(1).value > 64


def test_sigma_tail_consistency_d3():
    s = sigma_series(3, 1e-6)
    longer = float(sigma_oracle(3, s.n_terms + 100))
    assert 0 <= longer - s.value <= s.tail_bound * (1 + 1e-12)


def test_sigma_rejects_bad_input():
    with pytest.raises(ValueError):
        sigma_series(0)
    with pytest.raises(ValueError):
        sigma_series(1, 0.1)


def test_log_estimate_c2():
    assert log_estimate_c2(1) == 24
    assert log_estimate_c2(2) == 288
    assert all(log_estimate_c2(d) > 1 / math.e for d in range(1, 26))


def test_moser_c1_literal_transcription():
    """Independent transcription of the Moser constant evaluated in mpmath."""
    for d, m in [(1, 0.5), (2, 0.7), (3, 5 / 6), (5, 0.9)]:
        p = derive_params(d, m, Profile.FDE_BOUNDS)
        g = mpmath.mpf(p.gamma_moser)
        K = mpmath.mpf(p.K)
        inner = (2 ** (2 * g**2 + 7 * (g - 1)) * g ** ((g + 1) * (2 * g - 1))
                 * mpmath.mpf(d) ** ((g + 1) * (g - 1)) * K ** (g - 1))
        ref = 3 ** (g - 1) * inner ** (g / (g - 1) ** 2)
        assert log_moser_c1(p) == pytest.approx(float(mpmath.log(ref)), rel=1e-13)
        assert moser_c1(p) >= 1


def test_moser_gamma_choice():
    assert derive_params(1, 0.5).gamma_moser == pytest.approx(5 / 3)
    assert derive_params(2, 0.7).gamma_moser == pytest.approx(5 / 3)
    assert derive_params(3, 0.8).gamma_moser == pytest.approx(5 / 3)
    assert derive_params(4, 0.8).gamma_moser == pytest.approx(1.5)


def test_moser_c1_increasing_in_K():
    p = derive_params(3, 0.8)
    assert log_moser_c1(replace(p, K=p.K * 1.01)) > log_moser_c1(p)


def test_bgm_kappa0_forms():
    d = 3
    sig = sigma_series(d).value
    c1 = TowerScalar.from_float(5.0)
    c2 = log_estimate_c2(d)
    got = bgm_kappa0(d + 2, c1, c2, 0.5, sig)
    expected = max(2 * c2, 125.0 * 2 ** (2 * (d + 2) + 3) * sig)
    assert got.to_float() == pytest.approx(expected, rel=1e-13)
    # theta = 1/sqrt2 with c1 scaled by sqrt2^(d+2)
    c1s = 5.0 * math.sqrt(2) ** (d + 2)
    got = bgm_kappa0(d + 2, c1s, c2, 1 / math.sqrt(2), sig)
    expected = 8 * 125.0 * math.sqrt(2) ** (3 * (d + 2)) / (1 - 1 / math.sqrt(2)) ** (2 * (d + 2)) * sig
    assert got.to_float() == pytest.approx(max(2 * c2, expected), rel=1e-12)
    # tiny c1 selects the 2 c2 branch
    assert bgm_kappa0(d + 2, 1e-30, c2, 0.5, sig).to_float() == 2 * c2
    with pytest.raises(DomainError):
        bgm_kappa0(d + 2, 1.0, c2, 0.3, sig)


def test_hbar_and_first_term():
    p = derive_params(1, 0.6)
    lh = harnack_h(p)
    assert hbar(lh, 1.0, 1.0) == lh * 2.0
    assert 4 * log_estimate_c2(1) == 96
    assert lh > 96
    with pytest.raises(DomainError):
        hbar(lh, 2.0, 1.0)


def test_log_h_monotone_in_sigma_and_c():
    p = derive_params(2, 0.8)
    s = sigma_series(2)
    s2 = SigmaResult(s.value * 1.5, s.log_value + math.log(1.5), s.tail_bound, s.n_terms)
    base = log_h_from(2, log_c0(p), s)
    assert log_h_from(2, log_c0(p), s2) > base
    assert log_h_from(2, log_c0(p) + 0.01, s) > base


def test_holder_exponent_exact_values():
    assert holder_exponent(math.log(4 / 3)).to_float() == pytest.approx(1.0, abs=1e-12)
    assert holder_exponent(math.log(2.0)).to_float() == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DomainError):
        holder_exponent(math.log(1.2))


@given(st.lists(st.floats(min_value=math.log(4 / 3), max_value=1e300), min_size=2, max_size=2,
                unique=True))
def test_holder_exponent_decreasing(pair):
    a, b = sorted(pair)
    na, nb = holder_exponent(a), holder_exponent(b)
    assert na >= nb
    if b - a > 1e-9 * b:
        assert na > nb
    assert TowerScalar.from_float(0.0) < nb <= 1.0 + 1e-12


def test_holder_exponent_decreasing_level2():
    xs = [normalize(1, 1, 1e20), normalize(1, 2, 100.0), normalize(1, 2, 300.0)]
    nus = [log_holder_exponent(x) for x in xs]
    assert nus[0] > nus[1] > nus[2]


def test_log_nu_expansion():
    # hbar = exp(800) is beyond the float range; the neglected part is below 1/hbar
    for lv in (800.0, 5000.0):
        ln_nu = log_holder_exponent(lv)
        assert (ln_nu + lv).to_float() == pytest.approx(-math.log(math.log(4)), abs=1e-12 * lv)
    # moderate hbar: the exact formula and the expansion agree to the documented order
    lv = 30.0
    exact = log_holder_exponent(lv).to_float()
    assert exact + lv == pytest.approx(-math.log(math.log(4)), abs=math.exp(-lv))


@pytest.mark.parametrize("d,m", [(1, 0.6), (2, 0.75), (3, 5 / 6), (5, 0.9)])
def test_nu_in_unit_interval_with_lambda_bounds(d, m):
    p = derive_params(d, m)
    lam = lambda_bounds(p)
    hc = harnack_constants(p, lam.lambda0, lam.lambda1)
    assert hc.log_nu < 0
    assert hc.nu <= 1


def test_c0_vs_c1_reported():
    for d in range(1, 8):
        hc = harnack_constants(derive_params(d, 0.99))
        assert hc.c0_ge_c1
        assert hc.log_h_verbose <= hc.log_h


def test_parabolic_distance_example():
    Q1 = Cylinder(0.5, 1.5, 1.0)
    Q2 = Cylinder(0.25, 2.0, 8.0)
    assert parabolic_distance(Q1, Q2) >= 0.25
    with pytest.raises(GeometryError):
        parabolic_distance(Q2, Q1)


def test_holder_bound_examples():
    assert holder_bound(0.0, 3.0, 5.0).to_float() == pytest.approx(10.0)
    assert holder_bound(1.0, 128.0, 5.0).to_float() == pytest.approx(10.0)
    with pytest.raises(GeometryError):
        holder_bound(0.5, 0.0, 1.0)
