import math

import pytest
from hypothesis import given, strategies as st

from harnack_fde.core_params import (DimensionError, Profile, RangeError, admissible_interval,
                                     barenblatt_mass, derive_params, log_omega, omega,
                                     sobolev_constant)


def test_d3_example():
    p = derive_params(3, 5 / 6)
    assert p.alpha == pytest.approx(1.5, rel=1e-15)
    assert p.m1 == pytest.approx(2 / 3)
    assert p.eta == pytest.approx(1.0, rel=1e-14)
    assert p.chi == 1 / 322


def test_alpha_limit_d2():
    assert derive_params(2, 1 - 1e-12).alpha == pytest.approx(2.0, abs=1e-11)


def test_omega_values():
    assert omega(1) == pytest.approx(2.0, rel=1e-15)
    assert omega(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert omega(3) == pytest.approx(4 * math.pi, rel=1e-15)
    # independent route: omega_d = d * volume of the unit ball, pi^(d/2)/Gamma(d/2+1)
    for d in range(1, 26):
        ball = math.pi ** (d / 2) / math.factorial(d // 2) if d % 2 == 0 else None
        if ball is not None:
            assert omega(d) == pytest.approx(d * ball, rel=1e-13)
        assert math.exp(log_omega(d)) == pytest.approx(omega(d), rel=1e-13)


@pytest.mark.parametrize("d", range(1, 26))
def test_omega_bounds(d):
    assert omega(d) <= 16 / 15 * math.pi**3 * (1 + 1e-15)
    assert omega(d) / d <= math.pi**2


def test_sobolev_constant_table():
    assert sobolev_constant(2, 0.7) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-15)
    assert sobolev_constant(3, 0.8) == pytest.approx(2 / math.pi * (3 * math.sqrt(math.pi) / 4) ** (2 / 3),
                                                     rel=1e-14)
    # (2/pi) * 1.329340^(2/3) = 0.636620 * 1.209000 by hand
    assert sobolev_constant(3, 0.8) == pytest.approx(0.769669, abs=1e-6)
    # d = 1, m = 1: max(2/pi^2, 1/4) = 1/4
    assert sobolev_constant(1, 1.0) == pytest.approx(2**1.5 * 0.25, rel=1e-15)
    assert 2 / math.pi**2 < 0.25
    # d = 1, small m: the first branch wins
    m = 0.2
    assert sobolev_constant(1, m) == pytest.approx(2 ** (1 + m / 2) * 2 * (2 - m) / (m * math.pi**2))


def test_profiles_gate_m_range():
    assert admissible_interval(1, Profile.FDE_BOUNDS) == (0.0, 1.0)
    assert admissible_interval(1, Profile.ENTROPY) == (1 / 3, 1.0)
    derive_params(1, 0.2, Profile.FDE_BOUNDS)
    with pytest.raises(RangeError):
        derive_params(1, 0.2, Profile.ENTROPY)
    with pytest.raises(RangeError):
        derive_params(3, 0.6)
    with pytest.raises(DimensionError):
        derive_params(0, 0.5)
    with pytest.raises(DimensionError):
        derive_params(2.5, 0.9)


def test_d1_moser_exponent_distinct_from_table():
    p = derive_params(1, 0.5, Profile.FDE_BOUNDS)
    assert p.p_moser == 8.0
    assert p.p_m == pytest.approx(8.0)
    p = derive_params(1, 0.8, Profile.FDE_BOUNDS)
    assert p.p_m == pytest.approx(5.0) and p.p_moser == 8.0


def test_barenblatt_mass_against_quadrature():
    from scipy.integrate import quad
    for d, m in [(1, 0.6), (2, 0.7), (3, 5 / 6)]:
        p = derive_params(d, m)
        val, _ = quad(lambda r: (1 + r * r) ** (1 / (m - 1)) * r ** (d - 1), 0, math.inf)
        assert barenblatt_mass(p) == pytest.approx(omega(d) * val, rel=1e-8)


dm = st.integers(min_value=1, max_value=25).flatmap(
    lambda d: st.tuples(st.just(d), st.floats(min_value=max((d - 1) / d, 1 / 3) + 1e-6,
                                              max_value=1 - 1e-6)))


@given(dm)
def test_parameter_invariants(x):
    d, m = x
    p = derive_params(d, m)
    if d >= 2:
        assert 1 < p.alpha < 2
    assert p.eta > 0
    assert p.beta_smoothing > 0
    assert p.chi >= m / (266 + 56 * m) - 1e-18
    assert p.mu > 0 and p.b_const > 0


@given(st.integers(min_value=1, max_value=25), st.floats(0.34, 0.999), st.floats(0.34, 0.999))
def test_alpha_increasing_in_m(d, m1, m2):
    lo = max((d - 1) / d, 1 / 3)
    m1, m2 = sorted((m1, m2))
    if not (lo < m1 < m2 < 1):
        return
    assert derive_params(d, m1).alpha < derive_params(d, m2).alpha
