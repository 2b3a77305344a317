"""Explicit constants of the parabolic Harnack inequality and Hoelder bound.

Everything that can leave the float range is returned as a
:class:`~harnack_fde.lognum.TowerScalar`; the assembly is done on
logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core_params import ParamSet
from .lognum import DomainError, TowerScalar, as_tower, tmax

LN4 = math.log(4.0)
Real = Union[float, TowerScalar]


class GeometryError(ValueError):
    """Cylinder Q1 is not contained in Q2."""


@dataclass(frozen=True)
class SigmaResult:
    value: float
    log_value: float
    tail_bound: float
    n_terms: int


def _sigma_log_term(d: int, j: int) -> float:
    return j * math.log(0.75) + (2 * d + 4) * math.log((2.0 + j) * (1.0 + j))


def sigma_series(d: int, rel_tol: float = 1e-12) -> SigmaResult:
    """Sum of (3/4)^j ((2+j)(1+j))^(2d+4) over j >= 0 with a geometric tail bound.

    The term ratio (3/4)((3+j)/(1+j))^(2d+4) decreases in j; once it is
    below one at index J, every later term is bounded by t_J r_J^k, so the
    neglected tail is at most t_J r_J / (1 - r_J).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0 < rel_tol <= 1e-3:
        raise ValueError("rel_tol must lie in (0, 1e-3]")
    n = 2 * d + 4
    logs = []
    j = 0
    while True:
        logs.append(_sigma_log_term(d, j))
        r = 0.75 * ((3.0 + j) / (1.0 + j)) ** n
        if r < 1.0:
            ref = max(logs)
            s = math.fsum(math.exp(x - ref) for x in logs)
            tail = math.exp(logs[-1] - ref) * r / (1.0 - r)
            if tail <= rel_tol * s:
                break
        j += 1
    log_value = ref + math.log(s)
    return SigmaResult(
        value=math.exp(log_value) if log_value < 709 else math.inf,
        log_value=log_value,
        tail_bound=math.exp(ref + math.log(tail)) if ref + math.log(tail) < 709 else math.inf,
        n_terms=len(logs),
    )


def log_moser_c1(p: ParamSet) -> float:
    g, d = p.gamma_moser, p.d
    inner = ((2 * g * g + 7 * (g - 1)) * math.log(2.0)
             + (g + 1) * (2 * g - 1) * math.log(g)
             + (g + 1) * (g - 1) * math.log(d)
             + (g - 1) * math.log(p.K))
    return (g - 1) * math.log(3.0) + g / (g - 1) ** 2 * inner


def moser_c1(p: ParamSet) -> TowerScalar:
    """Constant of the Moser iteration, built from gamma, d and K."""
    return TowerScalar.from_log(log_moser_c1(p))


def log_estimate_c2(d: int) -> float:
    """2^(d+2) 3^d d, the constant of the logarithmic level-set estimate."""
    return float(2 ** (d + 2) * 3**d * d)


def log_c0(p: ParamSet) -> float:
    d = p.d
    e2 = ((d + 2) * (3 * d * d + 18 * d + 24) + 13) / (2 * d)
    base = (1 + 4 / d**2) * math.log(2 + d) - (1 + 2 / d**2) * math.log(d)
    return (2 / d * math.log(3.0) + e2 * math.log(2.0)
            + (d + 1) * (d + 2) * base + (2 * d + 4) / d * math.log(p.K))


def c0_constant(p: ParamSet) -> TowerScalar:
    """Simplified stand-in for the Moser constant used in the Harnack constant."""
    return TowerScalar.from_log(log_c0(p))


def bgm_kappa0(beta: float, c1: Real, c2: float, theta: float, sigma: Real) -> TowerScalar:
    """ln kappa_0 = max(2 c2, 8 c1^3 sigma (1-theta)^(-2 beta)) of the Bombieri-Giusti argument."""
    if not 0.5 <= theta < 1.0:
        raise DomainError(f"theta = {theta} outside [1/2, 1)")
    c1, sigma = as_tower(c1), as_tower(sigma)
    if beta <= 0 or c1.sign <= 0 or sigma.sign <= 0:
        raise DomainError("beta, c1 and sigma must be positive")
    if c2 < 1 / math.e:
        raise DomainError("c2 must be at least 1/e")
    log_term = (math.log(8.0) + 3 * c1.log() + sigma.log()
                - 2 * beta * math.log1p(-theta))
    return tmax(TowerScalar.from_float(2 * c2), TowerScalar.from_log(log_term))


def _harnack_geometric_factor(d: int) -> float:
    """2^(2(d+2)+3) (1 + 2^(d+2)/(sqrt2-1)^(2(d+2))), as a logarithm."""
    k = d + 2
    return (2 * k + 3) * math.log(2.0) + math.log1p(
        math.exp(k * math.log(2.0) - 2 * k * math.log(math.sqrt(2.0) - 1)))


def log_h_from(d: int, log_c: float, sigma: SigmaResult) -> TowerScalar:
    """ln h = 4 c2 + c^3 * geometric factor * sigma for a given Moser-type constant c."""
    second = TowerScalar.from_log(3 * log_c + _harnack_geometric_factor(d) + sigma.log_value)
    return second + 4 * log_estimate_c2(d)


def harnack_h(p: ParamSet, sigma: SigmaResult | None = None) -> TowerScalar:
    """ln h with the simplified constant c0."""
    sigma = sigma or sigma_series(p.d)
    return log_h_from(p.d, log_c0(p), sigma)


def hbar(log_h: TowerScalar, lambda0: float, lambda1: float) -> TowerScalar:
    """ln hbar = (lambda1 + 1/lambda0) ln h."""
    if not lambda0 > 0:
        raise DomainError("lambda0 must be positive")
    if lambda1 < lambda0:
        raise DomainError("lambda1 must be >= lambda0")
    return log_h * (lambda1 + 1.0 / lambda0)


def holder_exponent(log_hbar: Real) -> TowerScalar:
    """nu = -log_4(1 - 1/hbar) from ln hbar.

    For hbar beyond the float range the first-order expansion
    nu ~ 1/(hbar ln 4) is used; the neglected part is below
    x^2/(2 ln 4) with x = 1/hbar, i.e. a relative error below x.
    """
    L = as_tower(log_hbar)
    if L.level == 0 and L.sign * L.mag < 700:
        lv = L.sign * L.mag
        if lv < math.log(4 / 3) - 1e-12:
            raise DomainError("hbar < 4/3")
        x = min(math.exp(-lv), 0.75)
        return TowerScalar.from_float(-math.log1p(-x) / LN4)
    return TowerScalar.from_log(-L - math.log(LN4))


def log_holder_exponent(log_hbar: Real) -> TowerScalar:
    """ln nu, which stays representable even when nu itself underflows."""
    L = as_tower(log_hbar)
    if L.level == 0 and L.sign * L.mag < 700:
        return holder_exponent(L).log()
    return -L - math.log(LN4)


def holder_expansion_error(log_hbar: Real) -> float:
    """Absolute bound on the neglected term of the large-hbar expansion."""
    L = as_tower(log_hbar)
    lx = -L.to_float()
    if lx < -700:
        return 0.0
    x = math.exp(lx)
    return x * x / (2 * LN4)


@dataclass(frozen=True)
class Cylinder:
    """(t_lo, t_hi) x {inner <= |x - center| < radius}."""
    t_lo: float
    t_hi: float
    radius: float
    center: Sequence[float] | float = 0.0
    inner: float = 0.0

    def center_vec(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.center, dtype=float))


def _center_gap(Q1: Cylinder, Q2: Cylinder) -> float:
    c1, c2 = Q1.center_vec(), Q2.center_vec()
    n = max(c1.size, c2.size)
    c1 = np.pad(c1, (0, n - c1.size))
    c2 = np.pad(c2, (0, n - c2.size))
    return float(np.linalg.norm(c1 - c2))


def parabolic_distance(Q1: Cylinder, Q2: Cylinder) -> float:
    """inf of |x-y| + |t-s|^(1/2) over Q1 and the parabolic boundary of Q2."""
    gap = _center_gap(Q1, Q2)
    inside_time = Q2.t_lo <= Q1.t_lo and Q1.t_hi <= Q2.t_hi
    inside_space = gap + Q1.radius <= Q2.radius
    if Q2.inner > 0:
        inside_space = inside_space and Q1.inner >= gap + Q2.inner
    if not (inside_time and inside_space):
        raise GeometryError("Q1 is not contained in Q2")
    candidates = [Q2.radius - Q1.radius - gap,
                  math.sqrt(min(Q1.t_lo - Q2.t_lo, Q2.t_hi - Q1.t_hi))]
    if Q2.inner > 0:
        candidates.append(Q1.inner - Q2.inner - gap)
    return min(candidates)


def holder_bound(nu: Real, dist: float, sup_norm: float) -> TowerScalar:
    """Coefficient 2 (128/dist)^nu ||v|| of the Hoelder continuity estimate."""
    if dist <= 0:
        raise GeometryError("distance must be positive")
    nu = as_tower(nu)
    return 2.0 * sup_norm * (nu * math.log(128.0 / dist)).exp()


@dataclass(frozen=True)
class HarnackConstants:
    sigma: float
    sigma_tail: float
    c0: TowerScalar
    c1_moser: TowerScalar
    c2_log: float
    log_h: TowerScalar
    log_h_verbose: TowerScalar
    log_h_chain: TowerScalar
    kappa0_log: TowerScalar
    kappa0_under_log: TowerScalar
    log_hbar: TowerScalar
    nu: TowerScalar
    log_nu: TowerScalar
    c0_ge_c1: bool


def harnack_constants(p: ParamSet, lambda0: float = 1.0, lambda1: float = 1.0) -> HarnackConstants:
    """All Harnack constants for dimension p.d.

    Besides ln h (with c0) this evaluates the constant obtained from the
    two Bombieri-Giusti applications (theta = 1/sqrt2 and theta = 1/2) and
    the verbose form with c1, so the chain
    ln kappa0 + ln kappa0_under <= verbose(c1) can be audited, and reports
    whether c0 >= c1 rather than assuming it.
    """
    d = p.d
    sig = sigma_series(d)
    lc0, lc1 = log_c0(p), log_moser_c1(p)
    c2 = log_estimate_c2(d)
    c1_scaled = TowerScalar.from_log(lc1 + 0.5 * (d + 2) * math.log(2.0))
    k0 = bgm_kappa0(d + 2, c1_scaled, c2, 1 / math.sqrt(2.0), sig.value)
    k0u = bgm_kappa0(d + 2, TowerScalar.from_log(lc1), c2, 0.5, sig.value)
    log_h = log_h_from(d, lc0, sig)
    lhb = hbar(log_h, lambda0, lambda1)
    return HarnackConstants(
        sigma=sig.value,
        sigma_tail=sig.tail_bound,
        c0=TowerScalar.from_log(lc0),
        c1_moser=TowerScalar.from_log(lc1),
        c2_log=c2,
        log_h=log_h,
        log_h_verbose=log_h_from(d, lc1, sig),
        log_h_chain=k0 + k0u,
        kappa0_log=k0,
        kappa0_under_log=k0u,
        log_hbar=lhb,
        nu=holder_exponent(lhb),
        log_nu=log_holder_exponent(lhb),
        c0_ge_c1=lc0 >= lc1,
    )
