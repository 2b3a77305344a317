"""Explicit constants of the local estimates for the fast diffusion equation.

Herrero-Pierre L1 estimate, the L1-Linfty smoothing constant, the
positivity constants, the Aleksandrov constant and the mass thresholds.
Constants carrying a 1/(1-m) exponent are assembled on logarithms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core_params import ParamSet, log_omega
from .lognum import TowerScalar, as_tower, tmax, tmin

LN2 = math.log(2.0)


class ConfigError(ValueError):
    """Inputs produce an inconsistent configuration."""


def log_series(r: float, rel_tol: float = 1e-15) -> tuple[float, float]:
    """sum_{j>=0} log(j+1) r^j and a bound on the neglected tail.

    The term ratio r log(j+2)/log(j+1) decreases to r, so once it is
    below one the tail after term J is at most t_J rho/(1-rho).
    """
    if not 0 < r < 1:
        raise ValueError("ratio must lie in (0, 1)")
    terms = [0.0]
    j = 1
    while True:
        t = math.log(j + 1) * r**j
        terms.append(t)
        rho = r * math.log(j + 2) / math.log(j + 1)
        s = math.fsum(terms)
        if rho < 1:
            tail = t * rho / (1 - rho)
            if tail <= rel_tol * s:
                return s, tail
        j += 1


def herrero_pierre_log_c3(p: ParamSet, rho0: float) -> float:
    m, d = p.m, p.d
    return (m / (1 - m) * LN2 + log_omega(d)
            + math.log(16 * (d + 1) * (3 + m) / (1 - m)) / (1 - m)
            + math.log(rho0 + 1))


def herrero_pierre_c3(p: ParamSet, rho0: float) -> TowerScalar:
    """2^(m/(1-m)) omega_d (16(d+1)(3+m)/(1-m))^(1/(1-m)) (rho0+1)."""
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    return TowerScalar.from_log(herrero_pierre_log_c3(p, rho0))


def aleksandrov_Ad(d: int) -> float:
    """omega_d 4^(d-1)."""
    return math.exp(log_omega(d)) * 4.0 ** (d - 1)


def _logaddexp(*xs: float) -> float:
    return float(np.logaddexp.reduce(np.asarray(xs, dtype=float)))


@dataclass(frozen=True)
class SmoothingConstants:
    kbar: TowerScalar
    kbar_alt: TowerScalar
    k_aux: TowerScalar
    X_aux: TowerScalar
    xi: float
    frakC: TowerScalar
    scrC: TowerScalar
    C2: TowerScalar
    C3: TowerScalar
    A_d: float
    c3_hp: TowerScalar
    log_series_sum: float
    log_series_tail: float


def smoothing_kappa_bar(p: ParamSet) -> SmoothingConstants:
    """Constant of the local L1-Linfty smoothing estimate and its pieces.

    ``kbar`` is k K^(2q/beta) with the closed form of k^beta; ``kbar_alt``
    is the bracketed assembly from the iteration constants (frakC, scrC).
    """
    d, m, beta, q, K = p.d, p.m, p.beta_smoothing, p.q_exp, p.K
    lw = log_omega(d)
    r = q / (q + 1)
    S, S_tail = log_series(r)

    log_a = _logaddexp(
        math.log(3.0) + math.log(16 * (d + 1) * (3 + m)) / (1 - m)
        - math.log(2 - m) - m / (1 - m) * math.log(1 - m),
        (d - m * (d + 1)) / (1 - m) * LN2 - d * math.log(3.0) - math.log(d),
    )
    xi = (2.0 / 3.0) ** (beta / (4 * (q + 1)))
    log_b = 2 * (q + 1) * math.log(38.0) - 4 * (q + 1) * math.log1p(-xi)
    log_k_beta = (beta * math.log(4 * beta / (beta + 2)) + 2 * math.log(4 / (beta + 2))
                  + 8 * (q + 1) * math.log(math.pi) + 8 * S
                  + 2 * m / (1 - m) * LN2 + 2 * _logaddexp(0.0, log_a + lw) + log_b)
    log_k = log_k_beta / beta
    log_kbar = log_k + 2 * q / beta * math.log(K)

    # iteration route: X, frakC, scrC and the bracket
    S1 = r * S  # sum_{j>=1} r^j log j
    log_X = (math.log(beta / (beta + 2)) + 2 / beta * math.log(4 / (beta + 2))
             + 2 * q / beta * math.log(K) + 8 * (q + 1) / (q * beta) * (q * math.log(math.pi) + S1))
    log_frakC = math.log(4.0) + 2 * (q + 1) / beta * (math.log(38.0) - 2 * math.log1p(-xi)) + log_X
    log_scrC = herrero_pierre_log_c3(p, 2.0)
    bracket = _logaddexp(m / (1 - m) * LN2,
                         math.log((1 - m) / (2 - m)) + log_scrC,
                         d * math.log(2 / 3) + lw - math.log(d))
    log_kbar_alt = log_frakC + 2 / beta * bracket

    kbar = TowerScalar.from_log(log_kbar)
    C2 = 2.0**d * tmax(1.0, TowerScalar.from_log(log_kbar + lw - math.log(d)))
    log_hp = math.log(16 * (d + 1) * (3 + m) / (1 - m)) / (1 - m)
    C3 = TowerScalar.from_log(math.log(16 / (1 - m)) / (1 - m)) * tmax(
        1.0, TowerScalar.from_log(LN2 + lw + log_hp))
    return SmoothingConstants(
        kbar=kbar,
        kbar_alt=TowerScalar.from_log(log_kbar_alt),
        k_aux=TowerScalar.from_log(log_k),
        X_aux=TowerScalar.from_log(log_X),
        xi=xi,
        frakC=TowerScalar.from_log(log_frakC),
        scrC=TowerScalar.from_log(log_scrC),
        C2=C2,
        C3=C3,
        A_d=aleksandrov_Ad(d),
        c3_hp=herrero_pierre_c3(p, 2.0),
        log_series_sum=S,
        log_series_tail=S_tail,
    )


def bracket_checks(p: ParamSet, sc: SmoothingConstants) -> dict:
    """Lower/upper brackets for C2 and C3; both lower bounds for C3 are reported."""
    d, m = p.d, p.m
    c2_hi = 2.0**d * sc.kbar * math.pi**2
    c3_hi = TowerScalar.from_log(2 / (1 - m) * math.log(128 * d / (1 - m))) * (4 * math.pi**3)
    return {
        "C2_lower": bool(sc.C2 >= 2.0**d),
        "C2_upper": bool(sc.C2 <= c2_hi),
        "C3_lower_4d": bool(sc.C3 >= TowerScalar.from_log(d * math.log(4 * d))),
        "C3_lower_16d": bool(sc.C3 >= TowerScalar.from_log(d * math.log(16 * d))),
        "C3_upper": bool(sc.C3 <= c3_hi),
    }


@dataclass(frozen=True)
class PositivityConstants:
    kappa: TowerScalar
    kappa_star: float
    M_under: Optional[TowerScalar] = None
    eps_under: Optional[float] = None
    one_minus_eps_under: Optional[TowerScalar] = None
    eps_over: Optional[float] = None
    eps_md: Optional[float] = None


def kappa_star(p: ParamSet) -> float:
    """2^(3 alpha + 2) d^alpha."""
    return 2.0 ** (3 * p.alpha + 2) * p.d**p.alpha


def positivity_constants(p: ParamSet, kbar) -> PositivityConstants:
    """kappa (in log space) and kappa_star of the local lower bound."""
    d, m, a = p.d, p.m, p.alpha
    kbar = as_tower(kbar)
    if kbar.sign <= 0:
        raise ValueError("kbar must be positive")
    bracket = (4 * math.log(1 - m) - 38 * LN2 - 4 * math.log(d)
               - 16 * (1 - m) * a * math.log(math.pi)) - a * a * (1 - m) * kbar.log()
    log_kappa = math.log(a) + log_omega(d) + 2 / ((1 - m) ** 2 * a * d) * bracket
    return PositivityConstants(kappa=TowerScalar.from_log(log_kappa), kappa_star=kappa_star(p))


def mass_thresholds(p: ParamSet, mass: float, kappa, kappa_star: float,
                    M_over: Optional[float] = None) -> PositivityConstants:
    """Lower mass M_under and the relative-error thresholds eps_under, eps_over, eps_md."""
    d, m, a, b = p.d, p.m, p.alpha, p.b_const
    if mass <= 0:
        raise ValueError("mass must be positive")
    kappa = as_tower(kappa)
    lk = kappa.log()
    first = 0.5 * a * (lk - d * math.log(b)) - 0.5 * d * LN2
    second = lk - 0.5 * d * math.log(d * (1 - m)) - a / (2 * (1 - m)) * math.log(a)
    log_M = tmin(first, second) + math.log(kappa_star) / (1 - m) + 2 * math.log(mass)
    log_ratio = log_M - math.log(mass)
    if log_ratio >= 0:
        raise ConfigError("M_under / mass >= 1, so eps_under <= 0")
    log_one_minus = log_ratio * (2 / a)
    one_minus = TowerScalar.from_log(log_one_minus)
    eps_under = -math.expm1(log_one_minus.to_float())
    eps_over = None
    candidates = [eps_under, 0.5]
    if M_over is not None:
        if M_over <= mass:
            raise ConfigError("M_over must exceed the Barenblatt mass")
        eps_over = (M_over / mass) ** (2 / a) - 1
        candidates.append(eps_over)
    return PositivityConstants(
        kappa=kappa, kappa_star=kappa_star, M_under=TowerScalar.from_log(log_M),
        eps_under=eps_under, one_minus_eps_under=one_minus, eps_over=eps_over,
        eps_md=min(candidates),
    )


def rmax_admissible(d: int) -> bool:
    """32 d >= 2^((d-1)/d) - 1."""
    return 32 * d >= 2 ** ((d - 1) / d) - 1
