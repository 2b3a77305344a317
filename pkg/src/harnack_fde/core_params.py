"""Admissible (d, m) regimes and the derived scalar parameters."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class RangeError(ValueError):
    """Exponent m outside the interval admitted for the requested use."""


class DimensionError(ValueError):
    """Dimension d < 1."""


class Profile(enum.Enum):
    FDE_BOUNDS = "fde_bounds"
    ENTROPY = "entropy"
    THRESHOLD = "threshold"


def admissible_interval(d: int, profile: Profile = Profile.THRESHOLD) -> tuple[float, float]:
    """Open interval of admitted m for dimension d under ``profile``."""
    if d >= 2:
        return (d - 1) / d, 1.0
    if profile is Profile.FDE_BOUNDS:
        return 0.0, 1.0
    return 1.0 / 3.0, 1.0


def omega(d: int) -> float:
    """Surface area of the unit sphere in R^d, 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def log_omega(d: int) -> float:
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(d / 2)


def sobolev_constant(d: int, m: float) -> float:
    """Sobolev-type constant K of the smoothing estimates, by dimension."""
    if d < 1:
        raise DimensionError(f"d = {d} < 1")
    if d >= 3:
        return 2.0 / math.pi * math.exp(math.lgamma(d / 2 + 1) * 2.0 / d)
    if d == 2:
        return 2.0 / math.sqrt(math.pi)
    return 2.0 ** (1 + m / 2) * max(2 * (2 - m) / (m * math.pi**2), 0.25)


def sobolev_constant_moser(d: int) -> float:
    """Same constant with the fixed exponent p used by the Moser iteration.

    Differs from :func:`sobolev_constant` only for d = 1, where p = 8.
    """
    if d != 1:
        return sobolev_constant(d, 0.5)
    p = 8.0
    return 2.0 ** (1 + 2 / p) * max((p - 2) / math.pi**2, 0.25)


@dataclass(frozen=True)
class ParamSet:
    d: int
    m: float
    m1: float
    mc: float
    alpha: float
    mu: float
    b_const: float
    gamma_moser: float
    beta_smoothing: float
    q_exp: float
    p_m: float
    p_moser: float
    eta: float
    chi: float
    omega_d: float
    K: float
    profile: Profile = Profile.THRESHOLD

    @property
    def chi_alternative(self) -> float:
        """The alternative choice m/(266+56m), recorded for reports."""
        return self.m / (266 + 56 * self.m)


def derive_params(d: int, m: float, profile: Profile | str = Profile.THRESHOLD) -> ParamSet:
    """Validate (d, m) for ``profile`` and compute all derived parameters."""
    profile = Profile(profile)
    if float(d) != int(d):
        raise DimensionError(f"d = {d} is not an integer")
    d = int(d)
    if d < 1:
        raise DimensionError(f"d = {d} < 1")
    lo, hi = admissible_interval(d, profile)
    if not (lo < m < hi):
        raise RangeError(f"m = {m} outside ({lo:g}, {hi:g}) for d = {d}, {profile.value}")

    alpha = 2.0 - d * (1.0 - m)
    if d >= 3:
        gamma = (d + 2) / d
        beta = alpha
        q = d / 2
        p_m = 2 * d / (d - 2)
        p_moser = p_m
    elif d == 2:
        gamma = 5.0 / 3.0
        beta = 2 * (alpha - 1)
        q = 2.0
        p_m = 4.0
        p_moser = 4.0
    else:
        gamma = 5.0 / 3.0
        beta = 2 * m / (2 - m)
        q = 2 / (2 - m)
        p_m = 4 / m
        p_moser = 8.0
    mu = ((1 - m) / (2 * m)) ** (1 / alpha)
    b_const = ((1 - m) / (2 * m * alpha)) ** (1 / alpha)
    return ParamSet(
        d=d,
        m=m,
        m1=(d - 1) / d,
        mc=(d - 2) / d,
        alpha=alpha,
        mu=mu,
        b_const=b_const,
        gamma_moser=gamma,
        beta_smoothing=beta,
        q_exp=q,
        p_m=p_m,
        p_moser=p_moser,
        eta=2 * d * (m - (d - 1) / d),
        chi=1 / 322 if d >= 2 else m / (266 + 56 * m),
        omega_d=omega(d),
        K=sobolev_constant(d, m),
        profile=profile,
    )


def barenblatt_mass(p: ParamSet) -> float:
    """Mass of (1+|x|^2)^(1/(m-1)) over R^d; finite iff m > (d-2)/d."""
    e = 1.0 / (1.0 - p.m)
    if e <= p.d / 2:
        raise RangeError("Barenblatt profile has infinite mass for m <= (d-2)/d")
    a, b = p.d / 2, e - p.d / 2
    return 0.5 * p.omega_d * math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
