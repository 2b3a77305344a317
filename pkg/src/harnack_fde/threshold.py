"""Threshold time after which a solution is uniformly close to the Barenblatt profile.

The pipeline goes from (d, m, eps, A, G) and the configured external
constants to the radii rho(eps), the times T(eps), the ellipticity bounds
lambda0/lambda1, the Hoelder exponent, the constant K, c_star and t_star.
Double-exponential quantities stay in :class:`TowerScalar` form and every
nu-dependent factor is built from ln nu, which is representable even when
nu underflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .core_params import ParamSet, barenblatt_mass
from .fde_bounds import (ConfigError, SmoothingConstants, mass_thresholds,
                         positivity_constants, smoothing_kappa_bar)
from .harnack import HarnackConstants, harnack_constants, hbar, log_holder_exponent
from .lognum import DomainError, TowerScalar, as_tower, tmax

LN2 = math.log(2.0)
# below this nu the direct 2^nu/(2^nu-1) loses digits to the expansion
NU_EXPANSION = 1e-8
EPS_GRID_POINTS = 10_000


@dataclass(frozen=True)
class ThresholdInputs:
    """Inputs of the threshold pipeline.

    ``M_over``, ``C_dnu1``, ``C_over`` and ``C_under`` are not derived here;
    they are reported with a "configured" provenance flag.
    """
    params: ParamSet
    eps: float
    A: float = 0.0
    G: float = 0.0
    M_over: Optional[float] = None
    C_dnu1: float = 1.0
    C_over: float = 1.0
    C_under: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if self.A < 0 or self.G < 0:
            raise DomainError("A and G must be nonnegative")
        if not (self.C_dnu1 > 0 and self.C_under > 0):
            raise ConfigError("configured constants must be positive")
        if self.C_over < self.C_under:
            raise ConfigError("C_over must be >= C_under")

    @property
    def eps_admissible_max(self) -> float:
        """chi * eta, the entropy-side cap on eps."""
        return self.params.chi * self.params.eta


def radius_R(t: float, alpha: float) -> float:
    """(1 + alpha t)^(1/alpha)."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    return (1.0 + alpha * t) ** (1.0 / alpha)


def _grow(eps, m):
    """(1+eps)^(1-m) - 1 without cancellation."""
    return np.expm1((1 - m) * np.log1p(eps))


def _shrink(eps, m):
    """1 - (1-eps)^(1-m) without cancellation."""
    return -np.expm1((1 - m) * np.log1p(-eps))


def rho_over(m: float, mu: float, eps: float) -> float:
    g = float(_grow(eps, m))
    return math.sqrt((g + 2.0) / g) / mu


def rho_over_sandwich(m: float, mu: float, eps: float) -> tuple[float, float]:
    """Closed-form lower and upper bounds on rho_over valid for eps in (0, 1/2)."""
    base = 1.0 / (mu * math.sqrt(eps) * math.sqrt(1 - m))
    return base, 4.0 * base


def rho_under(m: float, mu: float, eps: float, one_minus_eps_under) -> TowerScalar:
    """Lower-bound radius; ``one_minus_eps_under`` is 1 - eps_under as a tower."""
    L = as_tower(one_minus_eps_under).ln_float()
    log_x = (1 - m) * (math.log1p(-eps) - L)
    if not log_x > 0:
        raise DomainError("eps >= eps_under")
    # ln((1-eps)/(1-eps_under))^(1-m) - 1)
    log_num = log_x + math.log(-math.expm1(-log_x))
    log_pref = math.log(2.0 + float(_grow(eps, m))) - math.log(float(_shrink(eps, m)))
    return TowerScalar.from_log(0.5 * (log_pref + log_num) - math.log(mu))


@dataclass(frozen=True)
class RhoResult:
    rho_under: TowerScalar
    rho_over: float
    rho: TowerScalar
    over_lower: float
    over_upper: float


def rho_eps(inputs: ThresholdInputs, one_minus_eps_under) -> RhoResult:
    p, eps = inputs.params, inputs.eps
    ru = rho_under(p.m, p.mu, eps, one_minus_eps_under)
    ro = rho_over(p.m, p.mu, eps)
    lo, hi = rho_over_sandwich(p.m, p.mu, eps)
    return RhoResult(rho_under=ru, rho_over=ro, rho=tmax(ru, ro), over_lower=lo, over_upper=hi)


def c_time(p: ParamSet, kbar) -> TowerScalar:
    """max(1, 2^(5-m) kbar^(1-m) b^alpha)."""
    kbar = as_tower(kbar)
    log_v = (5 - p.m) * LN2 + (1 - p.m) * kbar.log() + p.alpha * math.log(p.b_const)
    return tmax(1.0, TowerScalar.from_log(log_v))


@dataclass(frozen=True)
class TimeResult:
    t0: float
    c: TowerScalar
    t_bar: TowerScalar
    T_under: float
    T_over: TowerScalar
    T: TowerScalar


def T_eps(inputs: ThresholdInputs, kbar, kappa_star: float) -> TimeResult:
    p, eps, A = inputs.params, inputs.eps, inputs.A
    t0 = A ** (1 - p.m)
    c = c_time(p, kbar)
    t_bar = c * t0
    T_over = t_bar * (2.0 / float(_grow(eps, p.m)))
    T_under = (kappa_star * (2 * A) ** (1 - p.m) + 2 / p.alpha) / float(_shrink(eps, p.m))
    return TimeResult(t0=t0, c=c, t_bar=t_bar, T_under=T_under, T_over=T_over,
                      T=tmax(T_under, T_over))


# -- ellipticity bounds ---------------------------------------------------

def barenblatt_shifted(p: ParamSet, t, r, k: float = 1.0):
    """B(t - 1/alpha, x; k^(alpha/(1-m)) M) at |x| = r, vectorised."""
    t, r = np.asarray(t, float), np.asarray(r, float)
    e = 1.0 / (1.0 - p.m)
    b = p.b_const
    return t**e * b ** (-p.alpha * e) * (t ** (2 / p.alpha) / (k * b) ** 2 + r * r) ** (-e)


@dataclass(frozen=True)
class EnvelopeBounds:
    """Natural logs of the envelope bounds."""
    log_sup_inner: float
    log_inf_inner: float
    log_sup_annulus: float
    log_inf_annulus: float
    log_sup_annulus_k1: float


def envelope_bounds(p: ParamSet) -> EnvelopeBounds:
    """Closed-form bounds of the Barenblatt envelopes over the two cylinders.

    Inner cylinder (1/4, 2) x B_8, annulus (1/4, 2) x (B_8 minus B_1/4),
    and the rescaled masses k^(alpha/(1-m)) M with k >= 1 on the annulus
    only. Increasing k increases the envelope, so the annulus sup over k is
    the k -> infinity limit and the inf over k is attained at k = 1; the
    inner cylinder uses k = 1. Both inf bounds and the k = 1 annulus sup
    combine separate extremes in t and are not attained.
    """
    m, a, b, d = p.m, p.alpha, p.b_const, p.d
    e = 1.0 / (1.0 - m)
    lb = math.log(b)
    sup_inner = d * lb + d / a * math.log(4.0)
    inf_inner = -e * (math.log(4.0) + a * lb + math.log(2.0 ** (2 / a) / b**2 + 64.0))
    sup_annulus = e * (math.log(32.0) - a * lb)
    sup_k1 = e * (LN2 - a * lb - math.log(1 / (b * b * 4.0 ** (2 / a)) + 1 / 16))
    return EnvelopeBounds(sup_inner, inf_inner, sup_annulus, inf_inner, sup_k1)


@dataclass(frozen=True)
class LambdaBounds:
    lambda0: float
    lambda1: float
    envelopes: Optional[EnvelopeBounds] = None


def lambdas_from_envelopes(m: float, log_sup: float, log_inf: float,
                           C_over: float, C_under: float) -> tuple[float, float]:
    """lambda0 = m (C_over sup)^(m-1), lambda1 = m (C_under inf)^(m-1), from logs."""
    lam0 = m * math.exp((m - 1) * (math.log(C_over) + log_sup))
    lam1 = m * math.exp((m - 1) * (math.log(C_under) + log_inf))
    if lam0 > lam1:
        raise ConfigError(f"lambda0 = {lam0} > lambda1 = {lam1}")
    return lam0, lam1


def lambda_bounds(p: ParamSet, C_over: float = 1.0, C_under: float = 1.0) -> LambdaBounds:
    """Ellipticity bounds of the linearised equation a = m u^(m-1)."""
    if not (C_over >= C_under > 0):
        raise ConfigError("need C_over >= C_under > 0")
    env = envelope_bounds(p)
    lam0, lam1 = lambdas_from_envelopes(
        p.m, max(env.log_sup_inner, env.log_sup_annulus),
        min(env.log_inf_inner, env.log_inf_annulus), C_over, C_under)
    return LambdaBounds(lam0, lam1, env)


# -- the constant K -------------------------------------------------------

def barenblatt_gradient_sup(p: ParamSet) -> float:
    """sup |grad B(1 - 1/alpha, .)| in closed form."""
    m = p.m
    return ((p.mu / p.alpha ** (1 / p.alpha)) ** (p.d + 1) * 2.0 ** (1 / (m - 1))
            / math.sqrt((1 - m) * (3 - m)) * ((3 - m) / (2 - m)) ** ((2 - m) / (1 - m)))


def c2_gradient(p: ParamSet) -> float:
    return 2.0 * max(p.b_const, barenblatt_gradient_sup(p))


def log_geometric_ratio(log_nu) -> tuple[TowerScalar, float]:
    """ln(2^nu/(2^nu-1)) from ln nu, with an absolute error bound.

    For nu >= NU_EXPANSION the direct form is used; below it
    -ln nu - ln ln 2 is returned, whose error is below nu ln2/2 <= nu/2.
    """
    ln_nu = as_tower(log_nu)
    nu = ln_nu.exp().to_float()
    if nu >= NU_EXPANSION:
        return TowerScalar.from_float(-math.log(-math.expm1(-nu * LN2))), 0.0
    return -ln_nu - math.log(LN2), 0.5 * nu


def theta_from_nu(d: int, log_nu) -> TowerScalar:
    """ln theta for theta = nu/(d+nu)."""
    ln_nu = as_tower(log_nu)
    nu = ln_nu.exp().to_float()
    return ln_nu - math.log(d + nu)


def mathsf_K(p: ParamSet, nu, theta, C_dnu1: float, kbar, mass: float,
             log_nu=None) -> TowerScalar:
    """The constant K of the inner uniform relative error estimate.

    ``nu`` and ``theta`` are TowerScalars; if ``nu`` underflowed pass
    ``log_nu``. ``theta`` only enters through float exponents here, where
    any value below float resolution acts as zero.
    """
    d, m, a, b, mu = p.d, p.m, p.alpha, p.b_const, p.mu
    ln_nu = as_tower(log_nu) if log_nu is not None else as_tower(nu).log()
    nu_f = as_tower(nu).to_float()
    th = as_tower(theta).to_float()
    kbar = as_tower(kbar)

    log_pref = ((3 * d / a + (3 + 6 * a) / (a * (1 - m)) + th + 10) * LN2
                + th * math.log(a + mass) - th * math.log(m)
                - (2 * (1 + th) + 2 / (1 - m)) * math.log(1 - m))
    ratio, _ = log_geometric_ratio(ln_nu)
    inner = (TowerScalar.from_log(kbar.log() + 2 / a * math.log(mass) + ratio)
             + c2_gradient(p))
    power = d / (d + nu_f)
    first = TowerScalar.from_log(inner.log() * power)
    second = TowerScalar.from_log(2 * d * math.log(mu) - d / a * math.log(a)
                                  + power * math.log(mass))
    bracket = 1.0 + b**d * C_dnu1 * (first + second)
    return TowerScalar.from_log(log_pref) * bracket


# -- c_star and t_star ----------------------------------------------------

def a_exponent(p: ParamSet, log_theta) -> TowerScalar:
    """a = (alpha/theta)(2-m)/(1-m); shared by t_star and kappa2."""
    return TowerScalar.from_log(math.log(p.alpha * (2 - p.m) / (1 - p.m)) - as_tower(log_theta))


def kappa2_parts(p: ParamSet, log_K, log_theta) -> tuple[TowerScalar, TowerScalar]:
    """(const, exponent) with ln kappa2(eps) = const + exponent * ln(1/eps).

    The exponent comes from :func:`a_exponent`, so the eps-powers of
    eps^a kappa2 cancel exactly.
    """
    alpha_over_theta = TowerScalar.from_log(math.log(p.alpha) - as_tower(log_theta))
    const = (p.alpha - 1) * math.log(4 * p.alpha) + alpha_over_theta * as_tower(log_K)
    return const, a_exponent(p, log_theta)


def log_kappa2(p: ParamSet, eps: float, log_K, log_theta) -> TowerScalar:
    """ln kappa2(eps); both summands are positive, so no cancellation occurs."""
    const, expo = kappa2_parts(p, log_K, log_theta)
    return const + expo * (-math.log(eps))


def log_eps_a_kappa2(p: ParamSet, eps: float, log_K, log_theta) -> TowerScalar:
    """ln(eps^a kappa2(eps)) with the eps-powers collected before the constant.

    At full scale the constant and the eps-terms agree to every stored
    digit of their level-2 magnitude, so summing in the other order would
    return a flagged approximate zero.
    """
    const, expo = kappa2_parts(p, log_K, log_theta)
    ln_eps = math.log(eps)
    return (a_exponent(p, log_theta) * ln_eps + expo * (-ln_eps)) + const


def _sup_on_interval(f, lo: float, hi: float, n: int = EPS_GRID_POINTS) -> tuple[float, float]:
    """Grid sup of ``f`` on a log-spaced grid, refined by bounded Brent search."""
    grid = np.geomspace(lo, hi, n)
    vals = f(grid)
    i = int(np.argmax(vals))
    best_x, best = float(grid[i]), float(vals[i])
    a, b = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n - 1)])
    if b > a:
        res = minimize_scalar(lambda x: -float(f(np.array([x]))[0]), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-12 * b})
        if -res.fun > best:
            best_x, best = float(res.x), float(-res.fun)
    return best_x, best


@dataclass(frozen=True)
class SupResult:
    value: TowerScalar
    grid_sup: TowerScalar
    argmax: float
    limit: TowerScalar


@dataclass(frozen=True)
class CStarResult:
    c_star: TowerScalar
    term1_over: SupResult
    term1_under: SupResult
    term2: TowerScalar
    term3: SupResult
    eps_lo: float
    eps_hi: float


def c_star(p: ParamSet, eps_md: float, c, kappa_star: float, log_K, log_theta) -> CStarResult:
    """sup over eps in (0, eps_md) of max(eps kappa1, eps^a kappa2, eps kappa3).

    eps kappa1 splits into two float shapes times constants; their sups
    and the sup of eps kappa3 are found on a grid with refinement and
    checked against the endpoint limits (the shapes are monotone, so the
    limits are the suprema over the open interval).
    """
    m, a = p.m, p.alpha
    lo, hi = eps_md * 1e-9, eps_md * (1 - 1e-9)
    c = as_tower(c)

    def over(e):
        return 8.0 * e / _grow(e, m)

    def under(e):
        return e / _shrink(e, m)

    x1, s1 = _sup_on_interval(over, lo, hi)
    lim1 = 8.0 * eps_md / float(_grow(eps_md, m))
    x2, s2 = _sup_on_interval(under, lo, hi)
    lim2 = 1.0 / (1.0 - m)
    k1u = 2.0 ** (3 - m) * kappa_star
    k3 = 8.0 / a
    t1o = SupResult(c * max(s1, lim1), c * s1, x1, c * lim1)
    t1u = SupResult(TowerScalar.from_float(k1u * max(s2, lim2)),
                    TowerScalar.from_float(k1u * s2), x2, TowerScalar.from_float(k1u * lim2))
    t3 = SupResult(TowerScalar.from_float(k3 * max(s2, lim2)),
                   TowerScalar.from_float(k3 * s2), x2, TowerScalar.from_float(k3 * lim2))
    t2 = TowerScalar.from_log(log_eps_a_kappa2(p, 0.5 * (lo + hi), log_K, log_theta))
    return CStarResult(tmax(t1o.value, t1u.value, t2, t3.value), t1o, t1u, t2, t3, lo, hi)


@dataclass(frozen=True)
class TStarResult:
    """t_star = c_star eps^(-a) (1 + A^(1-m) + G^(alpha/2)) with its ingredients.

    At full scale ln t_star is dominated by ln c_star far beyond float
    resolution, so comparisons between runs sharing c_star and a go
    through :meth:`log_ratio`, which is exact in that case.
    """
    c_star: TowerScalar
    a_exp: TowerScalar
    eps: float
    bracket: float
    log_t_star: TowerScalar
    t_star: TowerScalar

    def log_ratio(self, other: "TStarResult") -> TowerScalar:
        """ln(t_star / other.t_star)."""
        if self.c_star == other.c_star and self.a_exp == other.a_exp:
            return (self.a_exp * (math.log(other.eps) - math.log(self.eps))
                    + (math.log(self.bracket) - math.log(other.bracket)))
        return self.log_t_star - other.log_t_star

    def compare(self, other: "TStarResult") -> int:
        r = self.log_ratio(other)
        return r.sign


def t_star(c_star_value, a_exp, eps: float, A: float, G: float, p: ParamSet) -> TStarResult:
    bracket = 1.0 + A ** (1 - p.m) + G ** (p.alpha / 2)
    cs, ae = as_tower(c_star_value), as_tower(a_exp)
    log_t = cs.log() + ae * (-math.log(eps)) + math.log(bracket)
    ts = TowerScalar.from_log(log_t)
    return TStarResult(cs, ae, eps, bracket, log_t, ts)


# -- full pipeline ----------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    inputs: ThresholdInputs
    mass: float
    smoothing: SmoothingConstants
    kappa: TowerScalar
    kappa_star: float
    M_under: TowerScalar
    eps_under: float
    one_minus_eps_under: TowerScalar
    eps_over: Optional[float]
    eps_md: float
    rho: RhoResult
    times: TimeResult
    lambdas: LambdaBounds
    harnack: HarnackConstants
    log_hbar: TowerScalar
    log_nu: TowerScalar
    nu: TowerScalar
    log_theta: TowerScalar
    theta: TowerScalar
    c2_gradient: float
    K: TowerScalar
    cstar: CStarResult
    a_exp: TowerScalar
    tstar: TStarResult
    notes: dict = field(default_factory=dict)


def c_star_and_t_star(inputs: ThresholdInputs) -> tuple[TowerScalar, TowerScalar, TStarResult]:
    r = run_threshold(inputs)
    return r.cstar.c_star, r.a_exp, r.tstar


def run_threshold(inputs: ThresholdInputs) -> ThresholdResult:
    p = inputs.params
    mass = barenblatt_mass(p)
    sc = smoothing_kappa_bar(p)
    pos = positivity_constants(p, sc.kbar)
    thr = mass_thresholds(p, mass, pos.kappa, pos.kappa_star, inputs.M_over)
    eps = inputs.eps
    if not eps < thr.eps_md:
        raise DomainError(f"eps = {eps} >= eps_md = {thr.eps_md}")
    if not eps < inputs.eps_admissible_max:
        raise DomainError(f"eps = {eps} >= chi*eta = {inputs.eps_admissible_max}")

    rho = rho_eps(inputs, thr.one_minus_eps_under)
    times = T_eps(inputs, sc.kbar, pos.kappa_star)
    lam = lambda_bounds(p, inputs.C_over, inputs.C_under)
    hc = harnack_constants(p, lam.lambda0, lam.lambda1)
    lhb = hbar(hc.log_h, lam.lambda0, lam.lambda1)
    ln_nu = log_holder_exponent(lhb)
    nu = ln_nu.exp()
    ln_theta = theta_from_nu(p.d, ln_nu)
    theta = ln_theta.exp()
    K = mathsf_K(p, nu, theta, inputs.C_dnu1, sc.kbar, mass, log_nu=ln_nu)
    try:
        cs = c_star(p, thr.eps_md, times.c, pos.kappa_star, K.log(), ln_theta)
    except OverflowError as exc:
        raise OverflowError(
            f"c_star for d = {p.d}, m = {p.m} needs more than three tower levels "
            f"(ln hbar = {lhb!r})") from exc
    a_exp = a_exponent(p, ln_theta)
    ts = t_star(cs.c_star, a_exp, eps, inputs.A, inputs.G, p)
    notes = {
        "chi_alternative": p.chi_alternative,
        "eps_admissible_max": inputs.eps_admissible_max,
        "lambda_log_annulus_sup_k1": lam.envelopes.log_sup_annulus_k1,
    }
    return ThresholdResult(
        inputs=inputs, mass=mass, smoothing=sc, kappa=pos.kappa, kappa_star=pos.kappa_star,
        M_under=thr.M_under, eps_under=thr.eps_under,
        one_minus_eps_under=thr.one_minus_eps_under, eps_over=thr.eps_over,
        eps_md=thr.eps_md, rho=rho, times=times, lambdas=lam, harnack=hc, log_hbar=lhb,
        log_nu=ln_nu, nu=nu, log_theta=ln_theta, theta=theta, c2_gradient=c2_gradient(p),
        K=K, cstar=cs, a_exp=a_exp, tstar=ts, notes=notes,
    )
