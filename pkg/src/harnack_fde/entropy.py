"""Relative entropy, Fisher information and their linearisations by radial quadrature.

All integrals over R^d of radial functions are omega_d * int f(r) r^(d-1) dr,
evaluated with the composite trapezoid rule on a grid r = c sinh(s) with s
uniform (uniform near the origin, geometric in the tail). Error estimates
come from Richardson extrapolation against the every-other-node subgrid.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core_params import ParamSet, barenblatt_mass
from .lognum import DomainError

# v/B must stay within these bounds for the tails to be controlled by B
DECAY_LO, DECAY_HI = 1e-6, 1e6
# below this |u| the free-energy density uses its Taylor series
TAYLOR_CUT = 1e-3


class DecayError(ValueError):
    """Field does not have Barenblatt-comparable decay on the grid."""


class TubeError(ValueError):
    """Field leaves the (1 +- eps) Barenblatt tube."""


class ToleranceError(ValueError):
    """An orthogonality precondition fails beyond tolerance."""


@dataclass(frozen=True)
class RadialField:
    grid: np.ndarray
    values: np.ndarray
    d: int

    def __post_init__(self):
        r = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", r)
        object.__setattr__(self, "values", v)
        if r.ndim != 1 or r.shape != v.shape:
            raise ValueError("grid and values must be 1-d of equal length")
        if r.size < 17:
            raise ValueError("need at least 17 nodes")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValueError("grid must start at 0 and increase strictly")
        if self.d < 1:
            raise ValueError("d must be >= 1")

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, values, self.d)

    def coarse(self) -> "RadialField":
        """Every other node; the last node is kept when the count is odd."""
        return RadialField(self.grid[::2], self.values[::2], self.d)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "value"])
        for r, v in zip(self.grid, self.values):
            w.writerow([repr(float(r)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, d: int) -> "RadialField":
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["r", "value"]:
            raise ValueError("header must be 'r,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls(data[:, 0], data[:, 1], d)


# -- Barenblatt profiles -----------------------------------------------------

def barenblatt(r, p: ParamSet, t: Optional[float] = None, mass_scale: Optional[float] = None):
    """Static profile (1 + r^2)^(1/(m-1)), or B(t - 1/alpha, r; k^(alpha/(1-m)) M).

    With ``t`` given the time-dependent form is returned; ``mass_scale`` is
    the factor k (default 1).
    """
    r = np.asarray(r, dtype=float)
    e = 1.0 / (p.m - 1.0)
    if t is None:
        return (1.0 + r * r) ** e
    if t <= 0:
        raise DomainError("t must be positive")
    k = 1.0 if mass_scale is None else mass_scale
    b, a = p.b_const, p.alpha
    return t ** (-e) * b ** (a * e) * (t ** (2 / a) / (k * b) ** 2 + r * r) ** e


def tail_bound(p: ParamSet, r_max: float, power: float) -> float:
    """omega_d int_{r_max}^inf r^(d-1) (1+r^2)^(-power) dr, bounded by r^(d-2 power)/(2 power - d)."""
    s = 2 * power - p.d
    if s <= 0:
        return math.inf
    return p.omega_d * r_max ** (-s) / s


def radial_grid(p: ParamSet, n: int = 4097, r_max: Optional[float] = None,
                tail_tol: float = 1e-10, scale: float = 1.0) -> np.ndarray:
    """Nodes r = scale * sinh(s), s uniform, with r_max chosen from the tail of B^m.

    The free-energy density decays like B^m (1+r^2)^0 times a bounded factor,
    so r_max is picked with tail_bound(B^m) < tail_tol * mass.
    """
    if r_max is None:
        power = p.m / (1 - p.m)
        s = 2 * power - p.d
        if s <= 0:
            raise DecayError("m <= d/(d+2): the entropy tails are not integrable")
        target = tail_tol * barenblatt_mass(p) * s / p.omega_d
        r_max = max(target ** (-1.0 / s), 10.0)
    s = np.linspace(0.0, math.asinh(r_max / scale), n)
    r = scale * np.sinh(s)
    r[0] = 0.0
    return r


def integrate(field_values, grid, d: int) -> float:
    """omega_d * trapezoid(f r^(d-1))."""
    w = np.asarray(field_values) * np.asarray(grid) ** (d - 1)
    log_omega = math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(d / 2)
    return math.exp(log_omega) * float(np.trapezoid(w, grid))


def _with_error(fn: Callable[[RadialField], float], v: RadialField) -> tuple[float, float]:
    """Richardson value on the fine grid and |fine - coarse|/3 as error estimate."""
    fine = fn(v)
    coarse = fn(v.coarse())
    return fine, abs(fine - coarse) / 3.0


def mass(v: RadialField) -> float:
    return integrate(v.values, v.grid, v.d)


def _ratio_checked(v: RadialField, p: ParamSet) -> tuple[np.ndarray, np.ndarray]:
    B = barenblatt(v.grid, p)
    q = v.values / B
    if np.any(~np.isfinite(q)) or q.min() < DECAY_LO or q.max() > DECAY_HI:
        raise DecayError("v/B leaves [%g, %g] on the grid" % (DECAY_LO, DECAY_HI))
    return B, q - 1.0


def _entropy_density(u: np.ndarray, m: float) -> np.ndarray:
    """((1+u)^m - 1 - m u)/(m - 1), with a Taylor series for small |u|."""
    out = np.empty_like(u)
    small = np.abs(u) < TAYLOR_CUT
    us = u[small]
    # m/2 u^2 + m(m-2)/6 u^3 + m(m-2)(m-3)/24 u^4 + m(m-2)(m-3)(m-4)/120 u^5
    out[small] = m * us * us * (0.5 + us * ((m - 2) / 6 + us * ((m - 2) * (m - 3) / 24
                                + us * (m - 2) * (m - 3) * (m - 4) / 120)))
    ub = u[~small]
    out[~small] = (np.expm1(m * np.log1p(ub)) - m * ub) / (m - 1)
    return out


def _free_energy_raw(v: RadialField, p: ParamSet) -> float:
    B, u = _ratio_checked(v, p)
    return integrate(B**p.m * _entropy_density(u, p.m), v.grid, v.d)


def _fisher_raw(v: RadialField, p: ParamSet) -> float:
    B, u = _ratio_checked(v, p)
    m = p.m
    # v^(m-1) - B^(m-1) = B^(m-1) ((1+u)^(m-1) - 1)
    diff = B ** (m - 1) * np.expm1((m - 1) * np.log1p(u))
    grad = np.gradient(diff, v.grid, edge_order=2)
    return m / (1 - m) * integrate(v.values * grad * grad, v.grid, v.d)


def free_energy(v: RadialField, p: ParamSet) -> tuple[float, float]:
    """Relative entropy of v with respect to B and a quadrature error estimate."""
    return _with_error(lambda w: _free_energy_raw(w, p), v)


def fisher_information(v: RadialField, p: ParamSet) -> tuple[float, float]:
    """Relative Fisher information and a quadrature error estimate."""
    return _with_error(lambda w: _fisher_raw(w, p), v)


def _lin_raw(g: RadialField, p: ParamSet) -> tuple[float, float]:
    B = barenblatt(g.grid, p)
    m = p.m
    F = 0.5 * m * integrate(g.values**2 * B ** (2 - m), g.grid, g.d)
    dg = np.gradient(g.values, g.grid, edge_order=2)
    I = m * (1 - m) * integrate(dg * dg * B, g.grid, g.d)
    return F, I


@dataclass(frozen=True)
class LinearizedResult:
    F: float
    I: float
    F_err: float
    I_err: float
    mean: float


def linearized_functionals(g: RadialField, p: ParamSet, require_mean_zero: bool = False,
                           tol: float = 1e-8) -> LinearizedResult:
    """Quadratic forms m/2 int g^2 B^(2-m) and m(1-m) int |g'|^2 B.

    ``mean`` is int g B^(2-m) relative to int |g| B^(2-m); with
    ``require_mean_zero`` it must be below ``tol``.
    """
    B = barenblatt(g.grid, p)
    w = B ** (2 - p.m)
    scale = integrate(np.abs(g.values) * w, g.grid, g.d)
    mean = integrate(g.values * w, g.grid, g.d) / scale if scale > 0 else 0.0
    if require_mean_zero and abs(mean) > tol:
        raise ToleranceError(f"int g B^(2-m) = {mean:.3e} (relative) exceeds {tol:.1e}")
    F, I = _lin_raw(g, p)
    Fc, Ic = _lin_raw(g.coarse(), p)
    return LinearizedResult(F, I, abs(F - Fc) / 3, abs(I - Ic) / 3, mean)


def mean_zero_shift(values: np.ndarray, grid: np.ndarray, p: ParamSet) -> np.ndarray:
    """Subtract the constant that makes int g B^(2-m) vanish under the same quadrature."""
    w = barenblatt(grid, p) ** (2 - p.m)
    c = integrate(values * w, grid, p.d) / integrate(w, grid, p.d)
    return values - c


# -- improvement functions ---------------------------------------------------

@dataclass(frozen=True)
class Improvement:
    s1: float
    s2: float
    f: float
    g_aux: float
    h_aux: float


def improvement_functions(eps: float, p: ParamSet) -> Improvement:
    """s1, s2 and the improved constant f(eps), plus the two helper shapes of the proof."""
    if not 0 <= eps < 0.5:
        raise DomainError("eps must lie in [0, 1/2)")
    d, m, al = p.d, p.m, p.alpha
    a = 2 - m
    s1 = (1 + eps) ** (2 * a) / (1 - eps)
    ratio_m1 = math.expm1(2 * a * (math.log1p(eps) - math.log1p(-eps)))
    s2 = 2 * d / m * (1 - m) ** 2 * ratio_m1
    f = (4 * al * (1 - eps) ** a - 4 * s1 - (1 + eps) ** a * s2) / s1
    g_aux = -math.expm1((1 + a) * math.log1p(-eps) - 2 * a * math.log1p(eps))
    h_aux = (1 - eps) / (1 + eps) ** a * ratio_m1
    return Improvement(s1, s2, f, g_aux, h_aux)


def improved_constant(p: ParamSet) -> float:
    """eta = 2 d (m - m1)."""
    return p.eta


# -- perturbations -------------------------------------------------------------

def bump(r: np.ndarray, center: float, width: float, kind: str = "gauss") -> np.ndarray:
    z = (r - center) / width
    if kind == "gauss":
        return np.exp(-z * z)
    if kind == "cos":
        return np.where(np.abs(z) < 1, np.cos(0.5 * math.pi * z) ** 2, 0.0)
    raise ValueError(f"unknown bump {kind!r}")


@dataclass(frozen=True)
class Perturbation:
    field: RadialField
    scale: float
    eps_tube: float


def tube_perturbation(p: ParamSet, grid: np.ndarray, amplitudes, centers, widths,
                      kind: str = "gauss") -> Perturbation:
    """v = B (1 + sum_i a_i bump_i) rescaled to the quadrature mass of B.

    Returns the multiplicative factor and the tube half-width max|v/B - 1|
    measured after rescaling.
    """
    B = barenblatt(grid, p)
    psi = np.zeros_like(grid)
    for a, c, w in zip(np.atleast_1d(amplitudes), np.atleast_1d(centers), np.atleast_1d(widths)):
        psi += a * bump(grid, c, w, kind)
    v = B * (1.0 + psi)
    if np.any(v <= 0):
        raise TubeError("perturbation makes v nonpositive")
    scale = integrate(B, grid, p.d) / integrate(v, grid, p.d)
    v = v * scale
    return Perturbation(RadialField(grid, v, p.d), scale, float(np.max(np.abs(v / B - 1))))


def quadratization_field(p: ParamSet, g: RadialField, eps: float) -> RadialField:
    """B + eps B^(2-m) g on the grid of g."""
    B = barenblatt(g.grid, p)
    return g.with_values(B + eps * B ** (2 - p.m) * g.values)


def relative_perturbation(v: RadialField, p: ParamSet) -> RadialField:
    """g = v B^(m-2) - B^(m-1)."""
    B = barenblatt(v.grid, p)
    return v.with_values(B ** (p.m - 2) * (v.values - B))


# -- the improved inequality ---------------------------------------------------

@dataclass(frozen=True)
class EEPVerdict:
    I: float
    F: float
    I_err: float
    F_err: float
    ratio: float
    target: float
    slack: float
    error_bar: float
    passed: bool
    sandwich_lower: bool
    sandwich_upper: bool
    fisher_sandwich: Optional[bool]  # None when eps_tube >= 1/2, outside the helpers' range
    eps_tube: float


def eep_check(v: RadialField, eps_tube: float, p: ParamSet,
              target: Optional[float] = None) -> EEPVerdict:
    """Check I[v] >= (4 + eta) F[v] inside the (1 +- eps_tube) tube.

    ``target`` overrides 4 + eta, e.g. with 4 for the plain inequality
    (then the tube restriction to eps_tube < chi eta is not applied).
    Passing means slack = I - target F exceeds the combined error bar.
    """
    B = barenblatt(v.grid, p)
    rel = np.abs(v.values / B - 1.0)
    if rel.max() > eps_tube * (1 + 1e-12):
        raise TubeError(f"max |v/B - 1| = {rel.max():.3e} > eps = {eps_tube:.3e}")
    if target is None:
        if p.d == 1 and p.m <= 0.5:
            raise DomainError("the improved inequality needs m > 1/2 in dimension 1")
        if not eps_tube < p.chi * p.eta:
            raise DomainError(f"eps = {eps_tube} >= chi eta = {p.chi * p.eta}")
        target = 4 + p.eta
    I, I_err = fisher_information(v, p)
    F, F_err = free_energy(v, p)
    slack = I - target * F
    bar = I_err + target * F_err
    g = relative_perturbation(v, p)
    lin = linearized_functionals(g, p)
    a = 2 - p.m
    tol_F = F_err + (1 + eps_tube) ** -a * lin.F_err
    low = (1 + eps_tube) ** -a * lin.F <= F + tol_F
    high = F <= (1 - eps_tube) ** -a * lin.F + F_err + (1 - eps_tube) ** -a * lin.F_err
    fish = None
    if eps_tube < 0.5:
        imp = improvement_functions(eps_tube, p)
        fish = bool(lin.I <= imp.s1 * I + imp.s2 * lin.F + lin.I_err + imp.s1 * I_err
                    + imp.s2 * lin.F_err)
    ratio = I / F if F > 0 else math.inf
    return EEPVerdict(I, F, I_err, F_err, ratio, target, slack, bar, slack >= bar,
                      bool(low), bool(high), fish, eps_tube)
