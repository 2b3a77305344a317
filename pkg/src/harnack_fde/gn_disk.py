"""Shooting solver for the radial Euler-Lagrange equation of the disk inequality.

-u'' - u'/r + u = u^3 on (0, 1), u(0) = a, u'(0) = 0, with the shooting
function s(a) = u_a'(1). The admissible root changes sign exactly once on
(0, 1); the optimal constant is (2 pi int_0^1 u^4 r dr)^(-1/2).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq

from .entropy import RadialField

R0 = 1e-4
BLOWUP_GUARD = 1e6
MESH = 2001


class BlowupError(RuntimeError):
    """Solution escapes the guard before r = 1."""


class BracketError(ValueError):
    """No admissible sign change of s(a) in the bracket."""


@dataclass(frozen=True)
class ShootingResult:
    a: float
    s_of_a: float
    sign_changes: int
    profile: RadialField
    derivative: np.ndarray
    int_u4: float
    int_energy: float


def _rhs(r, y):
    u, up = y[0], y[1]
    return [up, u - u**3 - up / r, 2 * math.pi * u**4 * r, 2 * math.pi * (up * up + u * u) * r]


def _guard(r, y):
    return BLOWUP_GUARD - abs(y[0])


_guard.terminal = True


def _count_sign_changes(u: np.ndarray) -> int:
    s = np.sign(u)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _integrate(a: float, tol: float, r_eval: Optional[np.ndarray]):
    if not a > 0:
        raise ValueError("a must be positive")
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    c = (a - a**3) / 4
    # quadrature states start with their series values on [0, R0]
    y0 = [a + c * R0**2, 2 * c * R0, math.pi * a**4 * R0**2, math.pi * a * a * R0**2]
    sol = solve_ivp(_rhs, (R0, 1.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-3,
                    t_eval=r_eval, events=_guard)
    if sol.status == 1 or not sol.success:
        raise BlowupError(f"|u| exceeded {BLOWUP_GUARD:g} before r = 1 for a = {a}")
    return sol


def shoot(a: float, tol: float = 1e-10, mesh: int = MESH) -> ShootingResult:
    """Integrate from the two-term series start at r = R0 to r = 1."""
    sol = _integrate(a, tol, np.linspace(R0, 1.0, mesh))
    r = np.concatenate([[0.0], sol.t])
    u = np.concatenate([[a], sol.y[0]])
    up = np.concatenate([[0.0], sol.y[1]])
    return ShootingResult(a=a, s_of_a=float(sol.y[1, -1]), sign_changes=_count_sign_changes(u),
                          profile=RadialField(r, u, 2), derivative=up,
                          int_u4=float(sol.y[2, -1]), int_energy=float(sol.y[3, -1]))


def s_of_a(a: float, tol: float = 1e-10) -> float:
    """u_a'(1)."""
    return float(_integrate(a, tol, None).y[1, -1])


@dataclass(frozen=True)
class RootCandidate:
    a: float
    sign_changes: int
    admissible: bool


def find_roots(bracket: tuple[float, float], tol: float = 1e-10, n_scan: int = 48,
               xtol: float = 1e-12) -> list[RootCandidate]:
    """All sign changes of s on a scan of the bracket, polished by Brent's method."""
    lo, hi = bracket
    grid = np.linspace(lo, hi, n_scan + 1)
    vals = [s_of_a(a, tol) for a in grid]
    out = []
    for i in range(n_scan):
        if vals[i] == 0.0:
            root = grid[i]
        elif vals[i] * vals[i + 1] < 0:
            root = brentq(s_of_a, grid[i], grid[i + 1], args=(tol,), xtol=xtol, rtol=1e-15)
        else:
            continue
        k = shoot(root, tol).sign_changes
        out.append(RootCandidate(float(root), k, k == 1))
    return out


def find_a_star(bracket: tuple[float, float] = (5.0, 10.0), tol: float = 1e-10) -> float:
    """First root of s in the bracket whose profile changes sign exactly once."""
    for cand in find_roots(bracket, tol):
        if cand.admissible:
            return cand.a
    raise BracketError(f"no root with one sign change in {bracket}")


def optimal_constant(profile: RadialField) -> float:
    """(2 pi int_0^1 u^4 r dr)^(-1/2) by Simpson quadrature on the profile grid."""
    r, u = profile.grid, profile.values
    return float(2 * math.pi * simpson(u**4 * r, x=r)) ** -0.5


def energy_identity_residual(res: ShootingResult) -> float:
    """|2 pi int (u'^2 + u^2) r - 2 pi int u^4 r| / 2 pi int u^4 r, from Simpson quadrature."""
    r, u, up = res.profile.grid, res.profile.values, res.derivative
    i4 = simpson(u**4 * r, x=r)
    ie = simpson((up * up + u * u) * r, x=r)
    return float(abs(ie - i4) / i4)


def rayleigh_quotient(r: np.ndarray, u: np.ndarray, up: np.ndarray, R: float) -> float:
    """||u||^2_L4(B_R) / (||u'||^2_L2(B_R) + R^-2 ||u||^2_L2(B_R)) for radial u on [0, R]."""
    l4 = math.sqrt(2 * math.pi * simpson(u**4 * r, x=r))
    grad = 2 * math.pi * simpson(up * up * r, x=r)
    l2 = 2 * math.pi * simpson(u * u * r, x=r)
    return l4 / (grad + l2 / R**2)


@dataclass(frozen=True)
class DiskConstant:
    a_star: float
    C: float
    C_ode: float
    energy_residual: float
    result: ShootingResult


def disk_constant(bracket: tuple[float, float] = (5.0, 10.0), tol: float = 1e-10) -> DiskConstant:
    a = find_a_star(bracket, tol)
    res = shoot(a, tol)
    return DiskConstant(a_star=a, C=optimal_constant(res.profile), C_ode=res.int_u4 ** -0.5,
                        energy_residual=energy_identity_residual(res), result=res)


def sweep(a_lo: float, a_hi: float, n: int, tol: float = 1e-10) -> np.ndarray:
    """(a, s(a)) rows; entries where the solution blows up get s = nan."""
    rows = []
    for a in np.linspace(a_lo, a_hi, n):
        try:
            rows.append((a, s_of_a(a, tol)))
        except BlowupError:
            rows.append((a, math.nan))
    return np.array(rows)


def sweep_csv(rows: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "s"])
    for a, s in rows:
        w.writerow([repr(float(a)), repr(float(s))])
    return buf.getvalue()
