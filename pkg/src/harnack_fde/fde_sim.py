"""Radial solver for u_t = Laplacian(u^m) and checks of the local estimates.

Vertex-centred finite volumes on a uniform radial grid: node i owns the
shell between the faces r_{i-1/2} and r_{i+1/2}, whose volume (up to
omega_d) is (r_{i+1/2}^d - r_{i-1/2}^d)/d, and the flux through a face is
r_face^(d-1) (w_{i+1} - w_i)/h with w = u^m. Zero flux at both ends, so
the discrete mass sum V_i u_i is conserved up to the nonlinear solver
tolerance. Backward Euler in time; the implicit system is solved by
Newton on w (the Jacobian is a tridiagonal M-matrix, hence the scheme is
monotone), with a lagged-coefficient fixed point as fallback and step
halving on failure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .core_params import ParamSet, derive_params, Profile, log_omega
from .entropy import RadialField, barenblatt, bump
from .fde_bounds import aleksandrov_Ad, herrero_pierre_c3
from .lognum import TowerScalar, as_tower

U_FLOOR = 1e-14


class StabilityError(RuntimeError):
    """Time step rejected repeatedly."""


class NonPositivityError(ValueError):
    """Initial data has negative values."""


class HypothesisError(ValueError):
    """Geometric hypothesis of an inequality is not met."""


class WindowError(ValueError):
    """Time outside the validity window of the lower bound."""


class SupportError(ValueError):
    """Initial data is not supported where the inequality requires it."""


@dataclass(frozen=True)
class SolverConfig:
    d: int
    m: float
    r_max: float
    N: int
    t_end: float
    times: tuple = ()
    dt: Optional[float] = None
    dt_policy: str = "fixed"
    dt_factor: float = 1.0
    u_floor: float = U_FLOOR  # relative to the current maximum
    newton_tol: float = 1e-13
    max_newton: int = 40
    max_halvings: int = 30

    def __post_init__(self):
        if self.N < 16:
            raise ValueError("N must be >= 16")
        if not 0 < self.m < 1:
            raise ValueError("m must lie in (0, 1)")
        if self.dt_policy not in ("fixed", "adaptive"):
            raise ValueError("dt_policy must be 'fixed' or 'adaptive'")

    @property
    def h(self) -> float:
        return self.r_max / self.N

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.N + 1)

    @property
    def base_dt(self) -> float:
        """dt proportional to h^2 unless fixed explicitly, so time and space errors balance."""
        return self.dt if self.dt is not None else self.dt_factor * self.h**2

    def halved(self) -> "SolverConfig":
        """Same run at half the spatial resolution (and the matching dt)."""
        dt = None if self.dt is None else 4 * self.dt
        return replace(self, N=self.N // 2, dt=dt)


@dataclass(frozen=True)
class Operator:
    volumes: np.ndarray
    transmissivity: np.ndarray  # faces i+1/2, i = 0..N-1


def build_operator(cfg: SolverConfig) -> Operator:
    r = cfg.grid
    d = cfg.d
    faces = np.concatenate([[0.0], 0.5 * (r[1:] + r[:-1]), [r[-1]]])
    vol = (faces[1:] ** d - faces[:-1] ** d) / d
    trans = faces[1:-1] ** (d - 1) / cfg.h
    return Operator(vol, trans)


def _apply_L(op: Operator, w: np.ndarray) -> np.ndarray:
    flux = op.transmissivity * np.diff(w)
    out = np.zeros_like(w)
    out[:-1] += flux
    out[1:] -= flux
    return out


def _banded(op: Operator, diag: np.ndarray) -> np.ndarray:
    """Banded form of diag(diag) - L."""
    T = op.transmissivity
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = -T
    ab[2, :-1] = -T
    ab[1] = diag
    ab[1, :-1] += T
    ab[1, 1:] += T
    return ab


def _newton_step(op: Operator, u_old: np.ndarray, dt: float, cfg: SolverConfig) -> Optional[np.ndarray]:
    m = cfg.m
    floor = cfg.u_floor * np.max(u_old)
    w_floor = floor**m
    w = np.maximum(u_old, floor) ** m
    V = op.volumes
    for _ in range(cfg.max_newton):
        u = w ** (1 / m)
        G = V * (u - u_old) / dt - _apply_L(op, w)
        J = V * w ** (1 / m - 1) / (m * dt)
        delta = solve_banded((1, 1), _banded(op, J), -G)
        w = np.maximum(w + delta, w_floor)
        if np.max(np.abs(delta)) <= cfg.newton_tol * np.max(w):
            return w ** (1 / m)
    return None


def _picard_step(op: Operator, u_old: np.ndarray, dt: float, cfg: SolverConfig) -> Optional[np.ndarray]:
    """Fixed point with the lagged coefficient a = u^(m-1): V(u - u_old)/dt = L(a u)."""
    m = cfg.m
    floor = cfg.u_floor * np.max(u_old)
    u = np.maximum(u_old, floor)
    V = op.volumes
    for _ in range(20 * cfg.max_newton):
        a = u ** (m - 1)
        # unknown z = a u, so V z/(a dt) - L z = V u_old/dt
        z = solve_banded((1, 1), _banded(op, V / (a * dt)), V * u_old / dt)
        u_new = np.maximum(z / a, floor)
        if np.max(np.abs(u_new - u)) <= cfg.newton_tol * np.max(u_new):
            return u_new
        u = u_new
    return None


def implicit_step(op: Operator, u_old: np.ndarray, dt: float, cfg: SolverConfig) -> Optional[np.ndarray]:
    if not np.any(u_old > 0):
        return np.zeros_like(u_old)
    u = _newton_step(op, u_old, dt, cfg)
    if u is None:
        u = _picard_step(op, u_old, dt, cfg)
    return u


@dataclass(frozen=True)
class Solution:
    config: SolverConfig
    times: np.ndarray
    snapshots: tuple
    mass_series: np.ndarray
    n_steps: int
    n_halvings: int
    companion: Optional["Solution"] = None

    def at(self, t: float) -> RadialField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t = {t}")
        return self.snapshots[i]

    def relative_mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass_series - self.mass_series[0])) / self.mass_series[0])


def discrete_mass(op: Operator, u: np.ndarray, d: int) -> float:
    return math.exp(log_omega(d)) * float(np.dot(op.volumes, u))


def evolve(cfg: SolverConfig, u0: RadialField, companion: bool = False) -> Solution:
    """Backward-Euler evolution with snapshots at cfg.times (0 and t_end always included).

    With ``companion`` a half-resolution run supplies error bars.
    """
    if u0.values.size != cfg.N + 1 or not np.allclose(u0.grid, cfg.grid, rtol=0, atol=1e-12 * cfg.r_max):
        raise ValueError("initial field must live on the solver grid")
    if np.any(u0.values < 0):
        raise NonPositivityError("initial data must be nonnegative")
    op = build_operator(cfg)
    times = sorted(set([0.0, float(cfg.t_end)] + [float(t) for t in cfg.times]))
    u = u0.values.astype(float).copy()
    snaps, masses = [RadialField(cfg.grid, u.copy(), cfg.d)], [discrete_mass(op, u, cfg.d)]
    t, steps, halvings = 0.0, 0, 0
    dt_nominal = cfg.base_dt
    for target in times[1:]:
        while t < target - 1e-14 * max(1.0, target):
            dt = min(dt_nominal, target - t)
            for _ in range(cfg.max_halvings + 1):
                new = implicit_step(op, u, dt, cfg)
                if new is not None:
                    break
                dt *= 0.5
                halvings += 1
            else:
                raise StabilityError(f"step rejected {cfg.max_halvings} times at t = {t}")
            u, t = new, t + dt
            steps += 1
            if cfg.dt_policy == "adaptive" and dt < dt_nominal:
                dt_nominal = max(dt, 0.5 * dt_nominal)
            elif cfg.dt_policy == "adaptive":
                dt_nominal = min(2 * dt_nominal, cfg.base_dt)
        t = target
        snaps.append(RadialField(cfg.grid, u.copy(), cfg.d))
        masses.append(discrete_mass(op, u, cfg.d))
    comp = None
    if companion:
        half = cfg.halved()
        comp = evolve(half, RadialField(half.grid, u0.values[::2], cfg.d))
    return Solution(cfg, np.array(times), tuple(snaps), np.array(masses), steps, halvings, comp)


# -- initial data -------------------------------------------------------------

def params_for(cfg: SolverConfig) -> ParamSet:
    return derive_params(cfg.d, cfg.m, Profile.FDE_BOUNDS)


def barenblatt_initial(cfg: SolverConfig, t0: float = 1.0) -> RadialField:
    """B(t0 - 1/alpha, r) on the solver grid; exact solution B(t0 + t - 1/alpha, r)."""
    p = params_for(cfg)
    return RadialField(cfg.grid, barenblatt(cfg.grid, p, t=t0), cfg.d)


def barenblatt_exact(cfg: SolverConfig, t: float, t0: float = 1.0) -> np.ndarray:
    return barenblatt(cfg.grid, params_for(cfg), t=t0 + t)


def bump_initial(cfg: SolverConfig, height: float = 1.0, center: float = 0.0,
                 width: float = 1.0, kind: str = "cos") -> RadialField:
    return RadialField(cfg.grid, height * bump(cfg.grid, center, width, kind), cfg.d)


def indicator_initial(cfg: SolverConfig, radius: float, height: float = 1.0,
                      edge: float = 0.1) -> RadialField:
    """Smoothed indicator of B_radius, exactly zero beyond ``radius``."""
    r = cfg.grid
    inner = radius - edge
    v = np.where(r <= inner, 1.0,
                 np.where(r < radius, np.cos(0.5 * math.pi * (r - inner) / edge) ** 2, 0.0))
    return RadialField(r, height * v, cfg.d)


# -- measurements ---------------------------------------------------------------

def ball_integral(f: RadialField, rho: float) -> float:
    """omega_d int_0^rho u r^(d-1) dr for the piecewise-linear interpolant of u."""
    r, u, d = f.grid, f.values, f.d
    if rho > r[-1] * (1 + 1e-12):
        raise ValueError(f"radius {rho} beyond the grid")
    rho = min(rho, r[-1])
    k = int(np.searchsorted(r, rho, side="right")) - 1
    a, b = r[:k], r[1:k + 1]
    ua, ub = u[:k], u[1:k + 1]
    total = 0.0
    if k > 0:
        slope = (ub - ua) / (b - a)
        A = ua - slope * a
        total = float(np.sum(A * (b**d - a**d) / d + slope * (b ** (d + 1) - a ** (d + 1)) / (d + 1)))
    if k < r.size - 1 and rho > r[k]:
        a0, b0 = r[k], rho
        slope = (u[k + 1] - u[k]) / (r[k + 1] - r[k])
        A = u[k] - slope * a0
        total += A * (b0**d - a0**d) / d + slope * (b0 ** (d + 1) - a0 ** (d + 1)) / (d + 1)
    return math.exp(log_omega(f.d)) * total


def ball_volume(d: int, rho: float) -> float:
    return math.exp(log_omega(d)) * rho**d / d


def _interp(f: RadialField, rho: float) -> float:
    return float(np.interp(rho, f.grid, f.values))


def _error_bar(sol: Solution, measure) -> float:
    """|Q_h - Q_2h|/3 from the companion run, 0 without one."""
    if sol.companion is None:
        return 0.0
    return abs(measure(sol) - measure(sol.companion)) / 3.0


@dataclass(frozen=True)
class Verdict:
    name: str
    lhs: float
    rhs: float
    slack: float
    error_bar: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "error_bar": self.error_bar, "passed": self.passed, "details": self.details}


def _verdict(name, lhs, rhs, bar, details) -> Verdict:
    slack = rhs - lhs
    return Verdict(name, float(lhs), float(rhs), float(slack), float(bar), bool(slack >= bar), details)


def verify_herrero_pierre(sol: Solution, R: float, r: float, t: float, tau: float,
                          rho0: float, x0_shift: float = 0.0) -> Verdict:
    """int_{B_2R} u(t) <= 2^(m/(1-m)) int_{B_{2R+r}} u(tau) + c3 |t-tau|^(1/(1-m)) / r^(alpha/(1-m)).

    Balls are centred at the origin; ``x0_shift`` must be 0 for radial runs.
    """
    if x0_shift != 0:
        raise HypothesisError("only balls centred at the origin are available for radial data")
    if rho0 * r < 2 * R:
        raise HypothesisError("need rho0 r >= 2R")
    cfg = sol.config
    p = params_for(cfg)
    m = cfg.m
    c3 = herrero_pierre_c3(p, rho0)
    tail = (c3 * abs(t - tau) ** (1 / (1 - m)) / r ** (p.alpha / (1 - m))
            if t != tau else TowerScalar.from_float(0.0))

    def lhs_of(s):
        return ball_integral(s.at(t), 2 * R)

    def mass_of(s):
        return ball_integral(s.at(tau), 2 * R + r)

    lhs = lhs_of(sol)
    rhs = 2 ** (m / (1 - m)) * mass_of(sol) + tail.to_float()
    bar = _error_bar(sol, lhs_of) + 2 ** (m / (1 - m)) * _error_bar(sol, mass_of)
    return _verdict("herrero_pierre", lhs, rhs, bar,
                    {"R": R, "r": r, "t": t, "tau": tau, "rho0": rho0, "c3": c3.to_json()})


def verify_local_upper(sol: Solution, R: float, t: float, kbar) -> Verdict:
    """sup_{B_R/2} u(t) <= kbar (t^(-d/alpha) (int_{B_R} u0)^(2/alpha) + (t/R^2)^(1/(1-m)))."""
    if t <= 0:
        raise WindowError("t must be positive")
    cfg = sol.config
    p = params_for(cfg)
    f = sol.at(t)
    mask = f.grid <= R / 2
    lhs = float(np.max(f.values[mask]))
    M = ball_integral(sol.snapshots[0], R)
    inner = t ** (-cfg.d / p.alpha) * M ** (2 / p.alpha) + (t / R**2) ** (1 / (1 - cfg.m))
    rhs_t = as_tower(kbar) * inner
    bar = 0.0
    if sol.companion is not None:
        g = sol.companion.at(t)
        bar = abs(lhs - float(np.max(g.values[g.grid <= R / 2]))) / 3
    return _verdict("local_upper", lhs, rhs_t.to_float(), bar,
                    {"R": R, "t": t, "rhs": rhs_t.to_json()})


def lower_window(p: ParamSet, M_R: float, R: float, kappa_star: float) -> float:
    """t_under = kappa_star M_R^(1-m) R^alpha / 2."""
    return 0.5 * kappa_star * M_R ** (1 - p.m) * R**p.alpha


def support_radius(f: RadialField) -> float:
    nz = np.nonzero(f.values > 0)[0]
    return 0.0 if nz.size == 0 else float(f.grid[nz[-1]])


def verify_local_lower(sol: Solution, R: float, t: float, kappa, kappa_star: float) -> Verdict:
    """inf_{B_R} u(t) >= kappa (t/R^2)^(1/(1-m)) for t in [0, 2 t_under].

    Restricted to data supported in B_R, where the mass in B_4R equals M_R.
    """
    cfg = sol.config
    p = params_for(cfg)
    u0 = sol.snapshots[0]
    if support_radius(u0) > R:
        raise SupportError("initial data must be supported in B_R")
    M_R = ball_integral(u0, R)
    if M_R <= 0:
        raise SupportError("no mass in B_R")
    t_under = lower_window(p, M_R, R, kappa_star)
    if not 0 <= t <= 2 * t_under:
        raise WindowError(f"t = {t} outside [0, {2 * t_under}]")
    f = sol.at(t)
    lhs = float(np.min(f.values[f.grid <= R]))
    rhs_t = as_tower(kappa) * (t / R**2) ** (1 / (1 - cfg.m)) if t > 0 else TowerScalar.from_float(0.0)
    bar = 0.0
    if sol.companion is not None:
        g = sol.companion.at(t)
        bar = abs(lhs - float(np.min(g.values[g.grid <= R]))) / 3
    slack = lhs - rhs_t.to_float()
    return Verdict("local_lower", lhs, rhs_t.to_float(), slack, bar, bool(slack >= bar),
                   {"R": R, "t": t, "t_under": t_under, "M_R": M_R, "rhs": rhs_t.to_json()})


def verify_aleksandrov(sol: Solution, R: float, lam: float, t: float,
                       r: Optional[float] = None) -> Verdict:
    """u(t, 0) >= mean of u(t) over B_{lam R} minus B_2R, and the A_d r^d form if r is given."""
    if lam <= 2:
        raise HypothesisError("lambda must exceed 2")
    cfg = sol.config
    d = cfg.d
    if support_radius(sol.snapshots[0]) > R:
        raise SupportError("initial data must be supported in B_R")

    def avg(s):
        f = s.at(t)
        return ((ball_integral(f, lam * R) - ball_integral(f, 2 * R))
                / (ball_volume(d, lam * R) - ball_volume(d, 2 * R)))

    center = sol.at(t).values[0]
    mean = avg(sol)
    bar = _error_bar(sol, avg)
    if sol.companion is not None:
        bar += abs(center - sol.companion.at(t).values[0]) / 3
    details = {"R": R, "lambda": lam, "t": t, "center": float(center)}
    slack = center - mean
    passed = slack >= bar
    if r is not None:
        b = 2 - 1 / d
        r0 = 2 * R * (2 ** (1 - 1 / d) - 1)
        if r <= r0:
            raise HypothesisError(f"need r > {r0}")
        f = sol.at(t)
        ann = ball_integral(f, 2 * R + r) - ball_integral(f, 2**b * R)
        bound = aleksandrov_Ad(d) * r**d * center
        details.update({"r": r, "annulus_integral": ann, "Ad_bound": bound,
                        "mean_form_passed": bool(bound - ann >= bar * ball_volume(d, 2 * R + r))})
        passed = passed and details["mean_form_passed"]
    return Verdict("aleksandrov", float(mean), float(center), float(slack), float(bar),
                   bool(passed), details)


# -- time monotonicity -------------------------------------------------------------

def time_weighted(sol: Solution, power: float, t_shift: float = 0.0,
                  nodes: Optional[Sequence[int]] = None) -> np.ndarray:
    """u(t, r_i) (t + t_shift)^power for snapshots with t + t_shift > 0."""
    keep = sol.times + t_shift > 0
    ts = sol.times[keep] + t_shift
    U = np.array([s.values for s, k in zip(sol.snapshots, keep) if k])
    if nodes is not None:
        U = U[:, list(nodes)]
    return U * ts[:, None] ** power


def benilan_crandall_ok(sol: Solution, t_shift: float = 0.0, rtol: float = 1e-9,
                        nodes: Optional[Sequence[int]] = None) -> bool:
    """u t^(-1/(1-m)) non-increasing in t.

    Data with tails reaching the zero-flux wall violate this near r_max;
    pass ``nodes`` to restrict the check to the interior.
    """
    W = time_weighted(sol, -1 / (1 - sol.config.m), t_shift, nodes)
    return bool(np.all(np.diff(W, axis=0) <= rtol * np.abs(W[1:]) + 1e-300))


def aronson_benilan_ok(sol: Solution, t_shift: float = 0.0, rtol: float = 1e-9,
                       nodes: Optional[Sequence[int]] = None) -> bool:
    """u t^(d/alpha) non-decreasing in t."""
    p = params_for(sol.config)
    W = time_weighted(sol, sol.config.d / p.alpha, t_shift, nodes)
    return bool(np.all(np.diff(W, axis=0) >= -rtol * np.abs(W[1:]) - 1e-300))


def origin_decay_ok(sol: Solution, t_shift: float = 0.0) -> bool:
    """u(t, 0) t^(-d/alpha) non-increasing at the origin."""
    p = params_for(sol.config)
    W = time_weighted(sol, -sol.config.d / p.alpha, t_shift, nodes=[0])[:, 0]
    return bool(np.all(np.diff(W) <= 0))


# -- truncation functions -----------------------------------------------------------

def truncation_phi(R1: float, R0: float, x_radius, d: int = 1):
    """phi, |grad phi| and Laplacian of the radial C^1 cut-off equal to 1 on B_R1, 0 off B_R0.

    The Laplacian is phi'' + (d-1) phi'/r with the branch values of phi''
    (-4/delta^2 on the inner half of the transition, +4/delta^2 on the outer).
    """
    if not 0 < R1 < R0:
        raise ValueError("need 0 < R1 < R0")
    r = np.asarray(x_radius, dtype=float)
    delta = R0 - R1
    mid = 0.5 * (R0 + R1)
    inner = (r > R1) & (r <= mid)
    outer = (r > mid) & (r <= R0)
    phi = np.where(r <= R1, 1.0, 0.0)
    phi = np.where(inner, 1 - 2 * (r - R1) ** 2 / delta**2, phi)
    phi = np.where(outer, 2 * (R0 - r) ** 2 / delta**2, phi)
    dphi = np.zeros_like(r)
    dphi = np.where(inner, -4 * (r - R1) / delta**2, dphi)
    dphi = np.where(outer, -4 * (R0 - r) / delta**2, dphi)
    d2 = np.where(inner, -4 / delta**2, np.where(outer, 4 / delta**2, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = d2 + np.where(r > 0, (d - 1) * dphi / np.where(r > 0, r, 1.0), 0.0)
    if np.ndim(x_radius) == 0:
        return float(phi), float(abs(dphi)), float(lap)
    return phi, np.abs(dphi), lap


def verify_truncation_bounds(R1: float, R0: float, d: int, sample_count: int = 10_000,
                             seed: int = 0) -> Verdict:
    """Sampled sup of |grad phi| and |Laplacian phi| against 2/delta and 4d/delta^2."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.0, 1.25 * R0, sample_count)
    _, g, lap = truncation_phi(R1, R0, r, d)
    delta = R0 - R1
    gmax, lmax = float(np.max(g)), float(np.max(np.abs(lap)))
    gb, lb = 2 / delta, 4 * d / delta**2
    passed = gmax <= gb * (1 + 1e-12) and lmax <= lb * (1 + 1e-12)
    return Verdict("truncation", max(gmax / gb, lmax / lb), 1.0, 1.0 - max(gmax / gb, lmax / lb),
                   0.0, bool(passed),
                   {"R1": R1, "R0": R0, "d": d, "grad_sup": gmax, "grad_bound": gb,
                    "lap_sup": lmax, "lap_bound": lb, "samples": sample_count})


# -- scenarios -----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    config: SolverConfig
    initial: RadialField
    checks: dict
    raw: dict


def scenario_from_dict(obj: dict) -> Scenario:
    """{d, m, grid: {r_max, N}, times, t_end?, dt_factor?, initial: {type, params}, checks?}."""
    grid = obj["grid"]
    times = tuple(float(t) for t in obj.get("times", []))
    t_end = float(obj.get("t_end", max(times) if times else 1.0))
    cfg = SolverConfig(d=int(obj["d"]), m=float(obj["m"]), r_max=float(grid["r_max"]),
                       N=int(grid["N"]), t_end=t_end, times=times,
                       dt_factor=float(obj.get("dt_factor", 1.0)),
                       dt_policy=obj.get("dt_policy", "fixed"))
    ini = obj["initial"]
    kind, prm = ini["type"], ini.get("params", {})
    if kind == "barenblatt":
        u0 = barenblatt_initial(cfg, float(prm.get("t0", 1.0)))
    elif kind == "bump":
        u0 = bump_initial(cfg, **prm)
    elif kind == "indicator":
        u0 = indicator_initial(cfg, **prm)
    elif kind == "csv":
        with open(prm["path"]) as fh:
            f = RadialField.from_csv(fh.read(), cfg.d)
        u0 = RadialField(cfg.grid, np.interp(cfg.grid, f.grid, f.values), cfg.d)
    else:
        raise ValueError(f"unknown initial type {kind!r}")
    return Scenario(cfg, u0, obj.get("checks", {}), obj)


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
