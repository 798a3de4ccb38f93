"""Radius dynamics of the two geometric flows through round orbits.

Coupled (metric-evolving) flow: with kappa(t) = (T/(T-t))^{c/2} and
x = log R, the radius obeys

    dx/dsigma = (c/2) (lambda(e^x) + 1),     sigma = log(T/(T-t)),

which is autonomous and free of the t = T singularity.  The fixed-metric
flow is dx/dt = c lambda(e^x) with x = log(h r0).  Both blow up in finite
time unless started at the respective stationary radius (r1, resp. r2);
past the tabulated range the power-law tails of lambda give the remaining
time to blow-up in closed form, and the maximal time also has an
independent quadrature representation used for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .critical import find_critical_radii
from .errors import DomainError, IntegrationError, ValidationFailure
from .geometry import lambda_of_s, lambda_tail_coefficients, second_fundamental_norm2
from .profile import SolitonProfile

_STATIONARY_REL_TOL = 1e-9  # route to the exact stationary branch inside this


@dataclass(frozen=True)
class FlowConfig:
    """Initial data and integration knobs for one trajectory."""

    mode: str                     # "rmcf" (coupled) or "mcf" (fixed metric)
    r0: float
    T: float = 1.0                # horizon of the ambient flow; rmcf only
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    x_escape: float | None = None  # log-radius overshoot that triggers the tail
    max_time: float = 200.0       # cap on sigma (rmcf) or t (mcf)
    samples: int = 64

    def __post_init__(self):
        if self.mode not in ("rmcf", "mcf"):
            raise DomainError(f"mode must be 'rmcf' or 'mcf', got {self.mode!r}")
        if self.r0 <= 0.0:
            raise DomainError(f"initial radius must be positive, got {self.r0}")
        if self.T <= 0.0:
            raise DomainError(f"horizon must be positive, got {self.T}")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise DomainError("integrator tolerances must be positive")
        if self.samples < 8:
            raise DomainError("need at least 8 samples")

    def escape_offset(self, k: int) -> float:
        off = self.x_escape if self.x_escape is not None else 3.0 / k
        if off < 3.0 / (2.0 * k):
            raise DomainError(
                f"x_escape must be at least 3/(2k) = {3.0 / (2 * k)}, got {off}")
        return off


@dataclass
class FlowTrajectory:
    """Sampled solution plus blow-up classification and timing."""

    mode: str
    r0: float
    T: float
    target: str                   # "S0", "S_infinity", or "Stationary"
    T_prime_ode: float
    T_prime_quadrature: float
    typeI_constant: float
    t: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)   # NaN-filled for mcf
    R: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    A2: np.ndarray = field(repr=False)      # ambient-rescaled |A|^2 (rmcf), plain (mcf)


def _orbit_A2(profile: SolitonProfile, x: np.ndarray) -> np.ndarray:
    """|A|^2 of the orbit at log-radius x, tail-safe."""
    p = profile.params
    s = 2.0 * np.asarray(x, dtype=float)
    W = np.atleast_1d(profile.W_of_s(s))
    W = np.clip(W, np.nextafter(p.W_min, p.W_max), np.nextafter(p.W_max, p.W_min))
    V = profile.V_of_W(W)
    return second_fundamental_norm2(profile, W, V)


def _escape_bounds(profile: SolitonProfile, config: FlowConfig):
    k = profile.params.k
    off = config.escape_offset(k)
    return profile.s_lo / 2.0 - off, profile.s_hi / 2.0 + off


def _integrate_x(profile: SolitonProfile, rhs, x0: float, span_end: float,
                 config: FlowConfig, x_lo: float, x_hi: float):
    """Run the autonomized ODE until an escape bound is crossed."""

    def hit_lo(t, y):
        return y[0] - x_lo

    def hit_hi(t, y):
        return y[0] - x_hi

    hit_lo.terminal = True
    hit_hi.terminal = True
    sol = solve_ivp(rhs, (0.0, span_end), [x0], method="RK45",
                    rtol=config.rel_tol, atol=config.abs_tol,
                    events=(hit_lo, hit_hi), dense_output=True)
    if sol.status == -1:
        raise IntegrationError(f"integrator failed: {sol.message}",
                               trajectory=sol)
    if sol.status != 1:
        raise IntegrationError(
            "no blow-up before the time cap; raise max_time or check r0",
            trajectory=sol)
    escaped_low = len(sol.t_events[0]) > 0
    t_e = float(sol.t_events[0][0] if escaped_low else sol.t_events[1][0])
    x_e = float((sol.y_events[0] if escaped_low else sol.y_events[1])[0][0])
    return sol, t_e, x_e, escaped_low


def _sample_times(T_prime: float, samples: int) -> np.ndarray:
    """t = 0 plus log-spaced distances to blow-up down to 1e-8 T'."""
    u = T_prime * np.logspace(0.0, -8.0, samples)
    return T_prime - u


def _final_decade(t: np.ndarray, T_prime: float) -> np.ndarray:
    u = T_prime - t
    u_min = u[u > 0.0].min()
    return (u > 0.0) & (u <= 10.0 * u_min)


def _type_one_products(profile: SolitonProfile, t, R, A2, T_prime, target):
    """sup over the final decade of (T'-t) A2 and (T'-t) R^{-/+2k}."""
    k = profile.params.k
    mask = _final_decade(t, T_prime)
    u = T_prime - t[mask]
    prodA = u * A2[mask]
    exponent = -2 * k if target == "S0" else 2 * k
    prodR = u * R[mask] ** exponent
    for name, prod in (("curvature", prodA), ("radius", prodR)):
        if not np.all(np.isfinite(prod)):
            raise ValidationFailure(f"{name} Type-I product not finite")
    return float(prodA.max()), float(prodR.max())


# --- coupled flow ----------------------------------------------------------


def integrate_rmcf(profile: SolitonProfile, config: FlowConfig) -> FlowTrajectory:
    """Radius trajectory of the coupled flow; see module docstring."""
    if config.mode != "rmcf":
        raise DomainError("config.mode must be 'rmcf'")
    c = profile.c
    k = profile.params.k
    T = config.T
    crit = find_critical_radii(profile)
    if abs(config.r0 - crit.r1) <= _STATIONARY_REL_TOL * crit.r1:
        return _stationary_rmcf(profile, config, crit.r1)
    A, B = lambda_tail_coefficients(profile)
    x_lo, x_hi = _escape_bounds(profile, config)
    x0 = math.log(config.r0)

    def rhs(sigma, y):
        return [(c / 2.0) * (float(lambda_of_s(profile, 2.0 * y[0])) + 1.0)]

    if x0 <= x_lo:
        sol, sigma_e, x_e, escaped_low = None, 0.0, x0, True
    elif x0 >= x_hi:
        sol, sigma_e, x_e, escaped_low = None, 0.0, x0, False
    else:
        sol, sigma_e, x_e, escaped_low = _integrate_x(
            profile, rhs, x0, config.max_time, config, x_lo, x_hi)

    # Closed-form completion from the escape state using the lambda tails.
    if escaped_low:
        # y = e^{2kx}:  dy/dsigma = ck (y - A), y -> 0 at blow-up
        y_e = math.exp(2.0 * k * x_e)
        sigma_inf = sigma_e + math.log(A / (A - y_e)) / (c * k)
        target = "S0"
    else:
        # y = e^{-2kx}: dy/dsigma = -ck (y + B), y -> 0 at blow-up
        y_e = math.exp(-2.0 * k * x_e)
        sigma_inf = sigma_e + math.log((y_e + B) / B) / (c * k)
        target = "S_infinity"
    T_prime = T * (1.0 - math.exp(-sigma_inf))

    def x_of_sigma(sigma: np.ndarray) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float)
        out = np.empty_like(sigma)
        inside = sigma <= sigma_e
        if inside.any():
            out[inside] = (sol.sol(sigma[inside])[0] if sol is not None else x0)
        tail = ~inside
        if tail.any():
            ds = sigma[tail] - sigma_e
            if escaped_low:
                y = A + (y_e - A) * np.exp(c * k * ds)
                out[tail] = np.log(np.maximum(y, 1e-300)) / (2.0 * k)
            else:
                y = (y_e + B) * np.exp(-c * k * ds) - B
                out[tail] = -np.log(np.maximum(y, 1e-300)) / (2.0 * k)
        return out

    t = _sample_times(T_prime, config.samples)
    sigma = -np.log1p(-t / T)
    x = x_of_sigma(sigma)
    R = np.exp(x)
    kappa = np.exp(c * sigma / 2.0)
    h = R / (kappa * config.r0)
    lam = lambda_of_s(profile, 2.0 * x)
    A2 = _orbit_A2(profile, x) / (2.0 * (T - t))
    typeI, _ = _type_one_products(profile, t, R, A2, T_prime, target)
    return FlowTrajectory(
        mode="rmcf", r0=config.r0, T=T, target=target,
        T_prime_ode=T_prime,
        T_prime_quadrature=maximal_time_closed_form(profile, config),
        typeI_constant=typeI, t=t, sigma=sigma, R=R, h=h, lam=lam, A2=A2)


def _stationary_rmcf(profile: SolitonProfile, config: FlowConfig,
                     r1: float) -> FlowTrajectory:
    c, T = profile.c, config.T
    sigma = np.linspace(0.0, 20.0, config.samples)
    t = T * (1.0 - np.exp(-sigma))
    R = np.full_like(sigma, r1)
    h = np.exp(-c * sigma / 2.0)  # = kappa^{-1}
    lam = np.full_like(sigma, -1.0)
    A2_orbit = float(_orbit_A2(profile, np.array([math.log(r1)]))[0])
    A2 = A2_orbit / (2.0 * (T - t))
    return FlowTrajectory(
        mode="rmcf", r0=config.r0, T=T, target="Stationary",
        T_prime_ode=T, T_prime_quadrature=T,
        typeI_constant=A2_orbit / 2.0,  # (T-t) |A|^2_ambient, exactly constant
        t=t, sigma=sigma, R=R, h=h, lam=lam, A2=A2)


# --- fixed-metric flow -----------------------------------------------------


def integrate_mcf(profile: SolitonProfile, config: FlowConfig) -> FlowTrajectory:
    """Radius trajectory of the fixed-metric flow; see module docstring."""
    if config.mode != "mcf":
        raise DomainError("config.mode must be 'mcf'")
    c = profile.c
    k = profile.params.k
    crit = find_critical_radii(profile)
    if abs(config.r0 - crit.r2) <= _STATIONARY_REL_TOL * crit.r2:
        return _stationary_mcf(profile, config, crit.r2)
    A, B = lambda_tail_coefficients(profile)
    x_lo, x_hi = _escape_bounds(profile, config)
    x0 = math.log(config.r0)

    def rhs(t, y):
        return [c * float(lambda_of_s(profile, 2.0 * y[0]))]

    if x0 <= x_lo:
        sol, t_e, x_e, escaped_low = None, 0.0, x0, True
    elif x0 >= x_hi:
        sol, t_e, x_e, escaped_low = None, 0.0, x0, False
    else:
        sol, t_e, x_e, escaped_low = _integrate_x(
            profile, rhs, x0, config.max_time, config, x_lo, x_hi)

    if escaped_low:
        # y = e^{2kx}: dy/dt = -2kcA (constant), so the rest is linear
        y_e = math.exp(2.0 * k * x_e)
        T_prime = t_e + y_e / (2.0 * k * c * A)
        target = "S0"
    else:
        y_e = math.exp(-2.0 * k * x_e)
        T_prime = t_e + y_e / (2.0 * k * c * B)
        target = "S_infinity"

    def x_of_t(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        inside = t <= t_e
        if inside.any():
            out[inside] = (sol.sol(t[inside])[0] if sol is not None else x0)
        tail = ~inside
        if tail.any():
            if escaped_low:
                y = 2.0 * k * c * A * (T_prime - t[tail])
                out[tail] = np.log(np.maximum(y, 1e-300)) / (2.0 * k)
            else:
                y = 2.0 * k * c * B * (T_prime - t[tail])
                out[tail] = -np.log(np.maximum(y, 1e-300)) / (2.0 * k)
        return out

    t = _sample_times(T_prime, config.samples)
    x = x_of_t(t)
    R = np.exp(x)
    h = R / config.r0
    lam = lambda_of_s(profile, 2.0 * x)
    A2 = _orbit_A2(profile, x)
    typeI, _ = _type_one_products(profile, t, R, A2, T_prime, target)
    return FlowTrajectory(
        mode="mcf", r0=config.r0, T=config.T, target=target,
        T_prime_ode=T_prime,
        T_prime_quadrature=maximal_time_closed_form(profile, config),
        typeI_constant=typeI, t=t, sigma=np.full_like(t, np.nan),
        R=R, h=h, lam=lam, A2=A2)


def _stationary_mcf(profile: SolitonProfile, config: FlowConfig,
                    r2: float) -> FlowTrajectory:
    t = np.linspace(0.0, 10.0, config.samples)
    ones = np.ones_like(t)
    A2_orbit = float(_orbit_A2(profile, np.array([math.log(r2)]))[0])
    return FlowTrajectory(
        mode="mcf", r0=config.r0, T=config.T, target="Stationary",
        T_prime_ode=math.inf, T_prime_quadrature=math.inf,
        typeI_constant=math.nan, t=t, sigma=np.full_like(t, np.nan),
        R=r2 * ones, h=ones, lam=0.0 * ones, A2=A2_orbit * ones)


# --- closed-form maximal time ----------------------------------------------


def maximal_time_closed_form(profile: SolitonProfile, config: FlowConfig) -> float:
    """Blow-up time by quadrature of the radius ODE, independent of stepping.

    The integrable tails (integrand ~ R^{2k-1} near 0, ~ R^{-2k-1} near
    infinity) are evaluated in closed form from the leading lambda tails;
    the interior part is adaptive quadrature in x = log R.
    """
    c = profile.c
    k = profile.params.k
    crit = find_critical_radii(profile)
    A, B = lambda_tail_coefficients(profile)
    x_lo, x_hi = _escape_bounds(profile, config)
    x0 = math.log(config.r0)
    rmcf = config.mode == "rmcf"
    r_crit = crit.r1 if rmcf else crit.r2
    if abs(config.r0 - r_crit) <= _STATIONARY_REL_TOL * r_crit:
        return config.T if rmcf else math.inf

    if rmcf:
        def integrand(x):
            return 1.0 / abs(float(lambda_of_s(profile, 2.0 * x)) + 1.0)
    else:
        def integrand(x):
            return 1.0 / abs(float(lambda_of_s(profile, 2.0 * x)))

    if config.r0 < r_crit:
        # collapse to the zero section: integrate from -infinity up to x0
        if x0 <= x_lo:
            interior = 0.0
            x_cut = x0
        else:
            interior, _ = quad(integrand, x_lo, x0, limit=200)
            x_cut = x_lo
        y_c = math.exp(2.0 * k * x_cut)
        if rmcf:
            # int dx / (A e^{-2kx} - 1) = log(A/(A - y)) / 2k
            tail = math.log(A / (A - y_c)) / (2.0 * k)
            sigma_inf = (2.0 / c) * (tail + interior)
            return config.T * (1.0 - math.exp(-sigma_inf))
        tail = y_c / (2.0 * k * A)
        return (tail + interior) / c
    # escape to the section at infinity: integrate from x0 to +infinity
    if x0 >= x_hi:
        interior = 0.0
        x_cut = x0
    else:
        interior, _ = quad(integrand, x0, x_hi, limit=200)
        x_cut = x_hi
    y_c = math.exp(-2.0 * k * x_cut)
    if rmcf:
        # int dx / (B e^{2kx} + 1) = log((B + y)/B) / 2k
        tail = math.log((B + y_c) / B) / (2.0 * k)
        sigma_inf = (2.0 / c) * (tail + interior)
        return config.T * (1.0 - math.exp(-sigma_inf))
    tail = y_c / (2.0 * k * B)
    return (tail + interior) / c


def type_one_rate(traj: FlowTrajectory, profile: SolitonProfile) -> float:
    """sup over the final decade of (T'-t) x curvature quantity.

    Raises a validation error when the product grows monotonically across
    the final decade (a Type-I violation would contradict the blow-up
    classification and indicates a bad T' estimate).
    """
    if traj.target == "Stationary":
        if traj.mode == "rmcf":
            return traj.typeI_constant
        raise DomainError("stationary fixed-metric trajectory never blows up")
    T_prime = traj.T_prime_ode
    mask = _final_decade(traj.t, T_prime)
    u = T_prime - traj.t[mask]
    prod = u * traj.A2[mask]
    if not np.all(np.isfinite(prod)):
        raise ValidationFailure("Type-I product not finite over the final decade")
    # samples run toward blow-up, so a strictly increasing product means growth
    if np.all(np.diff(prod) > 0.0) and prod[-1] > 2.0 * prod[0]:
        raise ValidationFailure(
            f"(T'-t)|A|^2 grows across the final decade: {prod[0]} -> {prod[-1]}")
    return float(prod.max())
