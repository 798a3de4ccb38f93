"""Independent brute-force verification of the construction and the flows.

The centerpiece differentiates nothing but the scalar profiles: smooth
polynomial fits of u(s) and P(s) are built once, the Kahler potential
Phi(z) = u(log|z|^2) and the soliton potential f(z) = P(log|z|^2) are then
finite-differenced in real coordinates to produce the metric, Christoffel
symbols, Ricci tensor and Hessian, and the defining equation

    Ric + Hess f = g

is checked pointwise.  This is independent of the closed-form geometry
evaluators (which never differentiate anything numerically) and therefore
certifies the whole pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ValidationFailure
from .flows import FlowConfig, integrate_rmcf, integrate_mcf, maximal_time_closed_form
from .geometry import lambda_of_s, potential_P
from .profile import SolitonProfile, profile_V

_FIT_DEGREE = 72
_FIT_SPAN = 6.0      # fit u, P on s in [-span, span]
_PROBE_SEED = 20230415


@dataclass
class ValidationReport:
    """Suprema of all independent residual checks."""

    ode_residual_sup: float
    holomorphy_residual_sup: float
    soliton_fd_residual: float
    h_ode_crosscheck: float
    Tprime_crosscheck: float
    probe_seed: int = _PROBE_SEED


# --- residual scans on the stored profile arrays ---------------------------


def ode_residual_scan(profile: SolitonProfile,
                      V_override: np.ndarray | None = None):
    """(ode_residual_sup, holomorphy_residual_sup) over the interior nodes.

    Works on the stored arrays (not fresh closed-form evaluations), so a
    corrupted table is detected.  In s-form the profile equation reads
    u'''/u'' + ((n-1)/u' - c) u'' = n - u' with u''' = V dV/dW, and the
    holomorphy condition P'(s) = c u'' is its first integral; the scan
    evaluates both from W, V, dV/dW at every node.
    """
    p = profile.params
    W = profile.W_grid
    V = profile.V_values if V_override is None else V_override
    dVdW = profile.dVdW_values
    resid = dVdW + ((p.n - 1) / W - profile.c) * V - (p.n - W)
    ode_sup = float(np.max(np.abs(resid) / (1.0 + np.abs(V))))
    # P'(s)/u'' = c + resid/V: the same defect, weighted where V is small
    holo_sup = float(np.max(np.abs(resid / V)))
    return ode_sup, holo_sup


# --- finite-difference soliton equation check -------------------------------


def _chebyshev_fits(profile: SolitonProfile, corrupt_dc: float = 0.0):
    """Polynomial fits of u(s) and P(s), cached on the profile instance.

    With corrupt_dc != 0 the V inside P's log u'' term is evaluated at the
    perturbed constant (sensitivity probe); u and the metric stay truthful.
    """
    cache = profile.__dict__.setdefault("_scalar_fit_cache", {})
    if corrupt_dc in cache:
        return cache[corrupt_dc]
    p = profile.params
    n = p.n
    s_nodes = _FIT_SPAN * np.cos(np.pi * (np.arange(2 * _FIT_DEGREE) + 0.5)
                                 / (2 * _FIT_DEGREE))
    u_vals = profile.u_of_s(s_nodes)
    if corrupt_dc == 0.0:
        P_vals = potential_P(profile, s_nodes)
    else:
        W = np.atleast_1d(profile.W_of_s(s_nodes))
        V_bad = profile_V(profile.c + corrupt_dc, p, W)
        P_vals = (-n * s_nodes + (n - 1) * np.log(W) + np.log(V_bad)
                  + profile.u_of_W(W))
    dom = [-_FIT_SPAN, _FIT_SPAN]
    u_fit = np.polynomial.Chebyshev.fit(s_nodes, u_vals, _FIT_DEGREE, domain=dom)
    P_fit = np.polynomial.Chebyshev.fit(s_nodes, P_vals, _FIT_DEGREE, domain=dom)
    # Coefficients widened to extended precision: the nested stencils divide
    # evaluation roundoff by step^3, so the scalar evaluations need headroom.
    cache[corrupt_dc] = (u_fit.coef.astype(np.longdouble),
                         P_fit.coef.astype(np.longdouble))
    return cache[corrupt_dc]


def _d1(F, x, i, h):
    """4th-order first derivative of F along coordinate i."""
    e = np.zeros_like(x)
    e[i] = 1.0
    return (8.0 * (F(x + h * e) - F(x - h * e))
            - (F(x + 2 * h * e) - F(x - 2 * h * e))) / (12.0 * h)


def _hessian(F, x, h):
    """4th-order real Hessian of a scalar F at x (5-point stencils)."""
    d = len(x)
    H = np.empty((d, d))
    F0 = F(x)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        H[i, i] = (-F(x + 2 * h * e) + 16 * F(x + h * e) - 30 * F0
                   + 16 * F(x - h * e) - F(x - 2 * h * e)) / (12.0 * h * h)
    for i in range(d):
        for j in range(i + 1, d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = 1.0
            ej[j] = 1.0
            near = (F(x + h * (ei + ej)) + F(x - h * (ei + ej))
                    - F(x + h * (ei - ej)) - F(x - h * (ei - ej)))
            far = (F(x + 2 * h * (ei + ej)) + F(x - 2 * h * (ei + ej))
                   - F(x + 2 * h * (ei - ej)) - F(x - 2 * h * (ei - ej)))
            H[i, j] = H[j, i] = (16.0 * near - far) / (48.0 * h * h)
    return H


def _soliton_residual_once(profile: SolitonProfile, z: np.ndarray,
                           step: float, corrupt_dc: float) -> float:
    """Relative sup-norm of Ric + Hess f - g at z, single step level."""
    u_coef, P_coef = _chebyshev_fits(profile, corrupt_dc)
    n = profile.params.n
    d = 2 * n
    scale = float(np.sqrt(np.real(np.vdot(z, z))))
    h_in = step * scale          # differentiating Phi and f
    h_out = math.sqrt(step) * scale / 3.0  # differentiating metric, Christoffels

    cache: dict[bytes, np.longdouble] = {}

    def _s_arg(x):
        xl = x.astype(np.longdouble)
        return np.log(np.dot(xl, xl)) / np.longdouble(_FIT_SPAN)

    def phi(x):
        key = x.tobytes()
        val = cache.get(key)
        if val is None:
            val = np.polynomial.chebyshev.chebval(_s_arg(x), u_coef)
            cache[key] = val
        return val

    def f_scalar(x):
        return np.polynomial.chebyshev.chebval(_s_arg(x), P_coef)

    def metric(x):
        """Real 2n x 2n metric from the complex Hessian of Phi."""
        Hp = _hessian(phi, x, h_in)
        # coordinates ordered (x1, y1, x2, y2, ...): index a -> (2a, 2a+1)
        g = np.empty((d, d))
        for a in range(n):
            for b in range(n):
                xa, ya, xb, yb = 2 * a, 2 * a + 1, 2 * b, 2 * b + 1
                re_h = 0.25 * (Hp[xa, xb] + Hp[ya, yb])
                im_h = 0.25 * (Hp[xa, yb] - Hp[ya, xb])
                g[xa, xb] = 2.0 * re_h
                g[ya, yb] = 2.0 * re_h
                g[xa, yb] = 2.0 * im_h
                g[yb, xa] = 2.0 * im_h
                g[ya, xb] = -2.0 * im_h
                g[xb, ya] = -2.0 * im_h
        return g

    def christoffel(x):
        ginv = np.linalg.inv(metric(x))
        dg = np.empty((d, d, d))  # dg[k, i, j] = d_k g_ij
        for kk in range(d):
            dg[kk] = _d1(metric, x, kk, h_out)
        # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
        gamma = np.empty((d, d, d))
        for kk in range(d):
            for i in range(d):
                for j in range(d):
                    gamma[kk, i, j] = 0.5 * np.dot(
                        ginv[kk], dg[i, j, :] + dg[j, i, :] - dg[:, i, j])
        return gamma

    x0 = np.empty(d)
    x0[0::2] = np.real(z)
    x0[1::2] = np.imag(z)

    gamma0 = christoffel(x0)
    dgamma = np.empty((d, d, d, d))  # dgamma[l, k, i, j] = d_l Gamma^k_ij
    for ll in range(d):
        dgamma[ll] = _d1(christoffel, x0, ll, h_out)
    # Ric_ij = d_k Gamma^k_ij - d_i Gamma^k_kj + Gamma^k_kl Gamma^l_ij
    #          - Gamma^k_il Gamma^l_kj
    ric = (np.einsum("kkij->ij", dgamma)
           - np.einsum("ikkj->ij", dgamma)
           + np.einsum("kkl,lij->ij", gamma0, gamma0)
           - np.einsum("kil,lkj->ij", gamma0, gamma0))

    hess_f = _hessian(f_scalar, x0, h_in)
    df = np.array([_d1(f_scalar, x0, i, h_in) for i in range(d)])
    hess_f = hess_f - np.einsum("kij,k->ij", gamma0, df)

    g0 = metric(x0)
    resid = ric + hess_f - g0
    return float(np.max(np.abs(resid)) / np.max(np.abs(g0)))


def soliton_equation_residual_fd(profile: SolitonProfile, z, step: float = 1e-3,
                                 corrupt_dc: float = 0.0) -> float:
    """Relative sup-norm of Ric + Hess f - g at z.

    Two step levels (step and step/2) are compared and the smaller
    residual is reported: truncation shrinks under refinement while the
    nested-stencil roundoff grows like step^-3, so the pair brackets the
    achievable accuracy.  A strongly diverging pair that is also large in
    absolute terms means the step is outside the usable window, and the
    convergence table is raised instead of a number.
    """
    z = np.asarray(z, dtype=complex)
    if z.shape != (profile.params.n,):
        raise DomainError(f"expected a complex vector of length {profile.params.n}")
    if float(np.real(np.vdot(z, z))) == 0.0:
        raise DomainError("probe point must be nonzero")
    if not (1e-8 <= step <= 0.3):
        raise DomainError(f"step {step} outside the sensible range [1e-8, 0.3]")
    r_h = _soliton_residual_once(profile, z, step, corrupt_dc)
    r_h2 = _soliton_residual_once(profile, z, step / 2.0, corrupt_dc)
    table = (f"residual(step={step:g}) = {r_h:.3e}, "
             f"residual(step={step / 2.0:g}) = {r_h2:.3e}")
    if corrupt_dc == 0.0 and r_h2 > 4.0 * r_h and r_h2 > 1e-3:
        raise ValidationFailure(
            "finite-difference check diverges under refinement "
            f"(step too small, roundoff dominated): {table}")
    if corrupt_dc == 0.0 and r_h > 8.0 * r_h2 and r_h2 > 1e-2:
        raise ValidationFailure(
            "finite-difference check truncation-limited at a useless level "
            f"(step too large): {table}")
    return min(r_h, r_h2)


def probe_points(n: int, count: int = 10, seed: int = _PROBE_SEED) -> np.ndarray:
    """Deterministic pseudo-random probes, |z| log-uniform in [0.1, 10]."""
    rng = np.random.default_rng(seed)
    radii = 10.0 ** rng.uniform(-1.0, 1.0, size=count)
    zdir = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    zdir /= np.linalg.norm(zdir, axis=1)[:, None]
    return radii[:, None] * zdir


# --- trajectory cross-checks ------------------------------------------------


def brute_force_h_ode(profile: SolitonProfile, config: FlowConfig,
                      sample_count: int = 200):
    """h(t) by direct non-autonomous integration of the scaling-factor ODE.

    Deliberately avoids the log-radius/sigma change of variables used by
    the primary integrator: dh/dt = h * (c / (2(T-t))) * lambda(kappa h r0).
    Returns (t_samples, h_samples) on [0, 0.99 T'].
    """
    if config.mode != "rmcf":
        raise DomainError("the scaling-factor equation is for mode 'rmcf'")
    c, T, r0 = profile.c, config.T, config.r0
    T_prime = maximal_time_closed_form(profile, config)
    t_end = 0.99 * min(T_prime, T * (1.0 - 1e-12))

    def rhs(t, y):
        kappa = (T / (T - t)) ** (c / 2.0)
        lam = float(lambda_of_s(profile, 2.0 * (y[0] + math.log(kappa * r0))))
        return [(c / (2.0 * (T - t))) * lam]

    # integrate log h for positivity; a different integrator family than the
    # primary engine keeps the comparison honest
    sol = solve_ivp(rhs, (0.0, t_end), [0.0], method="DOP853",
                    rtol=config.rel_tol, atol=config.abs_tol, dense_output=True)
    if not sol.success:
        raise ValidationFailure(f"direct scaling-factor integration failed: {sol.message}")
    t = np.linspace(0.0, t_end, sample_count)
    return t, np.exp(sol.sol(t)[0])


def _h_crosscheck(profile: SolitonProfile, config: FlowConfig) -> float:
    """Max relative deviation between the two integrators' h(t)."""
    c, T = profile.c, config.T
    traj = integrate_rmcf(profile, config)
    t, h_bf = brute_force_h_ode(profile, config)
    if traj.target == "Stationary":
        h_ref = (1.0 - t / T) ** (c / 2.0)
        return float(np.max(np.abs(h_bf / h_ref - 1.0)))
    # map the primary trajectory through R = kappa h r0 at the same times,
    # re-running the primary integrator densely at a tighter tolerance so
    # the reported deviation is the brute-force integrator's alone
    sigma = -np.log1p(-t / T)
    from .flows import _escape_bounds, _integrate_x  # local import, private API

    tight = replace(config, rel_tol=config.rel_tol / 100.0,
                    abs_tol=config.abs_tol / 100.0)
    x_lo, x_hi = _escape_bounds(profile, tight)

    def rhs(s_, y):
        return [(c / 2.0) * (float(lambda_of_s(profile, 2.0 * y[0])) + 1.0)]

    sol, sigma_e, _, _ = _integrate_x(profile, rhs, math.log(config.r0),
                                      config.max_time, tight, x_lo, x_hi)
    inside = sigma <= sigma_e
    x = sol.sol(sigma[inside])[0]
    kappa = np.exp(c * sigma[inside] / 2.0)
    h_primary = np.exp(x) / (kappa * config.r0)
    return float(np.max(np.abs(h_bf[inside] / h_primary - 1.0)))


def validation_report(profile: SolitonProfile, probe_count: int = 10,
                      step: float = 1e-3, T: float = 1.0):
    """Full report plus the per-probe residual breakdown."""
    from .critical import find_critical_radii

    ode_sup, holo_sup = ode_residual_scan(profile)
    probes = probe_points(profile.params.n, probe_count)
    per_probe = [soliton_equation_residual_fd(profile, z, step) for z in probes]
    crit = find_critical_radii(profile)
    r1, r2 = crit.r1, crit.r2

    t_dev = 0.0
    for mode, radii in (("rmcf", [0.5 * r1, 0.9 * r1, 1.1 * r1,
                                  0.5 * (r1 + r2), r2, 2.0 * r2]),
                        ("mcf", [0.9 * r2, 1.1 * r2])):
        for r0 in radii:
            cfg = FlowConfig(mode=mode, r0=r0, T=T)
            traj = integrate_rmcf(profile, cfg) if mode == "rmcf" \
                else integrate_mcf(profile, cfg)
            t_dev = max(t_dev, abs(traj.T_prime_ode / traj.T_prime_quadrature - 1.0))

    h_dev = 0.0
    for r0 in (0.9 * r1, r1, 1.1 * r1):
        h_dev = max(h_dev, _h_crosscheck(profile, FlowConfig(mode="rmcf", r0=r0, T=T)))

    report = ValidationReport(
        ode_residual_sup=ode_sup,
        holomorphy_residual_sup=holo_sup,
        soliton_fd_residual=max(per_probe),
        h_ode_crosscheck=h_dev,
        Tprime_crosscheck=t_dev)
    return report, per_probe
