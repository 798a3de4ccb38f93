"""Construction of the rotation-invariant shrinking soliton profile.

The third-order boundary-value problem for the potential u(s) becomes, in the
moment coordinate W = u'(s) with V(W) = u''(s), the first-order linear ODE

    dV/dW = n - W - ((n-1)/W - c) V,      V(n-k) = V(n+k) = 0,

on the compact interval [n-k, n+k].  The integrating factor W^{n-1} e^{-cW}
gives the explicit solution

    V(W) = e^{cW} W^{-(n-1)} \int_{n-k}^{W} t^{n-1} e^{-ct} (n-t) dt,

and the two-sided boundary condition pins the constant c as the unique root of

    I(c) = \int_{n-k}^{n+k} t^{n-1} e^{-ct} (n-t) dt = 0

in (0, 1).  Everything else (the coordinate map s(W), the potential u, the
leading tail coefficients a1, b1) follows by quadrature with the endpoint
pole of 1/V subtracted analytically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import ArithmeticFault, ConstructionError, DomainError

_GL30_X, _GL30_W = np.polynomial.legendre.leggauss(30)
_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)

# Relative disagreement between the exact recurrence and adaptive quadrature
# beyond this level means an implementation fault, not a data problem.
_CROSSCHECK_GUARD = 1e-10


@dataclass(frozen=True)
class SolitonParams:
    """Problem data: ambient complex dimension n, bundle twist k, grid knobs."""

    n: int
    k: int
    grid_size: int = 512
    tol_c: float = 1e-13
    tol_ode: float = 1e-8
    gauge_W: float | None = None  # moment coordinate at which s = 0; default n

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise DomainError("n and k must be integers")
        if self.n < 2 or not (1 <= self.k <= self.n - 1):
            raise DomainError(f"need n >= 2 and 1 <= k <= n-1, got n={self.n}, k={self.k}")
        if self.grid_size < 64:
            raise DomainError("grid_size must be at least 64")
        if self.tol_c <= 0.0 or self.tol_ode <= 0.0:
            raise DomainError("tolerances must be strictly positive")
        if self.gauge_W is not None and not (self.W_min < self.gauge_W < self.W_max):
            raise DomainError("gauge_W must lie strictly inside (n-k, n+k)")

    @property
    def W_min(self) -> float:
        return float(self.n - self.k)

    @property
    def W_max(self) -> float:
        return float(self.n + self.k)

    @property
    def gauge_point(self) -> float:
        return float(self.n) if self.gauge_W is None else float(self.gauge_W)

    def gauge_label(self) -> str:
        if self.gauge_W is None:
            return "s0_at_W_eq_n"
        return f"s0_at_W_eq_{self.gauge_W:.17g}"


def _residual_exact(c: float, n: int, k: int) -> float:
    """I(c) by the integration-by-parts recurrence, in extended precision."""
    if c == 0.0:
        m, M = n - k, n + k
        return float((M**n - m**n) - (M ** (n + 1) - m ** (n + 1)) / (n + 1))
    ld = np.longdouble
    cl = ld(c)
    a = ld(n - k)
    b = ld(n + k)
    ea = np.exp(-cl * a)
    eb = np.exp(-cl * b)
    # E_j = int_a^b t^j e^{-ct} dt
    E = ea * (-np.expm1(-cl * (b - a))) / cl
    Eprev = E
    for j in range(1, n + 1):
        E = (a ** ld(j) * ea - b ** ld(j) * eb) / cl + ld(j) / cl * Eprev
        if j == n - 1:
            En1 = E
        Eprev = E
    if n == 1:  # unreachable under the standing assumption, kept for clarity
        En1 = ea * (-np.expm1(-cl * (b - a))) / cl
    return float(ld(n) * En1 - E)


def _residual_quad(c: float, n: int, k: int) -> float:
    with warnings.catch_warnings():
        # Near the root the integral cancels to ~1e-16; QUADPACK then warns
        # about roundoff even though the value is exactly what we expect.
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(lambda t: t ** (n - 1) * math.exp(-c * t) * (n - t),
                      n - k, n + k, points=[n], epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def _residual_scale(c: float, n: int, k: int) -> float:
    """L1 norm of the integrand, used as the cross-check denominator."""
    val, _ = quad(lambda t: t ** (n - 1) * math.exp(-c * t) * abs(n - t),
                  n - k, n + k, points=[n], limit=200)
    return max(val, 1e-300)


def soliton_constant_residual(c: float, params: SolitonParams) -> float:
    """I(c); exact recurrence, cross-checked against adaptive quadrature."""
    if not (0.0 <= c <= 1.0):
        raise DomainError(f"c must lie in [0, 1], got {c}")
    exact = _residual_exact(c, params.n, params.k)
    approx = _residual_quad(c, params.n, params.k)
    scale = _residual_scale(c, params.n, params.k)
    if abs(exact - approx) / scale > _CROSSCHECK_GUARD:
        raise ArithmeticFault(
            f"I({c}) evaluation routes disagree: recurrence={exact!r}, "
            f"quadrature={approx!r}, scale={scale!r}")
    return exact


def _residual_derivative(c: float, n: int, k: int) -> float:
    """dI/dc = -int t^n e^{-ct} (n - t) dt, by the same recurrence idea."""
    val, _ = quad(lambda t: -(t**n) * math.exp(-c * t) * (n - t),
                  n - k, n + k, points=[n], limit=200)
    return val


def solve_soliton_constant(params: SolitonParams) -> float:
    """Root of I(c) in (0, 1), bracketed then polished to the nearest float."""
    n, k = params.n, params.k
    i0 = soliton_constant_residual(0.0, params)
    i1 = soliton_constant_residual(1.0, params)
    if not (i0 < 0.0 < i1) and not (i1 < 0.0 < i0):
        raise ConstructionError(
            f"no sign change of I on [0,1] for n={n}, k={k}: I(0)={i0!r}, I(1)={i1!r}")
    c = brentq(lambda x: _residual_exact(x, n, k), 0.0, 1.0,
               xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # Newton polish, then settle on the neighbouring float minimising |I|.
    for _ in range(3):
        step = _residual_exact(c, n, k) / _residual_derivative(c, n, k)
        if not math.isfinite(step):
            break
        c -= step
    cands = {c, np.nextafter(c, 0.0), np.nextafter(c, 1.0)}
    c = min(cands, key=lambda x: abs(_residual_exact(x, n, k)))
    resid = soliton_constant_residual(c, params)
    if not (0.0 < c < 1.0) or abs(resid) >= params.tol_c:
        raise ConstructionError(
            f"soliton constant failed tolerance: c={c!r}, |I(c)|={abs(resid)!r}")
    return float(c)


def _flux_integral(c: float, n: int, k: int, W):
    """J(W) = int_{n-k}^{W} t^{n-1} e^{-ct} (n-t) dt, vectorised.

    Upper-half arguments use J = -int_W^{n+k}, i.e. the closing boundary
    condition I(c) = 0 is imposed exactly.  The solved c leaves a residual
    below float resolution (~1e-15); carrying it into J would reintroduce a
    spurious (M - W)^{-2} spike in 1/V - 1/(k(M-W)) near the endpoint, which
    pollutes the tail quadratures at the 1e-11 level.
    """
    W = np.asarray(W, dtype=float)
    lower = W <= n
    a = np.where(lower, n - k, W)
    b = np.where(lower, W, n + k)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    t = mid[..., None] + half[..., None] * _GL30_X
    vals = (t ** (n - 1)) * np.exp(-c * t) * (n - t)
    seg = half * (vals @ _GL30_W)
    return np.where(lower, seg, -seg)


def profile_V(c: float, params: SolitonParams, W):
    """V(W) = u'' as a function of W = u', from the integrating factor."""
    W_arr = np.asarray(W, dtype=float)
    if np.any(W_arr < params.W_min) or np.any(W_arr > params.W_max):
        raise DomainError(f"W outside [{params.W_min}, {params.W_max}]")
    n = params.n
    J = _flux_integral(c, n, params.k, W_arr)
    out = np.exp(c * W_arr) * W_arr ** (-(n - 1)) * J
    if np.isscalar(W):
        return float(out)
    return out


def profile_dVdW(c: float, params: SolitonParams, W):
    """dV/dW from the same closed form (not numerical differencing)."""
    V = profile_V(c, params, W)
    W_arr = np.asarray(W, dtype=float)
    out = params.n - W_arr - ((params.n - 1) / W_arr - c) * np.asarray(V)
    if np.isscalar(W):
        return float(out)
    return out


@dataclass
class RadialPoint:
    """Consistent coordinate triple plus the profile value there."""
    r: float
    s: float
    W: float
    V: float


@dataclass
class SolitonProfile:
    """The solved soliton: constant c plus the tabulated profile maps.

    Immutable after construction; all evaluators are pure.
    """

    params: SolitonParams
    c: float
    W_grid: np.ndarray
    V_values: np.ndarray
    dVdW_values: np.ndarray
    s_values: np.ndarray
    u_values: np.ndarray
    a1: float
    b1: float
    residual_at_c: float
    blend_mismatch_low: float
    blend_mismatch_high: float
    # s(W) = log((W-m)/(M-W))/k - log_gauge + gsm(W): the log carries both
    # endpoint poles exactly and only the smooth remainder is interpolated,
    # so the coordinate maps stay accurate arbitrarily close to the edges.
    _gsm_spline: CubicHermiteSpline = field(repr=False)
    _psi_spline: CubicHermiteSpline = field(repr=False)
    _log_gauge: float = field(repr=False, default=0.0)
    # With u anchored at the lower end (u - (n-k)s -> 0), the upper expansion
    # picks up a forced additive constant: u = (n+k)s + u_shift_high + b1 e^{-ks}.
    u_shift_high: float = 0.0

    # --- raw profile evaluators -------------------------------------------

    def V_of_W(self, W):
        return profile_V(self.c, self.params, W)

    def dVdW_of_W(self, W):
        return profile_dVdW(self.c, self.params, W)

    @property
    def s_lo(self) -> float:
        return float(self.s_values[0])

    @property
    def s_hi(self) -> float:
        return float(self.s_values[-1])

    def s_of_W(self, W):
        """Coordinate map s(W); the endpoint logs are carried exactly."""
        W_arr = np.atleast_1d(np.asarray(W, dtype=float))
        p = self.params
        if np.any(W_arr <= p.W_min) or np.any(W_arr >= p.W_max):
            raise DomainError("W must lie strictly inside (n-k, n+k)")
        out = (np.log((W_arr - p.W_min) / (p.W_max - W_arr)) / p.k
               - self._log_gauge + self._gsm_spline(W_arr))
        return float(out[0]) if np.isscalar(W) else out

    def W_of_s(self, s):
        """Inverse coordinate map, by Newton in xi = log((W-m)/(M-W))."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        p = self.params
        k, m, M = p.k, p.W_min, p.W_max
        gsm_d = self._gsm_spline.derivative()

        def W_of_xi(xi):
            # logistic form, stable for xi of either sign and any magnitude
            e = np.exp(-np.abs(xi))
            W_pos = (m * e + M) / (1.0 + e)      # xi >= 0
            W_neg = (m + M * e) / (1.0 + e)      # xi < 0
            return np.where(xi >= 0.0, W_pos, W_neg)

        xi = k * (s_arr + self._log_gauge)  # exact if gsm were zero
        for _ in range(30):
            W = W_of_xi(xi)
            f = xi / k - self._log_gauge + self._gsm_spline(W) - s_arr
            df = 1.0 / k + gsm_d(W) * (W - m) * (M - W) / (M - m)
            step = f / df
            xi = xi - step
            if np.max(np.abs(step)) < 1e-14 * (1.0 + np.max(np.abs(xi))):
                break
        out = W_of_xi(xi)
        return float(out[0]) if np.isscalar(s) else out

    def u_of_W(self, W):
        """Potential u at moment coordinate W, via the smooth/log split."""
        W_arr = np.atleast_1d(np.asarray(W, dtype=float))
        p = self.params
        s = np.atleast_1d(self.s_of_W(W_arr))
        out = (p.W_min * s + self._psi_spline(W_arr)
               - 2.0 * np.log((p.W_max - W_arr) / (2.0 * p.k)))
        return float(out[0]) if np.isscalar(W) else out

    def u_of_s(self, s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        p = self.params
        k, m, M = p.k, p.W_min, p.W_max
        out = np.empty_like(s_arr)
        # Beyond the grid edge W is within O(eps) of an endpoint and W-m
        # carries no relative precision; the tail series is exact there to
        # O(e^{2ks}), well below the edge blend mismatch.
        lo = s_arr < self.s_lo
        hi = s_arr > self.s_hi
        mid = ~(lo | hi)
        if mid.any():
            out[mid] = self.u_of_W(np.atleast_1d(self.W_of_s(s_arr[mid])))
        if lo.any():
            out[lo] = m * s_arr[lo] + self.a1 * np.exp(k * s_arr[lo])
        if hi.any():
            out[hi] = (M * s_arr[hi] + self.u_shift_high
                       + self.b1 * np.exp(-k * s_arr[hi]))
        return float(out[0]) if np.isscalar(s) else out


# --- pole-subtracted remainder of 1/V ------------------------------------

def _endpoint_curvatures(c: float, n: int, k: int):
    """V'' and V''' at both endpoints, from differentiating the reduced ODE."""
    m, M = n - k, n + k
    V2m = -1.0 - ((n - 1) / m - c) * k
    V2M = -1.0 + ((n - 1) / M - c) * k
    V3m = -((n - 1) / m - c) * V2m + 2 * (n - 1) * k / m**2
    V3M = -((n - 1) / M - c) * V2M - 2 * (n - 1) * k / M**2
    return V2m, V3m, V2M, V3M


def _make_pole_remainder(c: float, params: SolitonParams):
    """g(W) = 1/V - 1/(k(W-m)) - 1/(k(M-W)), bounded on the open interval."""
    n, k = params.n, params.k
    m, M = params.W_min, params.W_max
    V2m, V3m, V2M, V3M = _endpoint_curvatures(c, n, k)
    delta = 1e-6 * k

    def g(W):
        W = np.asarray(W, dtype=float)
        tl = W - m
        tu = M - W
        out = np.empty_like(W)
        near_lo = tl < delta
        near_hi = tu < delta
        main = ~(near_lo | near_hi)
        if main.any():
            V = np.exp(c * W[main]) * W[main] ** (-(n - 1)) * _flux_integral(c, n, k, W[main])
            out[main] = 1.0 / V - 1.0 / (k * tl[main]) - 1.0 / (k * tu[main])
        if near_lo.any():
            t = tl[near_lo]
            out[near_lo] = (-(V2m / 2 + V3m * t / 6) / (k**2 * (1 + V2m * t / (2 * k)))
                            - 1.0 / (k * tu[near_lo]))
        if near_hi.any():
            t = tu[near_hi]
            out[near_hi] = (-(V2M / 2 + (-V3M) * t / 6) / (k**2 * (1 + V2M * t / (2 * k)))
                            - 1.0 / (k * tl[near_hi]))
        return out

    return g


def _panel_gauss(f, a, b):
    """16-point Gauss-Legendre on [a, b] for a vectorised integrand."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(f(mid + half * _GL16_X) @ _GL16_W)


def build_profile(params: SolitonParams) -> SolitonProfile:
    """Solve for c and tabulate V, s, u on an endpoint-clustered grid."""
    n, k, G = params.n, params.k, params.grid_size
    m, M = params.W_min, params.W_max
    c = solve_soliton_constant(params)
    I_c = _residual_exact(c, n, k)

    # Chebyshev-interior nodes resolve the endpoint poles of 1/V.
    j = np.arange(G)
    W = n - k * np.cos(np.pi * (j + 0.5) / G)
    V = profile_V(c, params, W)
    if np.any(V <= 0.0):
        raise ConstructionError("V not strictly positive on the interior grid")
    dVdW = profile_dVdW(c, params, W)

    g = _make_pole_remainder(c, params)
    edges = np.concatenate(([m], W, [M]))
    seg_g = np.empty(G + 1)
    seg_wg = np.empty(G + 1)
    for i in range(G + 1):
        a, b = edges[i], edges[i + 1]
        seg_g[i] = _panel_gauss(g, a, b)
        seg_wg[i] = _panel_gauss(lambda x: (x - m) * g(x), a, b)
    cum_g = np.cumsum(seg_g)   # cum_g[i] = int_m^{edges[i+1]} g
    cum_wg = np.cumsum(seg_wg)

    def int_g_from_m(x: float) -> float:
        """int_m^x g for arbitrary x in [m, M]."""
        i = int(np.searchsorted(edges, x, side="right")) - 1
        i = min(max(i, 0), G)
        base = cum_g[i - 1] if i > 0 else 0.0
        return base + _panel_gauss(g, edges[i], x)

    gauge = params.gauge_point
    Gm_gauge = int_g_from_m(gauge)
    log_gauge = math.log((gauge - m) / (M - gauge)) / k

    Gm_nodes = cum_g[:G]  # int_m^{W_j} g
    s = np.log((W - m) / (M - W)) / k + (Gm_nodes - Gm_gauge) - log_gauge

    Gm_full = cum_g[G]
    # Exact limits of the tail coefficients, gauge shift included:
    #   a1 = lim_{W->m} (W-m) e^{-ks}/k,   b1 = lim_{W->M} (M-W) e^{ks}/k.
    a1 = 2.0 * math.exp(k * (Gm_gauge + log_gauge))
    b1 = 2.0 * math.exp(k * (Gm_full - Gm_gauge - log_gauge))

    phi = cum_wg[:G] + 2.0 * np.log(2.0 * k / (M - W))
    u = m * s + phi

    if not np.all(np.diff(s) > 0.0):
        raise ConstructionError("s(W) not strictly increasing on the grid")

    # Only the smooth remainders are interpolated; the endpoint logs of s
    # and u are reattached in closed form by the evaluators.
    g_nodes = g(W)
    gsm_spline = CubicHermiteSpline(W, Gm_nodes - Gm_gauge, g_nodes)
    psi_spline = CubicHermiteSpline(W, cum_wg[:G], (W - m) * g_nodes)

    # Tail blend diagnostics at the grid edges, expressed through V.
    V_tail_lo = k * (W[0] - m)
    V_tail_hi = k * (M - W[-1])
    blend_lo = abs(V_tail_lo / V[0] - 1.0)
    blend_hi = abs(V_tail_hi / V[-1] - 1.0)
    if blend_lo > 5e-3 or blend_hi > 5e-3:
        raise ConstructionError(
            f"asymptotic tails do not match the grid edge: {blend_lo}, {blend_hi}")

    prof = SolitonProfile(
        params=params, c=c, W_grid=W, V_values=V, dVdW_values=dVdW,
        s_values=s, u_values=u, a1=a1, b1=b1, residual_at_c=I_c,
        blend_mismatch_low=blend_lo, blend_mismatch_high=blend_hi,
        _gsm_spline=gsm_spline, _psi_spline=psi_spline, _log_gauge=log_gauge,
        u_shift_high=float(cum_wg[G] + 2.0 * math.log(2.0 / b1)))
    _check_profile(prof)
    return prof


def _check_profile(prof: SolitonProfile):
    p = prof.params
    if not (0.0 < prof.c < 1.0):
        raise ConstructionError(f"soliton constant out of range: {prof.c}")
    if prof.a1 <= 0.0 or prof.b1 <= 0.0:
        raise ConstructionError("tail coefficients must be positive")
    # One-sided endpoint slopes of V, by linear extrapolation of dV/dW.
    W, d = prof.W_grid, prof.dVdW_values
    slope_lo = d[0] + (p.W_min - W[0]) * (d[1] - d[0]) / (W[1] - W[0])
    slope_hi = d[-1] + (p.W_max - W[-1]) * (d[-2] - d[-1]) / (W[-2] - W[-1])
    if abs(slope_lo - p.k) > 1e-6 or abs(slope_hi + p.k) > 1e-6:
        raise ConstructionError(
            f"endpoint slopes of V off: {slope_lo} vs {p.k}, {slope_hi} vs {-p.k}")


def coordinate_convert(profile: SolitonProfile, *, r: float | None = None,
                       s: float | None = None, W: float | None = None) -> RadialPoint:
    """Consistent (r, s, W, V) from any one of the three coordinates."""
    given = [x is not None for x in (r, s, W)]
    if sum(given) != 1:
        raise DomainError("specify exactly one of r, s, W")
    p = profile.params
    if r is not None:
        if r <= 0.0:
            raise DomainError(f"radius must be positive, got {r}")
        s_val = 2.0 * math.log(r)
        W_val = profile.W_of_s(s_val)
    elif s is not None:
        s_val = float(s)
        W_val = profile.W_of_s(s_val)
    else:
        if not (p.W_min < W < p.W_max):
            raise DomainError(f"W must lie strictly inside ({p.W_min}, {p.W_max})")
        W_val = float(W)
        s_val = profile.s_of_W(W_val)
    r_val = math.exp(s_val / 2.0)
    return RadialPoint(r=r_val, s=s_val, W=float(W_val),
                       V=float(profile.V_of_W(np.clip(W_val, p.W_min, p.W_max))))
