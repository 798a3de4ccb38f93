"""Radius-dependent geometry of the round orbits inside the soliton.

Every quantity is evaluated in the moment coordinates (W, V) where the
formulas are smooth ratios; nothing here differentiates an interpolant.
The self-similar coefficient is

    lambda(r) = -(n - W + cV + (n-1) V/W) / (2cV),        s = log r^2,

the second fundamental form of the radius-r orbit has

    |A|^2 = (1/2V) [ (n - W - ((n-1)/W - c) V)^2 + 2(n-1) (V/W)^2 ],

and the mean curvature satisfies |H|^2 = lambda^2 * 2 c^2 V.  The scalar
P(s) = -n s + (n-1) log W + log V + u(s) is the potential whose level sets
are the round orbits; it is strictly increasing with finite limits at both
ends (the tails approach constants), so level-set inversion is restricted
to the attainable range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .profile import SolitonProfile

# lambda * r^{2k} -> -1/(2 c a1 k) as r -> 0, and the mirror constant at
# infinity; used for tail evaluation and by the flow integrator.


def lambda_tail_coefficients(profile: SolitonProfile) -> tuple[float, float]:
    """(A, B) with lambda ~ -A r^{-2k} as r->0 and ~ B r^{2k} as r->infinity."""
    c, k = profile.c, profile.params.k
    return 1.0 / (2.0 * c * profile.a1 * k), 1.0 / (2.0 * c * profile.b1 * k)


def lambda_of_W(profile: SolitonProfile, W):
    """Self-similar coefficient as a function of the moment coordinate."""
    n = profile.params.n
    c = profile.c
    W_arr = np.asarray(W, dtype=float)
    V = np.asarray(profile.V_of_W(W_arr))
    with np.errstate(divide="ignore"):
        out = -(n - W_arr + c * V + (n - 1) * V / W_arr) / (2.0 * c * V)
    return float(out) if np.isscalar(W) else out


def lambda_of_radius(profile: SolitonProfile, r):
    """lambda(r), vectorised; radii beyond the grid use the asymptotic tails."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0.0):
        raise DomainError("radius must be positive")
    s = 2.0 * np.log(r_arr)
    out = lambda_of_s(profile, s)
    return float(out[0]) if np.isscalar(r) else out


def lambda_of_s(profile: SolitonProfile, s):
    """lambda as a function of s = log r^2 (the flow integrator's form)."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    p = profile.params
    n, k, c = p.n, p.k, profile.c
    A, B = lambda_tail_coefficients(profile)
    out = np.empty_like(s_arr)
    # Far beyond the grid the W-based formula underflows; switch to the
    # power-law tails one k-fold past the grid edge, where they already
    # agree with the full formula to better than the blend tolerance.
    lo = s_arr < profile.s_lo - 1.0 / k
    hi = s_arr > profile.s_hi + 1.0 / k
    mid = ~(lo | hi)
    if mid.any():
        W = profile.W_of_s(s_arr[mid])
        W = np.clip(np.atleast_1d(W), np.nextafter(p.W_min, p.W_max),
                    np.nextafter(p.W_max, p.W_min))
        out[mid] = lambda_of_W(profile, W)
    if lo.any():
        out[lo] = -A * np.exp(-2.0 * k * (s_arr[lo] / 2.0))
    if hi.any():
        out[hi] = B * np.exp(2.0 * k * (s_arr[hi] / 2.0))
    return float(out[0]) if np.isscalar(s) else out


@dataclass(frozen=True)
class RadialState:
    """All radius-dependent scalars of one round orbit."""

    r: float
    s: float
    W: float
    V: float
    lam: float          # self-similar coefficient lambda(r)
    normA2: float       # |A(iota_r)|^2
    P: float            # potential P(s)
    Pprime: float       # P'(s) = c V
    Pdoubleprime: float  # P''(s) = c V dV/dW
    gamma: float        # level value of the potential at this orbit


@dataclass(frozen=True)
class HessianSpectrum:
    """Eigenvalues of the potential Hessian restricted to an orbit."""

    h_v1: float         # radial-circle direction, multiplicity 1
    h_w: float          # horizontal directions, multiplicity 2(n-1)
    grad_norm2: float   # |grad f|^2 = 2 c^2 V
    trace_top: float    # h_v1 + 2(n-1) h_w


def second_fundamental_norm2(profile: SolitonProfile, W, V):
    """|A|^2 of the orbit through moment coordinate W (vectorised)."""
    n = profile.params.n
    c = profile.c
    W_arr = np.asarray(W, dtype=float)
    V_arr = np.asarray(V, dtype=float)
    bracket = n - W_arr - ((n - 1) / W_arr - c) * V_arr
    with np.errstate(divide="ignore"):
        out = (bracket**2 + 2 * (n - 1) * (V_arr / W_arr) ** 2) / (2.0 * V_arr)
    return out


def _potential_edges(profile: SolitonProfile):
    """P and W at the two grid-edge s values, by the defining formula."""
    p = profile.params
    n = p.n
    out = []
    for s_e in (profile.s_lo, profile.s_hi):
        W = float(profile.W_of_s(s_e))
        V = float(profile.V_of_W(W))
        u = float(profile.u_of_W(W))
        out.append((W, -n * s_e + (n - 1) * math.log(W) + math.log(V) + u))
    return out  # [(W_lo, P_lo_edge), (W_hi, P_hi_edge)]


def _potential_limits(profile: SolitonProfile) -> tuple[float, float]:
    """Finite limits of P(s) as s -> -infinity and +infinity."""
    p = profile.params
    c = profile.c
    (W_lo, P_lo_edge), (W_hi, P_hi_edge) = _potential_edges(profile)
    return P_lo_edge - c * (W_lo - p.W_min), P_hi_edge + c * (p.W_max - W_hi)


def potential_P(profile: SolitonProfile, s):
    """P(s) = -n s + (n-1) log W + log V + u(s), tail-safe and vectorised.

    Beyond the grid edges the -ns + log V cancellation loses precision, but
    P' = cV = c dW/ds means P = cW + const there; the tails continue the
    edge value linearly in W, which is exact and keeps P monotone.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    p = profile.params
    n, k, c = p.n, p.k, profile.c
    out = np.empty_like(s_arr)
    lo = s_arr < profile.s_lo
    hi = s_arr > profile.s_hi
    mid = ~(lo | hi)
    if mid.any():
        W = np.atleast_1d(profile.W_of_s(s_arr[mid]))
        V = profile.V_of_W(W)
        u = profile.u_of_W(W)
        out[mid] = -n * s_arr[mid] + (n - 1) * np.log(W) + np.log(V) + u
    if lo.any() or hi.any():
        (W_lo, P_lo_edge), (W_hi, P_hi_edge) = _potential_edges(profile)
        if lo.any():
            W_t = p.W_min + profile.a1 * k * np.exp(k * s_arr[lo])
            out[lo] = P_lo_edge - c * (W_lo - W_t)
        if hi.any():
            W_t = p.W_max - profile.b1 * k * np.exp(-k * s_arr[hi])
            out[hi] = P_hi_edge + c * (W_t - W_hi)
    return float(out[0]) if np.isscalar(s) else out


def radial_state(profile: SolitonProfile, r: float) -> RadialState:
    """Evaluate every radius-dependent scalar at the orbit of radius r."""
    if r <= 0.0:
        raise DomainError(f"radius must be positive, got {r}")
    p = profile.params
    s = 2.0 * math.log(r)
    W = float(profile.W_of_s(s))
    W = min(max(W, np.nextafter(p.W_min, p.W_max)), np.nextafter(p.W_max, p.W_min))
    V = float(profile.V_of_W(W))
    dVdW = float(profile.dVdW_of_W(W))
    c = profile.c
    lam = float(lambda_of_W(profile, W))
    normA2 = float(second_fundamental_norm2(profile, W, V))
    P = float(potential_P(profile, s))
    return RadialState(r=r, s=s, W=W, V=V, lam=lam, normA2=normA2, P=P,
                       Pprime=c * V, Pdoubleprime=c * V * dVdW, gamma=P)


def mean_curvature_norm2(profile: SolitonProfile, r: float) -> float:
    """|H(iota_r)|^2 = lambda(r)^2 * |grad f|^2 with |grad f|^2 = 2 c^2 V."""
    st = radial_state(profile, r)
    return st.lam**2 * 2.0 * profile.c**2 * st.V


def hessian_spectrum(profile: SolitonProfile, r: float) -> HessianSpectrum:
    """Hessian eigenvalues of the potential on the orbit through radius r."""
    st = radial_state(profile, r)
    p = profile.params
    c = profile.c
    dVdW = float(profile.dVdW_of_W(st.W))
    h_v1 = c * dVdW
    h_w = c * st.V / st.W
    return HessianSpectrum(h_v1=h_v1, h_w=h_w,
                           grad_norm2=2.0 * c**2 * st.V,
                           trace_top=h_v1 + 2 * (p.n - 1) * h_w)


def level_set_radius(profile: SolitonProfile, gamma: float) -> float:
    """The unique radius r with P(log r^2) = gamma."""
    P_lo, P_hi = _potential_limits(profile)
    if not (P_lo < gamma < P_hi):
        raise DomainError(
            f"level value {gamma} outside the attainable range ({P_lo}, {P_hi})")
    k = profile.params.k
    # P is strictly increasing; bracket in s, widening into the tails where
    # P approaches its limits exponentially.
    s_a, s_b = profile.s_lo, profile.s_hi
    while potential_P(profile, s_a) > gamma:
        s_a -= 10.0 / k
        if s_a < -2000.0:
            raise DomainError(f"level value {gamma} too close to the lower limit")
    while potential_P(profile, s_b) < gamma:
        s_b += 10.0 / k
        if s_b > 2000.0:
            raise DomainError(f"level value {gamma} too close to the upper limit")
    s_root = brentq(lambda s: float(potential_P(profile, s)) - gamma,
                    s_a, s_b, xtol=1e-14, rtol=8.9e-16)
    return math.exp(s_root / 2.0)


def metric_at(profile: SolitonProfile, z) -> tuple[np.ndarray, np.ndarray, float]:
    """Hermitian metric coefficients g_{ab~}, their inverse, and det g at z.

    g_{ab~} = e^{-s} W delta_{ab} + e^{-2s} conj(z)_a z_b (V - W), s = log|z|^2;
    the inverse follows from the rank-one update and det g = e^{-ns} W^{n-1} V.
    """
    z = np.asarray(z, dtype=complex)
    p = profile.params
    if z.shape != (p.n,):
        raise DomainError(f"expected a complex vector of length {p.n}")
    z2 = float(np.real(np.vdot(z, z)))
    if z2 == 0.0:
        raise DomainError("metric is only defined away from the origin")
    s = math.log(z2)
    W = float(profile.W_of_s(s))
    V = float(profile.V_of_W(W))
    v = np.conj(z)
    outer = np.outer(v, np.conj(v))  # (conj z)_a z_b
    es = math.exp(s)
    g = (W / es) * np.eye(p.n, dtype=complex) + (V - W) / es**2 * outer
    ginv = (es / W) * np.eye(p.n, dtype=complex) + (1.0 / V - 1.0 / W) * outer
    det = math.exp(-p.n * s) * W ** (p.n - 1) * V
    return g, ginv, det
