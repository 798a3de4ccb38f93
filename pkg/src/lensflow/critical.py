"""The two distinguished radii of the self-similar coefficient.

lambda(r) increases from -infinity to +infinity and crosses -1 at r1 and 0
at r2; r1 is the stationary radius of the coupled flow, r2 the minimal
orbit.  Roots are located in the moment coordinate W, where lambda is a
smooth ratio of grid-native quantities, and mapped back through s(W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, DomainError
from .geometry import lambda_of_radius, lambda_of_s, lambda_of_W
from .profile import SolitonProfile


@dataclass(frozen=True)
class CriticalRadii:
    """Certified crossing data for lambda = -1 (r1) and lambda = 0 (r2)."""

    r1: float
    r2: float
    W1: float
    W2: float
    dlambda_dr_at_r1: float
    dlambda_dr_at_r2: float
    tail_slope_zero: float      # fitted d log(-lambda)/d log r near r -> 0
    tail_slope_infinity: float  # fitted d log(lambda)/d log r near r -> infinity


def _lambda_slope_W(profile: SolitonProfile, W: float) -> float:
    """d lambda / dW from the closed forms (no differencing)."""
    n = profile.params.n
    c = profile.c
    V = float(profile.V_of_W(W))
    dV = float(profile.dVdW_of_W(W))
    N = n - W + c * V + (n - 1) * V / W
    dN = -1.0 + c * dV + (n - 1) * (dV * W - V) / W**2
    return -(dN * V - N * dV) / (2.0 * c * V**2)


def _tail_slope(profile: SolitonProfile, lower: bool) -> float:
    """Least-squares log-log slope of |lambda| over the outermost grid band."""
    if lower:
        s = np.linspace(profile.s_lo, profile.s_lo + 2.0, 24)
    else:
        s = np.linspace(profile.s_hi - 2.0, profile.s_hi, 24)
    lam = lambda_of_s(profile, s)
    x = s / 2.0  # log r
    return float(np.polyfit(x, np.log(np.abs(lam)), 1)[0])


def find_critical_radii(profile: SolitonProfile) -> CriticalRadii:
    """Locate r1, r2 by bracketed root-finding in W and certify uniqueness."""
    p = profile.params
    lam_grid = lambda_of_W(profile, profile.W_grid)
    for name, values in (("lambda+1", lam_grid + 1.0), ("lambda", lam_grid)):
        crossings = int(np.count_nonzero(np.diff(np.sign(values)) != 0))
        if crossings != 1:
            raise ConstructionError(
                f"{name} changes sign {crossings} times over the grid; "
                "expected exactly one crossing (profile corrupt?)")

    def solve(target: float) -> float:
        shifted = lam_grid - target
        i = int(np.flatnonzero(np.diff(np.sign(shifted)) != 0)[0])
        return brentq(lambda w: float(lambda_of_W(profile, w)) - target,
                      profile.W_grid[i], profile.W_grid[i + 1],
                      xtol=1e-15, rtol=8.9e-16)

    W1 = solve(-1.0)
    W2 = solve(0.0)
    s1 = float(profile.s_of_W(W1))
    s2 = float(profile.s_of_W(W2))
    r1 = math.exp(s1 / 2.0)
    r2 = math.exp(s2 / 2.0)
    # d lambda/dr = (dlambda/dW) (dW/ds) (ds/dr) = (dlambda/dW) V (2/r).
    slope1 = _lambda_slope_W(profile, W1) * float(profile.V_of_W(W1)) * 2.0 / r1
    slope2 = _lambda_slope_W(profile, W2) * float(profile.V_of_W(W2)) * 2.0 / r2
    crit = CriticalRadii(
        r1=r1, r2=r2, W1=W1, W2=W2,
        dlambda_dr_at_r1=slope1, dlambda_dr_at_r2=slope2,
        tail_slope_zero=_tail_slope(profile, lower=True),
        tail_slope_infinity=_tail_slope(profile, lower=False))
    if not (crit.r1 < crit.r2):
        raise ConstructionError(f"expected r1 < r2, got {crit.r1} >= {crit.r2}")
    if slope1 <= 0.0 or slope2 <= 0.0:
        raise ConstructionError("crossing slopes of lambda must be positive")
    if not (p.W_min < W1 < W2 < p.W_max):
        raise ConstructionError("critical moment coordinates out of order")
    return crit


# Classification returns "minimal" inside a narrow |lambda| band; the
# boundaries are otherwise strict.
_MINIMAL_BAND = 1e-8


def shrinker_expander_classification(profile: SolitonProfile, r: float) -> str:
    """One of 'self-shrinker', 'minimal', 'self-expander' for the orbit at r."""
    if r <= 0.0:
        raise DomainError(f"radius must be positive, got {r}")
    lam = float(lambda_of_radius(profile, r))
    if abs(lam) < _MINIMAL_BAND:
        return "minimal"
    return "self-shrinker" if lam < 0.0 else "self-expander"
