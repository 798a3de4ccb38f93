"""Static figures plus machine-readable plot data.

Every figure gets a sibling two-column (or few-column) whitespace-delimited
.dat file with the exact plotted numbers, so downstream tooling never has to
scrape pixels.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .critical import find_critical_radii
from .flows import FlowTrajectory
from .geometry import lambda_of_radius, radial_state
from .profile import SolitonProfile
from .reports import radius_sweep


def _dat_path(fig_path: str) -> str:
    return os.path.splitext(fig_path)[0] + ".dat"


def _write_dat(path: str, header: str, columns) -> str:
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt="%.17g", header=header, newline="\n")
    return path


def plot_lambda(profile: SolitonProfile, fig_path: str,
                r_min: float = 0.05, r_max: float = 20.0,
                count: int = 400) -> list[str]:
    """lambda(r) on a log radius axis with both critical radii marked."""
    crit = find_critical_radii(profile)
    r = radius_sweep(r_min, r_max, count)
    lam = np.array([float(lambda_of_radius(profile, ri)) for ri in r])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogx(r, lam, lw=1.5)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.axhline(-1.0, color="0.6", lw=0.8, ls="--")
    ax.axvline(crit.r1, color="tab:red", lw=0.8, ls=":",
               label=f"r1 = {crit.r1:.6f}")
    ax.axvline(crit.r2, color="tab:green", lw=0.8, ls=":",
               label=f"r2 = {crit.r2:.6f}")
    ax.set_xlabel("orbit radius r")
    ax.set_ylabel("self-similarity coefficient lambda(r)")
    ax.set_ylim(-4.0, 4.0)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    dat = _write_dat(_dat_path(fig_path), "r lambda", (r, lam))
    return [fig_path, dat]


def plot_normA2(profile: SolitonProfile, fig_path: str,
                r_min: float = 0.05, r_max: float = 20.0,
                count: int = 400) -> list[str]:
    """|A|^2 of the orbit on log-log axes; both tails are straight lines."""
    r = radius_sweep(r_min, r_max, count)
    a2 = np.array([radial_state(profile, ri).normA2 for ri in r])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(r, a2, lw=1.5)
    ax.set_xlabel("orbit radius r")
    ax.set_ylabel("second fundamental form |A|^2")
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    dat = _write_dat(_dat_path(fig_path), "r normA2", (r, a2))
    return [fig_path, dat]


def plot_trajectory(traj: FlowTrajectory, fig_path: str) -> list[str]:
    """R(t) and h(t) for one trajectory, shared time axis."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.5), sharex=True)
    ax1.plot(traj.t, traj.R, lw=1.5)
    ax1.set_ylabel("radius R(t)")
    ax1.set_title(f"{traj.mode} from r0 = {traj.r0:.6f}: {traj.target}, "
                  f"T' = {traj.T_prime_ode:.6g}")
    ax2.plot(traj.t, traj.h, lw=1.5, color="tab:orange")
    ax2.set_ylabel("scaling factor h(t)")
    ax2.set_xlabel("time t")
    ax2.set_yscale("log")
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
    dat = _write_dat(_dat_path(fig_path), "t R h",
                     (traj.t, traj.R, traj.h))
    return [fig_path, dat]
