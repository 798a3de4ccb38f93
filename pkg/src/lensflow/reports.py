"""Flat-file report emission: CSV sweeps, JSON summaries, the phase table.

All numeric output uses 17 significant digits, '.' decimal separator and LF
line endings, and JSON keys are sorted, so reruns with identical inputs are
byte-identical and suitable for golden-file testing.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .critical import CriticalRadii, find_critical_radii
from .errors import DomainError
from .flows import FlowConfig, FlowTrajectory, integrate_mcf, integrate_rmcf
from .geometry import mean_curvature_norm2, radial_state
from .profile import SolitonProfile

_FMT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return _FMT % value
    return str(value)


def write_csv(path: str, header: list[str], rows) -> str:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_json(path: str, payload: dict) -> str:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, allow_nan=True)
        fh.write("\n")
    return path


# --- sweeps ------------------------------------------------------------------


def write_profile_csv(profile: SolitonProfile, path: str) -> str:
    """The stored grid: moment coordinate, profile, both radial charts, u."""
    rows = zip(profile.W_grid, profile.V_values, profile.s_values,
               np.exp(profile.s_values / 2.0), profile.u_values)
    return write_csv(path, ["W", "V", "s", "r", "u"], rows)


def write_geometry_csv(profile: SolitonProfile, r_values, path: str) -> str:
    rows = []
    for r in r_values:
        st = radial_state(profile, float(r))
        rows.append((st.r, st.s, st.W, st.V, st.lam, st.normA2,
                     mean_curvature_norm2(profile, st.r), st.P, st.gamma))
    return write_csv(path, ["r", "s", "W", "V", "lambda", "normA2",
                            "normH2", "P", "gamma"], rows)


def write_flow_csv(traj: FlowTrajectory, path: str) -> str:
    rows = zip(traj.t, traj.sigma, traj.R, traj.h, traj.lam, traj.A2)
    return write_csv(path, ["t", "sigma", "R", "h", "lambda", "A2"], rows)


# --- summaries ---------------------------------------------------------------


def critical_summary(profile: SolitonProfile,
                     crit: CriticalRadii | None = None) -> dict:
    crit = crit or find_critical_radii(profile)
    p = profile.params
    return {
        "n": p.n,
        "k": p.k,
        "gauge": p.gauge_label(),
        "c": profile.c,
        "r1": crit.r1,
        "r2": crit.r2,
        "W1": crit.W1,
        "W2": crit.W2,
        "dlambda_dr_at_r1": crit.dlambda_dr_at_r1,
        "dlambda_dr_at_r2": crit.dlambda_dr_at_r2,
        "tail_slope_zero": crit.tail_slope_zero,
        "tail_slope_infinity": crit.tail_slope_infinity,
    }


def flow_summary(traj: FlowTrajectory) -> dict:
    return {
        "mode": traj.mode,
        "r0": traj.r0,
        "T": traj.T,
        "target": traj.target,
        "T_prime_ode": traj.T_prime_ode,
        "T_prime_quadrature": traj.T_prime_quadrature,
        "typeI_constant": traj.typeI_constant,
        "samples": int(len(traj.t)),
    }


# --- the qualitative phase table --------------------------------------------

_ROW_LABELS = ["r < r1", "r = r1", "r1 < r < r2", "r = r2", "r > r2"]


def _classify_rmcf(traj: FlowTrajectory) -> dict:
    if traj.target == "Stationary":
        # the orbit rides the homothety: it reaches the ambient horizon and
        # shrinks to the zero section together with the whole manifold
        return {"maximal_time": "T' = T", "collapse_to": "S0",
                "blow_up_rate": "Type I"}
    return {"maximal_time": "T' < T",
            "collapse_to": "S0" if traj.target == "S0" else "S_infinity",
            "blow_up_rate": "Type I"}


def _classify_mcf(traj: FlowTrajectory) -> dict:
    if traj.target == "Stationary":
        return {"maximal_time": "T' = infinity", "collapse_to": "---",
                "blow_up_rate": "---"}
    return {"maximal_time": "T' < infinity",
            "collapse_to": "S0" if traj.target == "S0" else "S_infinity",
            "blow_up_rate": "Type I"}


def table1_report(profile: SolitonProfile, T: float = 1.0) -> dict:
    """Qualitative fate matrix over five probe radii for both flows.

    The radii probe each regime: below r1, at r1, between the radii, at r2
    and above r2.  Every cell is produced by actually running the flow and
    classifying the trajectory, never by looking up the expected answer.
    """
    crit = find_critical_radii(profile)
    r1, r2 = crit.r1, crit.r2
    radii = [0.5 * r1, r1, 0.5 * (r1 + r2), r2, 2.0 * r2]
    rows = []
    for label, r0 in zip(_ROW_LABELS, radii):
        rmcf = integrate_rmcf(profile, FlowConfig(mode="rmcf", r0=r0, T=T))
        mcf = integrate_mcf(profile, FlowConfig(mode="mcf", r0=r0, T=T))
        rows.append({"label": label, "r0": r0,
                     "rmcf": _classify_rmcf(rmcf),
                     "mcf": _classify_mcf(mcf)})
    p = profile.params
    return {"n": p.n, "k": p.k, "c": profile.c, "r1": r1, "r2": r2,
            "T": T, "rows": rows}


def table1_markdown(report: dict) -> str:
    """Two-panel markdown rendering of the fate matrix."""
    lines = [f"# Lens-space fate table (n={report['n']}, k={report['k']})", ""]
    for mode, title in (("rmcf", "Coupled flow (ambient metric shrinking)"),
                        ("mcf", "Mean curvature flow (ambient metric fixed)")):
        lines.append(f"## {title}")
        lines.append("")
        lines.append("| radius | " + " | ".join(r["label"] for r in report["rows"]) + " |")
        lines.append("|---" * (len(report["rows"]) + 1) + "|")
        for key, name in (("maximal_time", "maximal time"),
                          ("collapse_to", "collapse to"),
                          ("blow_up_rate", "blow-up rate")):
            cells = " | ".join(r[mode][key] for r in report["rows"])
            lines.append(f"| {name} | {cells} |")
        lines.append("")
    return "\n".join(lines) + "\n"


# --- run manifest ------------------------------------------------------------


@dataclass
class RunManifest:
    """What was run, with what inputs, and which files came out."""

    command: str
    params: dict
    gauge: str
    c: float
    r1: float | None = None
    r2: float | None = None
    outputs: list[str] = field(default_factory=list)
    version: str = __version__

    def record(self, path: str) -> str:
        self.outputs.append(os.path.basename(path))
        return path

    def to_dict(self) -> dict:
        # honor SOURCE_DATE_EPOCH so reruns can be byte-identical
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        stamp = int(epoch) if epoch is not None else int(time.time())
        return {
            "command": self.command,
            "params": self.params,
            "gauge": self.gauge,
            "c": self.c,
            "r1": self.r1,
            "r2": self.r2,
            "outputs": sorted(self.outputs),
            "version": self.version,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(stamp)),
        }

    def write(self, path: str) -> str:
        self.outputs.append(os.path.basename(path))
        return write_json(path, self.to_dict())


def radius_sweep(r_min: float, r_max: float, count: int) -> np.ndarray:
    """Geometric radius grid; the interesting structure spans decades."""
    if not (0.0 < r_min < r_max):
        raise DomainError(f"need 0 < r_min < r_max, got [{r_min}, {r_max}]")
    if count < 2:
        raise DomainError("need at least 2 sweep points")
    return np.geomspace(r_min, r_max, count)
