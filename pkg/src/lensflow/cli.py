"""Command-line front end.

Subcommands: solve, geometry, critical, flow, table1, validate, plot.
Option precedence is flags > --config file > built-in defaults; the config
file holds `key = value` lines with the same names as the long options.

Exit codes: 0 success, 2 domain/construction errors, 3 validation failure,
64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .critical import find_critical_radii
from .errors import DomainError, LensflowError, ValidationFailure
from .flows import FlowConfig, integrate_mcf, integrate_rmcf
from .profile import SolitonParams, build_profile
from .reports import (
    RunManifest,
    critical_summary,
    flow_summary,
    radius_sweep,
    table1_markdown,
    table1_report,
    write_flow_csv,
    write_geometry_csv,
    write_json,
    write_profile_csv,
)
from .validation import probe_points, validation_report

_OUTDIR_ENV = "LENSFLOW_OUTDIR"

_DEFAULTS = {
    "n": 2,
    "k": 1,
    "grid": 512,
    "gauge_w": None,
    "out": None,
    "T": 1.0,
    "mode": "rmcf",
    "r0": None,
    "samples": 64,
    "rel_tol": 1e-10,
    "abs_tol": 1e-10,
    "r_min": 0.1,
    "r_max": 10.0,
    "count": 200,
    "probes": 10,
    "step": 1e-3,
    "fig_format": "png",
}

# validate-subcommand pass/fail gates
_VALIDATE_GATES = {
    "ode_residual_sup": 1e-8,
    "holomorphy_residual_sup": 1e-8,
    "soliton_fd_residual": 1e-4,
    "h_ode_crosscheck": 1e-8,
    "Tprime_crosscheck": 1e-6,
}


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage problems instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _coerce(text: str):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def read_config(path: str) -> dict:
    """`key = value` lines; '#' starts a comment."""
    values = {}
    try:
        with open(path, "r", encoding="ascii") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DomainError(
                        f"{path}:{lineno}: expected 'key = value', got {raw!r}")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = _coerce(val)
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    unknown = set(values) - set(_DEFAULTS)
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="lensflow", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", metavar="FILE",
                        help="key=value defaults file (flags override it)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the output-file listing")
    parser.add_argument("--json", action="store_true", dest="json_log",
                        help="print the run manifest as JSON to stdout")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        # accept the global flags after the subcommand too; SUPPRESS keeps
        # the subparser from clobbering a value parsed before it
        sp.add_argument("--config", metavar="FILE", default=argparse.SUPPRESS)
        sp.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--json", action="store_true", dest="json_log",
                        default=argparse.SUPPRESS)
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--grid", type=int, default=None)
        sp.add_argument("--gauge-w", type=float, default=None, dest="gauge_w",
                        help="moment coordinate where s = 0 (default n)")
        sp.add_argument("--out", metavar="DIR", default=None,
                        help=f"output directory (default ${_OUTDIR_ENV} or '.')")
        return sp

    add("solve", "solve the profile; emit the grid CSV")
    geo = add("geometry", "sweep the closed-form geometry over radii")
    geo.add_argument("--r-min", type=float, default=None, dest="r_min")
    geo.add_argument("--r-max", type=float, default=None, dest="r_max")
    geo.add_argument("--count", type=int, default=None)
    add("critical", "locate the two critical radii; emit JSON")
    flow = add("flow", "integrate one trajectory; emit CSV + summary JSON")
    flow.add_argument("--mode", choices=("rmcf", "mcf"), default=None)
    flow.add_argument("--r0", type=float, default=None)
    flow.add_argument("--T", type=float, default=None, dest="T")
    flow.add_argument("--samples", type=int, default=None)
    flow.add_argument("--rel-tol", type=float, default=None, dest="rel_tol")
    flow.add_argument("--abs-tol", type=float, default=None, dest="abs_tol")
    tab = add("table1", "qualitative fate matrix for both flows")
    tab.add_argument("--T", type=float, default=None, dest="T")
    val = add("validate", "independent residual checks; emit JSON")
    val.add_argument("--probes", type=int, default=None)
    val.add_argument("--step", type=float, default=None)
    plot = add("plot", "figures plus .dat plot data")
    plot.add_argument("--mode", choices=("rmcf", "mcf"), default=None)
    plot.add_argument("--r0", type=float, default=None)
    plot.add_argument("--T", type=float, default=None, dest="T")
    plot.add_argument("--fig-format", choices=("png", "svg"), default=None,
                      dest="fig_format")
    return parser


def _merge(args: argparse.Namespace, file_values: dict) -> dict:
    """flags > config file > defaults."""
    merged = dict(_DEFAULTS)
    merged.update(file_values)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _outdir(opts: dict) -> str:
    out = opts["out"] or os.environ.get(_OUTDIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _flow_config(opts: dict, r0: float) -> FlowConfig:
    return FlowConfig(mode=opts["mode"], r0=r0, T=opts["T"],
                      rel_tol=opts["rel_tol"], abs_tol=opts["abs_tol"],
                      samples=opts["samples"])


def _integrate(profile, config: FlowConfig):
    if config.mode == "rmcf":
        return integrate_rmcf(profile, config)
    return integrate_mcf(profile, config)


# --- subcommand bodies: yield output file paths ------------------------------


def _run_solve(opts, out, profile, tag):
    yield write_profile_csv(profile, os.path.join(out, f"profile_{tag}.csv"))


def _run_geometry(opts, out, profile, tag):
    r = radius_sweep(opts["r_min"], opts["r_max"], opts["count"])
    yield write_geometry_csv(profile, r, os.path.join(out, f"geometry_{tag}.csv"))


def _run_critical(opts, out, profile, tag):
    yield write_json(os.path.join(out, f"critical_{tag}.json"),
                     critical_summary(profile))


def _run_flow(opts, out, profile, tag):
    if opts["r0"] is None:
        raise DomainError("flow needs --r0 (or r0 in the config file)")
    traj = _integrate(profile, _flow_config(opts, opts["r0"]))
    stem = f"flow_{opts['mode']}_{tag}_r0_{opts['r0']:.6g}"
    yield write_flow_csv(traj, os.path.join(out, f"{stem}.csv"))
    yield write_json(os.path.join(out, f"{stem}_summary.json"),
                     flow_summary(traj))


def _run_table1(opts, out, profile, tag):
    report = table1_report(profile, T=opts["T"])
    yield write_json(os.path.join(out, f"table1_{tag}.json"), report)
    md_path = os.path.join(out, f"table1_{tag}.md")
    with open(md_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(table1_markdown(report))
    yield md_path


def _run_validate(opts, out, profile, tag):
    report, per_probe = validation_report(profile, probe_count=opts["probes"],
                                          step=opts["step"], T=opts["T"])
    failures = [name for name, gate in _VALIDATE_GATES.items()
                if getattr(report, name) >= gate]
    probes = probe_points(profile.params.n, opts["probes"], report.probe_seed)
    payload = {
        "n": opts["n"], "k": opts["k"], "c": profile.c,
        "ode_residual_sup": report.ode_residual_sup,
        "holomorphy_residual_sup": report.holomorphy_residual_sup,
        "soliton_fd_residual": report.soliton_fd_residual,
        "h_ode_crosscheck": report.h_ode_crosscheck,
        "Tprime_crosscheck": report.Tprime_crosscheck,
        "probe_seed": report.probe_seed,
        "per_probe_fd_residuals": per_probe,
        "probe_radii": [float(np.linalg.norm(z)) for z in probes],
        "failed_gates": failures,
        "passed": not failures,
    }
    yield write_json(os.path.join(out, f"validation_{tag}.json"), payload)
    if failures:
        raise ValidationFailure(
            "validation gates exceeded: " + ", ".join(failures))


def _run_plot(opts, out, profile, tag):
    from .plots import plot_lambda, plot_normA2, plot_trajectory

    ext = opts["fig_format"]
    yield from plot_lambda(profile, os.path.join(out, f"lambda_{tag}.{ext}"))
    yield from plot_normA2(profile, os.path.join(out, f"normA2_{tag}.{ext}"))
    r0 = opts["r0"]
    if r0 is None:
        r0 = 0.9 * find_critical_radii(profile).r1
    traj = _integrate(profile, _flow_config(opts, r0))
    yield from plot_trajectory(
        traj, os.path.join(out, f"trajectory_{opts['mode']}_{tag}.{ext}"))


_RUNNERS = {
    "solve": _run_solve,
    "geometry": _run_geometry,
    "critical": _run_critical,
    "flow": _run_flow,
    "table1": _run_table1,
    "validate": _run_validate,
    "plot": _run_plot,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 64
    exit_code = 0
    try:
        file_values = read_config(args.config) if args.config else {}
        opts = _merge(args, file_values)
        out = _outdir(opts)
        params = SolitonParams(n=opts["n"], k=opts["k"],
                               grid_size=opts["grid"], gauge_W=opts["gauge_w"])
        profile = build_profile(params)
        tag = f"n{opts['n']}k{opts['k']}"
        manifest = RunManifest(
            command="lensflow " + " ".join(argv),
            params={"n": opts["n"], "k": opts["k"], "grid": opts["grid"]},
            gauge=params.gauge_label(), c=profile.c)
        if args.subcommand != "solve":
            crit = find_critical_radii(profile)
            manifest.r1, manifest.r2 = crit.r1, crit.r2
        written = []
        gate_failure = None
        try:
            for path in _RUNNERS[args.subcommand](opts, out, profile, tag):
                manifest.record(path)
                written.append(path)
        except ValidationFailure as exc:
            # the report file is already on disk; list it, then fail
            gate_failure = exc
        written.append(manifest.write(
            os.path.join(out, f"manifest_{args.subcommand}_{tag}.json")))
        if args.json_log:
            print(json.dumps(manifest.to_dict(), sort_keys=True, indent=2))
        elif not args.quiet:
            for path in written:
                print(path)
        if gate_failure is not None:
            raise gate_failure
    except ValidationFailure as exc:
        print(f"lensflow: validation failure: {exc}", file=sys.stderr)
        exit_code = 3
    except LensflowError as exc:
        print(f"lensflow: error: {exc}", file=sys.stderr)
        exit_code = 2
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
