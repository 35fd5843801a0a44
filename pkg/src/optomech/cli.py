"""Command-line front end: parameter sweeps emitting CSV or JSON-lines tables.

Frequency-valued sweep flags (``--G``, ``--g2``, ``--delta``, ``--detuning0``)
are given in units of ``omega_m``; ``--power`` is in watts. Value lists are
either comma separated (``0.2,0.4``) or ranges ``start:stop:count`` with an
optional ``:log`` suffix for geometric spacing.

Exit status: 0 success, 2 configuration error, 3 solver failure,
4 no stable branch available.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DegenerateBranchError,
    SingularSystemError,
    SolverFailure,
    UnstableBranchError,
    ValidationError,
)
from .linearized import bare_frequency_sq, effective_response
from .params import OMEGA_C_CONVENTION, PhysicalParams, load_config
from .spectra import NoiseModel, phonon_spectrum, photon_spectrum, position_variance, spectrum_peak
from .stability import routh_hurwitz
from .steady_state import operating_point, select_branch, solve_steady

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_UNSTABLE = 4

DEFAULT_G = "0.2,0.4,0.6,0.8,1.0"
DEFAULT_G2 = "1e-6:1e-2:21:log"


class NoStableBranch(SolverFailure):
    pass


def parse_values(text: str) -> list[float]:
    """Parse ``a,b,c`` or ``start:stop:count[:log]`` into a list of floats."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("lin", "log")):
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValidationError("values", f"count must be >= 1 in {text!r}")
            if len(parts) == 4 and parts[3] == "log":
                if start <= 0 or stop <= 0:
                    raise ValidationError("values", f"log range needs positive bounds in {text!r}")
                values = np.geomspace(start, stop, count)
            else:
                values = np.linspace(start, stop, count)
            values = [float(v) for v in values]
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("values", f"cannot parse {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ValidationError("values", f"need at least one finite value in {text!r}")
    return values


@dataclass
class SweepSpec:
    """One CLI invocation: which variable is swept, over what, from which fixed parameters."""

    command: str
    variable: str
    values: list
    fixed: PhysicalParams
    output_path: str | None = None
    options: dict = field(default_factory=dict)
    fmt: str = "csv"
    workers: int = 1
    branch: str = "auto"
    timestamp: bool = False

    def __post_init__(self):
        if self.variable not in ("G", "g2", "power", "detuning0"):
            raise ValidationError("variable", f"cannot sweep {self.variable!r}")
        if len(self.values) < 1:
            raise ValidationError("values", "count must be >= 1")
        if self.variable == "power" and any(v < 0 for v in self.values):
            raise ValidationError("power", "sweep values must be >= 0")


# --- per-point workers (module level so they pickle for process pools) ---


def _branch(params, branch):
    branches = solve_steady(params)
    try:
        return select_branch(branches, branch)
    except SolverFailure as exc:
        raise NoStableBranch(str(exc)) from None
    except IndexError:
        raise ValidationError("branch", f"index {branch} out of range ({len(branches)} branches)") from None


def _operating_point(params, mode, value, opts, branch):
    w = params.omega_m
    if mode == "G":
        delta = opts.get("delta")
        ss = operating_point(params, value * w, delta=None if delta is None else delta * w,
                             photon_number=opts.get("photon_number", 0.0))
        return params, ss
    p = params.replace(power=value)
    return p, _branch(p, branch)


def _steady_rows(params, value, opts, branch):
    rows = []
    p = params.replace(**{opts["variable"]: value * (params.omega_m if opts["variable"] in ("g2", "detuning0") else 1)})
    for ss in solve_steady(p):
        rows.append({
            "power": p.power, "detuning0": p.detuning0, "g2": p.g2, "q_s": ss.q_s,
            "photon_number": ss.photon_number, "delta_eff": ss.delta_eff, "G": ss.G, "stable": bool(ss.stable),
        })
    return rows


def _response_rows(params, value, opts, branch):
    w, g = params.omega_m, params.gamma_m
    p = params.replace(g2=opts["g2"] * w)
    p, ss = _operating_point(p, opts["mode"], value, opts, branch)
    grid = np.linspace(opts["omega_min"], opts["omega_max"], opts["points"]) * w
    r = effective_response(grid, ss, p)
    return [
        {
            "G": ss.G / w, "g2": p.g2 / w, "omega_over_omegam": o / w,
            "omega_eff_over_omegam": oe / w, "gamma_eff_over_gammam": ge / g if g > 0 else math.inf,
            "chi_re": c.real, "chi_im": c.imag, "softening_flag": bool(s),
        }
        for o, oe, ge, c, s in zip(grid, r.omega_eff, r.gamma_eff, r.chi, r.softening)
    ]


def _spectra_rows(params, value, opts, branch):
    w = params.omega_m
    p = params.replace(g2=opts["g2"] * w)
    p, ss = _operating_point(p, opts["mode"], value, opts, branch)
    noise = NoiseModel.from_params(p)
    grid = np.linspace(opts["omega_min"], opts["omega_max"], opts["points"]) * w
    s_q = phonon_spectrum(grid, ss, noise, p)
    s_a = photon_spectrum(grid, ss, noise, p)
    return [{"omega_over_omegam": o / w, "S_q": a, "S_a": b} for o, a, b in zip(grid, s_q, s_a)]


def _variance_rows(params, value, opts, branch):
    w = params.omega_m
    p = params.replace(g2=opts["g2"] * w)
    p, ss = _operating_point(p, opts["mode"], value, opts, branch)
    noise = NoiseModel.from_params(p)
    _, sq_peak = spectrum_peak(phonon_spectrum, ss, noise, p)
    _, sa_peak = spectrum_peak(photon_spectrum, ss, noise, p)
    return [{
        "G": ss.G / w, "g2": p.g2 / w, "power": p.power, "delta_eff_over_omegam": ss.delta_eff / w,
        "variance": position_variance(ss, noise, p), "S_q_peak": sq_peak, "S_a_peak": sa_peak,
    }]


def _stability_rows(params, value, opts, branch):
    rows = []
    for power in opts["powers"]:
        p = params.replace(detuning0=value * params.omega_m, power=power)
        for i, ss in enumerate(solve_steady(p)):
            rep = routh_hurwitz(ss, p)
            rows.append({
                "detuning0": p.detuning0, "power": power, "branch_index": i,
                "stable": rep.stable, "max_real_eigenvalue": rep.max_real_eigenvalue,
            })
    return rows


def quadratic_point(params, g2, fix="power", G=None, branch="auto", grid=None):
    """Response summary at one quadratic coupling ``g2`` (rad/s).

    With ``fix="power"`` the branch's own ``G = (g_m - 2 g2 q_s) a_s`` is
    used; with ``fix="G"`` the coupling is held at ``G`` (rad/s) while the
    detuning and stiffening still follow the steady state.
    """
    w = params.omega_m
    p = params.replace(g2=g2)
    ss = _branch(p, branch)
    if fix == "G":
        ss = ss.replace(G=float(G), stable=None)
        ss = ss.replace(stable=routh_hurwitz(ss, p).stable)
    grid = np.linspace(0.01, 3.0, 2001) * w if grid is None else grid
    w_t = math.sqrt(bare_frequency_sq(ss, p))
    at_wm = effective_response(w, ss, p)
    envelope = np.max(np.abs(effective_response(grid, ss, p).frequency_shift(w_t**2)))
    return {
        "g2": g2 / w, "G": ss.G / w, "delta_eff_over_omegam": ss.delta_eff / w, "q_s": ss.q_s,
        "photon_number": ss.photon_number, "omega_t_over_omegam": w_t / w,
        "omega_eff_at_omegam_over_omegam": float(at_wm.omega_eff) / w,
        "gamma_eff_at_omegam_over_gammam": float(at_wm.gamma_eff) / p.gamma_m if p.gamma_m > 0 else math.inf,
        "gamma_eff_at_omegam": float(at_wm.gamma_eff),
        "spring_envelope_over_omegam": float(envelope) / w,
        "stable": bool(ss.stable),
    }


def _quadratic_rows(params, value, opts, branch):
    w = params.omega_m
    grid = np.linspace(opts["omega_min"], opts["omega_max"], opts["points"]) * w
    G = None if opts["G"] is None else opts["G"] * w
    return [quadratic_point(params, value * w, opts["fix"], G, branch, grid)]


_WORKERS = {
    "steady": _steady_rows,
    "response": _response_rows,
    "spectra": _spectra_rows,
    "variance": _variance_rows,
    "stability-map": _stability_rows,
    "quadratic-sweep": _quadratic_rows,
}


def _task(args):
    command, params, value, opts, branch = args
    return _WORKERS[command](params, value, opts, branch)


# --- output ---


def _format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else str(v)


def metadata(spec: SweepSpec) -> dict:
    meta = {
        "command": spec.command,
        "version": __version__,
        "convention": OMEGA_C_CONVENTION,
        "sweep": {"variable": spec.variable, "values": spec.values},
        "options": spec.options,
        "branch": spec.branch,
    }
    if spec.timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    return {"params": spec.fixed.to_dict(), "meta": meta}


def render(rows, header, fmt) -> str:
    lines = []
    if fmt == "csv":
        lines.append("# " + json.dumps(header, sort_keys=True))
        if rows:
            cols = list(rows[0])
            lines.append(",".join(cols))
            lines.extend(",".join(_format_value(r[c]) for c in cols) for r in rows)
    else:
        lines.append(json.dumps(header, sort_keys=True))
        lines.extend(json.dumps({k: _json_value(v) for k, v in r.items()}) for r in rows)
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def run_sweep(spec: SweepSpec, stdout=None) -> int:
    """Evaluate every sweep point and write the table; returns an exit status.

    Points are computed concurrently when ``spec.workers > 1`` but rows are
    always emitted in sweep order. Nothing is written unless every point
    succeeds.
    """
    stdout = sys.stdout if stdout is None else stdout
    opts = dict(spec.options, variable=spec.variable)
    tasks = [(spec.command, spec.fixed, v, opts, spec.branch) for v in spec.values]
    try:
        if spec.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                results = list(pool.map(_task, tasks))
        else:
            results = [_task(t) for t in tasks]
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoStableBranch, UnstableBranchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (SolverFailure, DegenerateBranchError, SingularSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    header = metadata(spec)
    if spec.options.get("split") and spec.output_path:
        base = Path(spec.output_path)
        outputs = {}
        for v, rows in zip(spec.values, results):
            name = f"{base.stem}_{spec.variable}{_format_value(v)}{base.suffix}"
            outputs[base.with_name(name)] = render(rows, header, spec.fmt)
        for path, text in outputs.items():
            _write_atomic(path, text)
        return 0
    text = render([r for rows in results for r in rows], header, spec.fmt)
    if spec.output_path:
        _write_atomic(Path(spec.output_path), text)
    else:
        stdout.write(text)
    return 0


# --- argument parsing ---


def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of PhysicalParams fields (SI units)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one PhysicalParams field (SI units)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--branch", default="auto", help="steady-state branch index or 'auto'")
    common.add_argument("--timestamp", action="store_true", help="embed a timestamp in the metadata line")
    return common


def _grid_args(p, points=2001):
    p.add_argument("--omega-min", type=float, default=0.01, help="lower probe frequency / omega_m")
    p.add_argument("--omega-max", type=float, default=3.0, help="upper probe frequency / omega_m")
    p.add_argument("--points", type=int, default=points)


def _mode_args(p, g_default=DEFAULT_G, single=False):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--G", help="effective coupling(s) / omega_m" + (" (one value)" if single else ""))
    group.add_argument("--power", help="laser power(s) in W; G follows from the steady state")
    p.add_argument("--g2", default="0", help="quadratic coupling / omega_m")
    p.add_argument("--delta", type=float, help="effective detuning / omega_m in --G mode (default detuning0)")
    p.add_argument("--photon-number", type=float, default=0.0,
                   help="intracavity photon number in --G mode (only sets the g2 stiffening)")
    p.set_defaults(g_default=g_default)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="optomech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", parents=[common], help="steady-state branches, one row per branch")
    p.add_argument("--sweep", choices=("power", "detuning0", "g2"), default="power")
    p.add_argument("--values", help="sweep values (power in W, others / omega_m); default: config value")

    p = sub.add_parser("response", parents=[common], help="effective frequency, damping and susceptibility")
    _mode_args(p)
    _grid_args(p)
    p.add_argument("--split", action="store_true", help="one file per sweep value instead of long format")

    p = sub.add_parser("spectra", parents=[common], help="phonon and photon noise spectra at one operating point")
    _mode_args(p, g_default="0.2", single=True)
    _grid_args(p)

    p = sub.add_parser("variance", parents=[common], help="integrated position variance per operating point")
    _mode_args(p)

    p = sub.add_parser("stability-map", parents=[common], help="stability verdicts on a detuning x power grid")
    p.add_argument("--detuning0", default="-2:2:21", help="bare detunings / omega_m")
    p.add_argument("--power", default="1e-4:1e-2:5:log", help="powers in W")

    p = sub.add_parser("quadratic-sweep", parents=[common], help="response versus quadratic coupling")
    p.add_argument("--g2", default=DEFAULT_G2, help="quadratic couplings / omega_m")
    p.add_argument("--fix", choices=("power", "G"), default="power")
    p.add_argument("--G", type=float, help="held coupling / omega_m for --fix G (default: the g2=0 value)")
    _grid_args(p)
    return parser


def _resolve_params(args) -> PhysicalParams:
    params = load_config(args.config) if args.config else PhysicalParams()
    changes = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError("set", f"expected KEY=VALUE, got {item!r}")
        if key not in PhysicalParams.field_names():
            raise ValidationError("set", f"unknown key {key!r}")
        try:
            changes[key] = float(value)
        except ValueError:
            raise ValidationError(key, f"not a number: {value!r}") from None
    return params.replace(**changes) if changes else params


def _single(values, name):
    if len(values) != 1:
        raise ValidationError(name, "spectra takes exactly one operating point")
    return values


def build_spec(args) -> SweepSpec:
    params = _resolve_params(args)
    if args.workers < 1:
        raise ValidationError("workers", "must be >= 1")
    if args.branch != "auto":
        try:
            int(args.branch)
        except ValueError:
            raise ValidationError("branch", f"expected an integer or 'auto', got {args.branch!r}") from None
    common = dict(fixed=params, output_path=args.out, fmt=args.format, workers=args.workers,
                  branch=args.branch, timestamp=args.timestamp)
    cmd = args.command
    if cmd == "steady":
        if args.values:
            values = parse_values(args.values)
        else:
            default = getattr(params, args.sweep)
            values = [default / params.omega_m if args.sweep != "power" else default]
        return SweepSpec(cmd, args.sweep, values, options={}, **common)
    if cmd == "stability-map":
        opts = {"powers": parse_values(args.power)}
        return SweepSpec(cmd, "detuning0", parse_values(args.detuning0), options=opts, **common)
    if cmd == "quadratic-sweep":
        opts = {"fix": args.fix, "G": args.G, "omega_min": args.omega_min,
                "omega_max": args.omega_max, "points": args.points}
        if args.fix == "G" and args.G is None:
            ss = _branch(params.replace(g2=0.0), args.branch)
            opts["G"] = ss.G / params.omega_m
        return SweepSpec(cmd, "g2", parse_values(args.g2), options=opts, **common)

    g2 = parse_values(args.g2)
    if len(g2) != 1:
        raise ValidationError("g2", "give one g2 value; use quadratic-sweep to sweep it")
    if args.power is not None:
        mode, values = "power", parse_values(args.power)
    else:
        mode, values = "G", parse_values(args.G if args.G is not None else args.g_default)
    if cmd == "spectra":
        values = _single(values, mode)
    opts = {"mode": mode, "g2": g2[0], "delta": args.delta, "photon_number": args.photon_number}
    if cmd in ("response", "spectra"):
        opts.update(omega_min=args.omega_min, omega_max=args.omega_max, points=args.points)
        if args.points < 1:
            raise ValidationError("points", "must be >= 1")
    if cmd == "response":
        opts["split"] = args.split
    return SweepSpec(cmd, mode, values, options=opts, **common)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = build_spec(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoStableBranch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (SolverFailure, DegenerateBranchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_sweep(spec)


if __name__ == "__main__":
    sys.exit(main())
