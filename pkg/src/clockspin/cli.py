"""Command-line front end.

Every command reads a YAML run configuration, computes, and writes a CSV
(SI units, unit-annotated header) and/or a JSON sidecar into ``--out``.
Exit status: 0 success, 2 configuration or usage error, 3 input-data
error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, axis_name, parse_grid, parse_quantity, parse_vector
from .dynamics import (EchoModel, echo_map, first_revival_ridge, fwhm_to_sigma, nodes_for, oscillation_contrast,
                       rabi_trace)
from .eseem import larmor_period, two_pulse_envelope
from .fitting import (DecayCurve, FitConvergenceWarning, FitError, fit_stretched_exponential,
                      fit_t2_vs_field, stretched_exponential, t2_law)
from .spin import AXES, PAIRS, transition_table, zero_field_eigensystem
from .zeeman import (DEGENERACY_GUARD_HZ, effective_moment, min_gradient_angle, s1_angle_scan,
                     s1_map, zefoz_search)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NONCONVERGED = 4


class InputError(ValueError):
    """Unreadable or malformed input data."""


class NotConverged(RuntimeError):
    pass


# --- output helpers -------------------------------------------------------

def _num(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def json_text(payload):
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Writer:
    def __init__(self, out_dir, fmt, config, command):
        self.out = Path(out_dir)
        self.fmt = fmt
        self.config = config
        self.command = command
        self.written = []

    def csv(self, name, header, rows):
        if self.fmt in ("csv", "both"):
            p = self.out / name
            write_atomic(p, csv_text(header, rows))
            self.written.append(p)

    def sidecar(self, name, summary, grid=None, extra=None):
        if self.fmt not in ("json", "both"):
            return
        payload = {
            "command": self.command,
            "version": __version__,
            "config_digest": self.config.digest if self.config is not None else None,
            "grid": grid or {},
            "summary": summary,
        }
        payload.update(extra or {})
        p = self.out / name
        write_atomic(p, json_text(payload))
        self.written.append(p)


# --- commands -------------------------------------------------------------

def _degenerate_groups(energies, tol=DEGENERACY_GUARD_HZ):
    groups, cur = [], [1]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] < tol:
            cur.append(i + 1)
        else:
            groups.append(cur)
            cur = [i + 1]
    groups.append(cur)
    return [g for g in groups if len(g) > 1]


def cmd_levels(cfg, args, out):
    system = cfg.spin_system()
    level = cfg.transition()[0]
    eigs = zero_field_eigensystem(system, level)
    table = transition_table(eigs, system, level)
    degenerate = _degenerate_groups(eigs.energies)
    distinct = sorted({round(t.frequency / DEGENERACY_GUARD_HZ) for t in table if t.frequency >= DEGENERACY_GUARD_HZ})
    distinct_hz = [
        float(np.mean([t.frequency for t in table if round(t.frequency / DEGENERACY_GUARD_HZ) == d]))
        for d in distinct
    ]
    rows = [(k, l, t.frequency, *t.moments) for (k, l), t in zip(PAIRS, table)]
    out.csv("levels.csv", ["k", "l", "frequency_Hz", "mu_D1_Hz_per_T", "mu_D2_Hz_per_T", "mu_b_Hz_per_T"], rows)
    out.sidecar("levels.json", {
        "level": level,
        "energies_Hz": eigs.energies,
        "transitions": [{"pair": [k, l], "frequency_Hz": t.frequency, "moments_Hz_per_T": t.moments}
                        for (k, l), t in zip(PAIRS, table)],
        "degenerate_levels": degenerate,
        "distinct_frequencies_Hz": distinct_hz,
    })
    print(f"zero-field {level}-state transitions")
    print("  k  l   frequency (MHz)")
    for (k, l), t in zip(PAIRS, table):
        print(f"  {k}  {l}   {t.frequency / 1e6:14.4f}")
    if degenerate:
        print("degenerate levels: " + "; ".join("(" + ", ".join(map(str, g)) + ")" for g in degenerate))
        print("distinct nonzero frequencies (MHz): " + ", ".join(f"{f / 1e6:.4f}" for f in distinct_hz))


def cmd_map_s1(cfg, args, out):
    system = cfg.spin_system()
    level, pair = cfg.transition()
    sw = cfg.sweep("s1_map")
    plane = sw.get("plane", ["D1", "D2"])
    if not isinstance(plane, list) or len(plane) != 2:
        raise ConfigError("sweeps.s1_map.plane: expected two axis names")
    plane = tuple(axis_name(p, "sweeps.s1_map.plane") for p in plane)
    if plane[0] == plane[1]:
        raise ConfigError("sweeps.s1_map.plane: axes must differ")
    g1 = parse_grid(sw.get("axis1"), "field", "sweeps.s1_map.axis1", min_steps=2)
    g2 = parse_grid(sw.get("axis2"), "field", "sweeps.s1_map.axis2", min_steps=2)
    offset = parse_quantity(sw.get("offset", "0 T"), "field", "sweeps.s1_map.offset")
    magnitude = parse_quantity(sw.get("magnitude", "200 uT"), "field", "sweeps.s1_map.magnitude")
    step = float(sw.get("angle_step_deg", 0.5))

    gmap = s1_map(system, level, pair, plane, g1.values(), g2.values(), offset, threads=args.threads)
    scan = s1_angle_scan(system, level, pair, magnitude, np.arange(0.0, 180.0, step), plane)
    phi = min_gradient_angle(system, level, pair, magnitude, plane, step_deg=step)

    rows = [(gmap.axis1[j], gmap.axis2[i], gmap.values[i, j])
            for i in range(gmap.axis2.size) for j in range(gmap.axis1.size)]
    out.csv("s1_map.csv", [f"B_{plane[0]}_T", f"B_{plane[1]}_T", "S1_Hz_per_T"], rows)
    out.csv("s1_angle.csv", ["phi_deg", "S1_Hz_per_T"], zip(scan.angles_deg, scan.values))
    third = [a for a in AXES if a not in plane][0]
    out.sidecar("s1_map.json", {
        "pair": pair,
        "level": level,
        "min_angle_deg": phi,
        "min_angle_magnitude_T": magnitude,
        "min_S1_on_circle_Hz_per_T": float(np.min(scan.values)),
        "map_min_Hz_per_T": float(gmap.values.min()),
        "map_max_Hz_per_T": float(gmap.values.max()),
    }, grid={"plane": plane, "axis1": g1.spec(), "axis2": g2.spec(), f"offset_{third}_T": offset,
             "angle_step_deg": step, "order": "row-major, axis1 fastest"})
    print(f"S1 minimum in the {plane[0]}-{plane[1]} plane at |B| = {magnitude * 1e6:.1f} uT: "
          f"phi = {phi:.3f} deg from {plane[0]}")


def _echo_model(cfg):
    system = cfg.spin_system()
    level, pair = cfg.transition()
    return EchoModel(system, cfg.nuclei(), pair, level, bias=cfg.bias(), **cfg.model())


def cmd_map_echo(cfg, args, out):
    model = _echo_model(cfg)
    sw = cfg.sweep("map_echo")
    axis = axis_name(sw.get("axis", "D1"), "sweeps.map_echo.axis")
    g = parse_grid(sw.get("field"), "field", "sweeps.map_echo.field", min_steps=2)
    tg = parse_grid(sw.get("tau"), "time", "sweeps.map_echo.tau", min_steps=2)
    fixed = parse_vector(sw.get("fixed", ["0 T", "0 T", "0 T"]), "field", "sweeps.map_echo.fixed")
    if tg.start < 0:
        raise ConfigError("sweeps.map_echo.tau: delays must be non-negative")
    emap = echo_map(model, g.values(), tg.values(), axis, fixed, threads=args.threads)
    ridge = first_revival_ridge(emap)
    ok = np.isfinite(ridge)
    slope = float(np.polyfit(emap.larmor_periods[ok], ridge[ok], 1)[0]) if ok.sum() >= 2 else math.nan
    areas = emap.column_areas()
    best = int(np.argmax(areas))

    rows = [(emap.swept[j], emap.tau[i], emap.amplitude[i, j], emap.envelope[i, j])
            for j in range(emap.swept.size) for i in range(emap.tau.size)]
    out.csv("echo_map.csv", [f"B_{axis}_T", "tau_s", "echo_amplitude", "eseem_envelope"], rows)
    out.csv("echo_ridge.csv", [f"B_{axis}_T", "B_model_T", "larmor_period_s", "ridge_tau_s", "area_s"],
            zip(emap.swept, emap.field_magnitude, emap.larmor_periods, ridge, areas))
    out.sidecar("echo_map.json", {
        "ridge_vs_larmor_slope": slope,
        "ridge_columns": int(ok.sum()),
        "max_area_column": best,
        "max_area_field_T": float(emap.swept[best]),
        "bias_T": model.bias,
    }, grid={"axis": axis, "field": g.spec(), "tau": tg.spec(), "fixed_T": fixed,
             "order": "field-major, tau fastest"})
    print(f"echo map: {emap.swept.size} fields x {emap.tau.size} delays; "
          f"ridge/Larmor slope {slope:.4f}; largest area at B_{axis} = {emap.swept[best] * 1e6:.1f} uT")


def cmd_zefoz(cfg, args, out):
    system = cfg.spin_system()
    level, pair = cfg.transition()
    bias = cfg.bias()
    sw = cfg.sweep("zefoz")
    half = parse_quantity(sw.get("bounds", "500 uT"), "field", "sweeps.zefoz.bounds")
    if half <= 0:
        raise ConfigError("sweeps.zefoz.bounds: must be positive")
    tol = parse_quantity(sw.get("tolerance", "0.1 uT"), "field", "sweeps.zefoz.tolerance")
    restarts = int(sw.get("restarts", 10))
    if restarts < 1:
        raise ConfigError("sweeps.zefoz.restarts: need at least 1")
    initial = parse_vector(sw.get("initial", ["0 T", "0 T", "0 T"]), "field", "sweeps.zefoz.initial")
    rng = np.random.default_rng(args.seed)
    starts = [initial] + [rng.uniform(-half, half, 3) for _ in range(restarts - 1)]

    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for x0 in starts:
            results.append(zefoz_search(system, level, pair, x0, half, bias))
    fields = np.array([r.field for r in results])
    best = results[int(np.argmin([r.s1_norm for r in results]))]
    spread = float(np.max(np.linalg.norm(fields - best.field, axis=1)))
    converged = all(r.converged for r in results) and spread <= tol

    rows = [(*x0, *r.field, r.s1_norm, int(r.converged)) for x0, r in zip(starts, results)]
    out.csv("zefoz.csv", ["start_D1_T", "start_D2_T", "start_b_T", "B_D1_T", "B_D2_T", "B_b_T",
                          "S1_Hz_per_T", "converged"], rows)
    out.sidecar("zefoz.json", {
        "pair": pair,
        "applied_field_T": best.field,
        "total_field_T": best.field + bias,
        "recovered_bias_T": -best.field,
        "s1_norm_Hz_per_T": best.s1_norm,
        "start_spread_T": spread,
        "converged": converged,
        "seed": args.seed,
    }, grid={"bounds_T": half, "restarts": restarts, "tolerance_T": tol})
    ut = ", ".join(f"{v * 1e6:.4f}" for v in best.field)
    print(f"ZEFOZ applied field ({ut}) uT, |S1| = {best.s1_norm:.3e} Hz/T, spread {spread * 1e6:.4f} uT")
    if not converged:
        raise NotConverged(f"ZEFOZ search: starts disagree by {spread * 1e6:.3f} uT or did not converge")


def cmd_rabi(cfg, args, out):
    sw = cfg.sweep("rabi")
    f_rabi = parse_quantity(_need(sw, "rabi_frequency", "sweeps.rabi."), "frequency", "sweeps.rabi.rabi_frequency")
    if f_rabi <= 0:
        raise ConfigError("sweeps.rabi.rabi_frequency: must be positive")
    fwhm = parse_quantity(sw.get("fwhm", "0 Hz"), "frequency", "sweeps.rabi.fwhm")
    nodes = sw.get("nodes")
    if nodes is not None and (isinstance(nodes, bool) or not isinstance(nodes, int)):
        raise ConfigError("sweeps.rabi.nodes: expected an integer")
    tg = parse_grid(sw.get("time"), "time", "sweeps.rabi.time", min_steps=2)
    if tg.start < 0:
        raise ConfigError("sweeps.rabi.time: times must be non-negative")
    if nodes is None:
        nodes = nodes_for(fwhm_to_sigma(fwhm), tg.stop)
    try:
        trace = rabi_trace(2 * math.pi * f_rabi, tg.values(), fwhm=fwhm, nodes=nodes)
    except ValueError as exc:
        raise ConfigError(f"sweeps.rabi: {exc}") from None
    period = 1.0 / f_rabi
    first = trace.times[trace.times <= period]
    t_first = float(first[np.argmax(trace.transfer[: first.size])])
    contrast = oscillation_contrast(trace)
    out.csv("rabi.csv", ["time_s", "transfer", "population_difference"],
            zip(trace.times, trace.transfer, trace.population_difference))
    out.sidecar("rabi.json", {
        "rabi_frequency_Hz": f_rabi,
        "fwhm_Hz": fwhm,
        "sigma_Hz": trace.sigma,
        "first_maximum_s": t_first,
        "contrast_per_period": contrast,
    }, grid={"time": tg.spec(), "nodes": nodes})
    print(f"Rabi 2pi x {f_rabi / 1e3:.1f} kHz, FWHM {fwhm / 1e3:.1f} kHz: first maximum "
          f"{t_first * 1e6:.4f} us; contrast per period " + ", ".join(f"{c:.3f}" for c in contrast))


def cmd_eseem(cfg, args, out):
    model = _echo_model(cfg)
    sw = cfg.sweep("eseem")
    applied = parse_vector(_need(sw, "field", "sweeps.eseem."), "field", "sweeps.eseem.field")
    tg = parse_grid(sw.get("tau"), "time", "sweeps.eseem.tau", min_steps=2)
    if tg.start < 0:
        raise ConfigError("sweeps.eseem.tau: delays must be non-negative")
    total = applied + model.bias
    tau = tg.values()
    bmag = float(np.linalg.norm(total))
    gamma = model.nuclei[0].gamma if model.nuclei else model.system.gamma_nuclear_host
    moment = (effective_moment(model.system, model.level, model.pair, total) if bmag > 0 else np.zeros(3))
    env = two_pulse_envelope(model.nuclei, total, moment, tau)
    emap = echo_map(model, [applied[0]], tau, "D1", applied)
    echo = emap.amplitude[:, 0]
    t_y = larmor_period(bmag, gamma)
    v = env.values
    peaks = np.flatnonzero((v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:])) + 1
    out.csv("eseem.csv", ["tau_s", "eseem_envelope", "echo_amplitude"], zip(tau, v, echo))
    out.sidecar("eseem.json", {
        "applied_field_T": applied,
        "total_field_T": total,
        "larmor_period_s": t_y,
        "effective_moment_muB": moment,
        "modulation_depth": env.modulation_depth,
        "per_nucleus_depth": env.depths,
        "envelope_maxima_s": tau[peaks],
    }, grid={"tau": tg.spec()})
    tys = "inf" if math.isinf(t_y) else f"{t_y * 1e3:.4f} ms"
    print(f"ESEEM at |B| = {bmag * 1e6:.2f} uT: T_Y = {tys}, modulation depth {env.modulation_depth:.4f}")


def _need(block, key, where):
    if key not in block:
        raise ConfigError(f"missing entry '{where}{key}'")
    return block[key]


# --- fitting --------------------------------------------------------------

FIT_COLUMNS = {"stretched": ("tau_s", "amplitude"), "t2field": ("B_T", "T2_s")}


def read_columns(path, names, optional=()):
    """Read named float columns from a CSV file; errors name the offending line."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    wanted = list(names) + [o for o in optional if o]
    missing = [n for n in names if n not in header]
    if missing:
        raise InputError(f"{path}:1: missing column(s) {', '.join(missing)}; header is {', '.join(header)}")
    missing = [o for o in optional if o and o not in header]
    if missing:
        raise InputError(f"{path}:1: missing column(s) {', '.join(missing)}")
    idx = [header.index(n) for n in wanted]
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            vals = [float(row[i]) for i in idx]
        except (ValueError, IndexError):
            raise InputError(f"{path}:{lineno}: cannot parse numeric values from {','.join(row)!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"{path}:{lineno}: non-finite value")
        data.append(vals)
    if not data:
        raise InputError(f"{path}: no data rows")
    cols = np.array(data).T
    return cols, hashlib.sha256(raw).hexdigest()


def cmd_fit(cfg, args, out):
    xname, yname = FIT_COLUMNS[args.model]
    xname = args.x_col or xname
    yname = args.y_col or yname
    cols, file_digest = read_columns(args.input, (xname, yname), (args.sigma_col,))
    x, y = cols[0] * args.x_scale, cols[1] * args.y_scale
    sigma = cols[2] * args.y_scale if args.sigma_col else None
    mapping = {"x": xname, "y": yname, "sigma": args.sigma_col, "x_scale": args.x_scale, "y_scale": args.y_scale}
    digest = hashlib.sha256((file_digest + json.dumps(mapping, sort_keys=True)).encode()).hexdigest()

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if args.model == "stretched":
                fit = fit_stretched_exponential(DecayCurve(x, y, sigma))
                model_y = stretched_exponential(x, fit.E0, fit.T2, fit.m)
                names = ("E0", "T2_s", "m")
                headers = ("tau_s", "amplitude")
            else:
                fix = args.fix_b0
                fit = fit_t2_vs_field(x, y, sigma, fix_b0=fix)
                model_y = t2_law(x, fit.t2_zero, fit.kappa, fit.b0)
                names = ("t2_zero_s", "kappa_Hz_per_T", "b0_T")
                headers = ("B_T", "T2_s")
        except FitError as exc:
            raise InputError(f"{args.input}: {exc}") from None
    notes = sorted({str(w.message) for w in caught})
    nonconv = any(issubclass(w.category, FitConvergenceWarning) for w in caught) or not fit.success

    params = dict(zip(names, fit.params().values()))
    report = {
        "model": args.model,
        "parameters": params,
        "uncertainties": dict(zip(names, fit.stderr)),
        "covariance": fit.covariance,
        "residual_norm": fit.residual_norm,
        "diagnostics": {"success": fit.success, "nfev": fit.nfev, "message": fit.message, "warnings": notes,
                        "points": int(x.size), "weighted": sigma is not None},
        "input": {"path": str(args.input), "digest": digest, "columns": mapping},
    }
    if args.model == "t2field":
        report["diagnostics"]["b0_fixed"] = fit.b0_fixed
    out.csv(f"fit_{args.model}_residuals.csv", [*headers, "model", "residual"], zip(x, y, model_y, y - model_y))
    out.sidecar(f"fit_{args.model}.json", report)
    print(f"fit {args.model}: " + ", ".join(f"{k} = {v:.6g} +/- {e:.2g}"
                                             for (k, v), e in zip(params.items(), fit.stderr)))
    if nonconv:
        raise NotConverged(f"fit did not converge: {fit.message}")


# --- entry point ----------------------------------------------------------

COMMANDS = {
    "levels": (cmd_levels, "zero-field level ladder and transition table"),
    "map-s1": (cmd_map_s1, "S1 gradient map over a crystal plane and minimum-gradient angle"),
    "map-echo": (cmd_map_echo, "Hahn-echo amplitude map over a field sweep"),
    "zefoz": (cmd_zefoz, "multistart search for the zero-gradient field"),
    "rabi": (cmd_rabi, "inhomogeneously damped Rabi nutation"),
    "eseem": (cmd_eseem, "two-pulse ESEEM envelope and echo at one field"),
    "fit": (cmd_fit, "fit a decay curve or a T2-versus-field table from CSV"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run configuration (default: packaged default)")
    common.add_argument("--out", type=Path, help="output directory (default: output.dir from the config)")
    common.add_argument("--format", choices=("csv", "json", "both"), help="which files to write")
    common.add_argument("--threads", type=int, default=1, help="worker threads for map generation")
    common.add_argument("--seed", type=int, default=0, help="seed for random restarts")

    parser = argparse.ArgumentParser(prog="clockspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        if name == "fit":
            p.add_argument("model", choices=tuple(FIT_COLUMNS), help="stretched: tau_s,amplitude; t2field: B_T,T2_s")
            p.add_argument("--input", required=True, type=Path, help="CSV file with a header row")
            p.add_argument("--x-col", help="column holding tau (s) or B (T)")
            p.add_argument("--y-col", help="column holding the amplitude or T2 (s)")
            p.add_argument("--sigma-col", help="column of per-point standard deviations")
            p.add_argument("--x-scale", type=float, default=1.0, help="multiply x by this to get SI")
            p.add_argument("--y-scale", type=float, default=1.0, help="multiply y and sigma by this to get SI")
            p.add_argument("--fix-b0", type=float, default=None, help="hold B0 fixed at this value (T)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        needs_config = args.command != "fit" or args.config is not None
        cfg = (RunConfig.load(args.config) if args.config else RunConfig.default()) if needs_config else None
        outcfg = cfg.output() if cfg is not None else {"dir": "out", "format": "both"}
        out = Writer(args.out or outcfg["dir"], args.format or outcfg["format"], cfg, args.command)
        fn(cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
