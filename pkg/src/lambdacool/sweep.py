"""Parameter sweeps, figure presets and CSV emission."""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .backaction import (
    BareSystem,
    CascadeSystem,
    EitResponse,
    FeedbackSystem,
    RirResponse,
    compare_with_bare,
    implied_displacement,
)
from .core import TWO_PI, effective_cavity_response
from .eit import chi_eit, locked_field
from .errors import LambdaCoolError, UnknownFigure
from .rir import chi_rir
from .config import load_config

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12")

ASSUMPTIONS = {
    "units": "angular quantities are stored in rad/s; *_hz columns divide by 2*pi",
    "wavelength": "drive photon energy uses run.wavelength_m (780 nm unless configured)",
    "gamma_gm": "EIT ground-metastable decay defaults to 2*pi*100 Hz",
    "kappa_in": "input couplings default to half the total linewidth",
    "locking": "feedback: Delta_ca and delta follow delta_cm_tilde; cascade: delta follows delta_cm_tilde",
    "sidebands": "EIT sidebands shift delta and delta_a by +-omega_m; RIR sidebands shift delta only",
    "field_normalization": "fields are divided by the atom-free resonant value",
    "cascade_baseline": "J=0 baseline set by operating.baseline (default same_eta_c)",
    "xi": "n_min minimized over |delta_cm_tilde| <= span for hybrid and bare separately",
}


def _worker_count():
    env = os.environ.get("LAMBDACOOL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(os.cpu_count() or 1, 8))


# --- single-point evaluation ---------------------------------------------------------

def _system(cfg):
    mech = cfg.mechanical()
    cav_m = cfg.cavity_m()
    op = cfg.operating()
    if cfg.scheme == "eit_feedback":
        return FeedbackSystem(
            mech, cav_m, cfg.cavity_a(), EitResponse(cfg.eit_medium(), cfg.values["eit"].get("general", False)),
            coupling=op["coupling"], ca_offset=op["ca_offset"],
            two_photon_offset=op["two_photon_offset"], track_cavity=op["track_cavity"],
            max_photons=op["max_photons"])
    if cfg.scheme == "rir_cascade":
        medium = cfg.rir_medium()
        return CascadeSystem(
            mech, cav_m, RirResponse(medium, cfg.rir_grid(medium)), medium.kappa_a,
            cav_m.input_power, cav_m.drive_wavelength, eta_c=op["eta_c"],
            two_photon_offset=op["two_photon_offset"], baseline=op["baseline"],
            max_photons=op["max_photons"])
    return BareSystem(mech, cav_m, op["max_photons"])


def _cooling_columns(prefix, mech, res):
    return {
        f"re_field_c{prefix}": res.field_c.real,
        f"im_field_c{prefix}": res.field_c.imag,
        f"abs_field_c{prefix}": abs(res.field_c),
        f"intensity_c{prefix}": abs(res.field_c) ** 2,
        f"gamma_opt_hz{prefix}": res.gamma_opt / TWO_PI,
        f"gamma_stokes_hz{prefix}": res.gamma_stokes / TWO_PI,
        f"gamma_anti_stokes_hz{prefix}": res.gamma_anti_stokes / TWO_PI,
        f"k_opt{prefix}": res.k_opt,
        f"n_min{prefix}": res.n_min,
        f"stable{prefix}": int(res.stable),
        f"implied_x{prefix}": float(implied_displacement(mech, res.field_c)),
    }


def evaluate(cfg):
    """Evaluate ``cfg.observable`` at one parameter point; returns an ordered dict."""
    obs = cfg.observable
    if obs == "chi_eit":
        e = cfg.values["eit"]
        chi = chi_eit(cfg.eit_medium(), e.get("delta", 0.0), general=e.get("general", False))
        return {"re_chi_hz": chi.real / TWO_PI, "im_chi_hz": chi.imag / TWO_PI}
    if obs == "chi_rir":
        medium = cfg.rir_medium()
        chi = chi_rir(medium, cfg.rir_grid(medium), cfg.values["rir"].get("delta", 0.0))
        return {"re_chi_hz": chi.real / TWO_PI, "im_chi_hz": chi.imag / TWO_PI}
    if obs == "field_eit":
        cav = cfg.cavity_a(drive=1.0)
        d = cfg.values["eit"].get("delta", 0.0)
        a = locked_field(cav, cfg.eit_medium(), d)
        bare = effective_cavity_response(d, cav.kappa, 0.0, 1.0)
        ref = 2.0 / cav.kappa
        return {"abs_field_norm": abs(a) / ref, "re_field_norm": a.real / ref,
                "im_field_norm": a.imag / ref, "abs_field_bare_norm": abs(bare) / ref}
    if obs == "field_rir":
        medium = cfg.rir_medium()
        r = cfg.values["rir"]
        chi = chi_rir(medium, cfg.rir_grid(medium), r.get("delta", 0.0))
        a = effective_cavity_response(0.0, medium.kappa_a, chi, 1.0)
        ref = 2.0 / medium.kappa_a
        return {"abs_field_norm": abs(a) / ref, "re_field_norm": a.real / ref,
                "im_field_norm": a.imag / ref, "gain_margin_hz": (0.5 * medium.kappa_a + chi.imag) / TWO_PI}
    system = _system(cfg)
    mech = system.mech
    op = cfg.operating()
    if obs == "cooling":
        d = op["delta_cm_tilde"]
        row = _cooling_columns("", mech, system.evaluate(d))
        if not isinstance(system, BareSystem):
            row.update(_cooling_columns("_bare", mech, system.bare().evaluate(d)))
        return row
    if obs == "xi":
        cmp = compare_with_bare(system, span=op["span"] / mech.omega_m, n_grid=op["n_grid"])
        return {
            "xi": cmp.xi,
            "n_min_hybrid": cmp.hybrid.n_min,
            "n_min_bare": cmp.bare.n_min,
            "delta_opt_hybrid_omega_m": cmp.hybrid.delta_cm_tilde / mech.omega_m,
            "delta_opt_bare_omega_m": cmp.bare.delta_cm_tilde / mech.omega_m,
            "ground_state": int(cmp.hybrid.n_min < 1.0),
        }
    if obs == "max_damping":
        grid = np.linspace(-op["span"], op["span"], op["n_grid"])
        curve = system.curve(grid)
        i = int(np.argmax(curve.gamma_opt))
        threshold = mech.gamma_mech * mech.n_bath
        return {
            "gamma_opt_max_hz": curve.gamma_opt[i] / TWO_PI,
            "delta_at_max_omega_m": grid[i] / mech.omega_m,
            "n_min_at_max": curve.n_min[i],
            "above_threshold": int(curve.gamma_opt[i] > threshold),
        }
    raise LambdaCoolError(f"unknown observable {obs!r}")


# --- sweeps --------------------------------------------------------------------------

def sweep_points(cfg):
    """Override dicts for every grid point, axis2-major (axis1 varies fastest)."""
    spec = cfg.sweep
    if spec is None:
        return [{}]
    ax1 = spec.axis1.values()
    if spec.axis2 is None:
        return [{spec.axis1.path: float(v)} for v in ax1]
    return [{spec.axis2.path: float(v2), spec.axis1.path: float(v1)}
            for v2 in spec.axis2.values() for v1 in ax1]


def _eval_point(args):
    cfg, overrides = args
    try:
        point = cfg.with_overrides(overrides) if overrides else cfg
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            values = evaluate(point)
        return overrides, point.param_hash(), values, ""
    except LambdaCoolError as exc:
        return overrides, "", None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfg, workers=None):
    """Evaluate every sweep point; returns ``(columns, rows)``.

    Per-point failures are recorded in the ``error`` column with ``nan``
    values; only configuration problems abort.  Row order never depends on
    the worker count.
    """
    points = sweep_points(cfg)
    workers = _worker_count() if workers is None else max(1, int(workers))
    tasks = [(cfg, p) for p in points]
    if workers == 1 or len(points) == 1:
        results = [_eval_point(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_point, tasks, chunksize=chunk))
    value_cols = []
    for _, _, values, _ in results:
        if values:
            value_cols = list(values)
            break
    axis_cols = []
    if cfg.sweep is not None:
        axis_cols = [cfg.sweep.axis1.path] + ([cfg.sweep.axis2.path] if cfg.sweep.axis2 else [])
    columns = axis_cols + value_cols + ["param_hash", "error"]
    rows = []
    for overrides, phash, values, err in results:
        row = {c: overrides.get(c) for c in axis_cols}
        for c in value_cols:
            row[c] = values.get(c, math.nan) if values else math.nan
        row["param_hash"] = phash
        row["error"] = err
        rows.append(row)
    return columns, rows


# --- output --------------------------------------------------------------------------

def format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def metadata(cfg, figure=None):
    meta = {
        "scheme": cfg.scheme,
        "observable": cfg.observable,
        "version": __version__,
        "param_hash": cfg.param_hash(),
    }
    if figure:
        meta["figure"] = figure
    if cfg.source:
        meta["config"] = os.path.basename(cfg.source)
    meta.update({f"param.{k}": v for k, v in sorted(cfg.hz_view().items())})
    meta.update({f"assumption.{k}": v for k, v in ASSUMPTIONS.items()})
    return meta


def write_csv(path, cfg, columns, rows, figure=None, timestamp=True, plot_script=False):
    """CSV with ``#`` metadata lines, a header and the data; plus a JSON sidecar.

    The timestamp line is the only content that differs between identical runs.
    """
    path = Path(path)
    meta = metadata(cfg, figure)
    lines = [f"# {k}={v}" for k, v in meta.items()]
    if timestamp:
        lines.append(f"# timestamp={datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_cell(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    side = path.with_suffix(path.suffix + ".meta.json")
    side.write_text(json.dumps({**meta, "columns": columns, "rows": len(rows)}, indent=2,
                               sort_keys=True) + "\n")
    written = [path, side]
    if plot_script:
        written.append(write_plot_script(path, columns))
    return written


def write_plot_script(csv_path, columns):
    """Emit a small matplotlib script that plots every numeric column against the first."""
    csv_path = Path(csv_path)
    script = csv_path.with_suffix(".plot.py")
    x = columns[0]
    ys = [c for c in columns[1:] if c not in ("param_hash", "error")]
    script.write_text(
        "import csv\nimport matplotlib.pyplot as plt\n\n"
        f"rows = [r for r in csv.DictReader(l for l in open({csv_path.name!r}) if not l.startswith('#'))]\n"
        f"x = [float(r[{x!r}]) for r in rows]\n"
        f"for col in {ys!r}:\n"
        "    plt.figure()\n"
        "    plt.plot(x, [float(r[col]) for r in rows], '.')\n"
        f"    plt.xlabel({x!r})\n"
        "    plt.ylabel(col)\n"
        "plt.show()\n")
    return script


# --- figure presets ------------------------------------------------------------------

def preset_path(figure_id):
    if figure_id not in FIGURES:
        raise UnknownFigure(f"unknown figure {figure_id!r}; choose from {', '.join(FIGURES)}")
    if figure_id == "fig7":
        raise UnknownFigure("fig7 is a schematic of the two coupling topologies and has no data")
    return resources.files("lambdacool") / "presets" / f"{figure_id}.cfg"


def load_preset(figure_id, overrides=None):
    with resources.as_file(preset_path(figure_id)) as p:
        return load_config(p, overrides)


def reproduce(figure_id, out_dir=".", overrides=None, workers=None, plot_script=False,
              timestamp=True):
    """Run a figure preset and write ``<out_dir>/<figure_id>.csv`` plus its sidecar."""
    cfg = load_preset(figure_id, overrides)
    columns, rows = run_sweep(cfg, workers)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return write_csv(out / f"{figure_id}.csv", cfg, columns, rows, figure=figure_id,
                     timestamp=timestamp, plot_script=plot_script)
