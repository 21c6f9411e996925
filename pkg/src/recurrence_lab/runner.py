"""Experiment dispatch: builds objects from a validated config, runs the
experiment, and assembles the JSON report plus CSV side files.

CSV bodies are a pure function of (config, seed): RFC-4180 rows, '.' decimal
separator, floats at 17 significant digits, NaN as an empty cell. The JSON
report echoes the config verbatim and includes wall-clock runtime (which is
deliberately kept out of the CSVs)."""

import math
import time

import numpy as np

from . import dimension as dim_mod
from . import geometry as geom_mod
from . import kernels
from . import maps as maps_mod
from . import measures as measures_mod
from . import recurrence as rec_mod
from . import subshift as sub_mod

SUBSHIFT_CSV_CAP = 100_000


def fmt_cell(value):
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return format(float(value), ".17g")
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return str(value)


def run_experiment(cfg, seed, threads=None):
    """Returns (report_dict, csv_files) where csv_files maps a suffix to
    (header, rows)."""
    kind = cfg["experiment"]
    t0 = time.perf_counter()
    if kind == "dichotomy":
        report, csvs = _run_dichotomy(cfg, seed, threads)
    elif kind == "mixing":
        report, csvs = _run_mixing(cfg, seed, threads)
    elif kind == "dimension":
        report, csvs = _run_dimension(cfg)
    elif kind == "boxdim":
        report, csvs = _run_boxdim(cfg)
    elif kind == "subshift":
        report, csvs = _run_subshift(cfg)
    elif kind == "volume":
        report, csvs = _run_volume(cfg, seed, threads)
    elif kind == "sandwich":
        report, csvs = _run_sandwich(cfg, seed)
    else:
        report, csvs = _run_scaled_measure(cfg, seed, threads)
    report.setdefault("runtime_seconds", time.perf_counter() - t0)
    report["experiment"] = kind
    report["seed"] = seed
    report["backend"] = kernels.backend_name()
    report["config"] = cfg
    return report, csvs


def _density_csv(density, csvs):
    if isinstance(density, measures_mod.UlamDensity):
        csvs["density"] = (["bin_left", "bin_right", "weight"],
                           density.csv_rows())


def _run_dichotomy(cfg, seed, threads):
    m = maps_mod.map_from_spec(cfg["map"])
    density = measures_mod.density_from_spec(cfg["density"], map_dim=m.dimension)
    schedule = rec_mod.schedule_from_spec(
        cfg["schedule"], betas=cfg["map"].get("betas") or [cfg["map"].get("beta")])
    report = rec_mod.run_dichotomy(
        m, schedule, cfg["target"], density, cfg["samples"], cfg["horizon"],
        seed, threads=threads, exact_max=cfg.get("exact_max", 20))
    csvs = {"series": (["n", "exact_measure", "mc_estimate", "mc_stderr",
                        "partial_sum"], report.series_rows())}
    _density_csv(density, csvs)
    return report.to_dict(), csvs


def _run_mixing(cfg, seed, threads):
    m = maps_mod.map_from_spec(cfg["map"])
    density = measures_mod.density_from_spec(cfg["density"], map_dim=m.dimension)
    f = geom_mod.rect_target(cfg["f"]["center"], cfg["f"]["radii"])
    g = geom_mod.rect_target(cfg["g"]["center"], cfg["g"]["radii"])
    report = rec_mod.mixing_decay_estimate(m, f, g, cfg["n_max"], cfg["samples"],
                                           density, seed, threads=threads)
    csvs = {"series": (["n", "correlation", "stderr", "noise_floor", "mu_g"],
                       report.series_rows())}
    _density_csv(density, csvs)
    return report.to_dict(), csvs


def _run_dimension(cfg):
    betas = cfg["betas"]
    result = dim_mod.recurrence_dimension(betas, cfg["t_points"])
    points = []
    for t in cfg["t_points"]:
        comps = [dim_mod.theta_components(betas, t, i) for i in range(len(betas))]
        points.append({
            "t": list(t),
            "theta": [c.value for c in comps],
            # 1-based axes for display, matching the usual convention
            "k1": [[k + 1 for k in c.k1] for c in comps],
            "k2": [[k + 1 for k in c.k2] for c in comps],
            "k3": [[k + 1 for k in c.k3] for c in comps],
        })
    report = result.to_dict()
    report["points"] = points
    return report, {}


def _run_boxdim(cfg):
    grid_cfg = cfg["s_grid"]
    s_grid = np.arange(grid_cfg["start"], grid_cfg["stop"] + 0.5 * grid_cfg["step"],
                       grid_cfg["step"])
    schedule = rec_mod.schedule_from_spec(cfg["schedule"], betas=cfg["betas"])
    result = dim_mod.cover_critical_exponent(cfg["betas"], schedule,
                                             cfg["window"], s_grid)
    csvs = {"costs": (["s", "window_cost"], result.curve_rows())}
    return result.to_dict(), csvs


def _run_subshift(cfg):
    sub = sub_mod.build_full_subshift(cfg["beta"], cfg["epsilon"],
                                      max_block_length=cfg.get("max_block_length"))
    report = sub.to_dict()
    csvs = {}
    if sub.count <= SUBSHIFT_CSV_CAP:
        lefts = sub.branch_lefts()
        rows = [(float(lo), float(lo + sub.width)) for lo in lefts]
        csvs["branches"] = (["left", "right"], rows)
    else:
        report["branches_csv"] = f"omitted ({sub.count} branches exceed the export cap)"
    return report, csvs


def _run_volume(cfg, seed, threads):
    d, r, delta = cfg["dim"], cfg["r"], cfg["delta"]
    bounds = geom_mod.hyperboloid_volume_bounds(delta, d, r=r)
    report = {
        "formula": bounds.formula_value,
        "upper_bound": bounds.upper,
        "lower_bound": bounds.lower,
        "lower_bound_valid": bounds.lower_valid,
        "within_bounds": bounds.within,
    }
    if cfg.get("mc_samples"):
        value, stderr = geom_mod.hyperboloid_volume_mc(r, delta, d,
                                                       cfg["mc_samples"], seed,
                                                       threads=threads)
        report["mc_estimate"] = value
        report["mc_stderr"] = stderr
        report["mc_sigmas"] = abs(value - bounds.formula_value) / stderr
    return report, {}


def _run_sandwich(cfg, seed):
    m = maps_mod.map_from_spec(cfg["map"])
    density = None
    if "density" in cfg:
        density = measures_mod.density_from_spec(cfg["density"],
                                                 map_dim=m.dimension)
    result = rec_mod.sandwich_check(
        m, cfg["center"], cfg["rho"], cfg["n"], radii_n=cfg.get("radii"),
        delta_n=cfg.get("delta"), probes=cfg["probes"], seed=seed,
        mode=cfg["mode"], density=density)
    return result.to_dict(), {}


def _run_scaled_measure(cfg, seed, threads):
    m = maps_mod.map_from_spec(cfg["map"])
    density = measures_mod.density_from_spec(cfg["density"], map_dim=m.dimension)
    schedule = rec_mod.schedule_from_spec(
        cfg["schedule"], betas=cfg["map"].get("betas") or [cfg["map"].get("beta")])
    report = rec_mod.scaled_set_measure_check(
        m, density, schedule, cfg["ball"]["center"], cfg["ball"]["radius"],
        cfg["n_range"][0], cfg["n_range"][1], cfg["samples"], seed,
        threads=threads)
    csvs = {"series": (["n", "estimate", "stderr", "bracket_lo", "bracket_hi",
                        "pass"], report.series_rows())}
    _density_csv(density, csvs)
    return report.to_dict(), csvs
