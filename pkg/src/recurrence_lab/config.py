"""Experiment configuration: JSON schema validation and object building.

Configs are flat JSON documents with an `experiment` discriminator and a
mandatory integer `seed` (reproducibility is a contract; there is no
wall-clock default). Unknown keys are rejected at every level. `validate`
never raises; it returns the full list of violations so a CLI user sees
every problem at once.
"""

import json

from . import maps as maps_mod
from . import measures as measures_mod
from . import recurrence as rec_mod
from .errors import ConfigError, RecurrenceLabError

EXPERIMENTS = ("dichotomy", "mixing", "dimension", "boxdim", "subshift",
               "volume", "sandwich", "scaled-measure")

_TOP_KEYS = {
    "dichotomy": ({"experiment", "seed", "map", "density", "schedule",
                   "target", "samples", "horizon"}, {"exact_max"}),
    "mixing": ({"experiment", "seed", "map", "density", "f", "g",
                "n_max", "samples"}, set()),
    "dimension": ({"experiment", "seed", "betas", "t_points"}, set()),
    "boxdim": ({"experiment", "seed", "betas", "schedule", "window",
                "s_grid"}, set()),
    "subshift": ({"experiment", "seed", "beta", "epsilon"},
                 {"max_block_length"}),
    "volume": ({"experiment", "seed", "dim", "r", "delta"}, {"mc_samples"}),
    "sandwich": ({"experiment", "seed", "map", "mode", "center", "rho", "n",
                  "probes"}, {"radii", "delta", "density", "schedule"}),
    "scaled-measure": ({"experiment", "seed", "map", "density", "schedule",
                        "ball", "n_range", "samples"}, set()),
}

_MAP_KEYS = {"beta": {"kind", "beta"}, "diagonal": {"kind", "betas"},
             "integer_matrix": {"kind", "rows"}}
_DENSITY_KEYS = {"lebesgue": {"kind", "dim", "density_sup"},
                 "parry": {"kind", "beta", "n_max", "density_sup"},
                 "ulam": {"kind", "beta", "bins", "density_sup"},
                 "product": {"kind", "factors", "density_sup"}}
_SCHEDULE_KEYS = {"power_law": {"kind", "c", "a"},
                  "exponential": {"kind", "c", "t"},
                  "beta_power": {"kind", "c", "alpha", "betas"},
                  "table": {"kind", "values"}}


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    if not isinstance(cfg, dict):
        raise ConfigError(["config root must be a JSON object"])
    return cfg


def _check_keys(obj, required, optional, where, out):
    missing = required - obj.keys()
    unknown = obj.keys() - required - optional
    for key in sorted(missing):
        out.append(f"{where}: missing required field '{key}'")
    for key in sorted(unknown):
        out.append(f"{where}: unknown field '{key}'")
    return not missing


def _check_spec(obj, key_table, where, out):
    if not isinstance(obj, dict):
        out.append(f"{where}: must be an object")
        return False
    kind = obj.get("kind")
    if kind not in key_table:
        out.append(f"{where}: unknown kind {kind!r} "
                   f"(expected one of {sorted(key_table)})")
        return False
    allowed = key_table[kind]
    for key in sorted(obj.keys() - allowed):
        out.append(f"{where}: unknown field '{key}' for kind '{kind}'")
    if kind == "product":
        ok = True
        for i, factor in enumerate(obj.get("factors", [])):
            ok = _check_spec(factor, _DENSITY_KEYS, f"{where}.factors[{i}]", out) and ok
        return ok
    return True


def _try_build(builder, where, out):
    try:
        return builder()
    except (RecurrenceLabError, KeyError, TypeError, ValueError) as exc:
        out.append(f"{where}: {exc}")
        return None


def validate_config(cfg):
    """Full schema plus semantic validation; returns the violation list."""
    out = []
    if not isinstance(cfg, dict):
        return ["config root must be a JSON object"]
    kind = cfg.get("experiment")
    if kind not in EXPERIMENTS:
        out.append(f"experiment: unknown kind {kind!r} "
                   f"(expected one of {sorted(EXPERIMENTS)})")
        return out
    required, optional = _TOP_KEYS[kind]
    _check_keys(cfg, required, optional, "config", out)

    seed = cfg.get("seed")
    if "seed" in cfg and (not isinstance(seed, int) or isinstance(seed, bool)
                          or seed < 0 or seed >= 2 ** 64):
        out.append("seed: must be an unsigned 64-bit integer")

    built_map = None
    if "map" in cfg and "map" in required | optional:
        if _check_spec(cfg["map"], _MAP_KEYS, "map", out):
            built_map = _try_build(lambda: maps_mod.map_from_spec(cfg["map"]),
                                   "map", out)
    if "density" in cfg and isinstance(cfg.get("density"), dict):
        if _check_spec(cfg["density"], _DENSITY_KEYS, "density", out):
            dim = built_map.dimension if built_map else None
            density = _try_build(
                lambda: measures_mod.density_from_spec(cfg["density"], map_dim=dim),
                "density", out)
            if density and built_map and density.dim != built_map.dimension:
                out.append("density: dimension does not match the map")
    if "schedule" in cfg and isinstance(cfg.get("schedule"), dict):
        if _check_spec(cfg["schedule"], _SCHEDULE_KEYS, "schedule", out):
            _try_build(lambda: rec_mod.schedule_from_spec(cfg["schedule"]),
                       "schedule", out)

    if kind == "dichotomy":
        if cfg.get("target") not in (rec_mod.RECT, rec_mod.HYPERBOLOID):
            out.append("target: must be 'rect' or 'hyperboloid'")
        if not isinstance(cfg.get("samples"), int) or cfg.get("samples", 0) < 1000:
            out.append("samples: dichotomy runs need an integer >= 1000")
        if not isinstance(cfg.get("horizon"), int) or cfg.get("horizon", 0) < 100:
            out.append("horizon: dichotomy runs need an integer >= 100")
    elif kind == "mixing":
        for name in ("f", "g"):
            tgt = cfg.get(name)
            if not (isinstance(tgt, dict) and tgt.keys() == {"center", "radii"}):
                out.append(f"{name}: must be an object with 'center' and 'radii'")
            elif any(r <= 0 for r in tgt["radii"]):
                out.append(f"{name}: radii must be positive")
        if not isinstance(cfg.get("n_max"), int) or cfg.get("n_max", 0) < 1:
            out.append("n_max: must be a positive integer")
    elif kind == "dimension":
        betas = cfg.get("betas", [])
        if not betas or any(abs(b) <= 1 for b in betas):
            out.append("betas: expansion requires |beta_i| > 1")
        pts = cfg.get("t_points", [])
        if not pts:
            out.append("t_points: accumulation set must be nonempty")
        for i, p in enumerate(pts):
            if len(p) != len(betas):
                out.append(f"t_points[{i}]: length must match betas")
            elif any(ti < 0 for ti in p):
                out.append(f"t_points[{i}]: entries must be >= 0 "
                           "(bounded accumulation sets only)")
    elif kind == "boxdim":
        betas = cfg.get("betas", [])
        if not betas or any(abs(b) <= 1 for b in betas):
            out.append("betas: expansion requires |beta_i| > 1")
        window = cfg.get("window")
        if not (isinstance(window, list) and len(window) == 2
                and window[0] >= 10 and window[1] > window[0]):
            out.append("window: must be [N0, N1] with 10 <= N0 < N1")
        grid = cfg.get("s_grid")
        if not (isinstance(grid, dict) and grid.keys() == {"start", "stop", "step"}
                and grid["step"] > 0 and grid["stop"] > grid["start"]):
            out.append("s_grid: must give {start, stop, step} with step > 0")
    elif kind == "subshift":
        if not isinstance(cfg.get("beta"), (int, float)) or cfg.get("beta", 0) <= 1:
            out.append("beta: the full-cylinder construction needs beta > 1")
        eps = cfg.get("epsilon")
        if not isinstance(eps, (int, float)) or not 0 < eps < 1:
            out.append("epsilon: must lie in (0,1)")
    elif kind == "volume":
        d = cfg.get("dim")
        if not isinstance(d, int) or d < 1:
            out.append("dim: must be a positive integer")
        r, delta = cfg.get("r"), cfg.get("delta")
        if not (isinstance(r, (int, float)) and isinstance(delta, (int, float))
                and 0 < delta < r < 1):
            out.append("r/delta: need 0 < delta < r < 1")
        elif isinstance(d, int) and d >= 1 and delta >= r ** d:
            out.append("delta: need delta < r^d for a nonnegative log")
    elif kind == "sandwich":
        if cfg.get("mode") not in ("rect", "scaled", "hyperboloid"):
            out.append("mode: must be 'rect', 'scaled' or 'hyperboloid'")
        if cfg.get("mode") == "scaled" and "density" not in cfg:
            out.append("density: scaled mode needs a density model")
        if cfg.get("mode") in ("rect", "scaled") and "radii" not in cfg:
            out.append("radii: rectangle modes need target radii")
        if cfg.get("mode") == "hyperboloid" and "delta" not in cfg:
            out.append("delta: hyperboloid mode needs a target delta")
        if not isinstance(cfg.get("n"), int) or cfg.get("n", 0) < 1:
            out.append("n: must be a positive integer")
        if not isinstance(cfg.get("probes"), int) or cfg.get("probes", 0) < 1:
            out.append("probes: must be a positive integer")
    elif kind == "scaled-measure":
        ball = cfg.get("ball")
        if not (isinstance(ball, dict) and ball.keys() == {"center", "radius"}):
            out.append("ball: must be an object with 'center' and 'radius'")
        rng = cfg.get("n_range")
        if not (isinstance(rng, list) and len(rng) == 2 and 1 <= rng[0] <= rng[1]):
            out.append("n_range: must be [lo, hi] with 1 <= lo <= hi")
        if not isinstance(cfg.get("samples"), int) or cfg.get("samples", 0) < 1000:
            out.append("samples: need an integer >= 1000")
    return out
