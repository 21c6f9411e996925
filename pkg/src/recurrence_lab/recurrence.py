"""Recurrence events T^n x near x: exact measures and Monte Carlo experiments.

The set E_n = {x : T^n x in R(x, r_n)} has piecewise-affine structure for
beta and diagonal maps: on each order-n cylinder with T^n x = s x + c the
event reads |(s-1) x + c| < r, an interval solved in closed form, so the
Lebesgue measure of E_n is exact up to float arithmetic. Monte Carlo paths
estimate the same quantities for every map kind, drive the zero-one-law
experiments (hit counting along orbits against a shrinking schedule), and
estimate correlation decay. "Infinitely many hits" is operationalized as hit
fractions over dyadic tail windows [2^k, 2^(k+1)); a finite run cannot
witness a limsup, and tail windows are the standard finite proxy.

All estimators draw from fixed counter-based chunk streams and reduce in
chunk order, so reports are pure functions of (configuration, seed)
independent of the worker-thread count.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from . import maps as maps_mod
from . import rng as rng_mod
from .errors import KindError, OverflowGuardError, ParameterRangeError
from .measures import scale_factors_batch, scale_to_measure

RECT = "rect"
HYPERBOLOID = "hyperboloid"


def _dither_flags(betas):
    """Axes with an exact-integer expansion factor need bit replenishment
    (see the kernel docstrings); other axes re-randomize through roundoff."""
    b = np.abs(np.asarray(betas, dtype=float))
    return np.ascontiguousarray(b == np.round(b), dtype=np.uint8)


class _MatrixWalker:
    """Orbit advance for integer-matrix maps with the same dither scheme as
    the diagonal kernels (all axes; integer rows shed mantissa bits too)."""

    def __init__(self, x, a, salt):
        from . import _kernels_np as knp
        self._knp = knp
        self.z = x.copy()
        self.a_t = a.T
        self.idx_mul = (np.arange(x.shape[0], dtype=np.uint64)
                        * np.uint64(knp._C_POINT))
        self.salt = int(salt) & knp._MASK

    def step(self, n):
        knp = self._knp
        self.z = self.z @ self.a_t
        self.z -= np.floor(self.z)
        base = (np.uint64((self.salt + int(n) * knp._C_STEP) & knp._MASK)
                + self.idx_mul)
        for i in range(self.z.shape[1]):
            m = knp._mix(base + np.uint64((i * knp._C_AXIS) & knp._MASK))
            self.z[:, i] += (m >> np.uint64(11)).astype(np.float64) * knp.DITHER
        self.z -= np.floor(self.z)

POWER_LAW = "power_law"
EXPONENTIAL = "exponential"
BETA_POWER = "beta_power"
TABLE = "table"


@dataclass(frozen=True)
class RadiiSchedule:
    """Shrinking-radius sequence r_n (per axis) or delta_n (single column)."""

    kind: str
    c: float = 1.0
    params: tuple = ()
    betas: tuple | None = None
    table: np.ndarray | None = None

    @property
    def width(self):
        if self.kind == TABLE:
            return self.table.shape[1]
        return len(self.params)

    def values(self, ns):
        """Schedule values at steps `ns` (1-based), as a (len(ns), width) array."""
        ns = np.asarray(ns, dtype=float)
        if np.any(ns < 1):
            raise ParameterRangeError("schedule is defined for n >= 1")
        if self.kind == POWER_LAW:
            return self.c * ns[:, None] ** -np.array(self.params)
        if self.kind == EXPONENTIAL:
            return self.c * np.exp(-np.array(self.params) * ns[:, None])
        if self.kind == BETA_POWER:
            rates = np.array(self.params) * np.log(np.abs(np.array(self.betas)))
            return self.c * np.exp(-rates * ns[:, None])
        idx = ns.astype(np.int64) - 1
        if idx.max() >= self.table.shape[0]:
            raise ParameterRangeError("table schedule shorter than the horizon")
        return self.table[idx]

    def accumulation_exponents(self):
        """Limits t_i of -log(psi_i(n))/n; None for tabulated schedules."""
        if self.kind == POWER_LAW:
            return np.zeros(len(self.params))
        if self.kind == EXPONENTIAL:
            return np.array(self.params, dtype=float)
        if self.kind == BETA_POWER:
            return np.array(self.params) * np.log(np.abs(np.array(self.betas)))
        return None


def _as_tuple(v):
    return tuple(float(x) for x in np.atleast_1d(v))


def power_law_schedule(c, exponents):
    exps = _as_tuple(exponents)
    if c <= 0 or any(a <= 0 for a in exps):
        raise ParameterRangeError("power-law schedule needs c > 0 and exponents > 0")
    return RadiiSchedule(kind=POWER_LAW, c=float(c), params=exps)


def exponential_schedule(c, rates):
    rts = _as_tuple(rates)
    if c <= 0 or any(t < 0 for t in rts):
        raise ParameterRangeError("exponential schedule needs c > 0 and rates >= 0")
    return RadiiSchedule(kind=EXPONENTIAL, c=float(c), params=rts)


def beta_power_schedule(alphas, betas, c=1.0):
    alph = _as_tuple(alphas)
    bts = _as_tuple(betas)
    if len(alph) != len(bts):
        raise ParameterRangeError("alphas and betas must share a length")
    if c <= 0 or any(a <= 0 for a in alph) or any(abs(b) <= 1 for b in bts):
        raise ParameterRangeError("beta-power schedule needs c > 0, alpha > 0, |beta| > 1")
    return RadiiSchedule(kind=BETA_POWER, c=float(c), params=alph, betas=bts)


def table_schedule(values):
    table = np.atleast_2d(np.asarray(values, dtype=float))
    if table.ndim != 2 or np.any(table < 0):
        raise ParameterRangeError("table schedule must be a nonnegative 2-d array")
    return RadiiSchedule(kind=TABLE, table=table)


def schedule_from_spec(spec, betas=None):
    kind = spec.get("kind")
    if kind == POWER_LAW:
        return power_law_schedule(spec.get("c", 1.0), spec["a"])
    if kind == EXPONENTIAL:
        return exponential_schedule(spec.get("c", 1.0), spec["t"])
    if kind == BETA_POWER:
        return beta_power_schedule(spec["alpha"], spec.get("betas", betas),
                                   c=spec.get("c", 1.0))
    if kind == TABLE:
        return table_schedule(spec["values"])
    raise KindError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class SeriesClassification:
    verdict: str  # convergent | divergent | undetermined
    detail: str
    partial_sums: np.ndarray | None = None

    def to_dict(self):
        out = {"verdict": self.verdict, "detail": self.detail}
        if self.partial_sums is not None:
            out["partial_sum_tail"] = float(self.partial_sums[-1])
        return out


def governing_terms(schedule, target_kind, dim, ns):
    """Per-n terms of the zero-one-law series: prod_i r_{n,i} for rectangles,
    delta_n (-log delta_n)^(d-1) for hyperboloids."""
    vals = schedule.values(ns)
    if target_kind == RECT:
        if schedule.width != dim:
            raise ParameterRangeError("rectangle schedule width must match the dimension")
        return vals.prod(axis=1)
    if schedule.width != 1:
        raise ParameterRangeError("hyperboloid schedule must have a single column")
    deltas = vals[:, 0]
    if np.any(deltas >= 1.0):
        raise ParameterRangeError("hyperboloid schedule values must stay below 1")
    terms = np.zeros_like(deltas)
    pos = deltas > 0
    terms[pos] = deltas[pos] * (-np.log(deltas[pos])) ** (dim - 1)
    return terms


def classify_series(schedule, target_kind, dim):
    """Convergence of the governing series, decided analytically for
    parametric schedules; tabulated schedules report partial sums only."""
    if schedule.kind == TABLE:
        ns = np.arange(1, schedule.table.shape[0] + 1)
        terms = governing_terms(schedule, target_kind, dim, ns)
        return SeriesClassification(
            verdict="undetermined",
            detail="tabulated schedule: partial sums reported",
            partial_sums=np.cumsum(terms))
    if target_kind == RECT:
        if schedule.kind == POWER_LAW:
            s = sum(schedule.params)
            verdict = "convergent" if s > 1 else "divergent"
            return SeriesClassification(verdict, f"sum of exponents {s:g} vs 1")
        if schedule.kind == EXPONENTIAL:
            s = sum(schedule.params)
            verdict = "convergent" if s > 0 else "divergent"
            return SeriesClassification(verdict, f"sum of rates {s:g} vs 0")
        s = sum(a * math.log(abs(b)) for a, b in zip(schedule.params, schedule.betas))
        verdict = "convergent" if s > 0 else "divergent"
        return SeriesClassification(verdict, f"sum of log-rates {s:g} vs 0")
    # hyperboloid: the (-log)^'(d-1) factor never changes the verdict of the
    # parametric kinds
    if schedule.kind == POWER_LAW:
        a = schedule.params[0]
        verdict = "convergent" if a > 1 else "divergent"
        return SeriesClassification(verdict, f"delta exponent {a:g} vs 1")
    if schedule.kind == EXPONENTIAL:
        t = schedule.params[0]
        verdict = "convergent" if t > 0 else "divergent"
        return SeriesClassification(verdict, f"delta rate {t:g} vs 0")
    s = schedule.params[0] * math.log(abs(schedule.betas[0]))
    verdict = "convergent" if s > 0 else "divergent"
    return SeriesClassification(verdict, f"delta log-rate {s:g} vs 0")


def hit(m, x, n, schedule, target_kind=RECT):
    """Whether T^n x lands in the step-n target centered at x."""
    if n < 1:
        raise ParameterRangeError("hits are defined for n >= 1")
    orbit = maps_mod.iterate(m, x, n)
    start = np.atleast_1d(np.asarray(x, dtype=float))
    end = np.atleast_1d(orbit[-1])
    diff = np.abs(end - start)
    vals = schedule.values([n])[0]
    if target_kind == RECT:
        return bool((diff < vals).all())
    return bool(diff.prod() < vals[0])


def _en_measure_1d(beta, n, r):
    cs = maps_mod.cylinder_arrays(beta, n)
    denom = cs.slope - 1.0
    lo = (-r - cs.intercept) / denom
    hi = (r - cs.intercept) / denom
    a = np.minimum(lo, hi)
    b = np.maximum(lo, hi)
    overlap = np.minimum(b, cs.right) - np.maximum(a, cs.left)
    return float(np.clip(overlap, 0.0, None).sum())


def exact_en_measure(m, n, radii):
    """Exact Lebesgue measure of E_n = {x : |T^n x - x| < r coordinatewise}.

    Available for beta and diagonal maps only; matrix maps lack the product
    structure and are served by the Monte Carlo path.
    """
    if m.kind == maps_mod.BETA:
        r = float(np.atleast_1d(radii)[0])
        return _en_measure_1d(m.beta, n, r)
    if m.kind == maps_mod.DIAGONAL:
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if radii.size != m.dimension:
            raise ParameterRangeError("need one radius per coordinate")
        total = 1.0
        for b, r in zip(m.betas, radii):
            total *= _en_measure_1d(b, n, float(r))
        return total
    raise KindError("exact E_n measure requires a beta or diagonal map")


def mc_en_measure(m, n, radii, samples, seed, target_kind=RECT, threads=None):
    """Monte Carlo estimate of the Lebesgue measure of the step-n event."""

    def one_chunk(j, count):
        gen = rng_mod.stream(seed, j)
        x = gen.uniform(size=(count, m.dimension))
        salt = rng_mod.dither_salt(seed, j)
        if m.kind == maps_mod.INTEGER_MATRIX:
            return _matrix_hits_at_n(x, m.matrix_array(), n, radii, target_kind,
                                     salt)
        betas = m.betas_array()
        flags = _dither_flags(betas)
        if target_kind == RECT:
            r = np.broadcast_to(np.atleast_1d(np.asarray(radii, dtype=float)),
                                (m.dimension,)).astype(float)
            return kernels.rect_hits_at_n(x, betas, n, np.ascontiguousarray(r),
                                          flags, salt)
        return kernels.hyp_hits_at_n(x, betas, n, float(radii), flags, salt)

    counts = rng_mod.map_chunks(one_chunk, seed, samples, threads)
    p = sum(counts) / samples
    stderr = math.sqrt(max(p * (1 - p), 1e-300) / samples)
    return p, stderr


def _matrix_hits_at_n(x, a, n, radii, target_kind, salt):
    walker = _MatrixWalker(x, a, salt)
    for k in range(n):
        walker.step(k)
    diff = np.abs(walker.z - x)
    if target_kind == RECT:
        return int(np.count_nonzero((diff < np.atleast_1d(radii)).all(axis=1)))
    return int(np.count_nonzero(diff.prod(axis=1) < float(radii)))


def _matrix_orbit_hits(x0, a, values, target_kind, win_of_n, n_windows, salt):
    m = x0.shape[0]
    nsteps = values.shape[0]
    hits = np.zeros(nsteps, dtype=np.int64)
    win = np.zeros((m, n_windows), dtype=np.uint8)
    tot = np.zeros(m, dtype=np.int64)
    walker = _MatrixWalker(x0, a, salt)
    for n in range(nsteps):
        walker.step(n)
        diff = np.abs(walker.z - x0)
        if target_kind == RECT:
            h = (diff < values[n]).all(axis=1)
        else:
            h = diff.prod(axis=1) < values[n, 0]
        hits[n] = np.count_nonzero(h)
        tot += h
        w = win_of_n[n]
        if w >= 0:
            win[:, w] |= h
    return hits, win, tot


def dyadic_windows(horizon, first=1):
    """Dyadic windows [2^k, 2^(k+1)) clipped to [1, horizon]; a window is
    `complete` when the horizon did not truncate it."""
    out = []
    k = int(math.log2(first)) if first > 1 else 0
    while 2 ** k <= horizon:
        lo = 2 ** k
        hi = min(2 ** (k + 1) - 1, horizon)
        out.append({"k": k, "lo": lo, "hi": hi,
                    "complete": 2 ** (k + 1) - 1 <= horizon})
        k += 1
    return out


@dataclass
class DichotomyReport:
    target_kind: str
    samples: int
    horizon: int
    seed: int
    backend: str
    ns: np.ndarray
    mc_estimates: np.ndarray
    mc_stderr: np.ndarray
    exact: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray
    windows: list
    half_tail_fraction: float
    per_point_hits: np.ndarray
    mean_hits: float
    classification: SeriesClassification
    runtime: float
    config: dict | None = None

    def window_fraction(self, k):
        for w in self.windows:
            if w["k"] == k:
                return w["fraction"]
        raise KeyError(f"no dyadic window with k={k}")

    def to_dict(self):
        return {
            "experiment": "dichotomy",
            "target": self.target_kind,
            "samples": self.samples,
            "horizon": self.horizon,
            "seed": self.seed,
            "backend": self.backend,
            "classification": self.classification.to_dict(),
            "mean_hits": self.mean_hits,
            "partial_sum": float(self.partial_sums[-1]),
            "windows": self.windows,
            "half_tail_fraction": self.half_tail_fraction,
            "per_point_hits": self.per_point_hits.tolist(),
            "runtime_seconds": self.runtime,
            "config": self.config,
        }

    def series_rows(self):
        rows = []
        for i, n in enumerate(self.ns):
            rows.append((int(n), self.exact[i], self.mc_estimates[i],
                         self.mc_stderr[i], self.partial_sums[i]))
        return rows


def run_dichotomy(m, schedule, target_kind, density, samples, horizon, seed,
                  threads=None, exact_max=20):
    """Seeded hit-counting experiment for the zero-one dichotomy.

    Draws `samples` points from the density model, walks each orbit once
    through n = 1..horizon (O(horizon) per point), and reports per-n hit
    rates, dyadic tail-window hit fractions, per-point totals, and the
    analytic classification of the governing series. Exact E_n measures are
    attached for beta/diagonal maps with rectangle targets up to
    n = exact_max (cylinder enumeration is exponential in n).
    """
    if samples < 1000:
        raise ParameterRangeError("dichotomy runs need at least 1000 sample points")
    if horizon < 100:
        raise ParameterRangeError("dichotomy runs need a horizon of at least 100")
    if density.dim != m.dimension:
        raise ParameterRangeError("density dimension must match the map")
    t0 = time.perf_counter()
    ns = np.arange(1, horizon + 1)
    values = np.ascontiguousarray(schedule.values(ns), dtype=float)
    terms = governing_terms(schedule, target_kind, m.dimension, ns)

    windows = dyadic_windows(horizon)
    half_lo = horizon // 2
    # elementary cells: the partition of [1, horizon] cut at every dyadic
    # boundary plus horizon/2, so any reported window is a union of cells and
    # its per-point any-hit flag is an OR of cell flags
    cuts = sorted({w["lo"] for w in windows} | {half_lo, horizon + 1})
    cells = list(zip(cuts[:-1], [c - 1 for c in cuts[1:]]))
    win_of_n = np.full(horizon, -1, dtype=np.int64)
    for idx, (lo, hi) in enumerate(cells):
        win_of_n[lo - 1:hi] = idx

    hits_per_n = np.zeros(horizon, dtype=np.int64)
    window_chunks = []
    per_point_chunks = []

    def one_chunk(j, count):
        gen = rng_mod.stream(seed, j)
        x0 = np.ascontiguousarray(density.sample(count, gen))
        salt = rng_mod.dither_salt(seed, j)
        if m.kind == maps_mod.INTEGER_MATRIX:
            return _matrix_orbit_hits(x0, m.matrix_array(), values, target_kind,
                                      win_of_n, len(cells), salt)
        betas = m.betas_array()
        flags = _dither_flags(betas)
        if target_kind == RECT:
            return kernels.orbit_rect_hits(x0, betas, values, win_of_n,
                                           len(cells), flags, salt)
        return kernels.orbit_hyp_hits(x0, betas,
                                      np.ascontiguousarray(values[:, 0]),
                                      win_of_n, len(cells), flags, salt)

    for hits, win, tot in rng_mod.map_chunks(one_chunk, seed, samples, threads):
        hits_per_n += hits
        window_chunks.append(win)
        per_point_chunks.append(tot)

    cell_any = np.concatenate(window_chunks, axis=0).astype(bool)
    per_point = np.concatenate(per_point_chunks)

    def union_fraction(lo, hi):
        members = [i for i, (c_lo, c_hi) in enumerate(cells)
                   if c_lo >= lo and c_hi <= hi]
        return float(cell_any[:, members].any(axis=1).mean())

    for w in windows:
        w["fraction"] = union_fraction(w["lo"], w["hi"])
    half_tail_fraction = union_fraction(half_lo, horizon)

    mc = hits_per_n / samples
    stderr = np.sqrt(np.clip(mc * (1 - mc), 1e-300, None) / samples)

    exact = np.full(horizon, np.nan)
    if target_kind == RECT and m.kind in (maps_mod.BETA, maps_mod.DIAGONAL):
        # convenience column only: stop before enumeration gets expensive
        per_level_cap = 2.0 ** 21
        b_max = float(np.abs(m.betas_array()).max())
        for i in range(min(exact_max, horizon)):
            if b_max ** int(ns[i]) > per_level_cap:
                break
            try:
                exact[i] = exact_en_measure(m, int(ns[i]), values[i])
            except OverflowGuardError:
                break

    report = DichotomyReport(
        target_kind=target_kind, samples=samples, horizon=horizon, seed=seed,
        backend=kernels.backend_name(), ns=ns, mc_estimates=mc, mc_stderr=stderr,
        exact=exact, terms=terms, partial_sums=np.cumsum(terms), windows=windows,
        half_tail_fraction=half_tail_fraction,
        per_point_hits=per_point, mean_hits=float(per_point.mean()),
        classification=classify_series(schedule, target_kind, m.dimension),
        runtime=time.perf_counter() - t0)
    return report


@dataclass
class MixingReport:
    ns: np.ndarray
    correlations: np.ndarray
    stderr: np.ndarray
    noise_floor: np.ndarray
    mu_f: float
    mu_g: np.ndarray
    fit_c: float | None
    fit_tau: float | None
    fit_points: int
    status: str
    samples: int
    seed: int
    runtime: float
    config: dict | None = None

    def to_dict(self):
        return {
            "experiment": "mixing",
            "samples": self.samples,
            "seed": self.seed,
            "mu_f": self.mu_f,
            "fit_c": self.fit_c,
            "fit_tau": self.fit_tau,
            "fit_points": self.fit_points,
            "status": self.status,
            "runtime_seconds": self.runtime,
            "config": self.config,
        }

    def series_rows(self):
        return [(int(n), self.correlations[i], self.stderr[i],
                 self.noise_floor[i], self.mu_g[i])
                for i, n in enumerate(self.ns)]


def mixing_decay_estimate(m, f_target, g_target, n_max, samples, density, seed,
                          threads=None):
    """Estimate |mu(F cap T^-n G) - mu(F) mu(G)| for n = 1..n_max and fit an
    exponential decay to the estimates above their 3-sigma noise floor.

    Correlation variances use the delta method for the plug-in estimator:
    with u = 1_F(x) 1_G(T^n x), the influence w = u - p_G 1_F - p_F 1_G has
    all moments expressible through the three counts.
    """
    for tgt in (f_target, g_target):
        if min(tgt.radii) <= 0:
            raise ParameterRangeError("mixing targets need positive radii")
    if density.dim != m.dimension:
        raise ParameterRangeError("density dimension must match the map")
    t0 = time.perf_counter()
    f_lo = np.array(f_target.center) - np.array(f_target.radii)
    f_hi = np.array(f_target.center) + np.array(f_target.radii)
    g_lo = np.array(g_target.center) - np.array(g_target.radii)
    g_hi = np.array(g_target.center) + np.array(g_target.radii)

    def one_chunk(j, count):
        gen = rng_mod.stream(seed, j)
        x = np.ascontiguousarray(density.sample(count, gen))
        salt = rng_mod.dither_salt(seed, j)
        if m.kind == maps_mod.INTEGER_MATRIX:
            return _matrix_pair_counts(x, m.matrix_array(), n_max,
                                       f_lo, f_hi, g_lo, g_hi, salt)
        return kernels.indicator_pair_counts(x, m.betas_array(), n_max,
                                             f_lo, f_hi, g_lo, g_hi,
                                             _dither_flags(m.betas_array()), salt)

    n_f = 0
    n_g = np.zeros(n_max, dtype=np.int64)
    n_fg = np.zeros(n_max, dtype=np.int64)
    for cf, cg, cfg in rng_mod.map_chunks(one_chunk, seed, samples, threads):
        n_f += cf
        n_g += cg
        n_fg += cfg

    p_f = n_f / samples
    p_g = n_g / samples
    p_fg = n_fg / samples
    corr = np.abs(p_fg - p_f * p_g)
    ew2 = (p_fg + p_g ** 2 * p_f + p_f ** 2 * p_g
           - 2 * p_g * p_fg - 2 * p_f * p_fg + 2 * p_f * p_g * p_fg)
    ew = p_fg - 2 * p_f * p_g
    var_w = np.clip(ew2 - ew ** 2, 1e-300, None)
    stderr = np.sqrt(var_w / samples)
    floor = 3.0 * stderr

    usable = corr > floor
    fit_c = fit_tau = None
    status = "ok"
    ns = np.arange(1, n_max + 1)
    if np.count_nonzero(usable) >= 2:
        slope, icept = np.polyfit(ns[usable], np.log(corr[usable]), 1)
        fit_tau = -float(slope)
        fit_c = float(math.exp(icept))
    else:
        status = "below_noise_floor"

    return MixingReport(ns=ns, correlations=corr, stderr=stderr, noise_floor=floor,
                        mu_f=float(p_f), mu_g=p_g, fit_c=fit_c, fit_tau=fit_tau,
                        fit_points=int(np.count_nonzero(usable)), status=status,
                        samples=samples, seed=seed,
                        runtime=time.perf_counter() - t0)


def _matrix_pair_counts(x, a, n_max, f_lo, f_hi, g_lo, g_hi, salt):
    f = ((x > f_lo) & (x < f_hi)).all(axis=1)
    n_g = np.zeros(n_max, dtype=np.int64)
    n_fg = np.zeros(n_max, dtype=np.int64)
    walker = _MatrixWalker(x, a, salt)
    for n in range(n_max):
        walker.step(n)
        z = walker.z
        g = ((z > g_lo) & (z < g_hi)).all(axis=1)
        n_g[n] = np.count_nonzero(g)
        n_fg[n] = np.count_nonzero(f & g)
    return int(np.count_nonzero(f)), n_g, n_fg


@dataclass(frozen=True)
class SandwichResult:
    passed: bool
    probes: int
    inner_violations: int
    outer_violations: int
    witness: tuple | None

    def to_dict(self):
        return {"passed": self.passed, "probes": self.probes,
                "inner_violations": self.inner_violations,
                "outer_violations": self.outer_violations,
                "witness": self.witness}


def _advance(m, pts, n, salt, step0=0):
    z = np.ascontiguousarray(pts.copy())
    if m.kind == maps_mod.INTEGER_MATRIX:
        walker = _MatrixWalker(z, m.matrix_array(), salt)
        for k in range(n):
            walker.step(int(step0) + k)
        return walker.z
    betas = m.betas_array()
    kernels.advance_orbit(z, betas, n, _dither_flags(betas), salt, int(step0))
    return z


def _in_rect(pts, center, radii):
    return (np.abs(pts - center) < radii).all(axis=1)


def sandwich_check(m, center, rho, n, radii_n=None, delta_n=None, probes=10000,
                   seed=0, mode=RECT, density=None):
    """Probe the local inclusions squeezing the recurrence event inside
    pulled-back targets around a block center.

    mode='rect': around F = R(x0, rho), membership in T^-n R(x0, r_n - rho)
    implies the recurrence event at step n, which implies membership in
    T^-n R(x0, r_n + rho). mode='scaled' runs the measure-normalized variant
    with widening 2 t r_n, t = max_i rho_i / r_{n,i} (needs a density model);
    mode='hyperboloid' widens delta_n by 2^d * rho.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    rho_vec = np.broadcast_to(np.atleast_1d(np.asarray(rho, dtype=float)),
                              center.shape).astype(float)
    if np.any(rho_vec <= 0):
        raise ParameterRangeError("probe block needs positive radii")
    d = m.dimension

    gen = rng_mod.stream(seed, 0)
    lo = np.maximum(center - rho_vec, 0.0)
    hi = np.minimum(center + rho_vec, np.nextafter(1.0, 0.0))
    z0 = lo + (hi - lo) * gen.uniform(size=(probes, d))
    zn = _advance(m, z0, n, rng_mod.dither_salt(seed, 1))

    if mode == RECT:
        radii_n = np.broadcast_to(np.atleast_1d(np.asarray(radii_n, dtype=float)),
                                  center.shape).astype(float)
        if np.any(rho_vec >= radii_n):
            raise ParameterRangeError("block radii must stay below the target radii")
        inner = _in_rect(zn, center, radii_n - rho_vec)
        member = _in_rect(zn, z0, radii_n)
        outer = _in_rect(zn, center, radii_n + rho_vec)
    elif mode == "scaled":
        if density is None:
            raise ParameterRangeError("scaled mode needs a density model")
        radii_n = np.broadcast_to(np.atleast_1d(np.asarray(radii_n, dtype=float)),
                                  center.shape).astype(float)
        t = float(np.max(rho_vec / radii_n))
        xi_center = scale_to_measure(density, center, radii_n).scaled_radii
        scales, _ = scale_factors_batch(density, z0, radii_n)
        inner = _in_rect(zn, center, xi_center - 2 * t * radii_n)
        member = (np.abs(zn - z0) < scales[:, None] * radii_n).all(axis=1)
        outer = _in_rect(zn, center, xi_center + 2 * t * radii_n)
    elif mode == HYPERBOLOID:
        delta_n = float(delta_n)
        r_scalar = float(rho_vec.max())
        prod_c = np.abs(zn - center).prod(axis=1)
        prod_z = np.abs(zn - z0).prod(axis=1)
        inner = prod_c < delta_n - (2 ** d) * r_scalar
        member = prod_z < delta_n
        outer = prod_c < delta_n + (2 ** d) * r_scalar
    else:
        raise KindError(f"unknown sandwich mode {mode!r}")

    inner_bad = inner & ~member
    outer_bad = member & ~outer
    witness = None
    bad = np.nonzero(inner_bad | outer_bad)[0]
    if bad.size:
        witness = tuple(float(v) for v in z0[bad[0]])
    return SandwichResult(passed=bad.size == 0, probes=probes,
                          inner_violations=int(inner_bad.sum()),
                          outer_violations=int(outer_bad.sum()), witness=witness)


@dataclass
class ScaledMeasureReport:
    ns: np.ndarray
    estimates: np.ndarray
    stderr: np.ndarray
    bracket_lo: np.ndarray
    bracket_hi: np.ndarray
    passes: np.ndarray
    pass_rate: float
    ball_measure: float
    samples: int
    seed: int
    runtime: float
    config: dict | None = None

    def failures(self):
        return [int(n) for n, ok in zip(self.ns, self.passes) if not ok]

    def to_dict(self):
        return {
            "experiment": "scaled-measure",
            "samples": self.samples,
            "seed": self.seed,
            "ball_measure": self.ball_measure,
            "pass_rate": self.pass_rate,
            "failures": self.failures(),
            "runtime_seconds": self.runtime,
            "config": self.config,
        }

    def series_rows(self):
        return [(int(n), self.estimates[i], self.stderr[i], self.bracket_lo[i],
                 self.bracket_hi[i], bool(self.passes[i]))
                for i, n in enumerate(self.ns)]


def _scale_upper_bound(density, radii, target):
    """Safe upper bound on the measure-normalizing scale: below it, any center
    has mu(R(x, l r)) < target. Uses the model's density infimum."""
    inf_d = getattr(density, "inf_density", None)
    h_min = inf_d() if callable(inf_d) else None
    if not h_min or h_min <= 0:
        return None
    # mu(R(x, l r)) >= h_min * prod_i min(l r_i, 1/2)
    lo, hi = 0.0, 1.0
    def covered(l):
        return h_min * np.prod(np.minimum(l * radii, 0.5)) >= target
    for _ in range(200):
        if covered(hi):
            break
        hi *= 2.0
        if hi > 2 ** 40:
            return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if covered(mid):
            hi = mid
        else:
            lo = mid
    return hi


def scaled_set_measure_check(m, density, schedule, ball_center, ball_radius,
                             n_lo, n_hi, samples, seed, threads=None):
    """Per-n Monte Carlo estimate of mu(B cap E-hat_n) against the bracket
    [1/2, 2] * mu(B) * prod_i r_{n,i}, judged with a 3-sigma slack.

    E-hat_n membership rescales the step-n rectangle so its measure equals
    prod_i r_{n,i}; the scale is solved per sampled point by bisection.
    """
    if m.kind not in (maps_mod.BETA, maps_mod.DIAGONAL):
        raise KindError("the scaled-set check needs a beta or diagonal map")
    t0 = time.perf_counter()
    d = m.dimension
    center = np.broadcast_to(np.atleast_1d(np.asarray(ball_center, dtype=float)),
                             (d,)).astype(float)
    ball_r = np.full(d, float(ball_radius))
    mu_ball = density.rect_measure(center, ball_r)
    ns = np.arange(n_lo, n_hi + 1)
    values = schedule.values(ns)
    targets = values.prod(axis=1)
    betas = m.betas_array()

    counts = np.zeros(len(ns), dtype=np.int64)
    cuts = [_scale_upper_bound(density, values[i], targets[i])
            for i in range(len(ns))]

    flags = _dither_flags(betas)

    def one_chunk(j, count):
        gen = rng_mod.stream(seed, j)
        x0 = np.ascontiguousarray(density.sample(count, gen))
        salt = rng_mod.dither_salt(seed, j)
        in_ball = _in_rect(x0, center, ball_r)
        local = np.zeros(len(ns), dtype=np.int64)
        z = x0.copy()
        kernels.advance_orbit(z, betas, int(ns[0]) - 1, flags, salt, 0)
        for i in range(len(ns)):
            kernels.advance_orbit(z, betas, 1, flags, salt, int(ns[0]) - 1 + i)
            r_n = values[i]
            cand = in_ball.copy()
            if cuts[i] is not None:
                cand &= (np.abs(z - x0) < np.minimum(cuts[i] * r_n, 1.0)).all(axis=1)
            idx = np.nonzero(cand)[0]
            if idx.size == 0:
                continue
            scales, _ = scale_factors_batch(density, x0[idx], r_n)
            member = (np.abs(z[idx] - x0[idx]) < scales[:, None] * r_n).all(axis=1)
            local[i] = np.count_nonzero(member)
        return local

    for local in rng_mod.map_chunks(one_chunk, seed, samples, threads):
        counts += local

    est = counts / samples
    stderr = np.sqrt(np.clip(est * (1 - est), 1e-300, None) / samples)
    lo_b = 0.5 * mu_ball * targets
    hi_b = 2.0 * mu_ball * targets
    passes = (est + 3 * stderr >= lo_b) & (est - 3 * stderr <= hi_b)
    return ScaledMeasureReport(ns=ns, estimates=est, stderr=stderr,
                               bracket_lo=lo_b, bracket_hi=hi_b, passes=passes,
                               pass_rate=float(passes.mean()),
                               ball_measure=float(mu_ball), samples=samples,
                               seed=seed, runtime=time.perf_counter() - t0)
