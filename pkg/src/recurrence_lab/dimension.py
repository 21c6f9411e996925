"""Hausdorff-dimension calculators for recurrence limsup sets of diagonal maps.

The closed-form exponent for expansion factors beta_i and accumulation vector
t splits the coordinates, relative to direction i, into fast axes (counted
fully), slow-target axes (counted with a deficiency), and the rest (counted
with a log-ratio weight); the dimension is the sup over accumulation points
of the min over directions. A companion mass-transference exponent
s(u, v, i) reproduces the same value under the substitution u = log|beta|,
v = u + t with unit Ahlfors exponents.

The critical-exponent estimator rebuilds the natural cover of the recurrence
set numerically: per level n it collects the exact per-cylinder recurrence
intervals (d = 1) or the covering-ball counting bound (d >= 2) and locates
the s where the per-level cover cost transitions below 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import maps as maps_mod
from .errors import GridError, KindError, ParameterRangeError

_COST_LOG_CAP = 700.0


def _check_betas_t(betas, t):
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if betas.shape != t.shape:
        raise ParameterRangeError("betas and t must share a shape")
    if np.any(np.abs(betas) <= 1):
        raise ParameterRangeError("expansion requires |beta_i| > 1")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ParameterRangeError("accumulation exponents must be finite and >= 0")
    return betas, t


@dataclass(frozen=True)
class ThetaComponent:
    axis: int
    value: float
    k1: tuple
    k2: tuple
    k3: tuple


def theta_components(betas, t, axis):
    """theta_i(t) with its coordinate partition (0-based axis indices).

    K1 collects k with log|beta_k| > log|beta_i| + t_i (strict), K2 those
    with log|beta_k| + t_k <= log|beta_i| + t_i, K3 the rest; since t >= 0
    the two defining conditions cannot hold together.
    """
    betas, t = _check_betas_t(betas, t)
    logb = np.log(np.abs(betas))
    denom = logb[axis] + t[axis]
    k1 = logb > denom
    k2 = (logb + t) <= denom
    k3 = ~(k1 | k2)
    value = (np.count_nonzero(k1)
             + np.sum(1.0 - t[k2] / denom)
             + np.sum(logb[k3] / denom))
    return ThetaComponent(axis=axis, value=float(value),
                          k1=tuple(int(k) for k in np.nonzero(k1)[0]),
                          k2=tuple(int(k) for k in np.nonzero(k2)[0]),
                          k3=tuple(int(k) for k in np.nonzero(k3)[0]))


def theta(betas, t):
    """All theta_i(t) values as an array."""
    betas, t = _check_betas_t(betas, t)
    return np.array([theta_components(betas, t, i).value
                     for i in range(len(betas))])


@dataclass(frozen=True)
class DimensionResult:
    value: float
    argsup: tuple
    per_point: list

    def to_dict(self):
        return {"dimension": self.value, "argsup_t": list(self.argsup),
                "per_point_min_theta": self.per_point}


def recurrence_dimension(betas, t_points):
    """sup over accumulation vectors of min_i theta_i(t)."""
    pts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in t_points]
    if not pts:
        raise ParameterRangeError("accumulation set must be nonempty")
    best = None
    best_t = None
    mins = []
    for p in pts:
        val = float(theta(betas, p).min())
        mins.append(val)
        if best is None or val > best:
            best, best_t = val, p
    return DimensionResult(value=best, argsup=tuple(float(v) for v in best_t),
                           per_point=mins)


def mtp_exponent(deltas, u, v, axis):
    """Mass-transference lower-bound exponent s(u, v, i).

    K1 = {u_k >= v_i}, K2 = {v_k <= v_i} minus K1, K3 the rest; on ties the
    K1 and K2 terms agree, so the priority does not change the value.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if not (deltas.shape == u.shape == v.shape):
        raise ParameterRangeError("deltas, u, v must share a shape")
    if np.any(u < 0) or np.any(v < u):
        raise ParameterRangeError("need 0 <= u_k <= v_k")
    if v[axis] <= 0:
        raise ParameterRangeError("v_i must be positive")
    if np.any(deltas <= 0) or np.any(deltas > 1):
        raise ParameterRangeError("Ahlfors exponents must lie in (0, 1]")
    vi = v[axis]
    k1 = u >= vi
    k2 = (v <= vi) & ~k1
    k3 = ~(k1 | k2)
    return float(np.sum(deltas[k1])
                 + np.sum(deltas[k2] * (1.0 - (v[k2] - u[k2]) / vi))
                 + np.sum(deltas[k3] * u[k3] / vi))


def mtp_min(deltas, u, v):
    vals = [mtp_exponent(deltas, u, v, i) for i in range(len(np.atleast_1d(u)))]
    return min(vals), vals


def accumulation_set(schedule, stride=1, n_range=(1, 1_000_000), tol=1e-3):
    """Accumulation points of (-log psi_i(n)/n)_i.

    Parametric schedules return their closed-form singleton exactly; a
    tabulated schedule is clustered empirically at the given sup-norm
    tolerance over the sampled range with the given stride.
    """
    if stride < 1:
        raise ParameterRangeError("stride must be >= 1")
    exact = schedule.accumulation_exponents()
    if exact is not None:
        return np.array([exact])
    n0, n1 = n_range
    n1 = min(n1, schedule.table.shape[0])
    ns = np.arange(max(n0, 1), n1 + 1, stride)
    vals = schedule.values(ns)
    if np.any(vals <= 0):
        raise ParameterRangeError("schedule must stay positive on the range")
    pts = -np.log(vals) / ns[:, None]
    reps = []
    for row in pts:
        for rep in reps:
            if np.abs(row - rep).max() <= tol:
                break
        else:
            reps.append(row)
    order = np.lexsort(np.array(reps).T[::-1])
    return np.array(reps)[order]


def accumulation_invariance(schedule, stride, n_range=(1, 1_000_000), tol=1e-3):
    """Stride-k accumulation set against stride-1: equal up to the tolerance."""
    a = accumulation_set(schedule, stride=stride, n_range=n_range, tol=tol)
    b = accumulation_set(schedule, stride=1, n_range=n_range, tol=tol)
    def covered(x, ys):
        return all(min(np.abs(row - y).max() for y in ys) <= 2 * tol for row in x)
    return covered(a, b) and covered(b, a), a, b


@dataclass
class CoverResult:
    order: int
    radius: float
    intervals: np.ndarray  # (k, 2), exact per-cylinder recurrence intervals
    over_length: float     # the 6 r / |beta|^n comparison length
    all_within_bound: bool

    @property
    def count(self):
        return self.intervals.shape[0]

    def total_length(self):
        return float((self.intervals[:, 1] - self.intervals[:, 0]).sum())


def recurrence_cover(m, n, r):
    """Exact cover of {x : |T^n x - x| < r} by per-cylinder intervals.

    Each cylinder contributes {x in C : |s x + c - x| < r}, an interval of
    length at most min(2r/|s-1|, |C|); the classical over-cover assigns every
    cylinder an interval of length 6 r / |beta|^n, which dominates the exact
    one once |beta|^n >= 3/2.
    """
    if m.kind != maps_mod.BETA:
        raise KindError("recurrence covers are enumerated for beta-maps only")
    if r < 0:
        raise ParameterRangeError("radius must be nonnegative")
    cs = maps_mod.cylinder_arrays(m.beta, n)
    denom = cs.slope - 1.0
    lo = (-r - cs.intercept) / denom
    hi = (r - cs.intercept) / denom
    a = np.maximum(np.minimum(lo, hi), cs.left)
    b = np.minimum(np.maximum(lo, hi), cs.right)
    keep = b > a
    intervals = np.stack([a[keep], b[keep]], axis=1)
    over = 6.0 * r / abs(m.beta) ** n
    lengths = intervals[:, 1] - intervals[:, 0]
    within = bool(np.all(lengths <= over * (1 + 1e-12))) if lengths.size else True
    return CoverResult(order=n, radius=r, intervals=intervals,
                       over_length=over, all_within_bound=within)


def _cover_pieces_1d(beta, n, r):
    """(lengths, counts) of the exact level-n recurrence cover.

    Integer beta admits a closed form (interior cylinders contribute
    identical intervals, the two boundary cylinders half ones), which keeps
    very large n reachable; other betas are enumerated. The closed form is
    exact for r <= |beta|^-n; beyond that it caps the O(r |beta|^n) cylinders
    nearest the edges at the full interior length, at most doubling their
    contribution to the cost sum.
    """
    ab = abs(beta)
    if beta > 1 and beta == round(beta):
        slope = ab ** n
        width = ab ** -n
        interior = min(2 * r / (slope - 1), width)
        boundary = min(r / (slope - 1), width)
        return (np.array([interior, boundary]),
                np.array([ab ** n - 2.0, 2.0]))
    cs = maps_mod.cylinder_arrays(beta, n)
    denom = cs.slope - 1.0
    lo = (-r - cs.intercept) / denom
    hi = (r - cs.intercept) / denom
    a = np.maximum(np.minimum(lo, hi), cs.left)
    b = np.minimum(np.maximum(lo, hi), cs.right)
    lengths = (b - a)[b > a]
    return lengths, np.ones_like(lengths)


def _cost_from_pieces(pieces, s_grid, levels):
    """Per-level mean of sum_j count_j * len_j^s, evaluated in the log domain."""
    costs = np.zeros_like(s_grid)
    for lengths, counts in pieces:
        log_len = np.log(np.clip(lengths, 1e-300, None))
        log_cnt = np.log(np.clip(counts, 1e-300, None))
        expo = log_cnt[None, :] + np.outer(s_grid, log_len)
        costs += np.exp(np.clip(expo, -_COST_LOG_CAP, _COST_LOG_CAP)).sum(axis=1)
    return costs / levels


def _crossing(s_grid, costs):
    below = costs < 1.0
    if below[0] or not below.any():
        raise GridError("cost transition not bracketed by the s grid; widen it")
    return float(s_grid[np.argmax(below)])


@dataclass
class CriticalExponentResult:
    s_star: float
    s_grid: np.ndarray
    costs: np.ndarray          # d=1: the curve; d>=2: min-direction curve
    per_axis: list | None = None  # d>=2: (axis, s_star_i, costs_i)

    def to_dict(self):
        out = {"s_star": self.s_star}
        if self.per_axis is not None:
            out["per_axis_s_star"] = [
                {"axis": i, "s_star": s} for i, s, _ in self.per_axis]
        return out

    def curve_rows(self):
        return [(float(s), float(c)) for s, c in zip(self.s_grid, self.costs)]


def cover_critical_exponent(betas, schedule, window, s_grid):
    """Numeric critical exponent of the windowed cover cost.

    For each s on the grid, averages the level-n cover cost over the window
    [N0, N1] and returns the smallest s where that normalized cost drops
    below 1 (averaging removes the window-length bias of the raw sum; the
    full curve is reported for diagnostics). d = 1 costs come from the exact
    recurrence cover; d >= 2 costs use the per-direction covering-ball
    counting bound with cylinder counts |beta_k|^n for integer beta_k and
    enumerated counts otherwise.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if np.any(np.abs(betas) <= 1):
        raise ParameterRangeError("expansion requires |beta_i| > 1")
    d = betas.size
    if schedule.width != d:
        raise ParameterRangeError("schedule width must match the dimension")
    n0, n1 = int(window[0]), int(window[1])
    if n0 < 10 or n1 <= n0:
        raise ParameterRangeError("window must satisfy 10 <= N0 < N1")
    s_grid = np.asarray(s_grid, dtype=float)
    ns = np.arange(n0, n1 + 1)
    levels = len(ns)
    psi = schedule.values(ns)

    if d == 1:
        pieces = [_cover_pieces_1d(float(betas[0]), int(n), float(psi[i, 0]))
                  for i, n in enumerate(ns)]
        costs = _cost_from_pieces(pieces, s_grid, levels)
        return CriticalExponentResult(s_star=_crossing(s_grid, costs),
                                      s_grid=s_grid, costs=costs)

    counts_cache = {}

    def cylinder_count(k, n):
        b = abs(betas[k])
        if b == round(b):
            return b ** n
        key = (k, n)
        if key not in counts_cache:
            counts_cache[key] = maps_mod.cylinder_arrays(betas[k], n).count
        return float(counts_cache[key])

    per_axis = []
    for i in range(d):
        log_costs = []
        for row, n in enumerate(ns):
            diam_i = 6.0 * psi[row, i] * abs(betas[i]) ** -float(n)
            log_count = 0.0
            for k in range(d):
                in_k1 = abs(betas[k]) ** -float(n) < diam_i
                if in_k1:
                    log_count += -math.log(diam_i)
                else:
                    log_count += math.log(cylinder_count(k, int(n)))
                side_k = psi[row, k] * abs(betas[k]) ** -float(n)
                side_i = psi[row, i] * abs(betas[i]) ** -float(n)
                if side_k >= side_i:
                    log_count += math.log(side_k) - math.log(side_i)
            log_costs.append((log_count, math.log(diam_i)))
        costs_i = np.zeros_like(s_grid)
        for log_count, log_diam in log_costs:
            expo = log_count + s_grid * log_diam
            costs_i += np.exp(np.clip(expo, -_COST_LOG_CAP, _COST_LOG_CAP))
        costs_i /= levels
        per_axis.append((i, _crossing(s_grid, costs_i), costs_i))

    best = min(per_axis, key=lambda item: item[1])
    return CriticalExponentResult(s_star=best[1], s_grid=s_grid, costs=best[2],
                                  per_axis=per_axis)
