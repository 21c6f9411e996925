"""Recurrence targets and their geometry.

Targets are axis-parallel hyperrectangles R(x, r) and hyperboloids H(x, delta)
in the max norm; membership uses strict inequalities throughout. Volumes of
hyperboloid slices follow the closed form

    vol(B(x,r) cap H(x,delta)) = 2^d delta sum_{t<d} (log(r^d/delta))^t / t!

valid for 0 < delta < r < 1 with delta < r^d. The boundary-size estimator
needed by the mixing hypotheses works from indicator access alone: a sampled
point is near the boundary of A when a small cube around it contains both a
member and a non-member, probed on a deterministic 3^d stencil plus a few
random offsets.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import rng as rng_mod
from .errors import ParameterRangeError

RECT = "rect"
HYPERBOLOID = "hyperboloid"


@dataclass(frozen=True)
class RectTarget:
    center: tuple
    radii: tuple

    @property
    def dim(self):
        return len(self.center)


@dataclass(frozen=True)
class HyperboloidTarget:
    center: tuple
    delta: float

    @property
    def dim(self):
        return len(self.center)


def rect_target(center, radii):
    center = tuple(float(c) for c in np.atleast_1d(center))
    radii = tuple(float(r) for r in np.atleast_1d(radii))
    if len(center) != len(radii):
        raise ParameterRangeError("center and radii must share a dimension")
    if any(r < 0 for r in radii):
        raise ParameterRangeError("radii must be nonnegative")
    return RectTarget(center=center, radii=radii)


def hyperboloid_target(center, delta):
    center = tuple(float(c) for c in np.atleast_1d(center))
    delta = float(delta)
    if not 0 < delta < 1:
        raise ParameterRangeError("delta must lie in (0,1)")
    return HyperboloidTarget(center=center, delta=delta)


def contains(target, y):
    """Strict membership test; y may be a point or an (M, d) batch."""
    pts = np.atleast_2d(np.asarray(y, dtype=float))
    center = np.array(target.center)
    z = pts - center
    if isinstance(target, RectTarget):
        inside = (np.abs(z) < np.array(target.radii)).all(axis=1)
    else:
        inside = (np.abs(z) <= 1.0).all(axis=1)
        inside &= np.abs(z).prod(axis=1) < target.delta
    return inside if np.asarray(y).ndim > 1 else bool(inside[0])


def rect_volume(radii):
    """Unclipped volume of R(x, r): prod_i/2r_i."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0):
        raise ParameterRangeError("radii must be nonnegative")
    return float(np.prod(2.0 * radii))


def hyperboloid_ball_volume(r, delta, dim):
    """Lebesgue volume of B(x, r) cap H(x, delta) in the max norm."""
    if not 0 < delta < r < 1:
        raise ParameterRangeError("need 0 < delta < r < 1")
    if delta >= r ** dim:
        raise ParameterRangeError("need delta < r^d for a nonnegative log")
    lg = math.log(r ** dim / delta)
    total = sum(lg ** t / math.factorial(t) for t in range(dim))
    return (2.0 ** dim) * delta * total


@dataclass(frozen=True)
class VolumeBounds:
    upper: float
    lower: float
    lower_valid: bool | None
    formula_value: float | None
    within: bool | None


def hyperboloid_volume_bounds(delta, dim, r=None):
    """Upper bound d 2^d delta (-log delta)^(d-1) for the full hyperboloid and
    the ball-intersection lower bound delta (-log delta)^(d-1), the latter
    valid when r^d > sqrt(delta). The upper bound is a small-delta statement:
    it dominates the exact volume iff -log delta >= 1, i.e. delta <= 1/e."""
    if not 0 < delta < 1:
        raise ParameterRangeError("delta must lie in (0,1)")
    core = delta * (-math.log(delta)) ** (dim - 1)
    upper = dim * 2.0 ** dim * core
    lower = core
    if r is None:
        return VolumeBounds(upper=upper, lower=lower, lower_valid=None,
                            formula_value=None, within=None)
    value = hyperboloid_ball_volume(r, delta, dim)
    lower_valid = r ** dim > math.sqrt(delta)
    within = value <= upper and (not lower_valid or value >= lower)
    return VolumeBounds(upper=upper, lower=lower, lower_valid=lower_valid,
                        formula_value=value, within=within)


def hyperboloid_volume_mc(r, delta, dim, samples, seed, threads=None):
    """Monte Carlo oracle for hyperboloid_ball_volume; returns (value, stderr)."""
    box_volume = (2.0 * r) ** dim

    def one_chunk(j, m):
        gen = rng_mod.stream(seed, j)
        z = gen.uniform(-r, r, size=(m, dim))
        return int(np.count_nonzero(np.abs(z).prod(axis=1) < delta))

    counts = rng_mod.map_chunks(one_chunk, seed, samples, threads)
    hits = sum(counts)
    p = hits / samples
    return box_volume * p, box_volume * math.sqrt(max(p * (1 - p), 1e-300) / samples)


@dataclass(frozen=True)
class ContentEstimate:
    eps: float
    estimate: float
    stderr: float
    fraction: float


def minkowski_content_estimate(indicator, box, eps_list, samples, seed,
                               random_probes=32, threads=None):
    """Estimate vol(two-sided eps-neighbourhood of the boundary of A) / eps.

    `indicator` must map an (K, d) array to a boolean membership array and be
    total on the box inflated by max(eps). A sampled point counts as near the
    boundary when its probe set (3^d stencil of step eps plus `random_probes`
    uniform offsets in the eps-cube) contains both a member and a non-member.
    """
    box = np.asarray(box, dtype=float)
    d = box.shape[0]
    eps_arr = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_arr):
        raise ParameterRangeError("eps values must be positive")
    if any(b - a < e for e, (a, b) in product(eps_arr, box.tolist())):
        raise ParameterRangeError("box too small for the requested eps")
    lo = box[:, 0]
    span = box[:, 1] - box[:, 0]
    box_volume = float(np.prod(span))
    stencil = np.array(list(product((-1.0, 0.0, 1.0), repeat=d)))

    results = []
    for ei, eps in enumerate(eps_arr):
        def one_chunk(j, m, eps=eps, ei=ei):
            gen = rng_mod.stream(seed, (ei << 40) + j)
            x = lo + span * gen.uniform(size=(m, d))
            any_in = np.zeros(m, dtype=bool)
            any_out = np.zeros(m, dtype=bool)
            for off in stencil:
                member = indicator(x + eps * off)
                any_in |= member
                any_out |= ~member
            for _ in range(random_probes):
                member = indicator(x + gen.uniform(-eps, eps, size=(m, d)))
                any_in |= member
                any_out |= ~member
            return int(np.count_nonzero(any_in & any_out))

        counts = rng_mod.map_chunks(one_chunk, seed, samples, threads)
        hits = sum(counts)
        p = hits / samples
        se = math.sqrt(max(p * (1 - p), 1e-300) / samples)
        results.append(ContentEstimate(eps=eps, estimate=box_volume * p / eps,
                                       stderr=box_volume * se / eps, fraction=p))
    return results
