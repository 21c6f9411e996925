"""Models of absolutely continuous invariant densities and their rectangle measures.

Four kinds are provided: exact Lebesgue, the classical closed-form density of
the beta-map for beta > 1 (a weighted sum of indicators along the orbit of 1),
a transfer-operator discretization on uniform bins whose transition weights
are computed exactly from the affine branches (works for negative beta too),
and coordinate products of these. All kinds expose per-axis CDFs, so rectangle
measures are CDF differences and sampling is inverse-CDF per coordinate;
non-product joint densities are out of scope.

`scale_to_measure` solves mu(R(x, l*r)) = prod_i r_i for l by bisection; the
measure is continuous and nondecreasing in l, so the solve always lands within
the residual tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import maps as maps_mod
from .errors import (ConvergenceError, InfeasibleError, KindError,
                     ParameterRangeError)

SCALE_RESIDUAL_TOL = 1e-10
SCALE_MAX_ITER = 200


class DensityModel:
    """Common interface: per-axis CDFs plus rectangle measures and sampling."""

    kind = "abstract"
    dim = 1
    density_sup = None

    def axis_cdf(self, axis, y):
        raise NotImplementedError

    def axis_inverse_cdf(self, axis, p):
        raise NotImplementedError

    def rect_measure(self, center, radii, clip=True):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        return float(self.rect_measure_batch(center[None, :], radii[None, :],
                                             clip=clip)[0])

    def rect_measure_batch(self, centers, radii, clip=True):
        """Measures of R(center_j, radii_j) intersected with the cube.

        With clip=False the density is extended by Lebesgue outside [0,1]^d,
        which reproduces the unclipped volume for the Lebesgue kind.
        """
        centers = np.asarray(centers, dtype=float)
        radii = np.asarray(radii, dtype=float)
        if radii.ndim == 1:
            radii = np.broadcast_to(radii, centers.shape)
        out = np.ones(centers.shape[0])
        for i in range(self.dim):
            lo = centers[:, i] - radii[:, i]
            hi = centers[:, i] + radii[:, i]
            part = (self.axis_cdf(i, np.clip(hi, 0.0, 1.0))
                    - self.axis_cdf(i, np.clip(lo, 0.0, 1.0)))
            if not clip:
                part = part + np.maximum(hi - 1.0, 0.0) + np.maximum(-lo, 0.0)
            out *= np.maximum(part, 0.0)
        return out

    def sample(self, count, gen):
        u = gen.uniform(size=(count, self.dim))
        out = np.empty_like(u)
        for i in range(self.dim):
            out[:, i] = self.axis_inverse_cdf(i, u[:, i])
        return np.clip(out, 0.0, np.nextafter(1.0, 0.0))

    def inf_density(self):
        """Infimum of the density over the cube; None when unknown."""
        return None

    def check_total_mass(self, tol=1e-9):
        full = self.rect_measure(np.full(self.dim, 0.5), np.full(self.dim, 0.5))
        return abs(full - 1.0) <= tol


class Lebesgue(DensityModel):
    kind = "lebesgue"

    def __init__(self, dim=1):
        if dim < 1:
            raise ParameterRangeError("dimension must be positive")
        self.dim = dim

    def axis_cdf(self, axis, y):
        return np.clip(np.asarray(y, dtype=float), 0.0, 1.0)

    def axis_inverse_cdf(self, axis, p):
        return np.asarray(p, dtype=float)

    def density(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def lq_integral(self, q, bins=None):
        return 1.0

    def inf_density(self):
        return 1.0


class ParryBeta(DensityModel):
    """Closed-form invariant density of the beta-map, beta > 1.

    h(x) is proportional to the sum of beta^(-k) over orbit points T^k(1)
    exceeding x, truncated at `n_max` terms; the normalizer integrates the
    resulting step function exactly. Negative beta has no such series and is
    served by the Ulam kind instead.
    """

    kind = "parry"

    def __init__(self, beta, n_max=200, density_sup=None):
        beta = float(beta)
        if beta <= 1.0:
            raise ParameterRangeError(
                "the closed-form density requires beta > 1; use the Ulam kind")
        self.beta = beta
        self.n_max = int(n_max)
        self.density_sup = density_sup
        points = []
        weights = []
        cur = 1.0
        w = 1.0
        for _ in range(self.n_max + 1):
            points.append(cur)
            weights.append(w)
            y = beta * cur
            cur = y - math.floor(y)
            w /= beta
            # orbits that truly terminate (frac(beta * t) an exact integer, as
            # for the golden or silver means) land within roundoff of 0 or 1
            # in floats; cut them there instead of tracking 200 noise points
            if cur < 1e-12 or cur > 1.0 - 1e-12:
                break
        pts = np.array(points)
        wts = np.array(weights)
        order = np.argsort(pts, kind="stable")
        self._t = pts[order]
        self._w = wts[order]
        self._cum_w = np.concatenate([[0.0], np.cumsum(self._w)])
        self._cum_wt = np.concatenate([[0.0], np.cumsum(self._w * self._t)])
        self._total_w = self._cum_w[-1]
        self._norm = float(self._cum_wt[-1])
        knots = np.unique(np.concatenate([[0.0, 1.0], self._t]))
        self._knots = knots
        self._knot_cdf = self._cdf_raw(knots)

    def _cdf_raw(self, y):
        y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
        idx = np.searchsorted(self._t, y, side="right")
        return (self._cum_wt[idx] + y * (self._total_w - self._cum_w[idx])) / self._norm

    def axis_cdf(self, axis, y):
        return self._cdf_raw(y)

    def axis_inverse_cdf(self, axis, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self._knot_cdf, p, side="right"),
                      1, len(self._knots) - 1)
        c0 = self._knot_cdf[idx - 1]
        c1 = self._knot_cdf[idx]
        k0 = self._knots[idx - 1]
        k1 = self._knots[idx]
        slope = np.where(c1 > c0, (k1 - k0) / np.maximum(c1 - c0, 1e-300), 0.0)
        return np.clip(k0 + (p - c0) * slope, 0.0, 1.0)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._t, x, side="right")
        return (self._total_w - self._cum_w[idx]) / self._norm

    def sup_density(self):
        return float(self.density(np.array([0.0]))[0])

    def inf_density(self):
        return float(self.density(np.array([np.nextafter(1.0, 0.0)]))[0])

    def lq_integral(self, q, bins=None):
        """Discrete proxy for the integral of h^q (exact for this step density)."""
        widths = np.diff(self._knots)
        mids = 0.5 * (self._knots[:-1] + self._knots[1:])
        return float(np.sum(self.density(mids) ** q * widths))


class UlamDensity(DensityModel):
    """Stationary vector of the exact-transition Ulam discretization."""

    kind = "ulam"

    def __init__(self, beta, weights, density_sup=None):
        self.beta = float(beta)
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ParameterRangeError("need at least two bins")
        if np.any(w < 0):
            raise ParameterRangeError("weights must be nonnegative")
        self.bins = w.size
        self.weights = w / w.sum()
        self._cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        self._cum[-1] = 1.0
        self.density_sup = density_sup

    def axis_cdf(self, axis, y):
        y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
        pos = y * self.bins
        idx = np.minimum(pos.astype(np.int64), self.bins - 1)
        return self._cum[idx] + (pos - idx) * self.weights[idx]

    def axis_inverse_cdf(self, axis, p):
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(self._cum, p, side="right") - 1,
                      0, self.bins - 1)
        w = self.weights[idx]
        frac = np.where(w > 0, (p - self._cum[idx]) / np.maximum(w, 1e-300), 0.0)
        return np.clip((idx + frac) / self.bins, 0.0, 1.0)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip((x * self.bins).astype(np.int64), 0, self.bins - 1)
        return self.weights[idx] * self.bins

    def sup_density(self):
        return float(self.weights.max() * self.bins)

    def inf_density(self):
        w_min = float(self.weights.min() * self.bins)
        return w_min if w_min > 0 else None

    def lq_integral(self, q, bins=None):
        return float(np.sum((self.weights * self.bins) ** q) / self.bins)

    def bin_edges(self):
        return np.arange(self.bins + 1) / self.bins

    def csv_rows(self):
        """(bin_left, bin_right, weight) rows for export."""
        edges = self.bin_edges()
        return [(float(edges[i]), float(edges[i + 1]), float(self.weights[i]))
                for i in range(self.bins)]


class ProductDensity(DensityModel):
    kind = "product"

    def __init__(self, factors, density_sup=None):
        if not factors:
            raise ParameterRangeError("product density needs at least one factor")
        for f in factors:
            if f.dim != 1:
                raise ParameterRangeError("product factors must be one-dimensional")
        self.factors = list(factors)
        self.dim = len(factors)
        self.density_sup = density_sup

    def axis_cdf(self, axis, y):
        return self.factors[axis].axis_cdf(0, y)

    def axis_inverse_cdf(self, axis, p):
        return self.factors[axis].axis_inverse_cdf(0, p)

    def inf_density(self):
        vals = [f.inf_density() for f in self.factors]
        if any(v is None for v in vals):
            return None
        total = 1.0
        for v in vals:
            total *= v
        return total


def ulam_transition_matrix(beta, bins):
    """Row-stochastic bin-transition matrix with exact affine-branch overlaps."""
    beta = float(beta)
    if abs(beta) <= 1.0:
        raise ParameterRangeError("expansion requires |beta| > 1")
    bounds, offsets = maps_mod.branch_maps(beta)
    edges = np.arange(bins + 1) / bins
    rows, cols, vals = [], [], []
    ab = abs(beta)
    for b_lo, b_hi, off in zip(bounds[:-1], bounds[1:], offsets):
        lo = np.maximum(edges[:-1], b_lo)
        hi = np.minimum(edges[1:], b_hi)
        mask = hi > lo
        if not mask.any():
            continue
        i = np.nonzero(mask)[0]
        y0 = beta * lo[mask] + off
        y1 = beta * hi[mask] + off
        y_lo = np.minimum(y0, y1)
        y_hi = np.maximum(y0, y1)
        first = np.floor(y_lo * bins).astype(np.int64)
        for o in range(int(math.ceil(ab)) + 1):
            j = first + o
            overlap = (np.minimum(y_hi, (j + 1) / bins)
                       - np.maximum(y_lo, j / bins))
            keep = (overlap > 0) & (j >= 0) & (j < bins)
            if keep.any():
                rows.append(i[keep])
                cols.append(j[keep])
                # x-length of the preimage divided by the bin width 1/B
                vals.append(overlap[keep] / ab * bins)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(bins, bins))
    return mat.tocsr()


def ulam_density(beta, bins, tol=1e-12, max_iter=100000, density_sup=None):
    """Invariant density estimate: left fixed vector of the Ulam matrix."""
    if bins < 2:
        raise ParameterRangeError("need at least two bins")
    mat = ulam_transition_matrix(beta, bins)
    w = np.full(bins, 1.0 / bins)
    for _ in range(max_iter):
        w_next = np.asarray(w @ mat).ravel()
        w_next /= w_next.sum()
        change = np.abs(w_next - w).sum()
        w = w_next
        if change < tol:
            return UlamDensity(beta=beta, weights=w, density_sup=density_sup)
    raise ConvergenceError("Ulam power iteration did not converge", residual=change)


def density_from_spec(spec, map_dim=None):
    """Build a density model from its JSON description."""
    kind = spec.get("kind")
    sup = spec.get("density_sup")
    if kind == "lebesgue":
        return Lebesgue(dim=int(spec.get("dim", map_dim or 1)))
    if kind == "parry":
        return ParryBeta(spec["beta"], n_max=int(spec.get("n_max", 200)),
                         density_sup=sup)
    if kind == "ulam":
        return ulam_density(spec["beta"], int(spec["bins"]), density_sup=sup)
    if kind == "product":
        factors = [density_from_spec(f) for f in spec["factors"]]
        return ProductDensity(factors, density_sup=sup)
    raise KindError(f"unknown density kind {kind!r}")


def measure_of_rect(model, center, radii, clip=True):
    return model.rect_measure(center, radii, clip=clip)


@dataclass(frozen=True)
class ScaleResult:
    scale: float
    scaled_radii: np.ndarray
    residual: float
    target: float


def scale_to_measure(model, center, radii):
    """Scale factor l with mu(R(center, l*radii) cap cube) = prod_i radii_i."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    scale, residual, target = _scale_batch(model, center[None, :], radii)
    return ScaleResult(scale=float(scale[0]), scaled_radii=float(scale[0]) * radii,
                       residual=float(residual[0]), target=target)


def scale_factors_batch(model, centers, radii):
    """Vectorized scale_to_measure over many centers (shared radii vector)."""
    scale, residual, _ = _scale_batch(model, centers, radii)
    return scale, residual


def _scale_batch(model, centers, radii):
    target = float(np.prod(radii))
    if target <= 0.0:
        raise ParameterRangeError("radii product must be positive")
    if target > 1.0:
        raise InfeasibleError("target measure exceeds the total mass of the cube")
    m = centers.shape[0]
    hi = np.ones(m)
    for _ in range(64):
        grow = model.rect_measure_batch(centers, hi[:, None] * radii) < target
        if not grow.any():
            break
        hi[grow] *= 2.0
    else:
        raise InfeasibleError("target measure unreachable inside the cube")
    lo = np.zeros(m)
    mid = 0.5 * hi
    residual = np.full(m, np.inf)
    for _ in range(SCALE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        val = model.rect_measure_batch(centers, mid[:, None] * radii)
        residual = val - target
        if np.all(np.abs(residual) <= SCALE_RESIDUAL_TOL):
            break
        low = residual < 0
        lo = np.where(low, mid, lo)
        hi = np.where(low, hi, mid)
    return mid, np.abs(residual), target


def pushforward_interval_measure(model, beta, lo, hi):
    """mu(T^{-1} [lo, hi)) computed from exact branch preimages (1-d)."""
    bounds, offsets = maps_mod.branch_maps(beta)
    total = 0.0
    for b_lo, b_hi, off in zip(bounds[:-1], bounds[1:], offsets):
        x0 = (lo - off) / beta
        x1 = (hi - off) / beta
        seg_lo = max(min(x0, x1), b_lo)
        seg_hi = min(max(x0, x1), b_hi)
        if seg_hi > seg_lo:
            total += float(model.axis_cdf(0, seg_hi) - model.axis_cdf(0, seg_lo))
    return total


def invariance_residuals(model, beta, intervals):
    """|mu(T^{-1} I) - mu(I)| over a list of intervals; small iff the model
    approximates the map's invariant measure."""
    out = []
    for lo, hi in intervals:
        direct = float(model.axis_cdf(0, hi) - model.axis_cdf(0, lo))
        pulled = pushforward_interval_measure(model, beta, lo, hi)
        out.append(abs(pulled - direct))
    return out
