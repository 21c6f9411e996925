"""Piecewise-affine expanding self-maps of [0,1)^d and exact cylinder enumeration.

Three map kinds are supported: the scalar beta-map x -> frac(beta*x) with
|beta| > 1, diagonal products of beta-maps, and integer-matrix maps
x -> frac(A x) with all eigenvalue moduli > 1. The domain is the half-open
cube so that the fractional part is total; this differs from the closed cube
only on a Lebesgue-null set.

For 1-d beta-maps the intervals of monotonicity of T^n ("cylinders of order
n") are enumerated exactly by refining order-(n-1) cylinders against affine
branch preimages; no root finding is involved. Endpoints are computed in
double precision, so each carries a relative error of order n*|beta|^n*eps,
far below cylinder widths at the enumeration scales this module guards.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, KindError, OverflowGuardError, ParameterRangeError

BETA = "beta"
DIAGONAL = "diagonal"
INTEGER_MATRIX = "integer_matrix"

SLOPE_LOG_GUARD = 700.0
MAX_CYLINDERS = 1 << 25
EIGEN_TOL = 1e-9

# Refinement cuts land within a few eps of the true endpoints (the branch
# intercept error grows like eps*|beta|^n but is divided back by the slope),
# so mathematically-empty slivers have width ~1e-16 while true cylinders at
# the enumeration guard stay wider than ~1e-12; this threshold separates
# them with two orders of margin on each side.
_WIDTH_TOL = 1e-13


@dataclass(frozen=True)
class ExpandingMap:
    """Immutable description of one expanding map; operations are pure."""

    kind: str
    dimension: int
    beta: float | None = None
    betas: tuple | None = None
    matrix: tuple | None = None
    expansion_L: float = 0.0

    def betas_array(self):
        if self.kind == BETA:
            return np.array([self.beta], dtype=float)
        if self.kind == DIAGONAL:
            return np.array(self.betas, dtype=float)
        raise KindError(f"{self.kind} map has no per-axis expansion factors")

    def matrix_array(self):
        if self.kind != INTEGER_MATRIX:
            raise KindError(f"{self.kind} map has no matrix")
        return np.array(self.matrix, dtype=float)


def beta_map(beta):
    beta = float(beta)
    if abs(beta) <= 1.0:
        raise ParameterRangeError(f"expansion requires |beta| > 1, got {beta}")
    return ExpandingMap(kind=BETA, dimension=1, beta=beta, expansion_L=abs(beta))


def diagonal_map(betas):
    betas = tuple(float(b) for b in betas)
    if not betas:
        raise ParameterRangeError("diagonal map needs at least one factor")
    for b in betas:
        if abs(b) <= 1.0:
            raise ParameterRangeError(f"expansion requires |beta_i| > 1, got {b}")
    return ExpandingMap(kind=DIAGONAL, dimension=len(betas), betas=betas,
                        expansion_L=min(abs(b) for b in betas))


def integer_matrix_map(rows):
    a = np.array(rows, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterRangeError("matrix must be square")
    if not np.all(a == np.round(a)):
        raise ParameterRangeError("matrix entries must be integers")
    moduli = np.abs(np.linalg.eigvals(a))
    if moduli.min() <= 1.0 + EIGEN_TOL:
        raise ParameterRangeError(
            f"all eigenvalue moduli must exceed 1 (min modulus {moduli.min():.12g})")
    # The pointwise expansion constant is the smallest singular value; for a
    # non-normal matrix it can dip below 1 even though iterates expand, in
    # which case the eigenvalue modulus is the honest lower bound.
    sigma_min = np.linalg.svd(a, compute_uv=False).min()
    expansion = sigma_min if sigma_min > 1.0 else float(moduli.min())
    d = a.shape[0]
    return ExpandingMap(kind=INTEGER_MATRIX, dimension=d,
                        matrix=tuple(tuple(int(v) for v in row) for row in a),
                        expansion_L=float(expansion))


def map_from_spec(spec):
    """Build a map from its JSON description."""
    kind = spec.get("kind")
    if kind == BETA:
        return beta_map(spec["beta"])
    if kind == DIAGONAL:
        return diagonal_map(spec["betas"])
    if kind == INTEGER_MATRIX:
        return integer_matrix_map(spec["rows"])
    raise KindError(f"unknown map kind {kind!r}")


def _check_domain(pts, d):
    pts = np.asarray(pts, dtype=float)
    size = pts.shape[-1] if pts.ndim > 1 else pts.size
    if size != d:
        raise DomainError(f"expected points of dimension {d}")
    if np.any(pts < 0.0) or np.any(pts >= 1.0):
        raise DomainError("coordinates must lie in [0,1)")
    return pts


def _frac(y):
    return y - np.floor(y)


def apply(m, x):
    """One step of the map. Accepts a scalar (d=1) or a length-d point."""
    scalar = np.isscalar(x) and m.dimension == 1
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    pts = _check_domain(pts, m.dimension)
    if m.kind in (BETA, DIAGONAL):
        out = _frac(m.betas_array() * pts)
    else:
        out = _frac(m.matrix_array() @ pts)
    return float(out[0]) if scalar else out


def apply_batch(m, pts):
    """Vectorized step for an (M, d) array of points (no domain check)."""
    if m.kind in (BETA, DIAGONAL):
        return _frac(pts * m.betas_array())
    return _frac(pts @ m.matrix_array().T)


def iterate(m, x, n):
    """Orbit segment (x, Tx, ..., T^n x) as an (n+1, d) array, or (n+1,) for d=1."""
    if n < 0:
        raise ParameterRangeError("iteration count must be >= 0")
    scalar = np.isscalar(x) and m.dimension == 1
    pts = _check_domain(np.atleast_1d(np.asarray(x, dtype=float)), m.dimension)
    orbit = np.empty((n + 1, m.dimension))
    orbit[0] = pts
    for k in range(n):
        orbit[k + 1] = apply_batch(m, orbit[k][None, :])[0]
    return orbit[:, 0] if scalar else orbit


def branch_maps(beta):
    """Affine branches of the 1-d beta-map.

    Returns (bounds, offsets): on the open interval (bounds[j], bounds[j+1])
    the map is x -> beta*x + offsets[j], with image inside [0,1). The left
    endpoints map to 0 under frac when beta < 0; that measure-zero
    disagreement with the affine form is irrelevant to every interval
    computation here.
    """
    ab = abs(beta)
    count = math.ceil(ab)
    bounds = np.array([k / ab for k in range(count)] + [1.0])
    if beta > 0:
        offsets = np.array([-float(k) for k in range(count)])
    else:
        offsets = np.array([float(k + 1) for k in range(count)])
    return bounds, offsets


def base_partition(m):
    """Ordered branch intervals of a beta-map: [k/|beta|, (k+1)/|beta|) and a
    final partial interval when |beta| is not an integer."""
    if m.kind != BETA:
        raise KindError("base_partition is defined for beta-maps only")
    bounds, _ = branch_maps(m.beta)
    return [(float(bounds[j]), float(bounds[j + 1])) for j in range(len(bounds) - 1)]


@dataclass(frozen=True)
class Cylinder:
    """Maximal interval [left, right) on which T^n is affine.

    On the open interior, T^n x = slope*x + intercept with the value already
    inside [0,1); slope = beta^n carries the orientation sign.
    """

    order: int
    left: float
    right: float
    slope: float
    intercept: float
    word: tuple

    @property
    def length(self):
        return self.right - self.left


@dataclass
class CylinderSet:
    """Array-backed family of all order-n cylinders of one beta-map."""

    beta: float
    order: int
    left: np.ndarray
    right: np.ndarray
    intercept: np.ndarray
    slope: float
    words: np.ndarray | None = None

    @property
    def count(self):
        return self.left.size

    def lengths(self):
        return self.right - self.left

    def to_cylinders(self):
        out = []
        for i in range(self.count):
            word = tuple(int(v) for v in self.words[i]) if self.words is not None else ()
            out.append(Cylinder(order=self.order, left=float(self.left[i]),
                                right=float(self.right[i]), slope=self.slope,
                                intercept=float(self.intercept[i]), word=word))
        return out


def _guard_order(beta, n):
    if n < 1:
        raise ParameterRangeError("cylinder order must be >= 1")
    if n * math.log(abs(beta)) >= SLOPE_LOG_GUARD:
        raise OverflowGuardError(
            f"|beta|^n overflows doubles (n*log|beta| = {n * math.log(abs(beta)):.1f})")


def _refine(left, right, intercept, slope, beta, bounds, offsets, words):
    """One refinement level: split each cylinder along branch-bound preimages.

    Cut points are shared between adjacent children, so child widths
    telescope exactly to the parent width.
    """
    n_branches = len(offsets)
    n_par = left.size
    cuts = np.empty((n_par, n_branches + 1))
    cuts[:, 0] = left
    cuts[:, n_branches] = right
    if slope > 0:
        for j in range(1, n_branches):
            cuts[:, j] = np.clip((bounds[j] - intercept) / slope, left, right)
        digit_of_col = np.arange(n_branches)
    else:
        # decreasing image: ascending x meets the branches in reverse order
        for j in range(1, n_branches):
            cuts[:, j] = np.clip((bounds[n_branches - j] - intercept) / slope,
                                 left, right)
        digit_of_col = np.arange(n_branches - 1, -1, -1)

    lo = cuts[:, :-1]
    hi = cuts[:, 1:]
    keep = (hi - lo) > _WIDTH_TOL
    total = int(np.count_nonzero(keep))
    if total > MAX_CYLINDERS:
        raise OverflowGuardError(f"cylinder count {total} exceeds enumeration guard")

    flat = keep.ravel()
    new_left = lo.ravel()[flat]
    new_right = hi.ravel()[flat]
    digits = np.tile(digit_of_col, n_par)[flat]
    parent_idx = np.repeat(np.arange(n_par), n_branches)[flat]
    new_intercept = beta * intercept[parent_idx] + offsets[digits]
    new_words = None
    if words is not None:
        new_words = np.concatenate(
            [words[parent_idx], digits[:, None].astype(words.dtype)], axis=1)
    return new_left, new_right, new_intercept, beta * slope, new_words


def cylinder_arrays(beta, n, track_words=False):
    """All order-n cylinders of the beta-map, as arrays sorted by left endpoint."""
    beta = float(beta)
    if abs(beta) <= 1.0:
        raise ParameterRangeError(f"expansion requires |beta| > 1, got {beta}")
    _guard_order(beta, n)
    bounds, offsets = branch_maps(beta)
    left = np.array([0.0])
    right = np.array([1.0])
    intercept = np.array([0.0])
    slope = 1.0
    words = np.empty((1, 0), dtype=np.uint16) if track_words else None
    for _ in range(n):
        left, right, intercept, slope, words = _refine(
            left, right, intercept, slope, beta, bounds, offsets, words)
    return CylinderSet(beta=beta, order=n, left=left, right=right,
                       intercept=intercept, slope=slope, words=words)


def cylinders(m, n):
    """Order-n cylinders of a beta-map as Cylinder objects with symbol words."""
    if m.kind != BETA:
        raise KindError("cylinders are enumerated for beta-maps only")
    return cylinder_arrays(m.beta, n, track_words=True).to_cylinders()


@dataclass(frozen=True)
class EntropyCheck:
    count: int
    bound: float
    passed: bool
    entropy_rate: float


def entropy_count_check(m, n, eps):
    """Compare the order-n cylinder count N_n against |beta|^(n(1+eps)).

    The bound holds for all sufficiently large n; small n can legitimately
    fail, which the returned flag reports. entropy_rate = log(N_n)/n.
    """
    if m.kind != BETA:
        raise KindError("entropy counts are defined for beta-maps only")
    if eps <= 0:
        raise ParameterRangeError("eps must be positive")
    count = cylinder_arrays(m.beta, n).count
    bound = abs(m.beta) ** (n * (1.0 + eps))
    return EntropyCheck(count=count, bound=bound, passed=count <= bound,
                        entropy_rate=math.log(count) / n)
