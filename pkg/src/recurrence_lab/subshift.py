"""Full-cylinder Markov subsystems of beta-maps.

A block length m is fixed and the branches are the order-m cylinders mapped
by T^m onto all of [0,1); closing them under composition yields a genuinely
full subshift whose attractor is a homogeneous self-similar set with
similarity dimension log(#branches)/(m log beta). The construction starts at
the block length m0 = ceil((1 + log 8)/(eps log beta)) and grows m until the
dimension reaches 1 - eps (it stays there for integer beta immediately,
where every cylinder is full and the attractor is the whole interval).

The uniform Bernoulli measure on the branch tree is queried by exact mass
counting: bulk sub-branches inside a ball are counted per level, only the
two boundary pieces descend, so a query costs O(#branches * depth).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import dimension as dim_mod
from . import maps as maps_mod
from . import rng as rng_mod
from .errors import (ConstructionError, KindError, OverflowGuardError,
                     ParameterRangeError)

# Full-cylinder lengths agree with |beta|^-m up to the accumulated endpoint
# error (measured ~2e-11 relative at m = 22 for the golden mean), while the
# nearest non-full length sits a fixed fraction away; 1e-9 splits the two
# populations with wide margins.
FULL_LENGTH_RTOL = 1e-9


@dataclass
class FullSubshift:
    """Branches of T^m that map onto [0,1), with the uniform branch measure."""

    beta: float
    block_length: int
    count: int
    delta: float
    epsilon: float | None = None
    lefts: np.ndarray | None = None  # sorted; None for the integer-beta grid

    @property
    def width(self):
        return abs(self.beta) ** -self.block_length

    @property
    def is_grid(self):
        return self.lefts is None

    def branch_lefts(self):
        if self.is_grid:
            return np.arange(self.count) * self.width
        return self.lefts

    def min_branch_gap(self):
        """Smallest spacing between consecutive branch left endpoints."""
        lefts = self.branch_lefts()
        if lefts.size < 2:
            return 1.0
        return float(np.diff(lefts).min())

    def to_dict(self):
        return {"beta": self.beta, "block_length": self.block_length,
                "branch_count": self.count, "delta": self.delta,
                "epsilon": self.epsilon}


def full_cylinders(m, order):
    """Order-n cylinders mapped by T^n onto the whole of [0,1).

    Filters the full enumeration by length |beta|^(-order) up to a relative
    tolerance; every full cylinder has exactly that length.
    """
    if m.kind != maps_mod.BETA:
        raise KindError("full cylinders are enumerated for beta-maps only")
    cs = maps_mod.cylinder_arrays(m.beta, order, track_words=True)
    width = abs(m.beta) ** -order
    mask = np.abs(cs.lengths() - width) <= FULL_LENGTH_RTOL * width
    out = []
    for i in np.nonzero(mask)[0]:
        out.append(maps_mod.Cylinder(
            order=order, left=float(cs.left[i]), right=float(cs.right[i]),
            slope=cs.slope, intercept=float(cs.intercept[i]),
            word=tuple(int(v) for v in cs.words[i])))
    return out


def _full_lefts(beta, order):
    cs = maps_mod.cylinder_arrays(beta, order)
    width = abs(beta) ** -order
    mask = np.abs(cs.lengths() - width) <= FULL_LENGTH_RTOL * width
    return np.sort(cs.left[mask])


def build_full_subshift(beta, epsilon, max_block_length=None):
    """Grow the block length until the similarity dimension reaches 1 - eps.

    Starts at m0 = ceil((1 + log 8)/(eps log beta)). Whether non-integer
    betas reach the threshold exactly at m0 is not guaranteed, so the block
    length is increased until the target holds or the enumeration guard
    trips, in which case the best dimension achieved is reported.
    """
    beta = float(beta)
    if beta <= 1.0:
        raise ParameterRangeError("the full-cylinder construction needs beta > 1")
    if not 0 < epsilon < 1:
        raise ParameterRangeError("epsilon must lie in (0,1)")
    log_beta = math.log(beta)
    m0 = math.ceil((1.0 + math.log(8.0)) / (epsilon * log_beta))
    integer = beta == round(beta)
    best = None
    m = m0
    while True:
        if max_block_length is not None and m > max_block_length:
            raise ConstructionError(
                f"no block length <= {max_block_length} reaches delta >= {1 - epsilon}",
                best=best)
        if integer:
            # every cylinder is full: delta = 1 exactly, no enumeration needed
            return FullSubshift(beta=beta, block_length=m,
                                count=round(beta) ** m, delta=1.0,
                                epsilon=epsilon)
        try:
            lefts = _full_lefts(beta, m)
        except OverflowGuardError as exc:
            raise ConstructionError(
                f"enumeration guard hit at block length {m}", best=best) from exc
        if lefts.size == 0:
            m += 1
            continue
        delta = math.log(lefts.size) / (m * log_beta)
        candidate = FullSubshift(beta=beta, block_length=m, count=int(lefts.size),
                                 delta=delta, epsilon=epsilon, lefts=lefts)
        if best is None or delta > best.delta:
            best = candidate
        if delta >= 1.0 - epsilon - 1e-15:
            return candidate
        m += 1


def ball_mass(sub, x, r, extra_depth=2):
    """nu(B(x, r)) for the uniform branch measure, by exact tree counting.

    The tree is truncated at depth ceil(log r / (-m log beta)) + extra_depth;
    pieces still straddling a ball endpoint there are counted as inside,
    which overestimates by at most two piece masses.
    """
    if sub.is_grid:
        # uniform branching over the full grid is Lebesgue at every depth
        return max(0.0, min(x + r, 1.0) - max(x - r, 0.0))
    scale = sub.width  # contraction ratio per tree level
    depth = max(1, math.ceil(math.log(r) / math.log(scale)) + extra_depth)
    k = sub.count
    lefts = sub.lefts
    lo, hi = x - r, x + r
    mass = 0.0
    stack = [(0.0, 1.0, 0)]  # (piece left, piece width, level)
    while stack:
        a, w, q = stack.pop()
        if a >= hi or a + w <= lo:
            continue
        if (a >= lo and a + w <= hi) or q >= depth:
            mass += k ** -float(q)
            continue
        child_l = a + w * lefts
        child_w = w * scale
        i_lo = np.searchsorted(child_l + child_w, lo, side="right")
        i_hi = np.searchsorted(child_l, hi, side="left")
        c_lo = np.searchsorted(child_l, lo, side="left")
        c_hi = np.searchsorted(child_l + child_w, hi, side="right")
        c_lo = max(c_lo, i_lo)
        c_hi = min(c_hi, i_hi)
        if c_hi > c_lo:
            mass += (c_hi - c_lo) * k ** -float(q + 1)
        for j in range(i_lo, min(c_lo, i_hi)):
            stack.append((child_l[j], child_w, q + 1))
        for j in range(max(c_hi, i_lo), i_hi):
            stack.append((child_l[j], child_w, q + 1))
    return mass


def sample_attractor(sub, count, gen, depth=None):
    """Points of the attractor: left endpoints of uniformly random deep pieces."""
    if sub.is_grid:
        return gen.uniform(size=count)
    if depth is None:
        depth = max(2, math.ceil(52 * math.log(2) / (-math.log(sub.width))) + 1)
    pts = np.zeros(count)
    w = 1.0
    for _ in range(depth):
        digits = gen.integers(0, sub.count, size=count)
        pts += w * sub.lefts[digits]
        w *= sub.width
    return pts


@dataclass
class AhlforsReport:
    lower: float   # empirical a = min nu(B)/r^delta
    upper: float   # empirical b = max nu(B)/r^delta
    ratio: float
    passed: bool
    radii: list
    per_radius: list  # (r, min ratio, max ratio)

    def to_dict(self):
        return {"a": self.lower, "b": self.upper, "ratio": self.ratio,
                "passed": self.passed,
                "per_radius": [{"r": r, "min": lo, "max": hi}
                               for r, lo, hi in self.per_radius]}


def ahlfors_check(sub, radii, samples, seed, ratio_cap=1e3):
    """Empirical Ahlfors-regularity bracket a r^delta <= nu(B(x,r)) <= b r^delta.

    Samples attractor points (plus both extreme points), evaluates the exact
    branch-tree mass of each ball, and reports the extremal ratios; passes
    when b/a stays below the cap over the whole radius list.
    """
    radii = [float(r) for r in radii]
    gap = sub.min_branch_gap()
    if any(not 0 < r < gap for r in radii):
        raise ParameterRangeError(
            f"radii must lie in (0, {gap:g}), the minimal branch spacing")
    gen = rng_mod.stream(seed, 0)
    pts = sample_attractor(sub, samples, gen)
    # include both extreme attractor points: 0 and the fixed point of the
    # rightmost branch composed with itself
    left_max = float(sub.branch_lefts().max())
    rightmost = min(left_max / (1.0 - sub.width), 1.0)
    pts = np.concatenate([pts, [0.0, rightmost]])
    per_radius = []
    lo_all, hi_all = math.inf, -math.inf
    for r in radii:
        ratios = np.array([ball_mass(sub, float(x), r) for x in pts]) / r ** sub.delta
        per_radius.append((r, float(ratios.min()), float(ratios.max())))
        lo_all = min(lo_all, per_radius[-1][1])
        hi_all = max(hi_all, per_radius[-1][2])
    ratio = hi_all / lo_all if lo_all > 0 else math.inf
    return AhlforsReport(lower=lo_all, upper=hi_all, ratio=ratio,
                         passed=ratio <= ratio_cap, radii=radii,
                         per_radius=per_radius)


@dataclass
class MtpBound:
    value: float
    theta_value: float
    gap: float

    def to_dict(self):
        return {"bound": self.value, "theta_min": self.theta_value,
                "gap": self.gap}


def mtp_dimension_bound(subshifts, t):
    """Dimension lower bound from per-coordinate subshifts: evaluates the
    mass-transference exponent at u = (1-eps) log beta_k, v = u + t with the
    subshift dimensions as Ahlfors exponents, and reports the gap to the
    closed-form value (the eps -> 0, delta -> 1 limit)."""
    if not subshifts:
        raise ParameterRangeError("need one subshift per coordinate")
    eps_set = {s.epsilon for s in subshifts}
    if len(eps_set) != 1 or None in eps_set:
        raise ParameterRangeError("subshifts must share a construction epsilon")
    eps = subshifts[0].epsilon
    betas = np.array([s.beta for s in subshifts])
    deltas = np.array([s.delta for s in subshifts])
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = (1.0 - eps) * np.log(np.abs(betas))
    v = u + t
    value, _ = dim_mod.mtp_min(deltas, u, v)
    theta_value = float(dim_mod.theta(betas, t).min())
    return MtpBound(value=value, theta_value=theta_value,
                    gap=theta_value - value)
