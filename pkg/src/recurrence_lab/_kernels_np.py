"""Pure-numpy fallback for the compiled kernels.

Vectorized over points with a python loop over time steps. Operation order
matches ``_kernels.pyx`` exactly (multiply, floor-subtract, dither,
floor-subtract), so the two backends produce bit-identical results. See the
compiled module for why integer-factor axes are dithered.
"""

import numpy as np

DITHER = 3.944304526105059e-31  # 2^-101

_MASK = (1 << 64) - 1
_C_POINT = 0xD1342543DE82EF95
_C_STEP = 0x9E3779B97F4A7C15
_C_AXIS = 0xA24BAED4963EE407
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class _Walker:
    """Shared orbit-advance state (dither counters are scalar python ints)."""

    def __init__(self, x, dither, salt, copy=True):
        self.z = x.copy() if copy else x
        self.idx_mul = np.arange(x.shape[0], dtype=np.uint64) * np.uint64(_C_POINT)
        self.axes = [int(i) for i in np.nonzero(np.asarray(dither, dtype=bool))[0]]
        self.salt = int(salt) & _MASK

    def step(self, betas, n):
        z = self.z
        z *= betas
        z -= np.floor(z)
        if self.axes:
            base = np.uint64((self.salt + int(n) * _C_STEP) & _MASK) + self.idx_mul
            for i in self.axes:
                m = _mix(base + np.uint64((i * _C_AXIS) & _MASK))
                z[:, i] += (m >> np.uint64(11)).astype(np.float64) * DITHER
            z -= np.floor(z)


def orbit_rect_hits(x0, betas, radii, win_of_n, n_windows, dither, salt):
    m = x0.shape[0]
    nsteps = radii.shape[0]
    hits = np.zeros(nsteps, dtype=np.int64)
    win = np.zeros((m, n_windows), dtype=np.uint8)
    tot = np.zeros(m, dtype=np.int64)
    walker = _Walker(x0, dither, salt)
    for n in range(nsteps):
        walker.step(betas, n)
        hit = (np.abs(walker.z - x0) < radii[n]).all(axis=1)
        hits[n] = np.count_nonzero(hit)
        tot += hit
        w = win_of_n[n]
        if w >= 0:
            win[:, w] |= hit
    return hits, win, tot


def orbit_hyp_hits(x0, betas, deltas, win_of_n, n_windows, dither, salt):
    m = x0.shape[0]
    nsteps = deltas.shape[0]
    hits = np.zeros(nsteps, dtype=np.int64)
    win = np.zeros((m, n_windows), dtype=np.uint8)
    tot = np.zeros(m, dtype=np.int64)
    walker = _Walker(x0, dither, salt)
    for n in range(nsteps):
        walker.step(betas, n)
        hit = np.abs(walker.z - x0).prod(axis=1) < deltas[n]
        hits[n] = np.count_nonzero(hit)
        tot += hit
        w = win_of_n[n]
        if w >= 0:
            win[:, w] |= hit
    return hits, win, tot


def rect_hits_at_n(x, betas, n, radii, dither, salt):
    walker = _Walker(x, dither, salt)
    for k in range(n):
        walker.step(betas, k)
    hit = (np.abs(walker.z - x) < radii).all(axis=1)
    return int(np.count_nonzero(hit))


def hyp_hits_at_n(x, betas, n, delta, dither, salt):
    walker = _Walker(x, dither, salt)
    for k in range(n):
        walker.step(betas, k)
    hit = np.abs(walker.z - x).prod(axis=1) < delta
    return int(np.count_nonzero(hit))


def indicator_pair_counts(x, betas, nmax, f_lo, f_hi, g_lo, g_hi, dither, salt):
    f = ((x > f_lo) & (x < f_hi)).all(axis=1)
    n_f = int(np.count_nonzero(f))
    n_g = np.zeros(nmax, dtype=np.int64)
    n_fg = np.zeros(nmax, dtype=np.int64)
    walker = _Walker(x, dither, salt)
    for n in range(nmax):
        walker.step(betas, n)
        g = ((walker.z > g_lo) & (walker.z < g_hi)).all(axis=1)
        n_g[n] = np.count_nonzero(g)
        n_fg[n] = np.count_nonzero(f & g)
    return n_f, n_g, n_fg


def advance_orbit(x, betas, n, dither, salt, step0):
    walker = _Walker(x, dither, salt, copy=False)
    for k in range(n):
        walker.step(betas, int(step0) + k)
