# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: orbit advancement and hit counting for diagonal maps.

Same contracts as ``_kernels_np``; both backends perform identical float64
operations in identical order, so their outputs agree bit for bit. Loops run
with the time step outermost and points innermost: each point's orbit is a
serial dependency chain, so batching across points is what keeps the
pipeline full.

Axes whose expansion factor is an exact integer get a counter-based dither
of amplitude 2^-48 injected after each step: integer multiplication sheds
mantissa bits (the float orbit of the doubling map hits 0 after 53 steps),
and for a uniform starting point the shed bits are i.i.d., so replenishing
them reproduces the true joint law of (x, T^n x) while perturbing the orbit
ten orders of magnitude below any target radius in use.
"""

import numpy as np

from libc.math cimport floor
from libc.stdint cimport uint64_t

cdef double DITHER = 3.944304526105059e-31  # 2^-101: (mix >> 11) spans [0, 2^53)

cdef uint64_t C_POINT = 0xD1342543DE82EF95ULL
cdef uint64_t C_STEP = 0x9E3779B97F4A7C15ULL
cdef uint64_t C_AXIS = 0xA24BAED4963EE407ULL


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef void _advance_step(double[:, ::1] z, double[::1] betas,
                        unsigned char[::1] dither, uint64_t salt,
                        uint64_t n) nogil:
    """One map step for every point; dithered axes get their shed bits back."""
    cdef Py_ssize_t m = z.shape[0], d = z.shape[1]
    cdef Py_ssize_t p, i
    cdef double y, b
    cdef uint64_t base
    for i in range(d):
        b = betas[i]
        for p in range(m):
            y = b * z[p, i]
            z[p, i] = y - floor(y)
        if dither[i]:
            base = salt + n * C_STEP + (<uint64_t>i) * C_AXIS
            for p in range(m):
                y = z[p, i] + <double>(_mix(base + (<uint64_t>p) * C_POINT) >> 11) * DITHER
                z[p, i] = y - floor(y)


def orbit_rect_hits(double[:, ::1] x0, double[::1] betas,
                    double[:, ::1] radii, long long[::1] win_of_n,
                    int n_windows, unsigned char[::1] dither, uint64_t salt):
    """Iterate each point through n = 1..N and record rectangle self-hits.

    Returns (hits_per_n[N], window_any[M, n_windows], per_point[M]).
    """
    cdef Py_ssize_t m = x0.shape[0], d = x0.shape[1], nsteps = radii.shape[0]
    cdef Py_ssize_t p, n, i
    cdef double diff
    cdef bint hit
    cdef long long w, count

    hits_np = np.zeros(nsteps, dtype=np.int64)
    win_np = np.zeros((m, n_windows if n_windows > 0 else 1), dtype=np.uint8)
    tot_np = np.zeros(m, dtype=np.int64)
    z_np = np.array(x0, copy=True)
    cdef long long[::1] hits = hits_np
    cdef unsigned char[:, ::1] win = win_np
    cdef long long[::1] tot = tot_np
    cdef double[:, ::1] z = z_np

    with nogil:
        for n in range(nsteps):
            _advance_step(z, betas, dither, salt, n)
            w = win_of_n[n]
            count = 0
            for p in range(m):
                hit = True
                for i in range(d):
                    diff = z[p, i] - x0[p, i]
                    if diff < 0:
                        diff = -diff
                    if diff >= radii[n, i]:
                        hit = False
                        break
                if hit:
                    count += 1
                    tot[p] += 1
                    if w >= 0:
                        win[p, w] = 1
            hits[n] = count
    return hits_np, win_np[:, :n_windows], tot_np


def orbit_hyp_hits(double[:, ::1] x0, double[::1] betas,
                   double[::1] deltas, long long[::1] win_of_n,
                   int n_windows, unsigned char[::1] dither, uint64_t salt):
    """Hyperboloid variant: a hit at step n is prod_i |T^n x_i - x_i| < delta_n."""
    cdef Py_ssize_t m = x0.shape[0], d = x0.shape[1], nsteps = deltas.shape[0]
    cdef Py_ssize_t p, n, i
    cdef double diff, prod
    cdef long long w, count

    hits_np = np.zeros(nsteps, dtype=np.int64)
    win_np = np.zeros((m, n_windows if n_windows > 0 else 1), dtype=np.uint8)
    tot_np = np.zeros(m, dtype=np.int64)
    z_np = np.array(x0, copy=True)
    cdef long long[::1] hits = hits_np
    cdef unsigned char[:, ::1] win = win_np
    cdef long long[::1] tot = tot_np
    cdef double[:, ::1] z = z_np

    with nogil:
        for n in range(nsteps):
            _advance_step(z, betas, dither, salt, n)
            w = win_of_n[n]
            count = 0
            for p in range(m):
                prod = 1.0
                for i in range(d):
                    diff = z[p, i] - x0[p, i]
                    if diff < 0:
                        diff = -diff
                    prod *= diff
                if prod < deltas[n]:
                    count += 1
                    tot[p] += 1
                    if w >= 0:
                        win[p, w] = 1
            hits[n] = count
    return hits_np, win_np[:, :n_windows], tot_np


def rect_hits_at_n(double[:, ::1] x, double[::1] betas, int n,
                   double[::1] radii, unsigned char[::1] dither, uint64_t salt):
    """Count points with T^n x inside the rectangle of per-axis radii around x."""
    cdef Py_ssize_t m = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t p, k, i
    cdef double diff
    cdef bint hit
    cdef long long count = 0
    z_np = np.array(x, copy=True)
    cdef double[:, ::1] z = z_np
    with nogil:
        for k in range(n):
            _advance_step(z, betas, dither, salt, k)
        for p in range(m):
            hit = True
            for i in range(d):
                diff = z[p, i] - x[p, i]
                if diff < 0:
                    diff = -diff
                if diff >= radii[i]:
                    hit = False
                    break
            if hit:
                count += 1
    return count


def hyp_hits_at_n(double[:, ::1] x, double[::1] betas, int n, double delta,
                  unsigned char[::1] dither, uint64_t salt):
    cdef Py_ssize_t m = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t p, k, i
    cdef double diff, prod
    cdef long long count = 0
    z_np = np.array(x, copy=True)
    cdef double[:, ::1] z = z_np
    with nogil:
        for k in range(n):
            _advance_step(z, betas, dither, salt, k)
        for p in range(m):
            prod = 1.0
            for i in range(d):
                diff = z[p, i] - x[p, i]
                if diff < 0:
                    diff = -diff
                prod *= diff
            if prod < delta:
                count += 1
    return count


def indicator_pair_counts(double[:, ::1] x, double[::1] betas, int nmax,
                          double[::1] f_lo, double[::1] f_hi,
                          double[::1] g_lo, double[::1] g_hi,
                          unsigned char[::1] dither, uint64_t salt):
    """Joint indicator counts for the correlation estimator.

    Returns (count_F, count_G[n], count_FG[n]) for n = 1..nmax, where F is
    tested at time 0 and G along the orbit; all boundaries are strict.
    """
    cdef Py_ssize_t m = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t p, n, i
    cdef bint g
    cdef long long n_f = 0

    ng_np = np.zeros(nmax, dtype=np.int64)
    nfg_np = np.zeros(nmax, dtype=np.int64)
    f_np = np.zeros(m, dtype=np.uint8)
    z_np = np.array(x, copy=True)
    cdef long long[::1] n_g = ng_np
    cdef long long[::1] n_fg = nfg_np
    cdef unsigned char[::1] f = f_np
    cdef double[:, ::1] z = z_np

    with nogil:
        for p in range(m):
            f[p] = 1
            for i in range(d):
                if not (f_lo[i] < x[p, i] < f_hi[i]):
                    f[p] = 0
                    break
            if f[p]:
                n_f += 1
        for n in range(nmax):
            _advance_step(z, betas, dither, salt, n)
            for p in range(m):
                g = True
                for i in range(d):
                    if not (g_lo[i] < z[p, i] < g_hi[i]):
                        g = False
                        break
                if g:
                    n_g[n] += 1
                    if f[p]:
                        n_fg[n] += 1
    return n_f, ng_np, nfg_np


def advance_orbit(double[:, ::1] x, double[::1] betas, int n,
                  unsigned char[::1] dither, uint64_t salt, uint64_t step0):
    """Apply the diagonal map n times in place; step0 offsets the dither
    counter so consecutive calls continue one orbit."""
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            _advance_step(x, betas, dither, salt, step0 + <uint64_t>k)
