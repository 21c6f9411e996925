"""Backend parity: the compiled kernels and the numpy fallback must produce
bit-identical outputs on identical inputs."""

import numpy as np
import pytest

from recurrence_lab import _kernels_np as knp
from recurrence_lab import kernels, rng

compiled = pytest.importorskip("recurrence_lab._kernels")

PHI = (1 + 5 ** 0.5) / 2


def _inputs(d, n_points=3000, seed=0):
    gen = rng.stream(seed, 0)
    x = np.ascontiguousarray(gen.uniform(size=(n_points, d)))
    return x


@pytest.mark.parametrize("betas", [[2.0], [PHI], [-2.0], [2.0, PHI], [2.0, 3.0]])
def test_orbit_rect_hits_parity(betas):
    betas = np.array(betas)
    d = betas.size
    x = _inputs(d)
    nsteps = 300
    radii = np.ascontiguousarray(
        0.3 * np.arange(1, nsteps + 1, dtype=float)[:, None] ** -0.7
        * np.ones(d))
    win = np.full(nsteps, -1, dtype=np.int64)
    win[:100] = 0
    win[100:] = 1
    dither = np.ascontiguousarray(np.abs(betas) == np.round(np.abs(betas)),
                                  dtype=np.uint8)
    salt = rng.dither_salt(7, 3)
    a = compiled.orbit_rect_hits(x, betas, radii, win, 2, dither, salt)
    b = knp.orbit_rect_hits(x, betas, radii, win, 2, dither, salt)
    for arr_a, arr_b in zip(a, b):
        assert np.array_equal(np.asarray(arr_a), np.asarray(arr_b))


def test_orbit_hyp_hits_parity():
    betas = np.array([2.0, 2.5])
    x = _inputs(2, seed=5)
    deltas = np.ascontiguousarray(0.2 / np.arange(1, 201, dtype=float))
    win = np.zeros(200, dtype=np.int64)
    dither = np.ascontiguousarray([1, 0], dtype=np.uint8)
    salt = rng.dither_salt(1, 1)
    a = compiled.orbit_hyp_hits(x, betas, deltas, win, 1, dither, salt)
    b = knp.orbit_hyp_hits(x, betas, deltas, win, 1, dither, salt)
    for arr_a, arr_b in zip(a, b):
        assert np.array_equal(np.asarray(arr_a), np.asarray(arr_b))


def test_hits_at_n_parity():
    betas = np.array([-2.0])
    x = _inputs(1, seed=2)
    r = np.array([0.05])
    dither = np.array([1], dtype=np.uint8)
    salt = rng.dither_salt(2, 0)
    assert compiled.rect_hits_at_n(x, betas, 9, r, dither, salt) \
        == knp.rect_hits_at_n(x, betas, 9, r, dither, salt)
    assert compiled.hyp_hits_at_n(x, betas, 9, 0.05, dither, salt) \
        == knp.hyp_hits_at_n(x, betas, 9, 0.05, dither, salt)


def test_pair_counts_parity():
    betas = np.array([2.0])
    x = _inputs(1, seed=3)
    lo = np.array([0.0])
    hi = np.array([0.5])
    dither = np.array([1], dtype=np.uint8)
    salt = rng.dither_salt(3, 0)
    a = compiled.indicator_pair_counts(x, betas, 25, lo, hi, lo, hi, dither, salt)
    b = knp.indicator_pair_counts(x, betas, 25, lo, hi, lo, hi, dither, salt)
    assert a[0] == b[0]
    assert np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])


def test_advance_orbit_parity_and_step_offset():
    betas = np.array([2.0, PHI])
    dither = np.ascontiguousarray([1, 0], dtype=np.uint8)
    salt = rng.dither_salt(9, 0)
    x1 = _inputs(2, seed=9)
    x2 = x1.copy()
    compiled.advance_orbit(x1, betas, 40, dither, salt, 0)
    knp.advance_orbit(x2, betas, 40, dither, salt, 0)
    assert np.array_equal(x1, x2)
    # two 20-step calls with the right offset equal one 40-step call
    x3 = _inputs(2, seed=9)
    compiled.advance_orbit(x3, betas, 20, dither, salt, 0)
    compiled.advance_orbit(x3, betas, 20, dither, salt, 20)
    assert np.array_equal(x1, x3)


def test_dither_keeps_integer_orbits_alive():
    # undithered, the doubling map collapses every float to 0 by step 53
    x = _inputs(1, seed=4, n_points=500)
    dead = x.copy()
    kernels.advance_orbit(dead, np.array([2.0]), 60,
                          np.array([0], dtype=np.uint8), 0, 0)
    assert np.all(dead == 0.0)
    alive = x.copy()
    kernels.advance_orbit(alive, np.array([2.0]), 60,
                          np.array([1], dtype=np.uint8), rng.dither_salt(1, 0), 0)
    assert np.count_nonzero(alive) == alive.size
    # and the dither perturbation itself is far below any physical radius
    one_step = x.copy()
    kernels.advance_orbit(one_step, np.array([2.0]), 1,
                          np.array([1], dtype=np.uint8), rng.dither_salt(1, 0), 0)
    plain = 2.0 * x
    plain -= np.floor(plain)
    assert np.abs(one_step - plain).max() < 2.0 ** -47
