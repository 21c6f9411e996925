import math

import numpy as np
import pytest

from recurrence_lab import maps
from recurrence_lab.errors import (DomainError, KindError, OverflowGuardError,
                                   ParameterRangeError)

PHI = (1 + math.sqrt(5)) / 2


def test_apply_examples():
    assert maps.apply(maps.beta_map(2.0), 0.25) == 0.5
    assert maps.apply(maps.beta_map(-2.0), 0.3) == pytest.approx(0.4, abs=1e-15)
    out = maps.apply(maps.diagonal_map([2.0, 3.0]), [0.5, 0.5])
    assert np.allclose(out, [0.0, 0.5])


def test_apply_domain_errors():
    m = maps.beta_map(2.0)
    with pytest.raises(DomainError):
        maps.apply(m, 1.0)
    with pytest.raises(DomainError):
        maps.apply(m, -0.1)
    with pytest.raises(DomainError):
        maps.apply(maps.diagonal_map([2.0, 2.0]), [0.5, 1.0])


def test_construction_guards():
    with pytest.raises(ParameterRangeError):
        maps.beta_map(0.9)
    with pytest.raises(ParameterRangeError):
        maps.beta_map(-1.0)
    with pytest.raises(ParameterRangeError):
        maps.diagonal_map([2.0, 1.0])
    with pytest.raises(ParameterRangeError):
        maps.integer_matrix_map([[1, 1], [0, 1]])  # eigenvalues 1, 1
    with pytest.raises(ParameterRangeError):
        maps.integer_matrix_map([[2, 1], [1, 1]])  # one eigenvalue inside the disk
    m = maps.integer_matrix_map([[0, -2], [1, 0]])  # complex pair, modulus sqrt(2)
    assert m.expansion_L == pytest.approx(math.sqrt(2), abs=1e-9)


def test_iterate_examples():
    orbit = maps.iterate(maps.beta_map(2.0), 1 / 3, 4)
    assert np.allclose(orbit, [1 / 3, 2 / 3, 1 / 3, 2 / 3, 1 / 3], atol=1e-12)
    assert np.all(maps.iterate(maps.beta_map(2.0), 0.0, 3) == 0.0)
    orbit2 = maps.iterate(maps.diagonal_map([2.0, 2.0]), [0.0, 1 / 3], 2)
    assert np.allclose(orbit2, [[0, 1 / 3], [0, 2 / 3], [0, 1 / 3]], atol=1e-12)


def test_base_partition():
    assert maps.base_partition(maps.beta_map(2.0)) == [(0.0, 0.5), (0.5, 1.0)]
    parts = maps.base_partition(maps.beta_map(2.5))
    assert np.allclose(parts, [(0, 0.4), (0.4, 0.8), (0.8, 1.0)])
    assert maps.base_partition(maps.beta_map(-2.0)) == [(0.0, 0.5), (0.5, 1.0)]
    with pytest.raises(KindError):
        maps.base_partition(maps.diagonal_map([2.0, 2.0]))


def test_cylinder_counts_and_lengths():
    cyls = maps.cylinders(maps.beta_map(2.0), 3)
    assert len(cyls) == 8
    assert all(c.length == pytest.approx(1 / 8, rel=1e-12) for c in cyls)

    cyls_phi = maps.cylinders(maps.beta_map(PHI), 2)
    assert len(cyls_phi) == 3
    assert sorted(c.word for c in cyls_phi) == [(0, 0), (0, 1), (1, 0)]

    lengths = sorted(c.length for c in maps.cylinders(maps.beta_map(2.5), 1))
    assert np.allclose(lengths, [0.2, 0.4, 0.4])


def test_cylinder_count_matches_fibonacci_for_golden_mean():
    fib = [1, 1]
    for _ in range(20):
        fib.append(fib[-1] + fib[-2])
    for n in (1, 4, 8, 12):
        assert maps.cylinder_arrays(PHI, n).count == fib[n + 1]


def test_cylinder_overflow_guard():
    with pytest.raises(OverflowGuardError):
        maps.cylinder_arrays(2.0, 1200)  # slope overflow
    with pytest.raises(OverflowGuardError):
        maps.cylinder_arrays(2.0, 40)  # count guard
    with pytest.raises(ParameterRangeError):
        maps.cylinder_arrays(2.0, 0)


@pytest.mark.parametrize("beta", [2.0, 2.5, PHI, -2.0])
def test_cylinder_affinity(beta):
    # T^n on each cylinder equals slope*x + intercept, already in [0,1)
    offsets = np.array([0.17, 0.35, 0.5, 0.68, 0.83])
    for n in range(1, 13):
        cs = maps.cylinder_arrays(beta, n)
        xs = (cs.left[:, None] + (cs.right - cs.left)[:, None] * offsets).ravel()
        z = xs.copy()
        for _ in range(n):
            z = beta * z
            z -= np.floor(z)
        affine = cs.slope * xs + np.repeat(cs.intercept, offsets.size)
        assert affine.min() >= 0.0 and affine.max() < 1.0
        assert np.abs(z - affine).max() < 1e-10


@pytest.mark.parametrize("beta", [2.0, 2.5, PHI, -2.0])
def test_cylinder_partition_property(beta):
    for n in (1, 5, 9, 12):
        cs = maps.cylinder_arrays(beta, n)
        assert abs(cs.lengths().sum() - 1.0) < 1e-12
        assert np.all(cs.left[1:] >= cs.right[:-1] - 1e-15)  # disjoint, ordered
        assert cs.left[0] == 0.0 and cs.right[-1] >= 1.0 - 1e-12
        assert np.all(cs.lengths() <= abs(beta) ** -n * (1 + 1e-9))


@pytest.mark.parametrize("beta", [2.5, PHI, -2.0])
def test_monotone_refinement(beta):
    for n in (1, 3, 6):
        parent = maps.cylinder_arrays(beta, n)
        child = maps.cylinder_arrays(beta, n + 1)
        idx = np.searchsorted(parent.left, child.left, side="right") - 1
        assert np.all(idx >= 0)
        assert np.all(child.left >= parent.left[idx] - 1e-14)
        assert np.all(child.right <= parent.right[idx] + 1e-14)


def test_diagonal_consistency():
    gen = np.random.default_rng(0)
    pts = gen.uniform(size=(1000, 2))
    md = maps.diagonal_map([2.5, -2.0])
    joint = maps.apply_batch(md, pts)
    for i, b in enumerate((2.5, -2.0)):
        single = maps.apply_batch(maps.beta_map(b), pts[:, i:i + 1])
        assert np.array_equal(joint[:, i], single[:, 0])


def test_orbit_containment():
    gen = np.random.default_rng(42)
    for m in (maps.beta_map(2.0), maps.beta_map(PHI), maps.beta_map(-2.5),
              maps.diagonal_map([2.0, 3.5]),
              maps.integer_matrix_map([[3, 1], [1, 2]]),
              maps.integer_matrix_map([[0, -2], [1, 0]])):
        pts = gen.uniform(size=(20_000, m.dimension))
        for _ in range(5):
            pts = maps.apply_batch(m, pts)
            assert pts.min() >= 0.0 and pts.max() < 1.0


def test_entropy_count_check():
    chk = maps.entropy_count_check(maps.beta_map(2.0), 10, 0.01)
    assert chk.count == 1024 and chk.passed
    assert chk.bound == pytest.approx(2 ** 10.1, rel=1e-12)

    chk_phi = maps.entropy_count_check(maps.beta_map(PHI), 10, 0.1)
    assert chk_phi.count == 144 and chk_phi.passed

    # small n can legitimately fail the asymptotic bound
    chk_small = maps.entropy_count_check(maps.beta_map(PHI), 1, 0.001)
    assert chk_small.count == 2 and not chk_small.passed
    assert chk_small.bound == pytest.approx(PHI ** 1.001, rel=1e-12)


def test_map_from_spec():
    m = maps.map_from_spec({"kind": "beta", "beta": 2.0})
    assert m.kind == "beta" and m.expansion_L == 2.0
    m2 = maps.map_from_spec({"kind": "diagonal", "betas": [2.0, 3.0]})
    assert m2.dimension == 2
    m3 = maps.map_from_spec({"kind": "integer_matrix", "rows": [[2, 0], [0, 3]]})
    assert m3.expansion_L == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(KindError):
        maps.map_from_spec({"kind": "unknown"})
