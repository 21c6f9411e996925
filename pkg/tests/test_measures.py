import math

import numpy as np
import pytest

from recurrence_lab import measures, rng
from recurrence_lab.errors import InfeasibleError, KindError, ParameterRangeError

PHI = (1 + math.sqrt(5)) / 2


def test_parry_doubling_is_lebesgue():
    p = measures.ParryBeta(2.0)
    xs = np.linspace(0, 0.999, 50)
    assert np.allclose(p.density(xs), 1.0, atol=1e-12)
    assert p.check_total_mass()


def test_parry_golden_two_plateaus():
    p = measures.ParryBeta(PHI)
    low = float(p.density(np.array([0.2]))[0])
    high = float(p.density(np.array([0.9]))[0])
    assert low / high == pytest.approx(PHI, rel=1e-12)
    # closed-form plateau values: normalizer 1 + phi^-2
    norm = 1 + PHI ** -2
    assert low == pytest.approx(PHI / norm, rel=1e-10)
    assert high == pytest.approx(1 / norm, rel=1e-10)


@pytest.mark.parametrize("beta", [2.5, PHI, math.e, 3.7])
def test_parry_total_mass(beta):
    assert measures.ParryBeta(beta).check_total_mass()


def test_parry_requires_beta_above_one():
    with pytest.raises(ParameterRangeError):
        measures.ParryBeta(-2.0)


def test_ulam_uniform_for_integer_beta():
    u = measures.ulam_density(2.0, 64)
    assert np.allclose(u.weights, 1 / 64, atol=1e-13)
    un = measures.ulam_density(-2.0, 64)
    assert np.allclose(un.weights, 1 / 64, atol=1e-13)


def test_ulam_matches_parry_where_it_converges():
    # the stationary vector converges to the closed form in L1 and away from
    # the forward orbit of the bin straddling the density discontinuity
    u = measures.ulam_density(PHI, 4096)
    p = measures.ParryBeta(PHI)
    edges = u.bin_edges()
    parry_avg = np.diff(p.axis_cdf(0, edges)) * u.bins
    diff = np.abs(parry_avg - u.weights * u.bins)
    assert diff.mean() < 1e-3
    assert np.quantile(diff, 0.99) < 0.01
    mid = (edges[:-1] + edges[1:]) / 2
    plateau = (np.abs(mid - 0.2) < 0.05) | (np.abs(mid - 0.9) < 0.05)
    assert diff[plateau].max() < 0.01


def test_measure_of_rect():
    leb2 = measures.Lebesgue(2)
    assert measures.measure_of_rect(leb2, [0.5, 0.5], [0.1, 0.1]) == pytest.approx(0.04)
    leb1 = measures.Lebesgue(1)
    assert measures.measure_of_rect(leb1, [0.05], [0.1]) == pytest.approx(0.15)
    assert measures.measure_of_rect(leb1, [0.05], [0.1], clip=False) == pytest.approx(0.2)

    u = measures.ulam_density(PHI, 4096)
    p = measures.ParryBeta(PHI)
    b = 1 / PHI
    got = float(u.axis_cdf(0, np.array([b]))[0])
    want = float(p.axis_cdf(0, np.array([b]))[0])
    assert abs(got - want) < 0.01


def test_product_model_factorizes():
    leb = measures.Lebesgue(1)
    p = measures.ParryBeta(PHI)
    prod = measures.ProductDensity([leb, p])
    center, radii = [0.3, 0.6], [0.05, 0.1]
    expect = (measures.measure_of_rect(leb, [0.3], [0.05])
              * measures.measure_of_rect(p, [0.6], [0.1]))
    assert measures.measure_of_rect(prod, center, radii) == expect


def test_scale_to_measure_examples():
    leb = measures.Lebesgue(2)
    res = measures.scale_to_measure(leb, [0.5, 0.5], [0.1, 0.1])
    assert res.scale == pytest.approx(0.5, abs=1e-10)
    assert res.residual < 1e-10

    leb1 = measures.Lebesgue(1)
    res0 = measures.scale_to_measure(leb1, [0.0], [0.1])
    assert res0.scale == pytest.approx(1.0, abs=1e-8)

    u = measures.ulam_density(PHI, 2048)
    res_u = measures.scale_to_measure(u, [0.3], [0.05])
    assert res_u.residual < 1e-10
    check = measures.measure_of_rect(u, [0.3], res_u.scaled_radii)
    assert abs(check - 0.05) < 1e-9


def test_scale_to_measure_preconditions():
    leb = measures.Lebesgue(1)
    with pytest.raises(ParameterRangeError):
        measures.scale_to_measure(leb, [0.5], [0.0])
    with pytest.raises(InfeasibleError):
        measures.scale_to_measure(measures.Lebesgue(2), [0.5, 0.5], [2.0, 2.0])


def test_rect_measure_monotone_in_scale():
    p = measures.ParryBeta(2.5)
    direction = np.array([0.07, ])
    scales = np.linspace(0.1, 6.0, 40)
    vals = [measures.measure_of_rect(p, [0.4], s * direction) for s in scales]
    assert np.all(np.diff(vals) >= -1e-15)


@pytest.mark.parametrize("model,beta", [
    ("lebesgue", 2.0),
    ("parry_phi", PHI),
    ("parry_25", 2.5),
    ("ulam_phi", PHI),
    ("ulam_neg2", -2.0),
])
def test_invariance(model, beta):
    built = {
        "lebesgue": lambda: measures.Lebesgue(1),
        "parry_phi": lambda: measures.ParryBeta(PHI),
        "parry_25": lambda: measures.ParryBeta(2.5),
        "ulam_phi": lambda: measures.ulam_density(PHI, 4096),
        "ulam_neg2": lambda: measures.ulam_density(-2.0, 4096),
    }[model]()
    gen = np.random.default_rng(1)
    pairs = np.sort(gen.uniform(0, 1, size=(50, 2)), axis=1)
    intervals = [(a, b) for a, b in pairs if b - a > 1e-3]
    assert max(measures.invariance_residuals(built, beta, intervals)) < 0.02


def test_sampling_matches_cdf():
    p = measures.ParryBeta(PHI)
    gen = rng.stream(3, 0)
    pts = p.sample(200_000, gen)[:, 0]
    for q in (0.2, 0.5, 0.618, 0.9):
        empirical = np.mean(pts <= q)
        assert abs(empirical - float(p.axis_cdf(0, np.array([q]))[0])) < 5e-3


def test_density_from_spec():
    leb = measures.density_from_spec({"kind": "lebesgue"}, map_dim=2)
    assert leb.dim == 2
    prod = measures.density_from_spec(
        {"kind": "product", "factors": [{"kind": "lebesgue"},
                                        {"kind": "parry", "beta": PHI}]})
    assert prod.dim == 2
    with pytest.raises(KindError):
        measures.density_from_spec({"kind": "nope"})


def test_lq_proxy_and_sup():
    p = measures.ParryBeta(PHI)
    assert p.lq_integral(1.0) == pytest.approx(1.0, abs=1e-9)
    assert p.lq_integral(2.0) > 1.0
    assert p.sup_density() == pytest.approx(PHI / (1 + PHI ** -2), rel=1e-10)
    assert p.inf_density() == pytest.approx(1 / (1 + PHI ** -2), rel=1e-10)


def test_ulam_total_mass_and_cdf_shape():
    u = measures.ulam_density(2.5, 512)
    assert u.check_total_mass()
    ys = np.linspace(0, 1, 200)
    cdf = u.axis_cdf(0, ys)
    assert np.all(np.diff(cdf) >= -1e-15)
    assert cdf[0] == 0.0 and cdf[-1] == pytest.approx(1.0, abs=1e-12)
