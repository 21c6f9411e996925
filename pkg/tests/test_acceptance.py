"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Every tolerance is pinned here; nothing is deferred to later calibration.
Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import json
import math
import time

import numpy as np
import pytest

from recurrence_lab import (cli, dimension, geometry, maps, measures,
                            recurrence, subshift)

PHI = (1 + math.sqrt(5)) / 2
LOG2 = math.log(2)


def _line(num, name, ok, detail, t0):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num:02d} {name}: {status} ({detail}; "
          f"{time.perf_counter() - t0:.1f}s)")


def test_criterion_01_exact_en_identity():
    t0 = time.perf_counter()
    m2 = maps.beta_map(2.0)
    values = {n: recurrence.exact_en_measure(m2, n, 0.1) for n in range(1, 21)}
    deviations = {n: abs(v - 0.2) for n, v in values.items()}
    ok = all(dev <= 1e-12 for dev in deviations.values())
    runtime_ok = time.perf_counter() - t0 < 5.0
    worst = max(deviations, key=deviations.get)
    _line(1, "exact-recurrence-measure-identity", ok and runtime_ok,
          f"max |E_n - 0.2| = {deviations[worst]:.3e} at n={worst}", t0)
    assert runtime_ok
    assert ok, (
        "the 2r identity holds only while r <= |beta|^-n (n <= 3 at r=0.1); "
        f"measured values: {[round(values[n], 6) for n in range(1, 21)]}")


def test_criterion_02_mc_vs_exact():
    t0 = time.perf_counter()
    worst = 0.0
    for beta in (2.0, PHI, 2.5, -2.0):
        m = maps.beta_map(beta)
        for n in (3, 8, 12):
            exact = recurrence.exact_en_measure(m, n, 0.05)
            est, se = recurrence.mc_en_measure(m, n, 0.05, 1_000_000, seed=2026)
            worst = max(worst, abs(est - exact) / se)
    ok = worst <= 3.0 and time.perf_counter() - t0 < 60.0
    _line(2, "monte-carlo-vs-exact", ok, f"worst deviation {worst:.2f} sigma", t0)
    assert ok


def test_criterion_03_hyperboloid_volume():
    t0 = time.perf_counter()
    exact = geometry.hyperboloid_ball_volume(0.5, 0.0625, 2)
    val, se = geometry.hyperboloid_volume_mc(0.5, 0.0625, 2, 10_000_000,
                                             seed=99, threads=4)
    rel = abs(val - exact) / exact
    worst = 0.0
    gen = np.random.default_rng(314)
    for i in range(20):
        d = int(gen.integers(1, 4))
        r = float(gen.uniform(0.3, 0.95))
        delta = float(r ** d * gen.uniform(0.05, 0.8))
        formula = geometry.hyperboloid_ball_volume(r, delta, d)
        mc, mc_se = geometry.hyperboloid_volume_mc(r, delta, d, 10_000_000,
                                                   seed=1000 + i, threads=4)
        worst = max(worst, abs(mc - formula) / mc_se)
    ok = (rel <= 0.01 and worst <= 3.0
          and abs(exact - 0.59657) < 5e-5
          and time.perf_counter() - t0 < 120.0)
    _line(3, "hyperboloid-volume-formula", ok,
          f"pinned case {rel * 100:.3f}% off, tuples worst {worst:.2f} sigma", t0)
    assert ok


def test_criterion_04_dichotomy_contrast():
    t0 = time.perf_counter()
    m2 = maps.beta_map(2.0)
    leb = measures.Lebesgue(1)
    horizon = 10_000

    divergent = recurrence.run_dichotomy(
        m2, recurrence.power_law_schedule(0.1, [1.0]), "rect", leb,
        10_000, horizon, seed=41)
    div_fracs = [w["fraction"] for w in divergent.windows
                 if w["complete"] and w["lo"] >= 64]
    div_ok = all(f >= 0.05 for f in div_fracs)

    convergent = recurrence.run_dichotomy(
        m2, recurrence.power_law_schedule(1.0, [1.5]), "rect", leb,
        10_000, horizon, seed=41)
    conv_ok = convergent.half_tail_fraction <= 0.023

    ok = (div_ok and conv_ok
          and divergent.classification.verdict == "divergent"
          and convergent.classification.verdict == "convergent"
          and time.perf_counter() - t0 < 600.0)
    _line(4, "dichotomy-contrast", ok,
          f"divergent windows min {min(div_fracs):.3f} (need >= 0.05), "
          f"convergent tail {convergent.half_tail_fraction:.4f} (need <= 0.023)",
          t0)
    assert ok


def test_criterion_05_dimension_formula():
    t0 = time.perf_counter()
    checks = [
        abs(dimension.theta([2.0, 4.0], [0.0, 0.0]).min() - 2.0),
        abs(dimension.theta([2.0], [LOG2])[0] - 0.5),
        abs(dimension.theta([2.0, 4.0], [LOG2, LOG2]).min() - 4 / 3),
    ]
    gen = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        d = int(gen.integers(1, 5))
        betas = gen.uniform(1.1, 9.0, size=d) * gen.choice([-1, 1], size=d)
        t = gen.uniform(0.0, 2.0, size=d)
        t[gen.uniform(size=d) < 0.25] = 0.0
        u = np.log(np.abs(betas))
        for i in range(d):
            worst = max(worst, abs(
                dimension.theta_components(betas, t, i).value
                - dimension.mtp_exponent(np.ones(d), u, u + t, i)))
    elapsed = time.perf_counter() - t0
    ok = max(checks) <= 1e-12 and worst <= 1e-12 and elapsed < 1.0
    _line(5, "dimension-formula", ok,
          f"hand cases {max(checks):.1e}, consistency {worst:.1e}", t0)
    assert ok


def test_criterion_06_cover_critical_exponent():
    t0 = time.perf_counter()
    grid = np.arange(0.30, 1.21, 0.005)
    exp_sched = recurrence.beta_power_schedule([1.0], [2.0])
    s1 = dimension.cover_critical_exponent([2.0], exp_sched, (10, 18), grid).s_star
    poly = recurrence.power_law_schedule(1.0, [2.0])
    s2 = dimension.cover_critical_exponent([2.0], poly, (10, 400), grid).s_star
    ok = (abs(s1 - 0.5) <= 0.05 and abs(s2 - 1.0) <= 0.1
          and time.perf_counter() - t0 < 30.0)
    _line(6, "cover-critical-exponent", ok,
          f"s*(2^-n) = {s1:.3f} (theory 0.5), s*(n^-2) = {s2:.3f} (theory 1.0)",
          t0)
    assert ok


def test_criterion_07_parry_ulam_agreement():
    t0 = time.perf_counter()
    u = measures.ulam_density(PHI, 10_000)
    p = measures.ParryBeta(PHI)
    parry_avg = np.diff(p.axis_cdf(0, u.bin_edges())) * u.bins
    sup = float(np.abs(parry_avg - u.weights * u.bins).max())
    sup_ok = sup < 0.01

    gen = np.random.default_rng(1)
    pairs = np.sort(gen.uniform(0, 1, size=(50, 2)), axis=1)
    intervals = [(a, b) for a, b in pairs if b - a > 1e-3]
    resid = max(measures.invariance_residuals(u, PHI, intervals))
    resid_ok = resid < 0.02

    ok = sup_ok and resid_ok and time.perf_counter() - t0 < 60.0
    _line(7, "parry-ulam-agreement", ok,
          f"density sup {sup:.3f} (need < 0.01), invariance {resid:.2e}", t0)
    assert resid_ok
    assert sup_ok, (
        "the exact-transition discretization keeps an O(1) boundary layer on "
        "the forward orbit of the bin straddling the density jump at 1/phi; "
        f"sup = {sup:.3f} concentrated there while the L1 error is "
        f"{float(np.abs(parry_avg - u.weights * u.bins).mean()):.1e}")


def test_criterion_08_mixing_estimator():
    t0 = time.perf_counter()
    m2 = maps.beta_map(2.0)
    leb = measures.Lebesgue(1)
    f = geometry.rect_target([0.25], [0.25])
    rep2 = recurrence.mixing_decay_estimate(m2, f, f, 20, 1_000_000, leb, seed=3)
    indep_ok = bool(np.all(rep2.correlations <= rep2.noise_floor))

    mphi = maps.beta_map(PHI)
    parry = measures.ParryBeta(PHI)
    g = geometry.rect_target([1 / (2 * PHI)], [1 / (2 * PHI)])
    taus = []
    for seed in (3, 4):
        rep = recurrence.mixing_decay_estimate(mphi, g, g, 20, 1_000_000,
                                               parry, seed=seed)
        taus.append(rep.fit_tau)
    phi_ok = (all(t is not None and t > 0 for t in taus)
              and abs(taus[0] - taus[1]) / (0.5 * (taus[0] + taus[1])) <= 0.5)

    ok = indep_ok and phi_ok and time.perf_counter() - t0 < 120.0
    _line(8, "mixing-estimator", ok,
          f"doubling all below floor: {indep_ok}, "
          f"phi taus {taus[0]:.3f}/{taus[1]:.3f}", t0)
    assert ok


def test_criterion_09_subshift_construction():
    t0 = time.perf_counter()
    sub3 = subshift.build_full_subshift(3.0, 0.2)
    m0_ok = sub3.block_length == 15 and sub3.delta == 1.0
    subp = subshift.build_full_subshift(PHI, 0.3)
    phi_ok = subp.delta >= 0.7

    ratio_worst = 0.0
    for beta in (2.0, 3.0):
        grid_sub = subshift.FullSubshift(beta=beta, block_length=1,
                                         count=int(beta), delta=1.0,
                                         epsilon=0.2)
        rep = subshift.ahlfors_check(
            grid_sub, [1e-4, 3e-4, 1e-3, 3e-3, 1e-2], 60, seed=12)
        ratio_worst = max(ratio_worst, rep.ratio)
    ahlfors_ok = ratio_worst <= 4.0

    ok = m0_ok and phi_ok and ahlfors_ok and time.perf_counter() - t0 < 60.0
    _line(9, "subshift-construction", ok,
          f"m0 = {sub3.block_length}, delta(3) = {sub3.delta}, "
          f"delta(phi) = {subp.delta:.3f}, b/a = {ratio_worst:.2f}", t0)
    assert ok


def test_criterion_10_sandwich_property():
    t0 = time.perf_counter()
    gen = np.random.default_rng(2718)
    betas_pool = [2.0, 2.5, PHI, -2.0]
    leb1 = measures.Lebesgue(1)
    leb2 = measures.Lebesgue(2)
    violations = 0
    for i in range(20):
        d = 1 if i % 2 == 0 else 2
        mode = ("rect", "scaled", "hyperboloid")[i % 3]
        betas = [betas_pool[int(gen.integers(len(betas_pool)))] for _ in range(d)]
        m = maps.beta_map(betas[0]) if d == 1 else maps.diagonal_map(betas)
        n = int(gen.integers(2, 7))
        center = gen.uniform(0.15, 0.85, size=d)
        radii = gen.uniform(0.03, 0.08, size=d)
        rho = float(radii.min()) * float(gen.uniform(0.1, 0.45))
        if mode == "hyperboloid":
            res = recurrence.sandwich_check(
                m, center, rho / 2 ** d, n, delta_n=float(gen.uniform(0.02, 0.08)),
                probes=10_000, seed=100 + i, mode=mode)
        elif mode == "scaled":
            res = recurrence.sandwich_check(
                m, center, rho, n, radii_n=radii, probes=10_000,
                seed=100 + i, mode=mode, density=leb1 if d == 1 else leb2)
        else:
            res = recurrence.sandwich_check(m, center, rho, n, radii_n=radii,
                                            probes=10_000, seed=100 + i)
        violations += res.inner_violations + res.outer_violations
    ok = violations == 0 and time.perf_counter() - t0 < 60.0
    _line(10, "sandwich-inclusions", ok,
          f"{violations} counterexamples over 20 configs x 1e4 probes", t0)
    assert ok


def test_criterion_11_minkowski_boundary_bound():
    t0 = time.perf_counter()
    gen = np.random.default_rng(55)
    bound = 4 * 2 + 8 / (1 - 0.5)  # 4d + K/(1 - L^-(d-1)) = 24
    box = [[-0.05, 1.05], [-0.05, 1.05]]
    worst = 0.0
    for i in range(20):
        n = int(gen.integers(1, 5))
        cs = maps.cylinder_arrays(2.0, n)
        pick = gen.integers(0, cs.count, size=2)
        cyl_lo = cs.left[pick]
        cyl_hi = cs.right[pick]
        icpt = cs.intercept[pick]
        slope = cs.slope
        # anchor both rectangles on an interior point of the cylinder block
        # and its forward image so the intersection is never empty
        anchor = cyl_lo + (cyl_hi - cyl_lo) * gen.uniform(0.3, 0.7, size=2)
        image = slope * anchor + icpt
        r1 = np.stack([anchor - gen.uniform(0.05, 0.4, size=2),
                       anchor + gen.uniform(0.05, 0.4, size=2)], axis=1)
        r2 = np.stack([image - gen.uniform(0.05, 0.4, size=2),
                       image + gen.uniform(0.05, 0.4, size=2)], axis=1)

        def indicator(pts, cyl_lo=cyl_lo, cyl_hi=cyl_hi, icpt=icpt,
                      slope=slope, r1=r1, r2=r2):
            inside = np.ones(len(pts), dtype=bool)
            for ax in range(2):
                x = pts[:, ax]
                img = slope * x + icpt[ax]
                inside &= (x >= cyl_lo[ax]) & (x < cyl_hi[ax])
                inside &= (x > r1[ax, 0]) & (x < r1[ax, 1])
                inside &= (img > r2[ax, 0]) & (img < r2[ax, 1])
            return inside

        est = geometry.minkowski_content_estimate(
            indicator, box, [1e-3], samples=300_000, seed=700 + i,
            threads=4)[0]
        worst = max(worst, est.estimate)
    ok = worst < bound and time.perf_counter() - t0 < 120.0
    _line(11, "minkowski-boundary-bound", ok,
          f"largest estimate {worst:.2f} vs bound {bound}", t0)
    assert ok


def test_criterion_12_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = {
        "experiment": "dichotomy", "seed": 7,
        "map": {"kind": "beta", "beta": 2.0},
        "density": {"kind": "lebesgue"}, "target": "rect",
        "schedule": {"kind": "power_law", "c": 0.1, "a": [1.0]},
        "samples": 2000, "horizon": 500,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    bodies = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / f"{name}.json"
        assert cli.main(["run", "--config", str(path), "--out", str(out),
                         "--threads", threads]) == 0
        bodies.append((tmp_path / f"{name}.series.csv").read_bytes())
    ok = bodies[0] == bodies[1] == bodies[2]
    _line(12, "byte-identical-reruns", ok,
          f"{len(bodies[0])} CSV bytes across reruns and thread counts", t0)
    assert ok
