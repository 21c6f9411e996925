#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run twice, once per backend:

    python benchmarks/bench_kernels.py
    RECLAB_PURE=1 python benchmarks/bench_kernels.py

or pass --both to fork a subprocess for the other backend and print a
side-by-side table.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def run_cases():
    from recurrence_lab import kernels, maps, measures, recurrence

    m2 = maps.beta_map(2.0)
    mphi = maps.beta_map((1 + 5 ** 0.5) / 2)
    md = maps.diagonal_map([2.0, 4.0])
    leb1 = measures.Lebesgue(1)
    leb2 = measures.Lebesgue(2)
    results = {"backend": kernels.backend_name()}

    t0 = time.perf_counter()
    recurrence.run_dichotomy(m2, recurrence.power_law_schedule(0.1, [1.0]),
                             "rect", leb1, 10_000, 10_000, seed=1)
    results["dichotomy_1e4x1e4_beta2"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    recurrence.run_dichotomy(md, recurrence.power_law_schedule(0.2, [0.6, 0.6]),
                             "rect", leb2, 10_000, 5_000, seed=1)
    results["dichotomy_1e4x5e3_diag"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    recurrence.mc_en_measure(mphi, 12, 0.05, 1_000_000, seed=1)
    results["mc_en_1e6_phi_n12"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    from recurrence_lab import geometry
    f = geometry.rect_target([0.25], [0.25])
    recurrence.mixing_decay_estimate(m2, f, f, 20, 1_000_000, leb1, seed=1)
    results["mixing_1e6x20_beta2"] = time.perf_counter() - t0
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--both", action="store_true",
                        help="also run the other backend in a subprocess")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args()

    mine = run_cases()
    if args.json:
        print(json.dumps(mine))
        return
    rows = [mine]
    if args.both:
        env = dict(os.environ)
        if mine["backend"] == "compiled":
            env["RECLAB_PURE"] = "1"
        else:
            env.pop("RECLAB_PURE", None)
        out = subprocess.run([sys.executable, __file__, "--json"], env=env,
                             capture_output=True, text=True, check=True)
        rows.append(json.loads(out.stdout))

    names = [k for k in rows[0] if k != "backend"]
    width = max(len(n) for n in names) + 2
    header = "case".ljust(width) + "".join(f"{r['backend']:>12}" for r in rows)
    if len(rows) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        line = name.ljust(width) + "".join(f"{r[name]:>11.3f}s" for r in rows)
        if len(rows) == 2:
            line += f"{rows[1][name] / rows[0][name]:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
