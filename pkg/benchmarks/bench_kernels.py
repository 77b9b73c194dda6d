"""Compare the compiled kernel backend against the pure-Python fallback.

Measures raw kernel throughput on a mid-pipeline state and full end-to-end
circuit evaluations, then prints a small table.

    python3 benchmarks/bench_kernels.py [--quick]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from qiup import backend
from qiup.modes import intern_path
from qiup.observables import fringe_scan
from qiup.plan import fig1_preset, run_plan
from qiup.verification import regime_params

PARAMS = {
    "alpha1": 0.6, "beta1": 0.8, "gamma": 1.1,
    "alpha2": math.sqrt(1 - 0.49), "beta2": 0.7,
    "phi": 0.4, "theta": 0.9,
}


def representative_entries() -> dict:
    """A post-interferometer state (several dozen occupied mode pairs)."""
    state = run_plan(fig1_preset(PARAMS))
    return dict(state._entries)


def time_call(fn, repeats: int) -> float:
    samples = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        samples.append((time.perf_counter() - t0) / repeats)
    return min(samples)


def bench_backend(name: str, quick: bool) -> dict[str, float]:
    backend.set_backend(name)
    kernels = backend.kernels
    entries = representative_entries()
    root_half = 1.0 / math.sqrt(2.0)
    e_idx, f_idx = intern_path("e"), intern_path("f")
    out = {}

    reps = 2_000 if quick else 20_000
    out["slot_unitary"] = time_call(
        lambda: kernels.slot_unitary(entries, 0, f_idx, 0.6, -0.8, -0.8, -0.6, 1e-14),
        reps,
    )
    out["slot_bs2"] = time_call(
        lambda: kernels.slot_bs2(
            entries, 0, e_idx, f_idx, e_idx, f_idx,
            root_half, 1j * root_half, 1j * root_half, root_half, 1e-14,
        ),
        reps,
    )
    out["norm_sq"] = time_call(lambda: kernels.norm_sq(entries), reps)

    plan = fig1_preset(PARAMS)
    out["pipeline"] = time_call(lambda: run_plan(plan), 200 if quick else 1_000)

    grid = np.linspace(0, 2 * math.pi, 16 if quick else 64, endpoint=False)
    scan_plan = fig1_preset(regime_params(0.8, 0.0))
    out["fringe_scan/point"] = time_call(
        lambda: fringe_scan(scan_plan, "phi", grid), 2 if quick else 5
    ) / len(grid)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="fewer repetitions")
    args = parser.parse_args()

    names = backend.available_backends()
    if "compiled" not in names:
        print("note: compiled backend unavailable; benchmarking python only")
    results = {name: bench_backend(name, args.quick) for name in names}
    backend.set_backend(names[0])

    rows = list(next(iter(results.values())))
    width = max(len(r) for r in rows)
    header = f"{'benchmark':<{width}}" + "".join(f"  {n:>12}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for row in rows:
        line = f"{row:<{width}}"
        for name in names:
            line += f"  {results[name][row] * 1e6:>10.2f}us"
        if len(names) == 2:
            line += f"  {results['python'][row] / results['compiled'][row]:>7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
