"""Benchmark the series kernels: numba backend vs the numpy fallback.

The backend is fixed at import time by PHERM_DISABLE_NUMBA, so this script
re-runs itself in a subprocess per backend and compares the timings.  Four
workloads: the order-4 series batch behind the direct curvature solver, the
order-3 jet batch behind surface analysis, bulk plain evaluation as used by
Newton projection, and one end-to-end surface analysis.

    python3 benchmarks/bench_series.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeats=3):
    fn()  # warmup; includes JIT compilation on the numba path
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_worker():
    from pherm.catalog import builtin_family
    from pherm.curvature import analyze
    from pherm.series import HAS_NUMBA, eval_series_many, eval_values, tape_for

    rng = np.random.default_rng(7)
    ell_fn, ell_metric = builtin_family("ellipsoid", None)
    ell_tape = tape_for(ell_fn)
    rei_fn, _ = builtin_family("reinhardt", {"eps": 1.0})
    rei_tape = tape_for(rei_fn)

    # points off the coordinate axes so the log-torus expression is defined
    pts4 = np.exp(0.5 * (rng.standard_normal((500, 2)) + 1j * rng.standard_normal((500, 2))))
    pts3 = rng.standard_normal((2000, 2)) + 1j * rng.standard_normal((2000, 2))
    ptsv = rng.standard_normal((200000, 2)) + 1j * rng.standard_normal((200000, 2))

    timings = {
        "series_order4_500pts": _time(lambda: eval_series_many(rei_tape, pts4, 4)),
        "series_order3_2000pts": _time(lambda: eval_series_many(ell_tape, pts3, 3)),
        "values_200k": _time(lambda: eval_values(ell_tape, ptsv)),
        "analyze_ellipsoid_100x10": _time(
            lambda: analyze(ell_fn, ell_metric, 100, 10, seed=0), repeats=1
        ),
    }
    checks = {
        "series_order4": complex(eval_series_many(rei_tape, pts4, 4).sum()),
        "values": complex(eval_values(ell_tape, ptsv).sum()),
    }
    print(
        json.dumps(
            {
                "backend": "numba" if HAS_NUMBA else "numpy",
                "timings": timings,
                "checks": {k: [v.real, v.imag] for k, v in checks.items()},
            }
        )
    )


def run_backend(disable: bool):
    env = dict(os.environ)
    if disable:
        env["PHERM_DISABLE_NUMBA"] = "1"
    else:
        env.pop("PHERM_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker"],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    if "--worker" in sys.argv:
        run_worker()
        return
    nb = run_backend(disable=False)
    np_ = run_backend(disable=True)
    if nb["backend"] != "numba":
        print("note: numba unavailable; both runs used the numpy fallback")
    print(f"{'workload':<28}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for key in nb["timings"]:
        a, b = nb["timings"][key], np_["timings"][key]
        print(f"{key:<28}{a * 1e3:>10.1f}ms{b * 1e3:>10.1f}ms{b / a:>9.1f}x")
    agree = all(
        abs(complex(*nb["checks"][k]) - complex(*np_["checks"][k]))
        <= 1e-9 * max(1.0, abs(complex(*nb["checks"][k])))
        for k in nb["checks"]
    )
    print(f"backend agreement: {'ok' if agree else 'MISMATCH'}")
    if not agree:
        sys.exit(1)


if __name__ == "__main__":
    main()
