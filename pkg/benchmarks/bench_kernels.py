"""Compare the numba and pure-numpy backends on the persistence kernels.

Each backend runs in a fresh interpreter because the switch is read at
import time::

    python3 benchmarks/bench_kernels.py            # both backends
    python3 benchmarks/bench_kernels.py --sizes 40 80 --repeat 3
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from localph import backend
from localph.geometry import pairwise_distances
from localph.persistence import rips_long_bar_count, rips_barcode

sizes, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
out = {"backend": backend(), "rows": []}
# warm up (includes JIT compilation for numba)
d = pairwise_distances(rng.normal(size=(12, 3)))
rips_long_bar_count(d, 1, 0.1, 2.0, 2)
rips_barcode(rng.normal(size=(8, 3)), 1, 2.0)
for n in sizes:
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    ring = np.column_stack([np.cos(t), np.sin(t), np.zeros(n)]) + rng.normal(scale=0.05, size=(n, 3))
    d = pairwise_distances(ring)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        count = rips_long_bar_count(d, 1, 0.5, 1.5, 2)
        best = min(best, time.perf_counter() - t0)
    out["rows"].append({"n": n, "seconds": best, "long_h1": count})
print(json.dumps(out))
"""


def run(backend: str, sizes, repeat) -> dict:
    env = dict(os.environ)
    env.pop("LOCALPH_DISABLE_NUMBA", None)
    if backend == "numpy":
        env["LOCALPH_DISABLE_NUMBA"] = "1"
    res = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(sizes), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    fast = run("numba", args.sizes, args.repeat)
    slow = run("numpy", args.sizes, args.repeat)
    print(f"{'n':>5} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}  H1>0.5")
    for a, b in zip(fast["rows"], slow["rows"]):
        assert a["long_h1"] == b["long_h1"], "backends disagree"
        print(f"{a['n']:>5} {1e3 * a['seconds']:>11.2f} {1e3 * b['seconds']:>11.2f} "
              f"{b['seconds'] / a['seconds']:>7.1f}x  {a['long_h1']}")


if __name__ == "__main__":
    main()
