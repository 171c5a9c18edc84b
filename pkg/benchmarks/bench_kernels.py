"""Time the numba kernels against the pure-numpy fallback.

Each path runs in its own interpreter because the backend is chosen at
import time from GEOKNAP_DISABLE_NUMBA. Both runs solve the same seeded
instances and must report identical optima.

    python3 benchmarks/bench_kernels.py [--instances 30] [--side 12]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, random, sys, time
import numpy as np
from geoknap import _kernels
from geoknap.exact import ExactConfig, optimal_pack
from geoknap.geom import Item

count, side, seed = map(int, sys.argv[1:4])
rng = random.Random(seed)
instances = []
for _ in range(count):
    n = rng.randint(4, 7)
    instances.append([Item(i, rng.randint(1, side // 2 + 2), rng.randint(1, side // 2 + 2), rng.randint(1, 9))
                      for i in range(n)])

# warm-up so JIT compilation is not charged to the timing
optimal_pack(instances[0][:2], side)
free = np.ones((side, side), dtype=np.uint8)
_kernels.fit_positions(free, 2, 2)

start = time.perf_counter()
profits = [optimal_pack(items, side, ExactConfig(max_side=side)).profit for items in instances]
exact_s = time.perf_counter() - start

grid = (np.random.default_rng(seed).random((64, 64)) < 0.8).astype(np.uint8)
start = time.perf_counter()
for w in range(1, 9):
    for h in range(1, 9):
        _kernels.fit_positions(grid, w, h)
fit_s = time.perf_counter() - start

print(json.dumps({"numba": _kernels.USE_NUMBA, "exact_s": exact_s, "fit_s": fit_s, "profits": profits}))
"""


def run(disable: bool, args) -> dict:
    env = dict(os.environ, GEOKNAP_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(args.instances), str(args.side), str(args.seed)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=30)
    parser.add_argument("--side", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    fast, slow = run(False, args), run(True, args)
    if not fast["numba"]:
        print("numba not importable: both runs used the fallback")
    if fast["profits"] != slow["profits"]:
        sys.exit("backends disagree on the optima")
    print(f"{'kernel':<14}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for key, name in (("exact_s", "exact search"), ("fit_s", "fit positions")):
        print(f"{name:<14}{fast[key]:>10.3f}{slow[key]:>10.3f}{slow[key] / max(fast[key], 1e-9):>10.1f}")
    print(f"optima agree on {len(fast['profits'])} instances")


if __name__ == "__main__":
    main()
