"""Compiled vs. pure-Python simplex kernels on the hedging and occupation LPs.

    python benchmarks/bench_pivot.py [--instances N] [--repeat R]

Both backends must return identical solutions; the script aborts otherwise.
"""
import argparse
import random
import statistics
import time

from semistatic.duals import build_nature_lp
from semistatic.exact_lp import BACKENDS, solve
from semistatic.generator import random_instance
from semistatic.market_tree import fixture
from semistatic.primal import build_primal_lp


def workload(n, seed):
    rng = random.Random(seed)
    insts = [fixture("INST_GAP"), fixture("INST_BIN")]
    insts += [random_instance(rng, max_leaves=None) for _ in range(n)]
    lps = []
    for inst in insts:
        lps.append(build_primal_lp(inst)[0])
        lps.append(build_nature_lp(inst)[0])
    return lps


def run(lps, backend):
    out = []
    t0 = time.perf_counter()
    for lp in lps:
        out.append(solve(lp, backend=backend))
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    lps = workload(args.instances, args.seed)
    pivots = None
    times = {}
    reference = None
    for name in sorted(BACKENDS, reverse=True):
        samples = []
        for _ in range(args.repeat):
            dt, sols = run(lps, name)
            samples.append(dt)
        key = [(s.status, s.x, s.duals, s.pivots) for s in sols]
        if reference is None:
            reference = key
        elif key != reference:
            raise SystemExit(f"backend {name} disagrees with the reference")
        pivots = sum(s.pivots for s in sols)
        times[name] = statistics.median(samples)

    rows = max(lp.num_constraints for lp in lps)
    print(f"{len(lps)} LPs (largest {rows} rows), {pivots} pivots per pass, "
          f"median of {args.repeat}")
    for name, dt in times.items():
        print(f"  {name:<9} {dt * 1000:9.1f} ms   {pivots / dt:10.0f} pivots/s")
    if "compiled" in times:
        print(f"  speedup   {times['python'] / times['compiled']:9.2f}x")
    else:
        print("  compiled kernels unavailable (extension not built or gmpy2 missing)")


if __name__ == "__main__":
    main()
