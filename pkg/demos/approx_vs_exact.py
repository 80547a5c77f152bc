"""One approximate round against the exact optimum on random digraphs.

The approximate round returns an integral flow of a third of the shortcut
flow together with a cut; the exact value is always sandwiched between them.

    python demos/approx_vs_exact.py [count]
"""

import random
import sys

from hierflow import CapGraph, approx_maxflow, oracle_maxflow

count = int(sys.argv[1]) if len(sys.argv) > 1 else 12
rng = random.Random(7)
print(f"{'n':>3} {'m':>4} {'approx':>8} {'exact':>8} {'cut':>8} {'ratio':>6}")
for i in range(count):
    n = rng.randint(4, 25)
    edges = [(rng.randrange(n), rng.randrange(n), rng.randint(1, n * n)) for _ in range(rng.randint(n, 5 * n))]
    g = CapGraph.from_edges(n, edges)
    res = approx_maxflow(g, 0, n - 1, seed=i)
    opt = oracle_maxflow(g, 0, n - 1)
    assert res.value <= opt <= res.cut_capacity
    ratio = f"{opt / res.value:.2f}" if res.value else "-"
    print(f"{n:>3} {g.m:>4} {res.value:>8} {opt:>8} {res.cut_capacity:>8} {ratio:>6}")
