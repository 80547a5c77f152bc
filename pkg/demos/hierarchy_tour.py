"""Build the expander hierarchy of a barbell and follow one flow through it.

Two dense cliques joined by a thin bridge: the first decomposition round
keeps the clique edges at level 1 and promotes one bridge direction, which
then forms level 2 on its own.

    python demos/hierarchy_tour.py
"""

from hierflow import CapGraph, build_hierarchy
from hierflow.hierarchy_builder import unfold
from hierflow.sparse_cut import approx_maxflow_shortcut

k = 5
edges = [(u, v, 1000) for u in range(k) for v in range(k) if u != v]
edges += [(k + u, k + v, 1000) for u in range(k) for v in range(k) if u != v]
edges += [(k - 1, k, 1), (k, k - 1, 1)]
g = CapGraph.from_edges(2 * k, edges)

bh = build_hierarchy(g, rng=0)
print(f"levels used {bh.L} of nominal {bh.L_nominal}; scale q = {bh.q}, z = {bh.z}")
print(f"top-level capacity per round: {bh.round_capacities()}")
for e, (u, v, c) in enumerate(g.edges()):
    if bh.levels[e] > 1:
        print(f"  edge {u}->{v} (cap {c}) sits at level {bh.levels[e]}")

sg = bh.final_sg
for key, size in zip(sg.star_keys, sg.star_size):
    print(f"star over level-{key[0]} component {key[1]}: {size} vertices")

# route on the shortcut graph, then replace star traffic by real paths;
# stars carry capacity scaled down by 1/q, so their share is small
for s, t in ((0, 3), (0, 2 * k - 1)):
    res = approx_maxflow_shortcut(sg, s, t)
    f, kappa = unfold(bh, res.values)
    print(f"{s} -> {t}: shortcut flow {res.value / sg.q:g}, cut capacity {res.cut.forward / sg.q:g}")
    for entry in bh.unfold_log[-bh.L:]:
        print(f"  unfold round {entry['round']}: moved {entry['moved'] / bh.z:g} units of star traffic")
    print(f"  congestion bound used {kappa / bh.z:.3f} (at most 3)")
