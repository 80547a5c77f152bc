"""Bottom-up construction of a weak expander hierarchy and flow unfolding.

Round ``r`` takes the current top-level edges, decomposes them on the
shortcut graph of the hierarchy below, and promotes the cut edges to level
``r + 1``. Every round keeps its shortcut graph and leaf records so that a
flow on the final shortcut graph can later be unfolded, one level at a time,
into a flow on the input graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expander import DecompResult, RoutingError, route_respecting_demand, weak_expander_decomposition
from .graph import CapGraph, Demand, net_outflow
from .shortcut import Hierarchy, ShortcutGraph, build_shortcut


@dataclass(frozen=True)
class Profile:
    """Parameter profile for the hierarchy construction.

    ``practical`` fixes the expansion target at 1/16; ``theory`` uses the
    polylogarithmic targets. Both use ``T = c_T * ceil(log^2 n)`` game rounds
    (log base ``log_base``) and ``delta = 1/(32 T)``.
    """

    name: str = "practical"
    c_T: int = 4
    c_phi: int = 1
    log_base: float = 2.0
    phi_w: Fraction = Fraction(1, 8)
    c_depth: int = 4
    h_override: int | None = None

    def _log(self, n: int) -> float:
        return math.log(max(2, n), self.log_base)

    def phi_exp(self, n: int) -> Fraction:
        if self.name == "practical":
            return Fraction(1, 16)
        return Fraction(1, self.c_phi * math.ceil(self._log(n) ** 3))

    def phi_rand(self, n: int) -> Fraction:
        if self.name == "practical":
            return self.phi_exp(n)
        return Fraction(1, self.c_phi * math.ceil(self._log(n) ** 7))

    def rounds(self, n: int) -> int:
        if n < 2:
            return 0
        return self.c_T * math.ceil(self._log(n) ** 2)

    def delta(self, T: int) -> Fraction:
        return Fraction(1, 32 * max(1, T))


PRACTICAL = Profile("practical")
THEORY = Profile("theory")


def get_profile(name: str) -> Profile:
    if name == "practical":
        return PRACTICAL
    if name == "theory":
        return THEORY
    raise ValueError(f"unknown profile {name!r}")


def nominal_levels(total_capacity: int) -> int:
    """``ceil(log_{10/9} c(E)) + 1`` computed with integers."""
    c = max(1, total_capacity)
    k = 0
    while 10 ** k < c * 9 ** k:
        k += 1
    return k + 1


@dataclass
class RoundSnapshot:
    r: int
    hierarchy: Hierarchy
    sg: ShortcutGraph
    top_edges: tuple[int, ...]
    top_capacity: int
    decomposition: DecompResult | None


@dataclass
class BuiltHierarchy:
    graph: CapGraph
    levels: tuple[int, ...]
    L_nominal: int
    L: int
    q: int
    z: int
    phi: Fraction
    snapshots: list[RoundSnapshot]
    final_hierarchy: Hierarchy
    final_sg: ShortcutGraph
    profile: Profile
    unfold_log: list[dict] = field(default_factory=list)

    def shortcut(self, r: int) -> ShortcutGraph:
        """Shortcut graph of round ``r`` (``r = L + 1`` is the final one)."""
        if r == self.L + 1:
            return self.final_sg
        return self.snapshots[r - 1].sg

    def round_capacities(self) -> list[int]:
        return [s.top_capacity for s in self.snapshots]


def build_hierarchy(g: CapGraph, profile: Profile = PRACTICAL,
                    rng: np.random.Generator | int | None = 0) -> BuiltHierarchy:
    """Run the bottom-up rounds until no top-level edge remains."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    n, m = g.n, g.m
    cE = g.total_capacity()
    L_nom = nominal_levels(cE)
    phi = profile.phi_exp(n)
    phi_rand = profile.phi_rand(n)
    q = max(math.ceil(L_nom / phi_rand), L_nom * max(1, cE))
    z = 200 * L_nom * q
    levels = [1] * m
    loops = {e for e in range(m) if g.tails[e] == g.heads[e]}
    snaps: list[RoundSnapshot] = []
    L_final = 0
    for r in range(1, L_nom + 1):
        hier = Hierarchy.build(g, levels, r - 1)
        sg = build_shortcut(g, hier, q)
        top = tuple(e for e in range(m) if levels[e] == r and e not in loops)
        cap_top = sum(g.caps[e] for e in top)
        if not top:
            break
        dec = weak_expander_decomposition(sg, top, phi, profile.rounds, profile.delta, rng,
                                          profile.c_depth, profile.h_override)
        cap_next = sum(g.caps[e] for e in dec.e_next)
        if 10 * cap_next > 9 * cap_top:
            raise AssertionError(f"round {r}: promoted capacity {cap_next} exceeds 0.9 of {cap_top}")
        for e in dec.e_next:
            levels[e] = r + 1
        snaps.append(RoundSnapshot(r, hier, sg, top, cap_top, dec))
        L_final = r
        if not dec.e_next:
            break
    else:
        if any(x == L_nom + 1 for x in levels):
            raise AssertionError("top level did not empty within the nominal level count")
    final_h = Hierarchy.build(g, levels, L_final)
    final_sg = build_shortcut(g, final_h, q)
    return BuiltHierarchy(g, tuple(levels), L_nom, L_final, q, z, phi, snaps, final_h, final_sg, profile)


def next_kappa(kappa: int, L: int) -> int:
    """``floor((1 + 1.01/L) kappa)``."""
    return (kappa * (100 * L + 101)) // (100 * L)


def unfold_one_level(bh: BuiltHierarchy, r: int, values: Sequence[int], kappa: int) -> tuple[list[int], int]:
    """Replace level-``r`` star traffic of round ``r + 1`` by routes inside round ``r`` leaves."""
    hi = bh.shortcut(r + 1)
    lo = bh.shortcut(r)
    snap = bh.snapshots[r - 1]
    if len(values) != hi.graph.m:
        raise ValueError("flow does not live on the round's shortcut graph")
    z = bh.z
    n = hi.n
    m = hi.m
    kappa2 = next_kappa(kappa, bh.L_nominal)
    flo = [0] * lo.graph.m
    net = [0] * n
    flo[:m] = list(values[:m])
    lo_comp = lo.hierarchy.comp
    for k, (sidx, leaf, direction) in enumerate(hi.star_edges):
        x = values[m + k]
        if not x:
            continue
        lvl = hi.star_keys[sidx][0]
        if lvl == r:
            net[leaf] += x if direction == 0 else -x
        else:
            e = lo.star_lookup[(lvl, lo_comp[lvl][leaf], leaf, direction)]
            flo[e] += x
    # budget left under congestion kappa2/z; base caps are stored at scale q
    budget = [kappa2 * c - flo[e] for e, c in enumerate(bh.graph.caps)]
    budget += [(kappa2 * lo.graph.caps[e]) // lo.q - flo[e] for e in range(m, lo.graph.m)]
    for e, b in enumerate(budget):
        if b < 0:
            raise AssertionError(f"edge {e} already over the congestion budget")
    src = [max(0, x) for x in net]
    snk = [max(0, -x) for x in net]
    moved = sum(src)
    if moved:
        kt = -(-kappa // bh.q)
        dec = snap.decomposition
        assert dec is not None
        covered = 0
        for leaf in dec.leaves:
            verts = leaf.vertices
            ls = [src[v] for v in verts]
            lt = [snk[v] for v in verts]
            if not any(ls) and not any(lt):
                continue
            if sum(ls) != sum(lt):
                raise AssertionError("star demand is not balanced inside a leaf")
            covered += sum(ls)
            lb = [budget[leaf.edge_to_root(e)] for e in range(leaf.sg.graph.m)]
            try:
                vals = route_respecting_demand(leaf, Demand(z, tuple(ls), tuple(lt)), kt, z, lb)
            except RoutingError as exc:
                raise RoutingError(f"unfolding round {r}: {exc}") from None
            for e, x in enumerate(vals):
                if x:
                    t = leaf.edge_to_root(e)
                    flo[t] += x
                    budget[t] -= x
        if covered != moved:
            raise AssertionError("star demand outside every leaf")
    before = net_outflow(hi.graph, values)[:n]
    after = net_outflow(lo.graph, flo)[:n]
    if before != after:
        raise AssertionError("unfolding changed the vertex demand")
    bh.unfold_log.append({"round": r, "kappa": kappa2, "moved": moved})
    return flo, kappa2


def unfold(bh: BuiltHierarchy, values_a: Sequence[int]) -> tuple[list[int], int]:
    """Unfold a congestion-1 flow on the final shortcut graph (scale ``q``) onto the base graph.

    Returns per-edge values at scale ``z`` and the congestion numerator
    ``kappa`` (real congestion ``kappa / z``).
    """
    G = bh.final_sg.graph
    if len(values_a) != G.m:
        raise ValueError("flow does not live on the final shortcut graph")
    for e, (x, c) in enumerate(zip(values_a, G.caps)):
        if x > c:
            raise ValueError(f"input flow exceeds capacity on edge {e}")
    k = bh.z // bh.q
    f = [x * k for x in values_a]
    kappa = bh.z
    for r in range(bh.L, 0, -1):
        f, kappa = unfold_one_level(bh, r, f, kappa)
    if kappa > 3 * bh.z:
        raise AssertionError("unfolded congestion exceeds 3")
    return f[:bh.graph.m], kappa
