"""Weak expander decomposition of a terminal edge set, and routing over its leaves.

Each piece of the recursion is an induced shortcut graph. A piece that is not
strongly connected is split along its components first; a cut that has no
capacity in one direction costs nothing to keep. Strongly connected pieces
play the non-stop cut-matching game on their terminal edges. A balanced cut
sends the cheaper crossing direction to the next level and recurses on both
sides; a finished game keeps the terminal edges whose endpoints both retained
more than half of their measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Collection, Sequence

import numpy as np

from .cut_matching import CMGWitness, non_stop_cmg
from .graph import CapGraph, Demand, scc
from .push_relabel import route
from .shortcut import ShortcutGraph


class RoutingError(RuntimeError):
    pass


@dataclass
class LeafRecord:
    vertices: tuple[int, ...]
    f_prime: tuple[int, ...]
    local_f_prime: tuple[int, ...]
    witness: CMGWitness | None
    h_leaf: int
    sg: ShortcutGraph
    phi: Fraction

    def edge_to_root(self, e: int) -> int:
        return e if self.sg.root_edge is None else self.sg.root_edge[e]


@dataclass
class DecompResult:
    e_next: tuple[int, ...]
    leaves: list[LeafRecord]
    log: list[dict] = field(default_factory=list)
    depth: int = 0
    phi: Fraction = Fraction(1, 16)


def vertex_weight_to_edges(g: CapGraph, F: Collection[int], dprime: Sequence[int],
                           d: Sequence[int] | None = None) -> list[int]:
    """Keep the edges of ``F`` whose endpoints both hold more than half their volume.

    ``d`` defaults to ``vol_F`` (in the same units as ``dprime``).
    """
    if d is None:
        d = [0] * g.n
        for e in F:
            d[g.tails[e]] += g.caps[e]
            d[g.heads[e]] += g.caps[e]
    if any(a > b for a, b in zip(dprime, d)):
        raise ValueError("dprime exceeds the volume measure")
    if 10 * sum(dprime) < 8 * sum(d):
        raise ValueError("dprime keeps less than 0.8 of the volume")
    dropped = [2 * dprime[v] <= d[v] for v in range(g.n)]
    return [e for e in sorted(F) if not dropped[g.tails[e]] and not dropped[g.heads[e]]]


def _to_root(sg: ShortcutGraph, edges: Collection[int]) -> list[int]:
    if sg.root_edge is None:
        return list(edges)
    return [sg.root_edge[e] for e in edges]


def _restrict(child: ShortcutGraph, fparent: set[int]) -> list[int]:
    pe = child.parent_edge
    assert pe is not None
    return [e for e in range(child.m) if pe[e] in fparent]


def weak_expander_decomposition(sg: ShortcutGraph, F: Collection[int], phi: Fraction,
                                rounds_for: Callable[[int], int],
                                delta_for: Callable[[int], Fraction],
                                rng: np.random.Generator, c_depth: int = 4,
                                h: int | None = None) -> DecompResult:
    """Decompose terminal edges ``F`` (base edge ids of ``sg``).

    Returns the edges promoted to the next level and one record per leaf.
    """
    F0 = sorted(set(F))
    base = sg.base
    if any(base.tails[e] == base.heads[e] for e in F0):
        raise ValueError("self-loops cannot be terminal edges")
    if not F0:
        return DecompResult((), [], [], 0, phi)
    e_next: list[int] = []
    leaves: list[LeafRecord] = []
    log: list[dict] = []
    max_depth = 0
    queue: list[tuple[ShortcutGraph, list[int], int]] = [(sg, F0, 0)]
    while queue:
        piece, Fp, depth = queue.pop(0)
        max_depth = max(max_depth, depth)
        verts = _root_vertices(piece)
        if not Fp:
            leaves.append(LeafRecord(verts, (), (), None, 1, piece, phi))
            continue
        ids, k = scc(piece.base)
        if k > 1:
            groups: list[list[int]] = [[] for _ in range(k)]
            for v, c in enumerate(ids):
                groups[c].append(v)
            fset = set(Fp)
            log.append({"event": "scc_split", "size": piece.n, "parts": k, "depth": depth})
            for grp in groups:
                child = piece.induced(grp)
                queue.append((child, _restrict(child, fset), depth))
            continue
        T = rounds_for(piece.n)
        delta = delta_for(T)
        out = non_stop_cmg(piece, Fp, phi, delta, T, rng, h)
        if out.cut is not None:
            cut = out.cut
            side = cut.side
            G = piece.graph
            fwd_edges = [e for e in range(piece.m) if G.tails[e] in side and G.heads[e] not in side]
            bwd_edges = [e for e in range(piece.m) if G.heads[e] in side and G.tails[e] not in side]
            X = fwd_edges if cut.forward <= cut.backward else bwd_edges
            e_next.extend(_to_root(piece, X))
            left = [v for v in range(piece.n) if v in side]
            right = [v for v in range(piece.n) if v not in side]
            log.append({"event": "cut", "size": piece.n, "left": len(left), "depth": depth,
                        "promoted": len(X), "round": out.rounds})
            fset = set(Fp) - set(X)
            for part in (left, right):
                child = piece.induced(part)
                queue.append((child, _restrict(child, fset), depth + 1))
            continue
        wit = out.witness
        assert wit is not None
        keep = vertex_weight_to_edges(piece.base, Fp, wit.alive, wit.d) if sum(wit.d) else list(Fp)
        dropped = sorted(set(Fp) - set(keep))
        e_next.extend(_to_root(piece, dropped))
        h_leaf = max(1, 2 * wit.h * max(1, wit.rounds))
        log.append({"event": "leaf", "size": piece.n, "depth": depth, "rounds": wit.rounds,
                    "kept": len(keep), "dropped": len(dropped)})
        leaves.append(LeafRecord(verts, tuple(_to_root(piece, keep)), tuple(keep), wit, h_leaf,
                                 piece, phi))
    n = max(2, sg.n)
    bound = c_depth * math.ceil(math.log2(n) ** 3)
    if max_depth > bound:
        raise AssertionError(f"recursion depth {max_depth} exceeds {bound}")
    return DecompResult(tuple(sorted(e_next)), leaves, log, max_depth, phi)


def _root_vertices(piece: ShortcutGraph) -> tuple[int, ...]:
    if piece.root_vertex is None:
        return tuple(range(piece.n))
    return tuple(piece.root_vertex[:piece.n])


def leaf_volume(leaf: LeafRecord) -> list[int]:
    g = leaf.sg.base
    vol = [0] * g.n
    for e in leaf.local_f_prime:
        vol[g.tails[e]] += g.caps[e]
        vol[g.heads[e]] += g.caps[e]
    return vol


def default_budget(leaf: LeafRecord, kappa: int, z: int, c_route: int = 1) -> list[int]:
    """Per-edge cap ``ceil(c_route * kappa * log n / phi * c(e))`` at scale ``z``."""
    sg = leaf.sg
    logn = max(1, math.ceil(math.log2(max(2, sg.n))))
    factor = Fraction(c_route * kappa * logn) / leaf.phi
    return [math.ceil(factor * Fraction(c, sg.q)) * 1 for c in sg.graph.caps]


def route_respecting_demand(leaf: LeafRecord, d: Demand, kappa: int, z: int,
                            budget: Sequence[int] | None = None, max_rounds: int = 64) -> list[int]:
    """Route a ``kappa * vol_F'``-respecting demand inside the leaf's shortcut graph.

    ``d`` lives on the leaf's base vertices at scale ``z``. The flow is returned
    per leaf-graph edge at scale ``z`` and never exceeds ``budget`` (defaults to
    :func:`default_budget`).
    """
    if d.z != z:
        raise ValueError("demand scale mismatch")
    sg = leaf.sg
    n = sg.n
    if d.n != n:
        raise ValueError("demand must cover exactly the leaf's base vertices")
    vol = leaf_volume(leaf)
    for v in range(n):
        if d.src[v] > kappa * vol[v] or d.snk[v] > kappa * vol[v]:
            raise RoutingError(f"demand at vertex {v} does not respect the leaf volume")
    G = sg.graph
    cap = list(default_budget(leaf, kappa, z) if budget is None else budget)
    N = G.n
    src = list(d.src) + [0] * (N - n)
    snk = list(d.snk) + [0] * (N - n)
    total = [0] * G.m
    w = sg.weights()
    for _ in range(max_rounds):
        if sum(src) == 0:
            break
        out = route(N, G.tails, G.heads, cap, src, snk, w, leaf.h_leaf)
        if out.value == 0:
            break
        for e, x in enumerate(out.values):
            if x:
                total[e] += x
                cap[e] -= x
        src = out.excess
        snk = out.deficit
    if sum(src):
        raise RoutingError(f"{sum(src)} units of demand could not be routed in the leaf")
    return total
