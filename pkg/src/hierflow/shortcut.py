"""Hierarchies, respecting vertex orders and star shortcut graphs.

A hierarchy assigns each edge a level. Its level-``i`` components are the
strongly connected components of the graph restricted to edges of level at
most ``i``; edges whose level exceeds ``L`` sit above the hierarchy.

A shortcut graph adds, for every level ``i`` and level-``i`` component ``C``
with at least one level-``i`` edge inside, a Steiner root joined in both
directions to the tails of those edges. Star capacity is ``psi`` times the
capacity leaving the leaf through such edges, with ``psi = 1/q``. All
capacities of the shortcut graph are stored at scale ``q``: a base edge of
capacity ``c`` is stored as ``c*q`` and a star edge as the plain capacity sum,
so real values are exact multiples of ``1/q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import CapGraph, scc
from .push_relabel import WeightFn


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Hierarchy:
    """Level function with per-level component ids (topologically numbered)."""

    graph: CapGraph
    levels: tuple[int, ...]
    L: int
    comp: tuple[tuple[int, ...], ...]
    count: tuple[int, ...]

    @classmethod
    def build(cls, g: CapGraph, levels: Sequence[int], L: int) -> "Hierarchy":
        levels = tuple(int(x) for x in levels)
        if len(levels) != g.m:
            raise HierarchyError("level vector does not match edge count")
        if any(x < 1 for x in levels):
            raise HierarchyError("levels start at 1")
        comps = [tuple(range(g.n))]
        counts = [g.n]
        for i in range(1, L + 1):
            ids, k = scc(g, lambda e, i=i: levels[e] <= i)
            comps.append(tuple(ids))
            counts.append(k)
        return cls(g, levels, L, tuple(comps), tuple(counts))

    def members(self, i: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count[i])]
        for v, c in enumerate(self.comp[i]):
            out[c].append(v)
        return out

    def validate(self) -> None:
        """Raise if the component family is not laminar or level 0 is not trivial."""
        if len(set(self.comp[0])) != self.graph.n:
            raise HierarchyError("level-0 components are not singletons")
        for i in range(self.L):
            parent: dict[int, int] = {}
            for v in range(self.graph.n):
                c, p = self.comp[i][v], self.comp[i + 1][v]
                if parent.setdefault(c, p) != p:
                    raise HierarchyError(f"level-{i} component {c} straddles level {i + 1}")

    def edges_at(self, i: int) -> list[int]:
        return [e for e, x in enumerate(self.levels) if x == i]


@dataclass(frozen=True)
class RespectingOrder:
    tau: tuple[int, ...]
    inverse: tuple[int, ...]

    def reversed(self) -> "RespectingOrder":
        n = len(self.tau)
        return RespectingOrder(tuple(n - 1 - t for t in self.tau), tuple(reversed(self.inverse)))


def respecting_order(g: CapGraph, h: Hierarchy) -> RespectingOrder:
    """Order vertices so components are contiguous and reachability goes forward.

    Component ids are topological at every level, so sorting by the id tuple
    from the top level down (ties by vertex id) meets both requirements.
    """
    if h.graph is not g and (h.graph.n != g.n or h.graph.m != g.m):
        raise HierarchyError("hierarchy belongs to another graph")
    h.validate()
    comp = h.comp
    L = h.L
    inverse = sorted(range(g.n), key=lambda v: tuple(comp[i][v] for i in range(L, 0, -1)) + (v,))
    tau = [0] * g.n
    for rank, v in enumerate(inverse):
        tau[v] = rank
    return RespectingOrder(tuple(tau), tuple(inverse))


@dataclass(eq=False)
class ShortcutGraph:
    """A base graph plus star shortcuts, stored at capacity scale ``q``.

    Vertices ``0..n-1`` are base vertices; star roots follow. Edges
    ``0..m-1`` of ``graph`` are the base edges, the rest are star edges.
    """

    base: CapGraph
    hierarchy: Hierarchy
    q: int
    order: RespectingOrder
    graph: CapGraph
    star_keys: list[tuple[int, int]]
    star_size: list[int]
    star_edges: list[tuple[int, int, int]]
    star_lookup: dict[tuple[int, int, int, int], int]
    skip_top: bool = False
    is_reversed: bool = False
    parent_vertex: tuple[int, ...] | None = None
    parent_edge: tuple[int, ...] | None = None
    root_vertex: tuple[int, ...] | None = None
    root_edge: tuple[int, ...] | None = None
    _weights: tuple[int, ...] | None = field(default=None, repr=False)
    _rev: "ShortcutGraph | None" = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def num_stars(self) -> int:
        return len(self.star_keys)

    def star_root(self, k: int) -> int:
        return self.base.n + k

    def is_star_edge(self, e: int) -> bool:
        return e >= self.base.m

    def star_capacity(self, e: int) -> Fraction:
        """Real capacity of graph edge ``e``."""
        return Fraction(self.graph.caps[e], self.q)

    def weights(self) -> tuple[int, ...]:
        if self._weights is None:
            self._weights = weight_fn(self, self.order, 1).weights  # type: ignore[assignment]
        return self._weights  # type: ignore[return-value]

    def reversed(self) -> "ShortcutGraph":
        """Same shortcut with every edge reversed; forward in the order flips too."""
        if self._rev is not None:
            return self._rev
        self._rev = ShortcutGraph(
            self.base.reversed(), self.hierarchy, self.q, self.order.reversed(),
            self.graph.reversed(), self.star_keys, self.star_size, self.star_edges,
            self.star_lookup, self.skip_top, not self.is_reversed,
            self.parent_vertex, self.parent_edge, self.root_vertex, self.root_edge,
            self.weights(), self,
        )
        return self._rev

    def induced(self, vertices: Iterable[int]) -> "ShortcutGraph":
        """Shortcut graph of the induced subgraph under the restricted hierarchy."""
        if self.is_reversed:
            raise ValueError("induce on the forward shortcut graph")
        verts = sorted(set(vertices))
        if any(v < 0 or v >= self.n for v in verts):
            raise ValueError("induced vertex set must contain base vertices only")
        local = {v: i for i, v in enumerate(verts)}
        tails, heads, caps, levels, pedge = [], [], [], [], []
        for e, (u, v, c) in enumerate(self.base.edges()):
            if u in local and v in local:
                tails.append(local[u])
                heads.append(local[v])
                caps.append(c)
                levels.append(self.hierarchy.levels[e])
                pedge.append(e)
        sub = CapGraph(len(verts), tuple(tails), tuple(heads), tuple(caps))
        hier = Hierarchy.build(sub, levels, self.hierarchy.L)
        piece = build_shortcut(sub, hier, self.q, self.skip_top)
        index = {key: k for k, key in enumerate(self.star_keys)}
        rep: dict[tuple[int, int], int] = {}
        for (k, leaf, _d) in piece.star_edges:
            rep.setdefault(piece.star_keys[k], leaf)
        pv = list(verts)
        for key in piece.star_keys:
            lvl = key[0]
            parent_key = (lvl, self.hierarchy.comp[lvl][verts[rep[key]]])
            pv.append(self.star_root(index[parent_key]))
        pe = list(pedge)
        for (k, leaf, direction) in piece.star_edges:
            lvl = piece.star_keys[k][0]
            pleaf = verts[leaf]
            pe.append(self.star_lookup[(lvl, self.hierarchy.comp[lvl][pleaf], pleaf, direction)])
        piece.parent_vertex = tuple(pv)
        piece.parent_edge = tuple(pe)
        if self.root_vertex is None:
            piece.root_vertex = piece.parent_vertex
            piece.root_edge = piece.parent_edge
        else:
            rv, re_ = self.root_vertex, self.root_edge
            assert re_ is not None
            piece.root_vertex = tuple(rv[x] for x in pv)
            piece.root_edge = tuple(re_[x] for x in pe)
        return piece

    def lift_values(self, values: Sequence[int], to_root: bool = False) -> dict[int, int]:
        """Map per-edge values on this piece onto the parent (or root) edges."""
        emap = self.root_edge if to_root else self.parent_edge
        if emap is None:
            return {e: x for e, x in enumerate(values) if x}
        out: dict[int, int] = {}
        for e, x in enumerate(values):
            if x:
                t = emap[e]
                out[t] = out.get(t, 0) + x
        return out


def build_shortcut(g: CapGraph, h: Hierarchy, q: int, skip_top: bool = False) -> ShortcutGraph:
    """Attach one star per (level, component) holding at least one edge of that level.

    Self-loops never carry flow and contribute no star capacity.
    """
    if q < 1:
        raise ValueError("capacity scale must be positive")
    top = h.L - 1 if skip_top else h.L
    per_star: dict[tuple[int, int], dict[int, int]] = {}
    for e, (u, v, c) in enumerate(g.edges()):
        i = h.levels[e]
        if i > top or u == v:
            continue
        cu = h.comp[i][u]
        if cu != h.comp[i][v]:
            continue
        leaves = per_star.setdefault((i, cu), {})
        leaves[u] = leaves.get(u, 0) + c
    keys = sorted(per_star)
    sizes = [0] * len(keys)
    if keys:
        size_at: dict[tuple[int, int], int] = {}
        for i in sorted({k[0] for k in keys}):
            for v in range(g.n):
                key = (i, h.comp[i][v])
                size_at[key] = size_at.get(key, 0) + 1
        sizes = [size_at[k] for k in keys]
    tails = list(g.tails)
    heads = list(g.heads)
    caps = [c * q for c in g.caps]
    star_edges: list[tuple[int, int, int]] = []
    lookup: dict[tuple[int, int, int, int], int] = {}
    for k, key in enumerate(keys):
        root = g.n + k
        for leaf in sorted(per_star[key]):
            c = per_star[key][leaf]
            for direction, (a, b) in enumerate(((leaf, root), (root, leaf))):
                lookup[(key[0], key[1], leaf, direction)] = len(tails)
                star_edges.append((k, leaf, direction))
                tails.append(a)
                heads.append(b)
                caps.append(c)
    graph = CapGraph(g.n + len(keys), tuple(tails), tuple(heads), tuple(caps))
    order = respecting_order(g, h)
    return ShortcutGraph(g, h, q, order, graph, keys, sizes, star_edges, lookup, skip_top)


def weight_fn(sg: ShortcutGraph, order: RespectingOrder | None = None, h: int = 1) -> WeightFn:
    """Base edges weigh ``|tau(u) - tau(v)|`` (self-loops 1); star edges weigh ``|C|``."""
    tau = (order or sg.order).tau
    base = sg.base
    w: list[int] = []
    for u, v in zip(base.tails, base.heads):
        d = tau[u] - tau[v]
        w.append(d if d > 0 else (-d if d < 0 else 1))
    for (k, _leaf, _dir) in sg.star_edges:
        w.append(sg.star_size[k])
    return WeightFn(tuple(w), h)


def split_shortcut(sg: ShortcutGraph, side: Iterable[int]) -> tuple[ShortcutGraph, ShortcutGraph, tuple[tuple[int, ...], tuple[int, ...]]]:
    """Split into the shortcut graphs of ``G[S]`` and ``G[V - S]``.

    The third item gives, for each piece, the map from piece edges to ``sg``
    edges; summing piece flows along it yields a flow on ``sg``.
    """
    s = set(side)
    if not s or len(s) >= sg.n or any(v < 0 or v >= sg.n for v in s):
        raise ValueError("split side must be a proper non-empty set of base vertices")
    rest = [v for v in range(sg.n) if v not in s]
    a = sg.induced(s)
    b = sg.induced(rest)
    assert a.parent_edge is not None and b.parent_edge is not None
    return a, b, (a.parent_edge, b.parent_edge)
