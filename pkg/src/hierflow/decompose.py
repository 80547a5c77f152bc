"""Flow decomposition with dynamic trees, short-path filtering and rounding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import CapGraph, Demand, ScaledFlow, net_outflow
from .push_relabel import _topology

_INF = float("inf")


class LinkCutForest:
    """Link-cut trees over nodes ``0..n-1`` with values on parent edges.

    Each node carries the remaining value and weight of the edge to its tree
    parent (roots carry an infinite value and zero weight). Path queries run
    from a node up to its tree root: minimum value, sum of weights. Path
    updates add to the value and to two auxiliary accumulators.
    """

    def __init__(self, n: int) -> None:
        self.left = [-1] * n
        self.right = [-1] * n
        self.par = [-1] * n
        self.val: list[float] = [_INF] * n
        self.mn: list[float] = [_INF] * n
        self.wt = [0] * n
        self.sm = [0] * n
        self.acc1 = [0] * n
        self.acc2 = [0] * n
        self.lz = [0] * n
        self.lz1 = [0] * n
        self.lz2 = [0] * n

    def _is_root(self, x: int) -> bool:
        p = self.par[x]
        return p == -1 or (self.left[p] != x and self.right[p] != x)

    def _update(self, x: int) -> None:
        m = self.val[x]
        s = self.wt[x]
        c = self.left[x]
        if c != -1:
            if self.mn[c] < m:
                m = self.mn[c]
            s += self.sm[c]
        c = self.right[x]
        if c != -1:
            if self.mn[c] < m:
                m = self.mn[c]
            s += self.sm[c]
        self.mn[x] = m
        self.sm[x] = s

    def _apply(self, x: int, d: int, d1: int, d2: int) -> None:
        if d:
            self.val[x] += d
            self.mn[x] += d
            self.lz[x] += d
        if d1:
            self.acc1[x] += d1
            self.lz1[x] += d1
        if d2:
            self.acc2[x] += d2
            self.lz2[x] += d2

    def _push(self, x: int) -> None:
        d, d1, d2 = self.lz[x], self.lz1[x], self.lz2[x]
        if d or d1 or d2:
            for c in (self.left[x], self.right[x]):
                if c != -1:
                    self._apply(c, d, d1, d2)
            self.lz[x] = self.lz1[x] = self.lz2[x] = 0

    def _rotate(self, x: int) -> None:
        p = self.par[x]
        g = self.par[p]
        left, right = self.left, self.right
        if left[p] == x:
            b = right[x]
            left[p] = b
            right[x] = p
        else:
            b = left[x]
            right[p] = b
            left[x] = p
        if b != -1:
            self.par[b] = p
        if g != -1:
            if left[g] == p:
                left[g] = x
            elif right[g] == p:
                right[g] = x
        self.par[x] = g
        self.par[p] = x
        self._update(p)
        self._update(x)

    def _splay(self, x: int) -> None:
        chain = [x]
        y = x
        while not self._is_root(y):
            y = self.par[y]
            chain.append(y)
        for y in reversed(chain):
            self._push(y)
        while not self._is_root(x):
            p = self.par[x]
            if not self._is_root(p):
                g = self.par[p]
                if (self.left[g] == p) == (self.left[p] == x):
                    self._rotate(p)
                else:
                    self._rotate(x)
            self._rotate(x)

    def access(self, v: int) -> None:
        last = -1
        x = v
        while x != -1:
            self._splay(x)
            self.right[x] = last
            self._update(x)
            last = x
            x = self.par[x]
        self._splay(v)

    def find_root(self, v: int) -> int:
        self.access(v)
        x = v
        while True:
            self._push(x)
            if self.left[x] == -1:
                break
            x = self.left[x]
        self._splay(x)
        return x

    def link(self, child: int, parent: int, value: int, weight: int) -> None:
        """Make tree root ``child`` a child of ``parent``."""
        self.access(child)
        self.val[child] = value
        self.wt[child] = weight
        # roots soak up path updates; only the new edge's share counts
        self.acc1[child] = self.acc2[child] = 0
        self._update(child)
        self.par[child] = parent

    def cut(self, x: int) -> tuple[int, int, int]:
        """Detach ``x`` from its parent; return its edge value and accumulators."""
        self.access(x)
        c = self.left[x]
        if c != -1:
            self.par[c] = -1
            self.left[x] = -1
        out = (int(self.val[x]), self.acc1[x], self.acc2[x])
        self.val[x] = _INF
        self.wt[x] = 0
        self.acc1[x] = self.acc2[x] = 0
        self._update(x)
        return out

    def path_min(self, v: int) -> float:
        self.access(v)
        return self.mn[v]

    def path_weight(self, v: int) -> int:
        self.access(v)
        return self.sm[v]

    def path_add(self, v: int, d: int, d1: int = 0, d2: int = 0) -> None:
        self.access(v)
        self._apply(v, d, d1, d2)

    def argmin(self, v: int) -> int:
        """Shallowest node on the root path of ``v`` holding the path minimum."""
        self.access(v)
        target = self.mn[v]
        x = v
        while True:
            self._push(x)
            c = self.left[x]
            if c != -1 and self.mn[c] == target:
                x = c
            elif self.val[x] == target:
                break
            else:
                x = self.right[x]
        self._splay(x)
        return x

    def node_state(self, x: int) -> tuple[float, int, int]:
        self.access(x)
        return self.val[x], self.acc1[x], self.acc2[x]


@dataclass(frozen=True)
class PathTriple:
    lam: int
    s: int
    t: int
    W: int


@dataclass(frozen=True)
class PathDecompRep:
    """Circulation plus weighted ``(lambda, s, t, W)`` path triples.

    ``short_flow`` is the edge-wise sum of the paths with ``W <= threshold``
    when a threshold was supplied at decomposition time.
    """

    graph: CapGraph
    z: int
    circulation: tuple[int, ...]
    paths: tuple[PathTriple, ...]
    threshold: int | None = None
    short_flow: tuple[int, ...] | None = None
    witnesses: tuple[tuple[int, ...], ...] | None = None

    def value(self) -> int:
        return sum(p.lam for p in self.paths)


def path_decompose(g: CapGraph, values: Sequence[int], weights: Sequence[int | None] | None = None,
                   z: int = 1, threshold: int | None = None, witness: bool = False) -> PathDecompRep:
    """Split a flow into a circulation and source-to-sink path triples.

    The flow is processed with a forest of chosen out-edges (each vertex points
    along one outgoing edge that still carries flow). Growing a tree root
    either links it to a new parent or closes a cycle, which is cancelled
    into the circulation. Paths run from a source to the root of its tree;
    their weight ``W`` is the exact weight sum along the tree path.
    """
    n, m = g.n, g.m
    if len(values) != m:
        raise ValueError("flow length does not match edge count")
    if _kernels.enabled() and not witness and m:
        fast = _decompose_compiled(g, values, weights, z, threshold)
        if fast is not None:
            return fast
    wts = [1 if weights is None or weights[e] is None else int(weights[e]) for e in range(m)]
    rem = list(values)
    circ = [0] * m
    keep = [0] * m
    outs: list[list[int]] = [[] for _ in range(n)]
    for e in range(m):
        if rem[e] <= 0:
            continue
        u, v = g.tails[e], g.heads[e]
        if u == v:
            circ[e] += rem[e]
            rem[e] = 0
        else:
            outs[u].append(e)
    ptr = [0] * n
    tree_edge = [-1] * n
    lct = LinkCutForest(n)
    heads = g.heads

    def flush(x: int) -> None:
        e = tree_edge[x]
        val, c1, c2 = lct.cut(x)
        rem[e] = val
        circ[e] += c1
        keep[e] += c2
        tree_edge[x] = -1

    def cut_zeros(v: int) -> None:
        while lct.path_min(v) <= 0:
            flush(lct.argmin(v))

    def next_out(r: int) -> int:
        lst = outs[r]
        i = ptr[r]
        while i < len(lst) and rem[lst[i]] <= 0:
            i += 1
        ptr[r] = i
        return lst[i] if i < len(lst) else -1

    def grow(v: int) -> int:
        while True:
            r = lct.find_root(v)
            e = next_out(r)
            if e < 0:
                return r
            x = heads[e]
            if lct.find_root(x) == r:
                lam = min(rem[e], int(lct.path_min(x)))
                lct.path_add(x, -lam, lam, 0)
                rem[e] -= lam
                circ[e] += lam
                cut_zeros(x)
            else:
                lct.link(r, x, rem[e], wts[e])
                tree_edge[r] = e
                rem[e] = 0

    out = net_outflow(g, values)
    supply = [max(0, x) for x in out]
    paths: list[PathTriple] = []
    wit: list[tuple[int, ...]] = []
    for s in range(n):
        while supply[s] > 0:
            t = grow(s)
            if t == s:
                raise ValueError("flow violates conservation")
            lam = min(supply[s], int(lct.path_min(s)))
            W = lct.path_weight(s)
            if witness:
                seq = []
                x = s
                while x != t:
                    seq.append(tree_edge[x])
                    x = heads[tree_edge[x]]
                wit.append(tuple(seq))
            short = threshold is not None and W <= threshold
            lct.path_add(s, -lam, 0, lam if short else 0)
            supply[s] -= lam
            paths.append(PathTriple(lam, s, t, W))
            cut_zeros(s)
    for v in range(n):
        grow(v)
    for x in range(n):
        if tree_edge[x] >= 0:
            flush(x)
    if any(rem):
        raise ValueError("flow violates conservation")
    return PathDecompRep(
        g, z, tuple(circ), tuple(paths), threshold,
        tuple(keep) if threshold is not None else None,
        tuple(wit) if witness else None,
    )


def _decompose_compiled(g: CapGraph, values: Sequence[int], weights: Sequence[int | None] | None,
                        z: int, threshold: int | None) -> PathDecompRep | None:
    safe = _kernels.SAFE
    topo = _topology(g.n, g.tails, g.heads, weights)
    if topo is None:
        return None
    t, hd, w = topo[0], topo[1], topo[2]
    try:
        vals = np.asarray(values, dtype=np.int64)
    except OverflowError:
        return None
    if vals.min(initial=0) < 0 or float(vals.sum(dtype=np.float64)) >= safe:
        return None
    wts = np.where(w > 0, w, 1)
    if float(wts.sum(dtype=np.float64)) >= safe:
        return None
    thr = 0 if threshold is None else min(threshold, safe)
    ok, circ, keep, lam, ps, pt, pw, k = _kernels.decompose(g.n, t, hd, vals, wts, thr, threshold is not None)
    if not ok:
        raise ValueError("flow violates conservation")
    paths = tuple(PathTriple(a, b, c, d) for a, b, c, d in
                  zip(lam[:k].tolist(), ps[:k].tolist(), pt[:k].tolist(), pw[:k].tolist()))
    return PathDecompRep(g, z, tuple(circ.tolist()), paths, threshold,
                         tuple(keep.tolist()) if threshold is not None else None, None)


def filter_short_paths(rep: PathDecompRep, threshold: int, demand: Demand | None = None
                       ) -> tuple[PathDecompRep, ScaledFlow, Demand]:
    """Keep the paths with ``W <= threshold``.

    Returns the kept representation, its edge-wise flow and the demand left
    after subtracting what the kept paths route.
    """
    kept = tuple(p for p in rep.paths if p.W <= threshold)
    wit = None
    if rep.witnesses is not None:
        wit = tuple(w for p, w in zip(rep.paths, rep.witnesses) if p.W <= threshold)
    if rep.threshold == threshold and rep.short_flow is not None:
        flow = rep.short_flow
    elif len(kept) == len(rep.paths):
        flow = tuple(a - b for a, b in zip(_recomposed_total(rep), rep.circulation))
    else:
        raise ValueError("decomposition was not prepared for this threshold")
    g = rep.graph
    n = g.n
    if demand is None:
        src = [0] * n
        snk = [0] * n
        for p in rep.paths:
            src[p.s] += p.lam
            snk[p.t] += p.lam
        demand = Demand(rep.z, tuple(src), tuple(snk))
    src = list(demand.src)
    snk = list(demand.snk)
    for p in kept:
        src[p.s] -= p.lam
        snk[p.t] -= p.lam
    if min(src, default=0) < 0 or min(snk, default=0) < 0:
        raise ValueError("kept paths exceed the given demand")
    krep = PathDecompRep(g, rep.z, (0,) * g.m, kept, threshold, flow, wit)
    return krep, ScaledFlow(g, rep.z, tuple(flow)), Demand(rep.z, tuple(src), tuple(snk))


def _recomposed_total(rep: PathDecompRep) -> tuple[int, ...]:
    if rep.witnesses is None:
        raise ValueError("total flow unavailable without witnesses")
    tot = list(rep.circulation)
    for p, seq in zip(rep.paths, rep.witnesses):
        for e in seq:
            tot[e] += p.lam
    return tuple(tot)


def recompose(rep: PathDecompRep) -> tuple[int, ...]:
    """Circulation plus all witness paths (requires ``witness=True``)."""
    return _recomposed_total(rep)


def round_flow(g: CapGraph, f: ScaledFlow, d: Demand, z: int) -> ScaledFlow:
    """Integral flow ``f'`` with ``f' <= ceil(f/z)`` routing ``d/z``.

    ``f`` must route ``d`` exactly (net outflow equals ``src - snk``), and every
    demand entry must be a multiple of ``z``.
    """
    if z < 1:
        raise ValueError("scale must be positive")
    if any(x % z for x in d.src) or any(x % z for x in d.snk):
        raise ValueError("demand entries must be multiples of z")
    out = net_outflow(g, f.values)
    if any(o != a - b for o, a, b in zip(out, d.src, d.snk)):
        raise ValueError("flow does not route the demand exactly")
    vals = round_values(g.n, g.tails, g.heads, f.values, z)
    return ScaledFlow(g, 1, tuple(vals))


def round_values(n: int, tails: Sequence[int], heads: Sequence[int], values: Sequence[int],
                 z: int, prefer_up: int = -1) -> list[int]:
    """Round ``values/z`` to integers while preserving every vertex's net flow.

    Requires net flow divisible by ``z`` at every vertex. Fractional residues
    form a multigraph in which no vertex has degree one, so walking along
    unused residue edges always closes a cycle; shifting flow around it moves
    at least one edge onto a multiple of ``z``. Cycles through ``prefer_up``
    are always shifted in the direction that increases that edge, so it ends
    at its ceiling.
    """
    x = list(values)
    m = len(x)
    adj: list[list[int]] = [[] for _ in range(n)]
    for e in range(m):
        if x[e] % z:
            u, v = tails[e], heads[e]
            if u == v:
                x[e] -= x[e] % z
                continue
            adj[u].append(e)
            adj[v].append(e)
    ptr = [0] * n

    def live(v: int, skip: int) -> int:
        lst = adj[v]
        i = ptr[v]
        while i < len(lst) and x[lst[i]] % z == 0:
            i += 1
        ptr[v] = i
        while i < len(lst):
            e = lst[i]
            if e != skip and x[e] % z:
                return e
            i += 1
        return -1

    for start in range(n):
        if live(start, -1) < 0:
            continue
        vs = [start]
        es: list[int] = []
        pos = {start: 0}
        while vs:
            v = vs[-1]
            arrive = es[-1] if es else -1
            e = live(v, arrive)
            if e < 0:
                if arrive >= 0 and x[arrive] % z:
                    raise ValueError("net flow not divisible by z")
                del pos[v]
                vs.pop()
                if es:
                    es.pop()
                continue
            u = heads[e] if tails[e] == v else tails[e]
            if u not in pos:
                pos[u] = len(vs)
                vs.append(u)
                es.append(e)
                continue
            k = pos[u]
            cyc = es[k:] + [e]
            walk = vs[k:]
            signs = [1 if tails[c] == walk[j] else -1 for j, c in enumerate(cyc)]
            up = down = z
            for c, sg in zip(cyc, signs):
                r = x[c] % z
                a, b = (z - r, r) if sg > 0 else (r, z - r)
                if a < up:
                    up = a
                if b < down:
                    down = b
            direction = 1
            if prefer_up >= 0 and prefer_up in cyc:
                direction = signs[cyc.index(prefer_up)]
            for c, sg in zip(cyc, signs):
                x[c] += sg * up if direction > 0 else -sg * down
            for w in vs[k + 1:]:
                del pos[w]
            del vs[k + 1:]
            del es[k:]
    return [v // z for v in x]
