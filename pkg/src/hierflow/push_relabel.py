"""Weighted push-relabel engine.

The routine returns a feasible integral flow ``f`` for a demand such that

(i)   every residual path from an unsaturated source to an unsaturated sink
      has w-length greater than ``3h``;
(ii)  ``sum_e f(e) w(e) <= 9h |f|``.

It is realized by shortest-augmenting-path phases in the w-metric. Each phase
computes w-distances from all unsaturated sources (Dijkstra with a ``3h``
cutoff), takes the nearest unsaturated sink distance ``D``, and saturates the
tight subgraph towards sinks at distance ``D`` with a blocking flow. Every
augmenting path therefore has length at most ``3h``, which gives (ii) with room
to spare, and the stopping rule is exactly (i).

When ``3h`` is at least ``(V-1) * max w`` no simple residual path can exceed
the budget, so the phases are run in the hop metric instead (a plain blocking
flow algorithm). This is the common case at small scale and yields a maximum
flow.

Work accounting: ``PRResult.scans`` counts arc inspections. The declared
constant for the bound ``scans <= c (m + n + sum_e h / w(e))`` is
``SCAN_CONSTANT``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import CapGraph, Demand, ScaledFlow

SCAN_CONSTANT = 8
_INF = float("inf")


@dataclass(frozen=True)
class WeightFn:
    """Positive integer weight per edge (``None`` means unusable) and height ``h``."""

    weights: tuple[int | None, ...]
    h: int

    def __post_init__(self) -> None:
        if self.h < 1:
            raise ValueError("height bound must be positive")
        for w in self.weights:
            if w is not None and w < 1:
                raise ValueError("edge weight must be at least 1")

    def harmonic_term(self) -> float:
        """``sum_e h / w(e)`` over finite-weight edges."""
        return sum(self.h / w for w in self.weights if w is not None)


@dataclass(frozen=True)
class PRResult:
    flow: ScaledFlow
    labels: tuple[int, ...]
    value: int
    phases: int
    scans: int
    hop_mode: bool


@dataclass
class _RouteOut:
    values: list[int]
    value: int
    excess: list[int]
    deficit: list[int]
    phases: int
    scans: int
    hop_mode: bool
    labels: list[int] | None


def weighted_push_relabel(g: CapGraph, caps: Sequence[int] | None, d: Demand,
                          w: WeightFn, h: int | None = None) -> PRResult:
    """Route as much of ``d`` as the contracts allow on ``g`` with ``caps``.

    ``caps`` and the demand numerators are taken as integers at a common
    scale; the returned flow carries the demand's scale.
    """
    h = w.h if h is None else h
    if h < 1:
        raise ValueError("height bound must be positive")
    if len(w.weights) != g.m:
        raise ValueError("weight vector does not match edge count")
    caps = g.caps if caps is None else tuple(caps)
    if d.n != g.n:
        raise ValueError("demand does not match vertex count")
    out = route(g.n, g.tails, g.heads, caps, d.src, d.snk, w.weights, h, want_labels=True)
    host = g if caps == g.caps else g.with_caps(caps)
    return PRResult(
        ScaledFlow(host, d.z, tuple(out.values)),
        tuple(out.labels or ()),
        out.value,
        out.phases,
        out.scans,
        out.hop_mode,
    )


def route(n: int, tails: Sequence[int], heads: Sequence[int], caps: Sequence[int],
          src: Sequence[int], snk: Sequence[int], weights: Sequence[int | None] | None,
          h: int, want_labels: bool = False, force_weighted: bool = False) -> _RouteOut:
    """Core engine on raw arrays. ``weights=None`` means unit weights."""
    if _kernels.enabled():
        out = _route_compiled(n, tails, heads, caps, src, snk, weights, h, want_labels, force_weighted)
        if out is not None:
            return out
    m = len(tails)
    adj: list[list[int]] = [[] for _ in range(n)]
    ahead: list[int] = []
    res: list[int] = []
    awt: list[int] = []
    arc_edge: list[int] = []
    maxw = 1
    for e in range(m):
        u = tails[e]
        v = heads[e]
        c = caps[e]
        wt = 1 if weights is None else weights[e]
        if u == v or c <= 0 or wt is None:
            continue
        if wt < 1:
            raise ValueError("edge weight must be at least 1")
        a = len(ahead)
        ahead.append(v)
        ahead.append(u)
        res.append(c)
        res.append(0)
        awt.append(wt)
        awt.append(wt)
        arc_edge.append(e)
        adj[u].append(a)
        adj[v].append(a + 1)
        if wt > maxw:
            maxw = wt
    excess = [0] * n
    deficit = [0] * n
    for v in range(n):
        x = src[v] - snk[v]
        if x > 0:
            excess[v] = x
        elif x < 0:
            deficit[v] = -x
    start_excess = sum(excess)
    limit = 3 * h
    hop_mode = (not force_weighted) and limit >= (n - 1) * maxw
    phases = 0
    scans = 0

    while True:
        sources = [v for v in range(n) if excess[v] > 0]
        if not sources or not any(deficit):
            break
        if hop_mode:
            dist, sc = _bfs(n, adj, ahead, res, sources)
        else:
            dist, sc = _dijkstra(n, adj, ahead, res, awt, sources, limit)
        scans += sc
        target = _INF
        for v in range(n):
            if deficit[v] > 0 and dist[v] < target:
                target = dist[v]
        if target == _INF or (not hop_mode and target > limit):
            break
        phases += 1
        scans += _blocking(n, adj, ahead, res, awt, dist, target, sources,
                           excess, deficit, hop_mode)

    values = [0] * m
    for k, e in enumerate(arc_edge):
        values[e] = res[2 * k + 1]
    labels = None
    if want_labels:
        sources = [v for v in range(n) if excess[v] > 0]
        cap9 = 9 * h
        if sources:
            dist, sc = _dijkstra(n, adj, ahead, res, awt, sources, cap9)
            scans += sc
            labels = [int(min(x, cap9)) for x in dist]
        else:
            labels = [cap9] * n
    return _RouteOut(values, start_excess - sum(excess), excess, deficit,
                     phases, scans, hop_mode, labels)


_TOPO_CACHE: list[tuple] = []


def _topology(n, tails, heads, weights):
    """Array views of an edge list, cached by identity of the input sequences."""
    for entry in _TOPO_CACHE:
        if entry[0] is tails and entry[1] is heads and entry[2] is weights and entry[3] == n:
            return entry[4]
    m = len(tails)
    try:
        t = np.asarray(tails, dtype=np.int64)
        hd = np.asarray(heads, dtype=np.int64)
        if weights is None:
            w = np.ones(m, dtype=np.int64)
        else:
            if any(x is not None and x < 1 for x in weights):
                raise ValueError("edge weight must be at least 1")
            w = np.fromiter((0 if x is None else x for x in weights), dtype=np.int64, count=m)
    except OverflowError:
        return None
    struct = (t != hd) & (w > 0)
    maxw = int(w[struct].max(initial=1))
    topo = (t, hd, w, struct, maxw, [])
    # only immutable inputs may be cached by identity
    if isinstance(tails, tuple) and isinstance(heads, tuple) and (weights is None or isinstance(weights, tuple)):
        _TOPO_CACHE.insert(0, (tails, heads, weights, n, topo))
        del _TOPO_CACHE[16:]
    return topo


def topo_csr(topo, n, ahead):
    memo = topo[5]
    if not memo:
        memo.append(_csr_for(n, ahead))
    return memo[0]


def _csr_for(n, ahead):
    owner = np.empty_like(ahead)
    owner[0::2] = ahead[1::2]
    owner[1::2] = ahead[0::2]
    return _kernels.csr(n, owner)


def _route_compiled(n, tails, heads, caps, src, snk, weights, h, want_labels, force_weighted):
    """Array version of :func:`route`; ``None`` when values may leave int64."""
    m = len(tails)
    if m == 0 or n == 0:
        return None
    safe = _kernels.SAFE
    topo = _topology(n, tails, heads, weights)
    if topo is None:
        return None
    t, hd, w, struct, maxw_all, _ = topo
    try:
        c = np.asarray(caps, dtype=np.int64)
        sv = np.asarray(src, dtype=np.int64)
        kv = np.asarray(snk, dtype=np.int64)
    except OverflowError:
        return None
    if c.max(initial=0) >= safe or sv.max(initial=0) >= safe or kv.max(initial=0) >= safe:
        return None
    if float(sv.sum(dtype=np.float64)) >= safe or float(kv.sum(dtype=np.float64)) >= safe:
        return None
    usable = struct & (c > 0)
    same = bool(np.array_equal(usable, struct))
    idx = np.nonzero(usable)[0]
    k = idx.shape[0]
    maxw = maxw_all if same else (int(w[idx].max(initial=1)) if k else 1)
    if maxw * n >= safe:
        return None
    ahead = np.empty(2 * k, dtype=np.int64)
    ahead[0::2] = hd[idx]
    ahead[1::2] = t[idx]
    res = np.zeros(2 * k, dtype=np.int64)
    res[0::2] = c[idx]
    awt = np.repeat(w[idx], 2)
    if same:
        start, adj = topo_csr(topo, n, ahead)
    else:
        start, adj = _csr_for(n, ahead)
    net = sv - kv
    excess = np.maximum(net, 0)
    deficit = np.maximum(-net, 0)
    start_excess = int(excess.sum())
    limit = 3 * h
    hop_mode = (not force_weighted) and limit >= (n - 1) * maxw
    lim = min(limit, n * maxw + 1)
    phases, scans = _kernels.route_phases(n, start, adj, ahead, res, awt, excess, deficit, lim, hop_mode)
    values = [0] * m
    fl = res[1::2].tolist()
    for j, e in enumerate(idx.tolist()):
        values[e] = fl[j]
    labels = None
    if want_labels:
        cap9 = 9 * h
        if excess.any():
            dist, sc = _kernels.distances(n, start, adj, ahead, res, awt, excess, min(cap9, n * maxw + 1))
            scans += int(sc)
            big = int(_kernels.BIG)
            labels = [cap9 if x == big else min(x, cap9) for x in dist.tolist()]
        else:
            labels = [cap9] * n
    ex = excess.tolist()
    return _RouteOut(values, start_excess - sum(ex), ex, deficit.tolist(),
                     int(phases), int(scans), hop_mode, labels)


def _bfs(n, adj, ahead, res, sources):
    dist = [_INF] * n
    for s in sources:
        dist[s] = 0
    queue = list(sources)
    scans = 0
    i = 0
    while i < len(queue):
        u = queue[i]
        i += 1
        du = dist[u] + 1
        for a in adj[u]:
            scans += 1
            if res[a] > 0:
                x = ahead[a]
                if dist[x] == _INF:
                    dist[x] = du
                    queue.append(x)
    return dist, scans


def _dijkstra(n, adj, ahead, res, awt, sources, limit):
    dist = [_INF] * n
    heap = []
    for s in sources:
        dist[s] = 0
        heap.append((0, s))
    heapq.heapify(heap)
    scans = 0
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if d > limit:
            break
        for a in adj[u]:
            scans += 1
            if res[a] > 0:
                x = ahead[a]
                nd = d + awt[a]
                if nd < dist[x] and nd <= limit:
                    dist[x] = nd
                    heapq.heappush(heap, (nd, x))
    return dist, scans


def _blocking(n, adj, ahead, res, awt, dist, target, sources, excess, deficit, hop_mode):
    it = [0] * n
    scans = 0
    for s in sources:
        while excess[s] > 0:
            path: list[int] = []
            u = s
            found = False
            while True:
                if deficit[u] > 0 and dist[u] == target:
                    found = True
                    break
                lst = adj[u]
                i = it[u]
                du = dist[u]
                nxt = -1
                while i < len(lst):
                    a = lst[i]
                    scans += 1
                    if res[a] > 0:
                        x = ahead[a]
                        dx = dist[x]
                        if dx <= target and dx == du + (1 if hop_mode else awt[a]):
                            nxt = a
                            break
                    i += 1
                it[u] = i
                if nxt < 0:
                    if not path:
                        break
                    a = path.pop()
                    u = ahead[a ^ 1]
                    it[u] += 1
                    continue
                path.append(nxt)
                u = ahead[nxt]
            if not found:
                break
            b = min(excess[s], deficit[u])
            for a in path:
                if res[a] < b:
                    b = res[a]
            for a in path:
                res[a] -= b
                res[a ^ 1] += b
            excess[s] -= b
            deficit[u] -= b
    return scans


def label_histogram(labels: Sequence[int], buckets: int = 10) -> str:
    """Text histogram of final labels, one ``lo..hi count`` line per bucket."""
    if not labels:
        return ""
    top = max(labels)
    width = max(1, -(-(top + 1) // buckets))
    counts: dict[int, int] = {}
    for x in labels:
        counts[x // width] = counts.get(x // width, 0) + 1
    return "\n".join(f"{b * width}..{(b + 1) * width - 1} {counts[b]}" for b in sorted(counts)) + "\n"
