"""Sparse cuts from weighted push-relabel on shortcut graphs.

A run routes a demand at congestion ``kappa`` on the shortcut graph with the
hierarchy weights. If part of the demand stays unrouted, the vertices are
layered by residual distance from the unsaturated sources under a modified
metric in which non-terminal base edges pointing forward in the vertex order
are free, and the layer cut minimising

    residual crossing capacity - min(vol_F(S), vol_F(V - S))

is returned. All capacities and demands are handled at the shortcut scale
``q``; volumes are multiplied by ``q`` before they are compared.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Collection, Sequence

from .decompose import PathDecompRep, filter_short_paths, path_decompose
from .graph import CutResult, Demand, ScaleMismatch
from .push_relabel import route
from .shortcut import ShortcutGraph

CUT_CONSTANT = 41
GOOD_CUT_CONSTANT = 40


@dataclass
class SparseCutOutput:
    values: list[int]
    value: int
    cut: CutResult | None
    h: int
    kappa: int
    q: int
    L: int
    M: int
    rem_src: list[int] = field(repr=False)
    rem_snk: list[int] = field(repr=False)
    residual_cut: int = 0
    good_cuts: int = 0
    layers: int = 0
    hop_mode: bool = True
    truncated: bool = False

    def cut_bound_ok(self) -> bool:
        """``kappa * c(cut) <= 41 |f| + min vol`` at scale ``q``."""
        if self.cut is None:
            return True
        return self.kappa * self.cut.forward <= CUT_CONSTANT * self.value + self.cut.min_volume() * self.q


def height_bound(n: int, L: int, q: int, kappa: int, M: int) -> int:
    """``n (6 L / psi + 100 kappa log M)`` with ``psi = 1/q`` and ``log M`` the bit length."""
    return max(1, n * (6 * max(1, L) * q + 100 * kappa * max(0, M).bit_length()))


def terminal_volumes(sg: ShortcutGraph, F: Collection[int]) -> list[int]:
    if isinstance(F, frozenset):
        return list(_cached_volumes(sg, F)[0])
    return _volumes(sg, F)


@lru_cache(maxsize=32)
def _cached_volumes(sg: ShortcutGraph, F: frozenset[int]) -> tuple[tuple[int, ...], int]:
    return tuple(_volumes(sg, F)), sum(sg.base.caps[e] for e in F)


def _volumes(sg: ShortcutGraph, F: Collection[int]) -> list[int]:
    vol = [0] * sg.graph.n
    base = sg.base
    for e in F:
        c = base.caps[e]
        vol[base.tails[e]] += c
        vol[base.heads[e]] += c
    return vol


def _pad(x: Sequence[int], N: int) -> list[int]:
    out = list(x)
    if len(out) < N:
        out.extend([0] * (N - len(out)))
    return out


def sparse_cut(sg: ShortcutGraph, F: Collection[int], d: Demand, kappa: int,
               h: int | None = None) -> SparseCutOutput:
    """Route ``d`` at congestion ``kappa``; return a sparse layer cut if it does not fit."""
    if kappa < 1:
        raise ValueError("kappa must be positive")
    if d.z != sg.q:
        raise ScaleMismatch(f"demand scale {d.z} != shortcut scale {sg.q}")
    if not d.is_diffusion():
        raise ValueError("demand is not a diffusion")
    G = sg.graph
    N = G.n
    src = _pad(d.src, N)
    snk = _pad(d.snk, N)
    if any(src[sg.n:]) or any(snk[sg.n:]):
        raise ValueError("Steiner roots carry no demand")
    Fset = F if isinstance(F, frozenset) else frozenset(F)
    M = _cached_volumes(sg, Fset)[1]
    L = max(1, sg.hierarchy.L)
    if h is None:
        h = height_bound(sg.n, L, sg.q, kappa, M)
    w = sg.weights()
    caps = [kappa * c for c in G.caps]
    out = route(N, G.tails, G.heads, caps, src, snk, w, h)
    res = SparseCutOutput(out.values, out.value, None, h, kappa, sg.q, L, M,
                          out.excess, out.deficit, hop_mode=out.hop_mode)
    # mass that is both source and sink at one vertex cancels in place
    if not any(out.excess):
        return res
    _layer_cut(sg, Fset, caps, w, out.values, out.excess, h, res)
    return res


def _layer_cut(sg: ShortcutGraph, Fset: set[int], caps: list[int], w: Sequence[int],
               values: list[int], excess: list[int], h: int, res: SparseCutOutput) -> None:
    G = sg.graph
    N = G.n
    m = sg.m
    tau = sg.order.tau
    tails, heads = G.tails, G.heads
    adj: list[list[int]] = [[] for _ in range(N)]
    ahead: list[int] = []
    rcap: list[int] = []
    awt: list[int] = []
    interior: list[bool] = []
    for e in range(G.m):
        u, v = tails[e], heads[e]
        if u == v or caps[e] <= 0:
            continue
        a = len(ahead)
        free = e < m and e not in Fset and tau[u] < tau[v]
        ahead += [v, u]
        rcap += [caps[e] - values[e], values[e]]
        awt += [0 if free else w[e], w[e]]
        keep = not (e < m and e in Fset)
        interior += [keep, keep]
        adj[u].append(a)
        adj[v].append(a + 1)
    INF = float("inf")
    dist = [INF] * N
    heap = [(0, v) for v in range(N) if excess[v] > 0]
    for _, v in heap:
        dist[v] = 0
    heapq.heapify(heap)
    while heap:
        dv, v = heapq.heappop(heap)
        if dv > dist[v] or dv >= h:
            continue
        for a in adj[v]:
            if rcap[a] > 0:
                x = ahead[a]
                nd = dv + awt[a]
                if nd < dist[x]:
                    dist[x] = nd
                    heapq.heappush(heap, (nd, x))
    vol = terminal_volumes(sg, Fset)
    total_vol = sum(vol)
    q = sg.q
    reached = sorted((dist[v], v) for v in range(N) if dist[v] < h)
    inside = [False] * N
    cut_res = 0
    cut_nonf = 0
    vol_in = 0
    best = None
    good = 0
    layers = 0
    i = 0
    fval = res.value
    rem_snk = res.rem_snk
    while i < len(reached):
        dcur = reached[i][0]
        j = i
        while j < len(reached) and reached[j][0] == dcur:
            if rem_snk[reached[j][1]] > 0:
                break
            j += 1
        if j < len(reached) and reached[j][0] == dcur:
            # only possible when h is below the height bound
            res.truncated = True
            break
        while i < len(reached) and reached[i][0] == dcur:
            v = reached[i][1]
            i += 1
            inside[v] = True
            vol_in += vol[v]
            for a in adj[v]:
                x = ahead[a]
                if inside[x]:
                    cut_res -= rcap[a ^ 1]
                    if interior[a]:
                        cut_nonf -= rcap[a ^ 1]
                else:
                    cut_res += rcap[a]
                    if interior[a]:
                        cut_nonf += rcap[a]
        nxt = reached[i][0] if i < len(reached) else h
        span = min(nxt, h) - dcur
        layers += 1
        if cut_nonf <= GOOD_CUT_CONSTANT * fval:
            good += span
        mv = min(vol_in, total_vol - vol_in) * q
        score = cut_res - mv
        if best is None or score < best[0]:
            best = (score, dcur)
    if best is None:
        side = frozenset(v for v in range(N) if excess[v] > 0)
    else:
        side = frozenset(v for v in range(N) if dist[v] <= best[1])
    fwd = bwd = 0
    base_caps = G.caps
    for e in range(G.m):
        u, v = tails[e], heads[e]
        if (u in side) != (v in side):
            if u in side:
                fwd += base_caps[e]
            else:
                bwd += base_caps[e]
    vs = sum(vol[v] for v in side)
    res.cut = CutResult(side, fwd, bwd, vs, total_vol - vs, q)
    res.residual_cut = sum(rcap[a] for v in side for a in adj[v] if ahead[a] not in side)
    res.good_cuts = good
    res.layers = layers


def approx_maxflow_shortcut(sg: ShortcutGraph, s: int, t: int) -> SparseCutOutput:
    """Constant-approximate s-t flow and cut on a shortcut graph (``kappa = 1``, no terminals).

    The source demand is ``n**3 U`` (real units), raised when needed so that it
    always exceeds the capacity leaving ``s``; the source then stays unsaturated
    and a cut with ``s`` inside is always produced.
    """
    if s == t:
        raise ValueError("source equals sink")
    if not (0 <= s < sg.n and 0 <= t < sg.n):
        raise ValueError("terminals must be base vertices")
    U = max(1, sg.base.max_capacity())
    G = sg.graph
    out_s = sum(c for e, c in enumerate(G.caps) if G.tails[e] == s and G.heads[e] != s)
    amount = max(sg.n ** 3 * U * sg.q, out_s + 1)
    d = Demand.st(sg.n, s, t, amount, sg.q)
    res = sparse_cut(sg, (), d, 1)
    assert res.cut is not None and s in res.cut.side and t not in res.cut.side
    return res


@dataclass
class ShortDecompOutput:
    values: list[int]
    value: int
    reps: list[PathDecompRep]
    cut: CutResult | None
    rounds: int
    h: int
    long_paths: int
    last: SparseCutOutput
    rem_src: list[int] = field(repr=False)
    rem_snk: list[int] = field(repr=False)

    def matching(self) -> dict[tuple[int, int], int]:
        """Merged ``(source, sink) -> value`` pairs across all path triples."""
        out: dict[tuple[int, int], int] = {}
        for rep in self.reps:
            for p in rep.paths:
                key = (p.s, p.t)
                out[key] = out.get(key, 0) + p.lam
        return out


def flow_with_short_decomposition(sg: ShortcutGraph, F: Collection[int], d: Demand, kappa: int,
                                  h: int | None = None, witness: bool = False,
                                  max_rounds: int = 256) -> ShortDecompOutput:
    """Route ``d`` as a sum of flows whose decompositions use paths of weight at most ``2h``.

    Each round runs ``sparse_cut`` on the remaining demand. A round that routes
    at least half keeps only its light paths and continues; otherwise the
    round's whole flow is added and its cut returned, so that every source
    outside the cut is routed and every sink inside it is saturated.
    """
    G = sg.graph
    N = G.n
    if any(a and b for a, b in zip(d.src, d.snk)):
        raise ValueError("a vertex carries both source and sink mass")
    total = [0] * G.m
    reps: list[PathDecompRep] = []
    cur = Demand(d.z, tuple(_pad(d.src, N)), tuple(_pad(d.snk, N)))
    w = sg.weights()
    rounds = 0
    long_paths = 0
    last = None
    hh = h
    while True:
        if cur.source_mass() == 0 and last is not None:
            break
        rounds += 1
        if rounds > max_rounds:
            raise RuntimeError("short decomposition did not converge")
        sc = sparse_cut(sg, F, cur, kappa, hh)
        hh = sc.h
        last = sc
        need = cur.source_mass()
        if need == 0:
            break
        if 2 * sc.value >= need:
            rep = path_decompose(G, sc.values, w, d.z, threshold=2 * sc.h, witness=witness)
            krep, kflow, cur = filter_short_paths(rep, 2 * sc.h, cur)
            for e, x in enumerate(kflow.values):
                if x:
                    total[e] += x
            reps.append(krep)
            if krep.value() == 0:
                raise RuntimeError("no short path survived filtering")
            continue
        rep = path_decompose(G, sc.values, w, d.z, threshold=2 * sc.h, witness=witness)
        long_paths += sum(1 for p in rep.paths if p.W > 2 * sc.h)
        src = list(cur.src)
        snk = list(cur.snk)
        for p in rep.paths:
            src[p.s] -= p.lam
            snk[p.t] -= p.lam
        cur = Demand(d.z, tuple(src), tuple(snk))
        for e, x in enumerate(sc.values):
            if x:
                total[e] += x - rep.circulation[e]
        reps.append(PathDecompRep(G, d.z, (0,) * G.m, rep.paths, rep.threshold, None, rep.witnesses))
        assert last is not None
        return ShortDecompOutput(total, sum(r.value() for r in reps), reps, sc.cut, rounds,
                                 sc.h, long_paths, sc, list(cur.src), list(cur.snk))
    assert last is not None
    return ShortDecompOutput(total, sum(r.value() for r in reps), reps, None, rounds,
                             last.h, long_paths, last, list(cur.src), list(cur.snk))
