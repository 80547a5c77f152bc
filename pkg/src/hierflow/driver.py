"""Approximate and exact s-t max flow on top of the hierarchy machinery.

``approx_maxflow`` builds a hierarchy, routes on its shortcut graph, unfolds
the flow onto the input graph, divides it by three and rounds it. The exact
solver repeats that on residual graphs (inside a capacity bit-scaling loop)
and falls back to a single augmenting path whenever a round makes no
progress. ``oracle_maxflow`` is an independent Dinic used for differential
testing.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decompose import round_values
from .graph import (CapGraph, Demand, ScaledFlow, check_feasible, crossing_capacity, net_outflow,
                    normalize_capacities, verify_st_flow)
from .hierarchy_builder import PRACTICAL, Profile, build_hierarchy, unfold
from .sparse_cut import approx_maxflow_shortcut


@dataclass
class ApproxResult:
    flow: list[int]
    value: int
    cut: frozenset[int]
    cut_capacity: int
    fa_num: int
    fa_den: int
    levels: int
    unfold_kappa: int
    unfold_z: int
    unfold_ok: bool
    unfold_reason: str = ""


@dataclass
class SolveReport:
    value: int
    flow: list[int]
    cut: frozenset[int]
    cut_capacity: int
    rounds: int
    routed: list[int]
    fallback_steps: int
    seed: int
    profile: str
    scaling_levels: int
    times: dict[str, float] = field(default_factory=dict)
    approx: list[ApproxResult] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        """Deterministic part of the report (no timings)."""
        return {
            "value": self.value,
            "cut": sorted(self.cut),
            "cut_capacity": self.cut_capacity,
            "rounds": self.rounds,
            "routed": self.routed,
            "fallback_steps": self.fallback_steps,
            "seed": self.seed,
            "profile": self.profile,
            "scaling_levels": self.scaling_levels,
        }


def _check_terminals(g: CapGraph, s: int, t: int) -> None:
    if s == t:
        raise ValueError("source equals sink")
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise ValueError("terminal outside the vertex range")


def _rng(seed: int | np.random.SeedSequence | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def approx_maxflow(g: CapGraph, s: int, t: int, profile: Profile = PRACTICAL,
                   seed: int | np.random.SeedSequence | np.random.Generator | None = 0,
                   check: bool = True) -> ApproxResult:
    """Integral flow of value ``ceil(|f_A| / 3)`` and the cut found on the shortcut graph."""
    _check_terminals(g, s, t)
    bh = build_hierarchy(g, profile, _rng(seed))
    res = approx_maxflow_shortcut(bh.final_sg, s, t)
    f, kappa = unfold(bh, res.values)
    z = bh.z
    vz = res.value * (z // bh.q)
    ok, reason = True, ""
    if check:
        d = Demand.st(g.n, s, t, vz, z)
        verdict = check_feasible(g, d, ScaledFlow(g, z, tuple(f)), 3, 1)
        out = net_outflow(g, f)
        exact = all(out[v] == (vz if v == s else -vz if v == t else 0) for v in range(g.n))
        ok = bool(verdict) and exact
        reason = verdict.reason if not verdict else ("" if exact else "vertex demand changed")
    # close the flow with a t->s edge so rounding keeps conservation and rounds the value up
    tails = g.tails + (t,)
    heads = g.heads + (s,)
    rounded = round_values(g.n, tails, heads, list(f) + [vz], 3 * z, prefer_up=g.m)
    flow = rounded[:g.m]
    value = rounded[g.m]
    side = frozenset(v for v in res.cut.side if v < g.n) if res.cut is not None else frozenset([s])
    fwd, _ = crossing_capacity(g, side)
    return ApproxResult(flow, value, side, fwd, res.value, bh.q, bh.L, kappa, z, ok, reason)


def _residual(g: CapGraph, caps: Sequence[int], flow: Sequence[int]) -> tuple[CapGraph, list[tuple[int, int]]]:
    """Residual multigraph; each residual edge remembers (base edge, +1 forward / -1 backward)."""
    tails: list[int] = []
    heads: list[int] = []
    rc: list[int] = []
    back: list[tuple[int, int]] = []
    for e in range(g.m):
        u, v = g.tails[e], g.heads[e]
        if u == v:
            continue
        if caps[e] > flow[e]:
            tails.append(u)
            heads.append(v)
            rc.append(caps[e] - flow[e])
            back.append((e, 1))
        if flow[e] > 0:
            tails.append(v)
            heads.append(u)
            rc.append(flow[e])
            back.append((e, -1))
    return CapGraph(g.n, tuple(tails), tuple(heads), tuple(rc)), back


def _reachable(g: CapGraph, caps: Sequence[int], flow: Sequence[int], s: int) -> list[bool]:
    seen = [False] * g.n
    seen[s] = True
    stack = [s]
    out = g.out_edges
    inn = g.in_edges
    while stack:
        u = stack.pop()
        for e in out[u]:
            v = g.heads[e]
            if not seen[v] and caps[e] > flow[e]:
                seen[v] = True
                stack.append(v)
        for e in inn[u]:
            v = g.tails[e]
            if not seen[v] and flow[e] > 0:
                seen[v] = True
                stack.append(v)
    return seen


def _augment_once(g: CapGraph, caps: Sequence[int], flow: list[int], s: int, t: int) -> int:
    """One shortest augmenting path with its bottleneck; returns the amount pushed."""
    prev: list[tuple[int, int] | None] = [None] * g.n
    seen = [False] * g.n
    seen[s] = True
    dq = deque([s])
    while dq and not seen[t]:
        u = dq.popleft()
        for e in g.out_edges[u]:
            v = g.heads[e]
            if not seen[v] and caps[e] > flow[e]:
                seen[v] = True
                prev[v] = (e, 1)
                dq.append(v)
        for e in g.in_edges[u]:
            v = g.tails[e]
            if not seen[v] and flow[e] > 0:
                seen[v] = True
                prev[v] = (e, -1)
                dq.append(v)
    if not seen[t]:
        return 0
    path = []
    v = t
    while v != s:
        p = prev[v]
        assert p is not None
        path.append(p)
        e, sg = p
        v = g.tails[e] if sg > 0 else g.heads[e]
    amt = min(caps[e] - flow[e] if sg > 0 else flow[e] for e, sg in path)
    for e, sg in path:
        flow[e] += sg * amt
    return amt


def _solve_residual(g: CapGraph, caps: Sequence[int], flow: list[int], s: int, t: int,
                    profile: Profile, ss: np.random.SeedSequence, report: SolveReport,
                    keep_approx: bool, clamp: int | None = None) -> None:
    """Augment ``flow`` to a maximum flow of ``(g, caps)`` in place."""
    while True:
        reach = _reachable(g, caps, flow, s)
        if not reach[t]:
            return
        R, back = _residual(g, caps, flow)
        # any single edge carrying more than the residual optimum can be clamped
        out_s = sum(c for e, c in enumerate(R.caps) if R.tails[e] == s)
        in_t = sum(c for e, c in enumerate(R.caps) if R.heads[e] == t)
        bound = min(out_s, in_t) if clamp is None else min(out_s, in_t, clamp)
        R = R.with_caps(tuple(min(c, bound) for c in R.caps))
        report.rounds += 1
        child = ss.spawn(1)[0]
        res = approx_maxflow(R, s, t, profile, np.random.default_rng(child), check=keep_approx)
        if keep_approx:
            report.approx.append(res)
        report.routed.append(res.value)
        if res.value > 0:
            for r, x in enumerate(res.flow):
                if x:
                    e, sg = back[r]
                    flow[e] += sg * x
            continue
        pushed = _augment_once(g, caps, flow, s, t)
        assert pushed > 0
        report.fallback_steps += 1


ASSERT_LEVELS = ("off", "cheap", "full")


class VerificationError(AssertionError):
    pass


def exact_maxflow(g: CapGraph, s: int, t: int, profile: Profile = PRACTICAL, seed: int = 0,
                  keep_approx: bool = False, assert_level: str = "cheap") -> SolveReport:
    """Maximum s-t flow with a matching minimum cut.

    ``assert_level`` gates runtime checks: ``cheap`` verifies the final flow
    and the cut, ``full`` also checks every unfolded flow.
    """
    if assert_level not in ASSERT_LEVELS:
        raise ValueError(f"assert level must be one of {ASSERT_LEVELS}")
    keep_approx = keep_approx or assert_level == "full"
    _check_terminals(g, s, t)
    t0 = time.perf_counter()
    _, plan = normalize_capacities(g)
    ss = np.random.SeedSequence(seed)
    report = SolveReport(0, [], frozenset(), 0, 0, [], 0, seed, profile.name, plan.shift)
    flow = [0] * g.m
    for j in range(plan.shift, -1, -1):
        caps = plan.level_caps(j)
        if j < plan.shift:
            flow = [2 * x for x in flow]
        # below the top level the residual optimum is at most the edge count
        clamp = None if j == plan.shift else max(1, g.m)
        _solve_residual(g, caps, flow, s, t, profile, ss, report, keep_approx, clamp)
    report.times["solve"] = time.perf_counter() - t0
    reach = _reachable(g, g.caps, flow, s)
    side = frozenset(v for v in range(g.n) if reach[v])
    fwd, _ = crossing_capacity(g, side)
    value = net_outflow(g, flow)[s]
    if assert_level != "off":
        if value != fwd:
            raise VerificationError(f"flow value {value} differs from cut capacity {fwd}")
        problem = verify_st_flow(g, s, t, value, 1, list(g.edges_with(flow)))
        if problem:
            raise VerificationError(problem)
    if assert_level == "full":
        bad = [a for a in report.approx if not a.unfold_ok]
        if bad:
            raise VerificationError(f"unfolded flow rejected: {bad[0].unfold_reason}")
    report.value = value
    report.flow = flow
    report.cut = side
    report.cut_capacity = fwd
    report.times["total"] = time.perf_counter() - t0
    return report


def oracle_maxflow(g: CapGraph, s: int, t: int) -> int:
    """Plain Dinic with level graphs; independent of the rest of the package."""
    if s == t:
        raise ValueError("source equals sink")
    n = g.n
    head: list[int] = []
    cap: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, c in g.edges():
        if u == v or c == 0:
            continue
        adj[u].append(len(head))
        head.append(v)
        cap.append(c)
        adj[v].append(len(head))
        head.append(u)
        cap.append(0)
    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for a in adj[u]:
                if cap[a] and level[head[a]] < 0:
                    level[head[a]] = level[u] + 1
                    dq.append(head[a])
        if level[t] < 0:
            return total
        it = [0] * n
        while True:
            # iterative DFS for one augmenting path in the level graph
            stack = [s]
            arcs: list[int] = []
            while stack and stack[-1] != t:
                u = stack[-1]
                while it[u] < len(adj[u]):
                    a = adj[u][it[u]]
                    if cap[a] and level[head[a]] == level[u] + 1:
                        break
                    it[u] += 1
                if it[u] == len(adj[u]):
                    stack.pop()
                    level[u] = -1
                    if arcs:
                        arcs.pop()
                    continue
                a = adj[u][it[u]]
                arcs.append(a)
                stack.append(head[a])
            if not stack:
                break
            amt = min(cap[a] for a in arcs)
            for a in arcs:
                cap[a] -= amt
                cap[a ^ 1] += amt
            total += amt
