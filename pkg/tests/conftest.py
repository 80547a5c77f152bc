"""Shared generators and independent oracles.

Nothing here calls into the package's flow code: the oracles are brute-force
or textbook implementations written separately so that differential checks
stay two-sided.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from pathlib import Path

import pytest

from hierflow.graph import CapGraph

FIXTURES = Path(__file__).parent / "fixtures"


def random_graph(rng: random.Random, n: int, m: int, cap_max: int, loops: bool = True) -> CapGraph:
    edges = []
    for _ in range(m):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if not loops and u == v:
            v = (u + 1) % n if n > 1 else u
        edges.append((u, v, rng.randint(1, cap_max)))
    return CapGraph.from_edges(n, edges)


def random_dag(rng: random.Random, n: int, m: int, cap_max: int) -> CapGraph:
    edges = []
    for _ in range(m):
        u, v = sorted(rng.sample(range(n), 2))
        edges.append((u, v, rng.randint(1, cap_max)))
    return CapGraph.from_edges(n, edges)


def cut_enum_maxflow(g: CapGraph, s: int, t: int) -> int:
    """Minimum s-t cut by enumerating every vertex set (n <= 16)."""
    others = [v for v in range(g.n) if v not in (s, t)]
    best = None
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            side = {s, *extra}
            c = sum(cap for u, v, cap in g.edges() if u in side and v not in side)
            if best is None or c < best:
                best = c
    return best or 0


def edmonds_karp(g: CapGraph, s: int, t: int) -> int:
    """Shortest augmenting paths on an aggregated capacity matrix."""
    n = g.n
    cap = [[0] * n for _ in range(n)]
    for u, v, c in g.edges():
        if u != v:
            cap[u][v] += c
    total = 0
    while True:
        prev = [-1] * n
        prev[s] = s
        dq = deque([s])
        while dq and prev[t] < 0:
            u = dq.popleft()
            for v in range(n):
                if prev[v] < 0 and cap[u][v] > 0:
                    prev[v] = u
                    dq.append(v)
        if prev[t] < 0:
            return total
        b = None
        v = t
        while v != s:
            u = prev[v]
            b = cap[u][v] if b is None else min(b, cap[u][v])
            v = u
        v = t
        while v != s:
            u = prev[v]
            cap[u][v] -= b
            cap[v][u] += b
            v = u
        total += b


def reach_matrix(n: int, edges) -> list[set[int]]:
    """Vertices reachable from each vertex (including itself)."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
    out = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        out.append(seen)
    return out


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# acceptance lines collected by test_acceptance and echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
