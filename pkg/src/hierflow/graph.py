"""Capacitated digraphs, demands, scaled flows and the primitives shared by
every other module: DIMACS I/O, strongly connected components, capacity
normalization and the feasibility checker.

Everything is integer-valued. A quantity that is conceptually a multiple of
``1/z`` is stored as the integer numerator together with its scale ``z``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

MAX_CAPACITY = 1 << 62


class DimacsError(ValueError):
    """Base class for DIMACS parse failures."""


class MalformedHeader(DimacsError):
    pass


class DuplicateTerminal(DimacsError):
    pass


class NegativeCapacity(DimacsError):
    pass


class VertexOutOfRange(DimacsError):
    pass


class MalformedLine(DimacsError):
    pass


class CapacityOverflow(ValueError):
    pass


class ScaleMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class CapGraph:
    """Directed multigraph on vertices ``0..n-1`` with integer capacities.

    Edges are addressed by position; parallel edges and self-loops are kept.
    """

    n: int
    tails: tuple[int, ...]
    heads: tuple[int, ...]
    caps: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (len(self.tails) == len(self.heads) == len(self.caps)):
            raise ValueError("edge arrays differ in length")
        n = self.n
        for u, v, c in zip(self.tails, self.heads, self.caps):
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) outside vertex range {n}")
            if c < 0:
                raise ValueError("negative capacity")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "CapGraph":
        edges = list(edges)
        return cls(
            n,
            tuple(int(e[0]) for e in edges),
            tuple(int(e[1]) for e in edges),
            tuple(int(e[2]) for e in edges),
        )

    @property
    def m(self) -> int:
        return len(self.tails)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        return zip(self.tails, self.heads, self.caps)

    def edges_with(self, values: Sequence[int]) -> Iterator[tuple[int, int, int]]:
        """``(tail, head, value)`` for a per-edge vector."""
        return zip(self.tails, self.heads, values)

    def total_capacity(self) -> int:
        return sum(self.caps)

    def max_capacity(self) -> int:
        return max(self.caps, default=0)

    def with_caps(self, caps: Sequence[int]) -> "CapGraph":
        return CapGraph(self.n, self.tails, self.heads, tuple(caps))

    def reversed(self) -> "CapGraph":
        return CapGraph(self.n, self.heads, self.tails, self.caps)

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for e, u in enumerate(self.tails):
            out[u].append(e)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for e, v in enumerate(self.heads):
            inc[v].append(e)
        return tuple(tuple(x) for x in inc)


@dataclass(frozen=True)
class Demand:
    """Source and sink masses at scale ``z`` (entries are numerators)."""

    z: int
    src: tuple[int, ...]
    snk: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.z < 1:
            raise ValueError("scale must be positive")
        if len(self.src) != len(self.snk):
            raise ValueError("source and sink vectors differ in length")
        if min(self.src, default=0) < 0 or min(self.snk, default=0) < 0:
            raise ValueError("negative demand entry")

    @classmethod
    def zeros(cls, n: int, z: int = 1) -> "Demand":
        return cls(z, (0,) * n, (0,) * n)

    @classmethod
    def st(cls, n: int, s: int, t: int, amount: int, z: int = 1) -> "Demand":
        src = [0] * n
        snk = [0] * n
        src[s] = amount
        snk[t] = amount
        return cls(z, tuple(src), tuple(snk))

    @property
    def n(self) -> int:
        return len(self.src)

    def source_mass(self) -> int:
        return sum(self.src)

    def sink_mass(self) -> int:
        return sum(self.snk)

    def is_diffusion(self) -> bool:
        return self.source_mass() <= self.sink_mass()

    def rescaled(self, z: int) -> "Demand":
        if z % self.z:
            raise ScaleMismatch(f"cannot move scale {self.z} to {z}")
        k = z // self.z
        return Demand(z, tuple(x * k for x in self.src), tuple(x * k for x in self.snk))


@dataclass(frozen=True)
class ScaledFlow:
    """Per-edge flow numerators at scale ``z`` on a host graph."""

    graph: CapGraph
    z: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.graph.m:
            raise ValueError("flow length does not match edge count")
        if min(self.values, default=0) < 0:
            raise ValueError("negative flow value")

    @classmethod
    def zero(cls, g: CapGraph, z: int = 1) -> "ScaledFlow":
        return cls(g, z, (0,) * g.m)

    def net_out(self) -> list[int]:
        return net_outflow(self.graph, self.values)

    def congestion_ok(self, k_num: int, k_den: int = 1) -> bool:
        """True iff ``f(e)/z <= (k_num/k_den) * cap(e)`` for every edge."""
        z = self.z
        return all(f * k_den <= k_num * c * z for f, c in zip(self.values, self.graph.caps))

    def rescaled(self, z: int) -> "ScaledFlow":
        if z % self.z:
            raise ScaleMismatch(f"cannot move scale {self.z} to {z}")
        k = z // self.z
        return ScaledFlow(self.graph, z, tuple(x * k for x in self.values))

    def routed_demand(self) -> Demand:
        """The exact demand this flow routes: positive net outflow is source mass."""
        out = self.net_out()
        return Demand(self.z, tuple(max(0, x) for x in out), tuple(max(0, -x) for x in out))


@dataclass(frozen=True)
class CutResult:
    """A vertex side S with crossing capacities and terminal-edge volumes."""

    side: frozenset[int]
    forward: int
    backward: int
    vol_side: int = 0
    vol_rest: int = 0
    scale: int = 1

    def __post_init__(self) -> None:
        if not self.side:
            raise ValueError("cut side is empty")

    def min_volume(self) -> int:
        return min(self.vol_side, self.vol_rest)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    value: int = 0
    residual_src: tuple[int, ...] = field(default=(), repr=False)
    residual_snk: tuple[int, ...] = field(default=(), repr=False)

    def __bool__(self) -> bool:
        return self.ok


def net_outflow(g: CapGraph, values: Sequence[int]) -> list[int]:
    out = [0] * g.n
    for u, v, f in zip(g.tails, g.heads, values):
        if f:
            out[u] += f
            out[v] -= f
    return out


def crossing_capacity(g: CapGraph, side: Iterable[int], caps: Sequence[int] | None = None) -> tuple[int, int]:
    """Total capacity of edges leaving and entering ``side``."""
    inside = [False] * g.n
    for v in side:
        inside[v] = True
    caps = g.caps if caps is None else caps
    fwd = bwd = 0
    for u, v, c in zip(g.tails, g.heads, caps):
        if inside[u] and not inside[v]:
            fwd += c
        elif inside[v] and not inside[u]:
            bwd += c
    return fwd, bwd


def check_feasible(g: CapGraph, d: Demand, f: ScaledFlow, k_num: int = 1, k_den: int = 1) -> Verdict:
    """Check congestion and residual-demand bounds of ``f`` against ``d``.

    The flow value is reported as ``sum(Δ - Δ_f)``; for an accepted flow this
    equals ``sum(∇ - ∇_f)``.
    """
    if f.z != d.z:
        raise ScaleMismatch(f"flow scale {f.z} != demand scale {d.z}")
    if d.n != g.n or f.graph.m != g.m:
        raise ValueError("flow or demand does not belong to this graph")
    z = f.z
    for e, (fv, c) in enumerate(zip(f.values, g.caps)):
        if fv * k_den > k_num * c * z:
            return Verdict(False, f"congestion exceeded on edge {e}")
    out = net_outflow(g, f.values)
    rsrc = []
    rsnk = []
    for u in range(g.n):
        a, b = d.src[u], d.snk[u]
        ds = max(0, a - b - out[u])
        dt = max(0, b - a + out[u])
        if ds > a:
            return Verdict(False, f"excess source residual at vertex {u}")
        if dt > b:
            return Verdict(False, f"excess sink residual at vertex {u}")
        rsrc.append(ds)
        rsnk.append(dt)
    value = sum(d.src) - sum(rsrc)
    return Verdict(True, "", value, tuple(rsrc), tuple(rsnk))


def scc(g: CapGraph, edge_filter: Callable[[int], bool] | None = None,
        vertices: Sequence[int] | None = None) -> tuple[list[int], int]:
    """Strongly connected components restricted to edges passing the filter.

    Components are numbered in topological order of the condensation: if a
    vertex of component ``a`` reaches a vertex of component ``b != a`` then
    ``a < b``. When ``vertices`` is given only those vertices get ids (others
    get -1) and only edges between them are used.
    """
    n = g.n
    adj: list[list[int]] = [[] for _ in range(n)]
    active = [True] * n
    if vertices is not None:
        active = [False] * n
        for v in vertices:
            active[v] = True
    for e, (u, v) in enumerate(zip(g.tails, g.heads)):
        if active[u] and active[v] and (edge_filter is None or edge_filter(e)):
            adj[u].append(v)
    order = range(n) if vertices is None else sorted(vertices)
    comp, count = _tarjan(n, adj, order)
    # Tarjan emits sinks first; flip to get topological numbering.
    return [count - 1 - c if c >= 0 else -1 for c in comp], count


def _tarjan(n: int, adj: list[list[int]], order: Iterable[int]) -> tuple[list[int], int]:
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    count = 0
    for root in order:
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            nbrs = adj[v]
            if i < len(nbrs):
                work[-1] = (v, i + 1)
                w = nbrs[i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                p = work[-1][0]
                if low[v] < low[p]:
                    low[p] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = count
                    if w == v:
                        break
                count += 1
    return comp, count


@dataclass(frozen=True)
class ScalingPlan:
    """Bit-scaling plan: the instance was shifted right by ``shift`` bits."""

    shift: int
    original: CapGraph

    @property
    def identity(self) -> bool:
        return self.shift == 0

    def level_caps(self, j: int) -> tuple[int, ...]:
        """Capacities ``floor(c / 2**j)`` for scaling level ``j``."""
        return tuple(c >> j for c in self.original.caps)


def normalize_capacities(g: CapGraph) -> tuple[CapGraph, ScalingPlan]:
    """Return an instance with capacities at most ``n**2`` plus the plan to undo it."""
    top = g.max_capacity()
    if top > MAX_CAPACITY:
        raise CapacityOverflow(f"capacity {top} exceeds 2**62")
    bound = max(1, g.n * g.n)
    shift = 0
    while (top >> shift) > bound:
        shift += 1
    if shift == 0:
        return g, ScalingPlan(0, g)
    return g.with_caps(tuple(c >> shift for c in g.caps)), ScalingPlan(shift, g)


def parse_dimacs(data: bytes | str) -> tuple[CapGraph, int, int]:
    """Parse a DIMACS max-flow instance into a 0-based graph and terminals.

    Arcs of capacity zero are dropped.
    """
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    n = m_decl = None
    s = t = None
    edges: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        kind = parts[0]
        if kind == "p":
            if n is not None:
                raise MalformedHeader(f"line {lineno}: second problem line")
            if len(parts) != 4 or parts[1] != "max":
                raise MalformedHeader(f"line {lineno}: expected 'p max n m'")
            try:
                n, m_decl = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedHeader(f"line {lineno}: non-integer size") from None
            if n < 0 or m_decl < 0:
                raise MalformedHeader(f"line {lineno}: negative size")
            continue
        if n is None:
            raise MalformedHeader(f"line {lineno}: content before problem line")
        if kind == "n":
            if len(parts) != 3 or parts[2] not in ("s", "t"):
                raise MalformedLine(f"line {lineno}: expected 'n id s|t'")
            v = _vertex(parts[1], n, lineno)
            if parts[2] == "s":
                if s is not None:
                    raise DuplicateTerminal(f"line {lineno}: second source")
                s = v
            else:
                if t is not None:
                    raise DuplicateTerminal(f"line {lineno}: second sink")
                t = v
        elif kind == "a":
            if len(parts) != 4:
                raise MalformedLine(f"line {lineno}: expected 'a u v cap'")
            u = _vertex(parts[1], n, lineno)
            v = _vertex(parts[2], n, lineno)
            try:
                c = int(parts[3])
            except ValueError:
                raise MalformedLine(f"line {lineno}: non-integer capacity") from None
            if c < 0:
                raise NegativeCapacity(f"line {lineno}: capacity {c}")
            if c > MAX_CAPACITY:
                raise CapacityOverflow(f"line {lineno}: capacity {c} exceeds 2**62")
            if c > 0:
                edges.append((u, v, c))
        else:
            raise MalformedLine(f"line {lineno}: unknown line type {kind!r}")
    if n is None:
        raise MalformedHeader("missing problem line")
    if s is None or t is None:
        raise MalformedLine("source or sink designation missing")
    return CapGraph.from_edges(n, edges), s, t


def _vertex(tok: str, n: int, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise MalformedLine(f"line {lineno}: non-integer vertex id") from None
    if not 1 <= v <= n:
        raise VertexOutOfRange(f"line {lineno}: vertex {v} not in 1..{n}")
    return v - 1


def write_dimacs(g: CapGraph, s: int, t: int) -> str:
    lines = [f"p max {g.n} {g.m}", f"n {s + 1} s", f"n {t + 1} t"]
    lines.extend(f"a {u + 1} {v + 1} {c}" for u, v, c in g.edges())
    return "\n".join(lines) + "\n"


def flow_to_json(g: CapGraph, values: Sequence[int], value: int, scale: int = 1) -> str:
    doc = {
        "value": int(value),
        "scale": int(scale),
        "edges": [
            {"tail": int(u), "head": int(v), "flow": int(f)}
            for u, v, f in zip(g.tails, g.heads, values)
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def flow_from_json(text: str) -> tuple[int, int, list[tuple[int, int, int]]]:
    doc = json.loads(text)
    edges = [(int(e["tail"]), int(e["head"]), int(e["flow"])) for e in doc["edges"]]
    return int(doc["value"]), int(doc["scale"]), edges


def verify_st_flow(g: CapGraph, s: int, t: int, value: int, scale: int,
                   edges: Sequence[tuple[int, int, int]]) -> str | None:
    """Return ``None`` if the flow is a feasible s-t flow of the stated value,
    otherwise a description of the first violated constraint."""
    if scale < 1:
        return "scale must be positive"
    if len(edges) != g.m:
        return f"edge count {len(edges)} != {g.m}"
    vals = []
    for e, ((u, v, c), (a, b, f)) in enumerate(zip(g.edges(), edges)):
        if (u, v) != (a, b):
            return f"edge {e} endpoints ({a},{b}) != ({u},{v})"
        if f < 0:
            return f"edge {e}: negative flow"
        if f > c * scale:
            return f"edge {e}: capacity exceeded ({f} > {c * scale})"
        vals.append(f)
    out = net_outflow(g, vals)
    for v in range(g.n):
        if v not in (s, t) and out[v] != 0:
            return f"conservation violated at vertex {v}"
    if s != t and out[s] != value:
        return f"value mismatch: source emits {out[s]}, declared {value}"
    return None
