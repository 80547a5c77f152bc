"""Non-stop cut-matching game.

The cut player keeps a row-stochastic mixing matrix over the base vertices,
projects it on a fresh Gaussian direction each round and splits the alive
measure at its weighted median. The matching player answers with a pair of
short-path flows (forward on the shortcut graph, backward on its reversal);
their path triples form a bidirectional matching. Instead of aborting when a
matching is incomplete, vertices that keep less than half of their original
measure are removed and the game carries on with the alive measure.

Measures are integer vectors at the shortcut scale ``q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Sequence

import numpy as np

from .graph import CutResult, Demand
from .sparse_cut import ShortDecompOutput, flow_with_short_decomposition, terminal_volumes
from .shortcut import ShortcutGraph


@dataclass(frozen=True)
class Measure:
    z: int
    values: tuple[int, ...]

    def total(self) -> int:
        return sum(self.values)


@dataclass
class BiMatching:
    """Forward edges go from P to Q, backward edges from Q to P."""

    forward: dict[tuple[int, int], int]
    backward: dict[tuple[int, int], int]
    d_fwd: list[int]
    d_bwd: list[int]
    fwd_run: ShortDecompOutput | None = field(default=None, repr=False)
    bwd_run: ShortDecompOutput | None = field(default=None, repr=False)

    def edges(self) -> list[tuple[int, int, int]]:
        out = [(u, v, c) for (u, v), c in sorted(self.forward.items())]
        out += [(u, v, c) for (u, v), c in sorted(self.backward.items())]
        return out


@dataclass
class MatchingOutcome:
    cut: CutResult | None
    matching: BiMatching | None


@dataclass
class CMGWitness:
    matchings: list[BiMatching]
    alive: list[int]
    d: list[int]
    rounds: int
    history: list[int]
    h: int = 0

    def edges(self) -> list[tuple[int, int, int]]:
        out: list[tuple[int, int, int]] = []
        for mt in self.matchings:
            out.extend(mt.edges())
        return out


@dataclass
class CMGOutcome:
    witness: CMGWitness | None
    cut: CutResult | None
    rounds: int
    history: list[int]


def matching_kappa(phi: Fraction) -> int:
    return math.ceil(Fraction(50) / Fraction(phi))


def _orient_small(cut: CutResult, sg: ShortcutGraph) -> CutResult:
    if cut.vol_side <= cut.vol_rest:
        return cut
    other = frozenset(range(sg.graph.n)) - cut.side
    return CutResult(other, cut.backward, cut.forward, cut.vol_rest, cut.vol_side, cut.scale)


def matching_player(sg: ShortcutGraph, F: Collection[int], P: Sequence[bool], dprime: Sequence[int],
                    phi: Fraction, delta: Fraction, h: int | None = None) -> MatchingOutcome:
    """Either a balanced sparse cut or a bidirectional matching of ``dprime``.

    ``P[v]`` marks the source side; ``dprime`` must put equal mass on both sides.
    """
    n = sg.n
    if len(P) != n or len(dprime) != n:
        raise ValueError("bipartition must cover exactly the base vertices")
    kappa = matching_kappa(phi)
    vol = terminal_volumes(sg, F)
    vol_total = sum(vol[:n])
    src = tuple(dprime[v] if P[v] else 0 for v in range(n))
    snk = tuple(0 if P[v] else dprime[v] for v in range(n))
    dem = Demand(sg.q, src, snk)
    delta = Fraction(delta)

    def balanced(cut: CutResult) -> bool:
        return 2 * cut.min_volume() * delta.denominator >= delta.numerator * vol_total

    fwd = flow_with_short_decomposition(sg, F, dem, kappa, h)
    if fwd.cut is not None and balanced(fwd.cut):
        return MatchingOutcome(_orient_small(fwd.cut, sg), None)
    rsg = sg.reversed()
    bwd = flow_with_short_decomposition(rsg, F, dem, kappa, fwd.h)
    if bwd.cut is not None and balanced(bwd.cut):
        c = bwd.cut
        flipped = CutResult(c.side, c.backward, c.forward, c.vol_side, c.vol_rest, c.scale)
        return MatchingOutcome(_orient_small(flipped, sg), None)
    forward = fwd.matching()
    backward = {(t, s): c for (s, t), c in bwd.matching().items()}
    d_fwd = [0] * n
    d_bwd = [0] * n
    for (u, v), c in forward.items():
        d_fwd[u] += c
        d_fwd[v] += c
    for (u, v), c in backward.items():
        d_bwd[u] += c
        d_bwd[v] += c
    return MatchingOutcome(None, BiMatching(forward, backward, d_fwd, d_bwd, fwd, bwd))


@dataclass
class CutPlayerState:
    mix: np.ndarray
    rng: np.random.Generator

    @classmethod
    def start(cls, n: int, rng: np.random.Generator) -> "CutPlayerState":
        return cls(np.eye(n), rng)

    def absorb(self, matching: BiMatching, alive: Sequence[int]) -> None:
        """Average rows along matching edges (symmetric, so doubly stochastic)."""
        n = self.mix.shape[0]
        step = np.eye(n)
        for (u, v, c) in matching.edges():
            if u == v:
                continue
            den = 2 * max(alive[u], alive[v], 1)
            a = c / den
            step[u, u] -= a
            step[v, v] -= a
            step[u, v] += a
            step[v, u] += a
        self.mix = step @ self.mix


def cut_player_step(state: CutPlayerState, alive: Sequence[int]) -> tuple[list[bool], list[int], int, int]:
    """Split the alive measure into two equal halves along a random projection.

    Returns ``(P, dprime, split_vertex, withheld)``. One vertex may straddle
    the median; it joins the lighter side with just enough measure to make
    both sides equal, and the rest of its measure is withheld for the round.
    A vertex with at least half the mass is put alone against the rest,
    which withholds less.
    """
    n = len(alive)
    total = sum(alive)
    if total <= 0:
        raise ValueError("alive measure is zero")
    r = state.rng.standard_normal(state.mix.shape[1])
    proj = state.mix @ r
    support = sorted((v for v in range(n) if alive[v] > 0), key=lambda v: (proj[v], v))
    P = [False] * n
    dprime = list(alive)
    pre = 0
    split = -1
    withheld = 0
    for i, v in enumerate(support):
        x = alive[v]
        if 2 * x >= total:
            # a vertex holding half the mass faces everything else
            P[v] = True
            dprime[v] = total - x
            withheld = 2 * x - total
            split = v if withheld else -1
            break
        if 2 * (pre + x) >= total:
            post = total - pre - x
            if pre <= post:
                for u in support[:i + 1]:
                    P[u] = True
                dprime[v] = post - pre
            else:
                for u in support[:i]:
                    P[u] = True
                dprime[v] = pre - post
            withheld = x - dprime[v]
            split = v if withheld else -1
            break
        pre += x
    return P, dprime, split, withheld


def non_stop_cmg(sg: ShortcutGraph, F: Collection[int], phi: Fraction, delta: Fraction, T: int,
                 rng: np.random.Generator, h: int | None = None) -> CMGOutcome:
    """Play ``T`` rounds; return the witness or the first balanced cut found."""
    n = sg.n
    F = frozenset(F)
    d = [x * sg.q for x in terminal_volumes(sg, F)[:n]]
    alive = list(d)
    history = [sum(alive)]
    matchings: list[BiMatching] = []
    if sum(d) == 0:
        return CMGOutcome(CMGWitness([], alive, d, 0, history), None, 0, history)
    state = CutPlayerState.start(n, rng)
    used_h = 0
    for t in range(T):
        if sum(alive) == 0:
            break
        P, dprime, split, withheld = cut_player_step(state, alive)
        out = matching_player(sg, F, P, dprime, phi, delta, h)
        if out.cut is not None:
            return CMGOutcome(None, out.cut, t + 1, history)
        mt = out.matching
        assert mt is not None
        if mt.fwd_run is not None:
            used_h = mt.fwd_run.h
        nxt = [0] * n
        for v in range(n):
            if alive[v] == 0:
                continue
            keep = min(mt.d_fwd[v], mt.d_bwd[v])
            if v == split:
                keep += withheld
            keep = min(keep, alive[v])
            nxt[v] = 0 if 2 * keep < d[v] else keep
        state.absorb(mt, alive)
        alive = nxt
        matchings.append(mt)
        history.append(sum(alive))
    return CMGOutcome(CMGWitness(matchings, alive, d, len(matchings), history, used_h), None,
                      len(matchings), history)


def witness_expansion_ok(n: int, edges: Sequence[tuple[int, int, int]], alive: Sequence[int],
                         phi_w: Fraction) -> bool:
    """Exhaustive directed-cut check of the witness graph for ``n <= 16``.

    For every vertex set X: W(X -> rest) and W(rest -> X) are both at least
    ``phi_w * min(alive(X), alive(rest))``.
    """
    if n > 16:
        raise ValueError("exhaustive check limited to 16 vertices")
    phi_w = Fraction(phi_w)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = [(masks >> v) & 1 for v in range(n)]
    agg: dict[tuple[int, int], int] = {}
    for u, v, c in edges:
        if u != v:
            agg[(u, v)] = agg.get((u, v), 0) + c
    limit = 1 << 62
    if sum(agg.values()) * phi_w.denominator >= limit or sum(alive) * phi_w.numerator >= limit:
        raise OverflowError("witness capacities too large for exhaustive check")
    out_cut = np.zeros(1 << n, dtype=np.int64)
    in_cut = np.zeros(1 << n, dtype=np.int64)
    for (u, v), c in agg.items():
        out_cut += c * (bits[u] & (1 - bits[v]))
        in_cut += c * (bits[v] & (1 - bits[u]))
    mass = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        if alive[v]:
            mass += alive[v] * bits[v]
    rest = sum(alive) - mass
    need = np.minimum(mass, rest) * phi_w.numerator
    ok_out = out_cut * phi_w.denominator >= need
    ok_in = in_cut * phi_w.denominator >= need
    return bool(np.all(ok_out & ok_in))


def alive_history_jsonl(outcome: CMGOutcome) -> str:
    """Per-round alive mass as JSON lines."""
    return "".join(json.dumps({"round": i, "alive": a}) + "\n" for i, a in enumerate(outcome.history))
