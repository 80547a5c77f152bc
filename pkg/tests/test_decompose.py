import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from hierflow import _kernels
from hierflow.decompose import (LinkCutForest, filter_short_paths, path_decompose, recompose,
                                round_flow, round_values)
from hierflow.graph import CapGraph, Demand, ScaledFlow, net_outflow
from hierflow.push_relabel import WeightFn, weighted_push_relabel


def random_flow(rng, n, m, cap_max=9):
    """A random s-t-ish flow: push-relabel output plus a random circulation on top."""
    g = random_graph(rng, n, m, cap_max)
    src = tuple(rng.randint(0, 8) if rng.random() < 0.3 else 0 for _ in range(n))
    snk = tuple(rng.randint(0, 8) if rng.random() < 0.3 else 0 for _ in range(n))
    res = weighted_push_relabel(g, None, Demand(1, src, snk), WeightFn((1,) * g.m, n))
    vals = list(res.flow.values)
    # add a random cycle built from existing edges when one closes
    if g.m:
        e0 = rng.randrange(g.m)
        for e in range(g.m):
            if g.tails[e] == g.heads[e0] and g.heads[e] == g.tails[e0] and e != e0:
                vals[e] += 2
                vals[e0] += 2
                break
    return g, vals


def check_rep(g, vals, rep, weights):
    assert recompose(rep) == tuple(vals)
    assert all(x == 0 for x in net_outflow(g, rep.circulation))
    assert len(rep.paths) <= g.m + g.n
    for p, seq in zip(rep.paths, rep.witnesses):
        verts = [g.tails[seq[0]]] + [g.heads[e] for e in seq] if seq else [p.s]
        assert verts[0] == p.s and verts[-1] == p.t
        assert len(set(verts)) == len(verts)
        assert p.W >= sum(weights[e] for e in seq)


def test_single_path():
    g = CapGraph.from_edges(3, [(0, 1, 5), (1, 2, 5)])
    rep = path_decompose(g, [3, 3])
    assert [(p.lam, p.s, p.t) for p in rep.paths] == [(3, 0, 2)]
    assert rep.circulation == (0, 0)


def test_pure_cycle():
    g = CapGraph.from_edges(3, [(0, 1, 5), (1, 2, 5), (2, 0, 5)])
    rep = path_decompose(g, [2, 2, 2])
    assert rep.paths == () and rep.circulation == (2, 2, 2)


@pytest.mark.parametrize("seed", range(12))
def test_recomposition_identity(seed):
    rng = random.Random(seed)
    g, vals = random_flow(rng, 20, rng.randint(20, 60))
    weights = [rng.randint(1, 6) for _ in range(g.m)]
    rep = path_decompose(g, vals, weights, witness=True)
    check_rep(g, vals, rep, weights)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_compiled_matches_pure(seed):
    rng = random.Random(seed)
    g, vals = random_flow(rng, rng.randint(2, 12), rng.randint(1, 30))
    weights = [rng.randint(1, 6) for _ in range(g.m)]
    thr = rng.randint(1, 20)
    a = path_decompose(g, vals, weights, threshold=thr, witness=True)
    b = path_decompose(g, vals, weights, threshold=thr)
    assert (a.circulation, a.paths, a.short_flow) == (b.circulation, b.paths, b.short_flow)
    check_rep(g, vals, a, weights)


def test_stale_root_update_not_charged():
    # cycle cancelled while 2 is a root, then 2 links onward
    g = CapGraph.from_edges(4, [(0, 1, 9), (1, 2, 9), (2, 1, 9), (2, 3, 9)])
    for compiled in (False, True):
        prev = _kernels.set_enabled(compiled and _kernels.AVAILABLE)
        try:
            rep = path_decompose(g, [2, 4, 2, 2], threshold=10)
        finally:
            _kernels.set_enabled(prev)
        assert rep.circulation == (0, 2, 2, 0)
        assert rep.short_flow == (2, 2, 0, 2)


# ----------------------------------------------------------------- filtering

def _two_route_graph(h):
    # direct edge weight 1 and a detour of total weight 2h+1
    g = CapGraph.from_edges(3, [(0, 2, 4), (0, 1, 4), (1, 2, 4)])
    return g, [1, h, h + 1]


def test_filter_keeps_light_path():
    h = 5
    g, w = _two_route_graph(h)
    rep = path_decompose(g, [4, 4, 4], w, threshold=2 * h)
    kept, flow, rest = filter_short_paths(rep, 2 * h)
    assert [(p.lam, p.W) for p in kept.paths] == [(4, 1)]
    assert flow.values == (4, 0, 0)
    assert rest.src[0] == 4 and rest.snk[2] == 4


def test_filter_all_short():
    g, w = _two_route_graph(5)
    rep = path_decompose(g, [4, 4, 4], w, threshold=100)
    kept, flow, rest = filter_short_paths(rep, 100)
    assert len(kept.paths) == len(rep.paths)
    assert flow.values == (4, 4, 4)
    assert not any(rest.src) and not any(rest.snk)


@pytest.mark.parametrize("seed", range(10))
def test_markov_half(seed):
    rng = random.Random(70 + seed)
    n = 16
    g = random_graph(rng, n, 50, 9)
    wts = tuple(rng.randint(1, 8) for _ in range(g.m))
    h = rng.randint(2, 10)
    res = weighted_push_relabel(g, None, Demand.st(n, 0, n - 1, 200), WeightFn(wts, h))
    rep = path_decompose(g, res.flow.values, wts, threshold=18 * h)
    kept, _, _ = filter_short_paths(rep, 18 * h)
    assert 2 * kept.value() >= res.value


# ----------------------------------------------------------------- rounding

def test_round_exact_multiples():
    g = CapGraph.from_edges(3, [(0, 1, 9), (1, 2, 9)])
    out = round_flow(g, ScaledFlow(g, 4, (8, 8)), Demand.st(3, 0, 2, 8, z=4), 4)
    assert out.values == (2, 2)


def test_round_parallel_halves():
    g = CapGraph.from_edges(2, [(0, 1, 1), (0, 1, 1)])
    out = round_flow(g, ScaledFlow(g, 2, (1, 1)), Demand.st(2, 0, 1, 2, z=2), 2)
    assert sorted(out.values) == [0, 1]


def test_round_rejects_indivisible_demand():
    g = CapGraph.from_edges(2, [(0, 1, 1)])
    with pytest.raises(ValueError):
        round_flow(g, ScaledFlow(g, 2, (1,)), Demand.st(2, 0, 1, 1, z=2), 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_round_ceiling_and_demand(seed):
    rng = random.Random(seed)
    z = 8
    n = 16
    g, vals = random_flow(rng, n, rng.randint(10, 50))
    scaled = [z * x for x in vals]
    # perturb along random cycles of parallel pairs keeps net flow intact
    for e in range(g.m):
        for f in range(e + 1, g.m):
            if (g.tails[e], g.heads[e]) == (g.tails[f], g.heads[f]) and scaled[f] > 0:
                d = rng.randint(0, min(scaled[f], z - 1))
                scaled[e] += d
                scaled[f] -= d
                break
    out = net_outflow(g, scaled)
    d = Demand(z, tuple(max(0, x) for x in out), tuple(max(0, -x) for x in out))
    r = round_flow(g, ScaledFlow(g, z, tuple(scaled)), d, z)
    assert all(a <= -(-b // z) for a, b in zip(r.values, scaled))
    assert net_outflow(g, r.values) == [x // z for x in out]


def test_round_prefer_up_reaches_ceiling():
    # closed s->t->s flow of 1/3 on the closing edge
    vals = round_values(2, (0, 1), (1, 0), [1, 1], 3, prefer_up=1)
    assert vals == [1, 1]


# ----------------------------------------------------------------- dynamic trees

def test_link_cut_path_queries():
    lct = LinkCutForest(4)
    lct.link(0, 1, 5, 2)
    lct.link(1, 2, 3, 4)
    assert lct.find_root(0) == 2
    assert lct.path_min(0) == 3
    assert lct.path_weight(0) == 6
    lct.path_add(0, -3)
    assert lct.path_min(0) == 0
    assert lct.argmin(0) == 1
    val, _, _ = lct.cut(1)
    assert val == 0
    assert lct.find_root(0) == 1
