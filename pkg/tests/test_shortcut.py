import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph, reach_matrix
from hierflow.graph import CapGraph, net_outflow
from hierflow.shortcut import (Hierarchy, HierarchyError, build_shortcut, respecting_order,
                               split_shortcut, weight_fn)


def random_hierarchy(rng, n, m, L, cap_max=9):
    g = random_graph(rng, n, m, cap_max)
    levels = [rng.randint(1, L) for _ in range(g.m)]
    return g, Hierarchy.build(g, levels, L)


def order_violations(g, h, tau):
    """Brute-force check of contiguity and forward reachability."""
    bad = []
    for i in range(1, h.L + 1):
        for members in h.members(i):
            ranks = sorted(tau[v] for v in members)
            if ranks != list(range(ranks[0], ranks[0] + len(ranks))):
                bad.append(("gap", i, members))
        reach = reach_matrix(g.n, [(u, v) for e, (u, v, _) in enumerate(g.edges()) if h.levels[e] <= i])
        for u in range(g.n):
            for v in reach[u]:
                if h.comp[i][u] != h.comp[i][v] and tau[u] >= tau[v]:
                    bad.append(("back", i, u, v))
    return bad


# ----------------------------------------------------------------- order

def test_dag_order_is_topological():
    g = CapGraph.from_edges(4, [(2, 0, 1), (0, 3, 1), (2, 1, 1), (1, 3, 1)])
    h = Hierarchy.build(g, [1] * 4, 1)
    tau = respecting_order(g, h).tau
    for u, v, _ in g.edges():
        assert tau[u] < tau[v]


def test_two_cycles_joined():
    a, b, c, d = range(4)
    g = CapGraph.from_edges(4, [(c, d, 1), (d, c, 1), (a, b, 1), (b, a, 1), (b, c, 1)])
    h = Hierarchy.build(g, [1, 1, 1, 1, 2], 2)
    tau = respecting_order(g, h).tau
    assert {tau[a], tau[b]} == {0, 1}
    assert {tau[c], tau[d]} == {2, 3}


@pytest.mark.parametrize("seed", range(10))
def test_order_exhaustive_on_random_hierarchies(seed):
    rng = random.Random(seed)
    g, h = random_hierarchy(rng, 15, rng.randint(15, 45), 3)
    h.validate()
    assert order_violations(g, h, respecting_order(g, h).tau) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_laminarity_and_backward_containment(seed):
    rng = random.Random(seed)
    g, h = random_hierarchy(rng, rng.randint(2, 10), rng.randint(0, 30), rng.randint(1, 4))
    for i in range(h.L):
        for j in range(i + 1, h.L + 1):
            owner = {}
            for v in range(g.n):
                assert owner.setdefault(h.comp[i][v], h.comp[j][v]) == h.comp[j][v]
    tau = respecting_order(g, h).tau
    for e, (u, v, _) in enumerate(g.edges()):
        i = h.levels[e]
        if tau[u] > tau[v]:
            assert h.comp[i][u] == h.comp[i][v]


def test_bad_level_vector():
    g = CapGraph.from_edges(2, [(0, 1, 1)])
    with pytest.raises(HierarchyError):
        Hierarchy.build(g, [0], 1)
    with pytest.raises(HierarchyError):
        Hierarchy.build(g, [1, 1], 1)


# ----------------------------------------------------------------- stars

def test_star_on_two_cycle():
    g = CapGraph.from_edges(2, [(0, 1, 8), (1, 0, 8)])
    sg = build_shortcut(g, Hierarchy.build(g, [1, 1], 1), 4)
    assert sg.num_stars == 1
    star = range(g.m, sg.graph.m)
    assert len(star) == 4
    assert all(sg.star_capacity(e) == 2 for e in star)
    r = sg.star_root(0)
    ends = sorted((sg.graph.tails[e], sg.graph.heads[e]) for e in star)
    assert ends == sorted([(0, r), (r, 0), (1, r), (r, 1)])


def test_parallel_leaf_edges_merge():
    g = CapGraph.from_edges(2, [(0, 1, 3), (0, 1, 5), (1, 0, 1)])
    sg = build_shortcut(g, Hierarchy.build(g, [1, 1, 1], 1), 1)
    leaf0 = [e for e in range(g.m, sg.graph.m) if 0 in (sg.graph.tails[e], sg.graph.heads[e])]
    assert len(leaf0) == 2
    assert all(sg.graph.caps[e] == 8 for e in leaf0)


def test_base_capacity_stored_at_scale():
    g = CapGraph.from_edges(2, [(0, 1, 7)])
    sg = build_shortcut(g, Hierarchy.build(g, [1], 1), 5)
    assert sg.graph.caps[0] == 35 and sg.star_capacity(0) == 7


def test_self_loop_adds_no_star():
    g = CapGraph.from_edges(2, [(0, 0, 4), (0, 1, 1)])
    assert build_shortcut(g, Hierarchy.build(g, [1, 1], 1), 1).num_stars == 0


@pytest.mark.parametrize("seed", range(8))
def test_star_count_and_capacity_recount(seed):
    rng = random.Random(50 + seed)
    g, h = random_hierarchy(rng, 12, 40, 3)
    q = rng.randint(1, 6)
    sg = build_shortcut(g, h, q)
    naive = {}
    for e, (u, v, c) in enumerate(g.edges()):
        i = h.levels[e]
        if u != v and h.comp[i][u] == h.comp[i][v]:
            naive[(i, h.comp[i][u])] = naive.get((i, h.comp[i][u]), 0) + c
    assert sg.num_stars == len(naive)
    for k, key in enumerate(sg.star_keys):
        total = sum(sg.graph.caps[g.m + j] for j, (kk, _l, _d) in enumerate(sg.star_edges) if kk == k)
        assert total == 2 * naive[key]
        assert sg.star_size[k] == sum(1 for v in range(g.n) if h.comp[key[0]][v] == key[1])


def test_skip_top_omits_top_stars():
    g = CapGraph.from_edges(3, [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1)])
    h = Hierarchy.build(g, [1, 1, 2, 2], 2)
    assert [k[0] for k in build_shortcut(g, h, 1).star_keys] == [1, 2]
    assert [k[0] for k in build_shortcut(g, h, 1, skip_top=True).star_keys] == [1]


# ----------------------------------------------------------------- weights

def test_weights_rank_gap_and_star_size():
    n = 5
    edges = [(i, (i + 1) % n, 1) for i in range(n)]
    g = CapGraph.from_edges(n, edges)
    sg = build_shortcut(g, Hierarchy.build(g, [1] * n, 1), 1)
    w = weight_fn(sg).weights
    tau = sg.order.tau
    for e, (u, v, _) in enumerate(g.edges()):
        assert w[e] == abs(tau[u] - tau[v])
    assert all(x == 5 for x in w[g.m:])


def test_harmonic_sum_on_complete_graph():
    n = 10
    g = CapGraph.from_edges(n, [(u, v, 1) for u in range(n) for v in range(n) if u != v])
    sg = build_shortcut(g, Hierarchy.build(g, [1] * g.m, 1), 1)
    w = weight_fn(sg).weights
    lhs = sum(Fraction(1, x) for x in w[:g.m])
    rhs = 2 * sum(Fraction(1, j - i) for i in range(n) for j in range(i + 1, n))
    assert lhs <= rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_harmonic_bounds_simple_graphs(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 10)
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    chosen = rng.sample(pairs, rng.randint(1, len(pairs)))
    g = CapGraph.from_edges(n, [(u, v, rng.randint(1, 5)) for u, v in chosen])
    L = rng.randint(1, 3)
    h = Hierarchy.build(g, [rng.randint(1, L) for _ in range(g.m)], L)
    sg = build_shortcut(g, h, 1)
    w = weight_fn(sg).weights
    H = sum(Fraction(1, k) for k in range(1, n + 1))
    assert sum(Fraction(1, x) for x in w[:g.m]) <= 2 * n * H
    assert sum(Fraction(1, x) for x in w[g.m:]) <= n * L


# ----------------------------------------------------------------- split

def test_split_keeps_untouched_component():
    g = CapGraph.from_edges(4, [(0, 1, 2), (1, 0, 2), (2, 3, 1), (3, 2, 1), (1, 2, 5)])
    sg = build_shortcut(g, Hierarchy.build(g, [1, 1, 1, 1, 2], 2), 1)
    a, b, _ = split_shortcut(sg, {0, 1})
    assert a.num_stars == 1 and b.num_stars == 1
    key = (1, sg.hierarchy.comp[1][0])
    k = sg.star_keys.index(key)
    whole = [sg.graph.caps[sg.m + j] for j, (kk, _l, _d) in enumerate(sg.star_edges) if kk == k]
    assert sorted(a.graph.caps[a.m:]) == sorted(whole) == [2, 2, 2, 2]


def test_split_cuts_component_in_half():
    g = CapGraph.from_edges(4, [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 3, 1), (3, 2, 1), (3, 0, 1)])
    sg = build_shortcut(g, Hierarchy.build(g, [1] * 6, 1), 1)
    assert sg.num_stars == 1
    a, b, _ = split_shortcut(sg, {0, 1})
    assert a.num_stars == 1 and b.num_stars == 1
    assert sum(a.graph.caps[a.m:]) == 4 and sum(b.graph.caps[b.m:]) == 4


@pytest.mark.parametrize("seed", range(10))
def test_split_flow_maps_back(seed):
    rng = random.Random(300 + seed)
    g, h = random_hierarchy(rng, 14, 45, 3)
    sg = build_shortcut(g, h, rng.randint(1, 4))
    side = set(rng.sample(range(14), rng.randint(1, 13)))
    a, b, (ma, mb) = split_shortcut(sg, side)
    mapped = [0] * sg.graph.m
    expected = [0] * sg.graph.n
    for piece, emap in ((a, ma), (b, mb)):
        vals = [rng.randint(0, c) for c in piece.graph.caps]
        for e, x in enumerate(vals):
            mapped[emap[e]] += x
        for v, x in enumerate(net_outflow(piece.graph, vals)):
            expected[piece.parent_vertex[v]] += x
    assert all(0 <= x <= c for x, c in zip(mapped, sg.graph.caps))
    assert net_outflow(sg.graph, mapped) == expected


def test_split_rejects_trivial_side():
    g = CapGraph.from_edges(2, [(0, 1, 1)])
    sg = build_shortcut(g, Hierarchy.build(g, [1], 1), 1)
    with pytest.raises(ValueError):
        split_shortcut(sg, set())
    with pytest.raises(ValueError):
        split_shortcut(sg, {0, 1})
