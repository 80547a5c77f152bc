import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from hierflow.graph import CapGraph, Demand, ScaledFlow, check_feasible, net_outflow
from hierflow.hierarchy_builder import (PRACTICAL, THEORY, build_hierarchy, get_profile, next_kappa,
                                        nominal_levels, unfold)
from hierflow.sparse_cut import approx_maxflow_shortcut


def barbell(k=5, cap=1000, bridge=1):
    edges = [(u, v, cap) for u in range(k) for v in range(k) if u != v]
    edges += [(k + u, k + v, cap) for u in range(k) for v in range(k) if u != v]
    edges += [(k - 1, k, bridge), (k, k - 1, bridge)]
    return CapGraph.from_edges(2 * k, edges)


# ----------------------------------------------------------------- parameters

@pytest.mark.parametrize("c", [1, 2, 9, 10, 11, 100, 12345, 10**9])
def test_nominal_levels_matches_float_formula(c):
    expect = 1 if c == 1 else math.ceil(math.log(c) / math.log(10 / 9) - 1e-12) + 1
    assert nominal_levels(c) == expect


def test_nominal_levels_frozen():
    # ceil(log_{10/9} 10) = 22
    assert nominal_levels(10) == 23


def test_next_kappa():
    assert next_kappa(100, 1) == 201
    assert next_kappa(1000, 10) == 1101


def test_profiles():
    assert PRACTICAL.rounds(37) == 112
    assert PRACTICAL.rounds(1) == 0
    assert PRACTICAL.phi_exp(1000) == Fraction(1, 16)
    assert PRACTICAL.delta(112) == Fraction(1, 3584)
    assert THEORY.phi_exp(16) == Fraction(1, 64)
    assert THEORY.phi_rand(4) == Fraction(1, 128)
    assert get_profile("theory") is THEORY
    with pytest.raises(ValueError):
        get_profile("fast")


# ----------------------------------------------------------------- construction

def check_built(bh):
    g = bh.graph
    assert all(1 <= x <= bh.L + 1 for x in bh.levels)
    caps = bh.round_capacities()
    for a, b in zip(caps, caps[1:]):
        assert 10 * b <= 9 * a
    top = [e for e in range(g.m) if bh.levels[e] == bh.L + 1 and g.tails[e] != g.heads[e]]
    assert top == []
    assert bh.L <= bh.L_nominal
    # the final hierarchy has stars on every level, none above it
    assert bh.final_sg.hierarchy.L == bh.L
    assert bh.z == 200 * bh.L_nominal * bh.q
    assert bh.q * bh.phi >= 1


def test_single_edge():
    bh = build_hierarchy(CapGraph.from_edges(2, [(0, 1, 6)]))
    assert bh.L == 1 and bh.levels == (1,)
    check_built(bh)


def test_self_loops_only():
    bh = build_hierarchy(CapGraph.from_edges(2, [(0, 0, 6), (1, 1, 2)]))
    assert bh.L == 0
    check_built(bh)


def test_barbell_gets_two_levels():
    g = barbell()
    bh = build_hierarchy(g)
    assert bh.L == 2
    assert bh.levels.count(2) == 1
    e = bh.levels.index(2)
    assert e in (g.m - 2, g.m - 1)
    check_built(bh)


@pytest.mark.parametrize("seed", range(10))
def test_random_builds(seed):
    rng = random.Random(800 + seed)
    g = random_graph(rng, rng.randint(3, 14), rng.randint(3, 40), rng.choice([1, 10, 1000]))
    check_built(build_hierarchy(g, PRACTICAL, seed))


def test_same_seed_same_hierarchy():
    g = random_graph(random.Random(3), 12, 40, 50)
    a = build_hierarchy(g, PRACTICAL, 17)
    b = build_hierarchy(g, PRACTICAL, 17)
    assert a.levels == b.levels and a.final_sg.order == b.final_sg.order


# ----------------------------------------------------------------- unfolding

def check_unfold(g, s, t, bh):
    res = approx_maxflow_shortcut(bh.final_sg, s, t)
    f, kappa = unfold(bh, res.values)
    z = bh.z
    vz = res.value * (z // bh.q)
    assert kappa <= 3 * z
    assert check_feasible(g, Demand.st(g.n, s, t, vz, z), ScaledFlow(g, z, tuple(f)), 3, 1).ok
    out = net_outflow(g, f)
    assert out[s] == vz and out[t] == -vz
    assert all(x == 0 for v, x in enumerate(out) if v not in (s, t))
    return res, f


def test_unfold_barbell_crosses_both_levels():
    g = barbell()
    bh = build_hierarchy(g)
    res, f = check_unfold(g, 0, 9, bh)
    assert res.value > 0
    assert [x["round"] for x in bh.unfold_log] == [2, 1]


@pytest.mark.parametrize("seed", range(12))
def test_unfold_random(seed):
    rng = random.Random(1200 + seed)
    n = rng.randint(3, 12)
    g = random_graph(rng, n, rng.randint(n, 4 * n), rng.choice([1, 5, 100]))
    bh = build_hierarchy(g, PRACTICAL, seed)
    check_unfold(g, 0, n - 1, bh)


def test_unfold_rejects_overfull_input():
    g = CapGraph.from_edges(2, [(0, 1, 3)])
    bh = build_hierarchy(g)
    vals = [c + 1 for c in bh.final_sg.graph.caps]
    with pytest.raises(ValueError):
        unfold(bh, vals)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_unfold_property(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    g = random_graph(rng, n, rng.randint(1, 20), 9)
    check_unfold(g, 0, n - 1, build_hierarchy(g, PRACTICAL, seed))
