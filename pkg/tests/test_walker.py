from fractions import Fraction

import numpy as np
import pytest

from rotortree.analytics import escape_probability
from rotortree.generators import Bary, truncate
from rotortree.rules import Constant, Down
from rotortree.tree import build_bary, build_path, make_config
from rotortree.walker import (Arena, EscapePrefix, ImbalanceError, RotorEngine, StepBudgetExceeded,
                              VertexBudgetExceeded, check_balance, edge_discrepancy, escape_prefix,
                              fire_until_stable, run_escape_prefix, run_particle)


def test_three_particle_prefix():
    tree, cfg = truncate(Bary(2, Constant(1)), 6)
    pref, _ = run_escape_prefix(tree, cfg, 3)
    assert pref.tolist() == [1, 0, 1]
    assert pref.E(3) == 2


def test_path_down_is_absorbed():
    tree = build_path(5)
    cfg = make_config(tree, "down")
    out = run_particle(tree, cfg)
    assert out.verdict == "absorbed" and out.escaped
    assert out.steps == 5 and out.vertex == 5
    # the next particle bounces back from the base
    out2 = run_particle(tree, cfg)
    assert out2.verdict == "returned"


def test_rotor_increments_before_moving():
    tree = build_bary(2, 2)
    cfg = make_config(tree, "down")
    run_particle(tree, cfg)
    assert cfg[1] == 1  # the first particle went to child 1
    run_particle(tree, cfg)
    assert cfg[1] == 2
    out = run_particle(tree, cfg)
    assert cfg[1] == 0 and out.verdict == "returned"


def test_escape_prefix_does_not_mutate():
    tree = build_bary(2, 4)
    cfg = make_config(tree, "down")
    before = list(cfg.values)
    escape_prefix(tree, cfg, 20)
    assert list(cfg.values) == before


def test_step_budget():
    tree = build_bary(2, 12)
    cfg = make_config(tree, "full")
    with pytest.raises(StepBudgetExceeded):
        run_escape_prefix(tree, cfg, 1000, step_budget=50)


def test_lazy_arena_vertex_budget():
    arena = Arena.lazy(Bary(2, Constant(2)), depth_cap=None, vertex_budget=100, counts=False)
    eng = RotorEngine(arena, track=False)
    with pytest.raises(VertexBudgetExceeded):
        eng.run(50)


def test_lazy_matches_truncation():
    g = Bary(3, Constant(1))
    tree, cfg = truncate(g, 7)
    a, _ = run_escape_prefix(tree, cfg, 300)
    eng = RotorEngine(Arena.lazy(g, depth_cap=7), track=True)
    assert eng.run(300) == a


def test_track_requires_counts():
    arena = Arena.lazy(Bary(2), depth_cap=3, counts=False)
    with pytest.raises(ValueError):
        RotorEngine(arena, track=True)


def test_escape_prefix_type():
    e = EscapePrefix.from_string("1101")
    assert e[1] == 1 and e[3] == 0
    assert e.E(4) == 3
    assert list(e.counts) == [1, 2, 2, 3]
    assert e == [1, 1, 0, 1]
    assert str(e) == "1101"
    assert e.prefix(2) == [1, 1]
    with pytest.raises(ValueError):
        EscapePrefix([0, 2])
    with pytest.raises(IndexError):
        e[0]


def test_counts_balance_and_discrepancy():
    tree = build_bary(2, 5)
    cfg = make_config(tree, Down())
    _, stats = run_escape_prefix(tree, cfg, 40)
    # finished particles enter and leave every internal vertex equally often
    assert check_balance(tree, stats.n, stats.m) == []
    stats.m[3] += 1
    # vertex 3 now leaves once too often and its parent gains an arrival
    assert check_balance(tree, stats.n, stats.m) == [1, 3]
    with pytest.raises(ImbalanceError):
        edge_discrepancy(tree, stats, [Fraction(0)] * len(tree))


def test_edge_discrepancy_recursion():
    # delta_v = p_v sum_i [delta_i + (1 - p_i)(n_i - m_v)] at every internal vertex
    tree = build_bary(2, 6)
    cfg = make_config(tree, Constant(1))
    _, stats = run_escape_prefix(tree, cfg, 37)
    p = escape_probability(tree).p
    delta = edge_discrepancy(tree, stats, [Fraction(0)] + list(p[1:]))
    for v in tree.internal():
        rhs = p[v] * sum(delta[c] + (1 - p[c]) * (int(stats.n[c]) - int(stats.m[v])) for c in tree.children(v))
        assert delta[v] == rhs


def test_edge_discrepancy_nonnegative_at_base_for_down():
    tree = build_bary(3, 4)
    p = escape_probability(tree).p
    for n in (1, 5, 17, 40):
        _, stats = run_escape_prefix(tree, make_config(tree, "down"), n)
        assert edge_discrepancy(tree, stats, [Fraction(0)] + list(p[1:]))[1] >= 0


def test_fire_until_stable_policies_agree():
    tree = build_bary(2, 4)
    results = []
    for pol in ("sequential", "round-robin", "random", lambda occ: occ[-1]):
        cfg = make_config(tree, "down")
        res = fire_until_stable(tree, cfg, {1: 15}, pol, seed=3)
        results.append((res.tally_vector(tree), res.root, tuple(cfg.values)))
    assert all(r == results[0] for r in results)
    assert results[0][0] == (1,) * 8


def test_fire_until_stable_rejects_bad_policy():
    tree = build_bary(2, 2)
    cfg = make_config(tree, "down")
    with pytest.raises(ValueError):
        fire_until_stable(tree, cfg, {1: 2}, "chaotic")
    with pytest.raises(ValueError):
        fire_until_stable(tree, make_config(tree, "down"), {1: 2}, lambda occ: 99)


def test_stats_visited():
    tree = build_bary(2, 4)
    cfg = make_config(tree, "down")
    _, stats = run_escape_prefix(tree, cfg, 1)
    assert stats.visited_set() == {1, 2, 4, 8}
    assert stats.max_level == 4
    assert np.all(stats.n >= 0)
