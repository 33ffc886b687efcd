from fractions import Fraction

import pytest

from rotortree.explosion import regular_closed_form
from rotortree.experiments import (TruncationMonotonicityError, binomial_bound_check, block_end_check,
                                   brush_experiment, default_schedule, density_experiment,
                                   depth_experiment, discrepancy_tree_demo, escape_prefix_infinite,
                                   exact_regular_experiment, geometric_schedule, phase_scan,
                                   trapped_prefix)
from rotortree.generators import Bary, Brush
from rotortree.rules import IID, IIDRotorLaw
from rotortree.walker import VertexBudgetExceeded

U = IIDRotorLaw.uniform


def test_schedules():
    assert default_schedule(8, 3) == [8, 16, 32]
    s = geometric_schedule(4, 20)
    assert s[0] == 4 and s[-1] >= 20 and all(b > a for a, b in zip(s, s[1:]))


def test_stabilization_regular():
    pref, rep = escape_prefix_infinite(Bary(2), 64, [8, 12, 16, 24, 32])
    assert rep.stabilized
    assert pref == regular_closed_form(2, 0, 64)
    d = rep.to_dict()
    assert d["certificate_depth"] == rep.certificate and len(d["E_n"]) == len(d["depths"])


def test_stabilization_bad_schedule():
    with pytest.raises(ValueError):
        escape_prefix_infinite(Bary(2), 10, [8, 8])


def test_stabilization_budget():
    with pytest.raises(VertexBudgetExceeded):
        escape_prefix_infinite(Bary(2), 500, [30], vertex_budget=100)


def test_monotonicity_error_is_runtime_error():
    assert issubclass(TruncationMonotonicityError, RuntimeError)


def test_density_small():
    rep = density_experiment(Bary(2), 512, rule=IID(U([0, 1]), 3), tolerance=0.1,
                             h_schedule=[12, 16, 20, 24, 28])
    assert rep.stabilization.stabilized and rep.within
    assert rep.escape_prob == Fraction(1, 2) and rep.escape_prob_exact


def test_trapped_prefix_completes():
    pref, eng = trapped_prefix(Bary(2, IID(U([1, 2]), 0)), 5, vertex_budget=10 ** 5)
    assert pref is not None and pref.E(5) == 0 and len(eng.outcomes) == 5


def test_trapped_prefix_budget():
    pref, eng = trapped_prefix(Bary(2, IID(U([0, 1]), 0)), 50, vertex_budget=1000)
    assert pref is None


def test_phase_scan_small():
    rows = phase_scan(2, [U([0, 1]), U([1, 2])], 6, range(2), h_schedule=[8, 12, 16, 20, 24],
                      vertex_budget=10 ** 5)
    esc, trap = rows
    assert esc.regime == "escaping" and esc.certified == 2 and esc.ratio_mean > 0
    assert trap.regime == "trapped" and trap.ratio_mean == 0 and trap.first_escape_fraction == 0


def test_depth_experiment_containment():
    rep = depth_experiment(2, U([1, 2]), 6, vertex_budget=10 ** 5, seed=1)
    assert not rep.truncated and len(rep.rows) == 6
    for a, c in zip(rep.rows, rep.rows[1:]):
        assert c.containment and c.boundary_ok
        assert c.visited >= 2 * a.visited + 1
        assert c.depth >= a.depth + 1
    assert rep.depth_ratio() > 0


def test_depth_experiment_budget():
    rep = depth_experiment(2, U([1, 2]), 40, vertex_budget=500, seed=1)
    assert rep.truncated and rep.reason


def test_exact_regular_small():
    rep = exact_regular_experiment(2, 3, n_configs=10)
    assert rep.one_per_sink and rep.policy_invariant and rep.deep_rotors_untouched
    with pytest.raises(ValueError):
        exact_regular_experiment(1, 3)


def test_block_end_check():
    ok, checked = block_end_check(2, regular_closed_form(2, 0, 3000), 1000)
    assert ok and checked == 1000
    ok, checked = block_end_check(3, regular_closed_form(3, 0, 3000), 1000)
    assert ok
    with pytest.raises(ValueError):
        block_end_check(2, regular_closed_form(2, 0, 10), 100)


def test_brush_small():
    rep = brush_experiment(2, i_max=20, n_max=20000, n_sim=200)
    assert rep.identity_ok and rep.simulation_ok
    assert rep.blocks[:4] == (1, 2, 3, 4)
    assert abs(rep.slope - rep.beta) < 0.1
    with pytest.raises(ValueError):
        brush_experiment(1)


def test_discrepancy_demo_small():
    rep = discrepancy_tree_demo(lambda n: 1, n_max=500)
    assert rep.holds_from is not None and rep.holds_from <= 10
    assert rep.monotone_in_K and rep.exact


def test_discrepancy_demo_precondition():
    with pytest.raises(ValueError):
        discrepancy_tree_demo(lambda n: n, n_max=100)


def test_binomial_bound():
    E, X = binomial_bound_check(2, U([0, 1, 2]), 2, 8, seed=4)
    assert E >= X


@pytest.mark.parametrize("g", [Bary(2, IID(U([0, 1]), 9)), Brush(2), Bary(3)])
def test_stabilized_prefix_schedule_independent(g):
    a, ra = escape_prefix_infinite(g, 100, default_schedule(8, 6))
    b, rb = escape_prefix_infinite(g, 100, list(range(8, 200, 5)))
    assert ra.stabilized and rb.stabilized and a == b
