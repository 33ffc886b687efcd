from fractions import Fraction

import pytest

from rotortree.analytics import (limit_escape_probability, envelope_violation, truncated_escape_probability, classify_phase, discrepancy_series,
                                 escape_probability, find_live_paths, good_child_indicator,
                                 iterate_liminf, check_window_condition, liminf_bound, regular_discrepancy_limits)
from rotortree.explosion import regular_closed_form
from rotortree.generators import Bary, Brush, truncate
from rotortree.rules import Constant, DeterministicLawError, IIDRotorLaw
from rotortree.tree import FiniteTree, build_bary, build_path, make_config
from rotortree.walker import run_escape_prefix


def test_escape_prob_binary_depth_ten():
    assert truncated_escape_probability(Bary(2), 10) == Fraction(512, 1023)
    tree = build_bary(2, 10)
    assert escape_probability(tree).escape_prob == Fraction(512, 1023)


def test_escape_prob_path():
    # a path of length h: escape iff the walk reaches the far end first
    assert escape_probability(build_path(4)).escape_prob == Fraction(1, 4)


@pytest.mark.parametrize("b", [2, 3, 5])
def test_limit_escape_probability_regular(b):
    est = limit_escape_probability(Bary(b))
    assert est.exact and est.value == Fraction(b - 1, b)


def test_limit_escape_probability_recurrent_brush():
    est = limit_escape_probability(Brush(1), h_max=256)
    assert not est.exact and float(est.value) < 0.01


def test_truncated_escape_probability_decreasing():
    vals = [truncated_escape_probability(Brush(2), h) for h in (4, 8, 16)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_discrepancy_exact_and_limits():
    e = regular_closed_form(2, 0, 5000)
    ds = discrepancy_series(e, Fraction(1, 2), 2)
    assert ds.numerator(4) == e.E(4) - 2
    lo, hi = ds.extrema(16, 5000)
    low, high = regular_discrepancy_limits(2, 0)
    assert low == 0 and high == Fraction(1, 2)
    assert lo >= float(low) - 1e-12 and hi <= float(high) + 0.2
    with pytest.raises(ValueError):
        discrepancy_series(e.prefix(1), Fraction(1, 2), 2)


def test_regular_discrepancy_limits_values():
    assert regular_discrepancy_limits(3, 2) == (Fraction(-1, 3), Fraction(0))


def test_window_condition():
    assert check_window_condition([1, 0, 1, 0, 1, 0, 1]).valid
    v = check_window_condition([1, 1, 1, 0])
    assert not v.valid and v.window == 3 and v.start == 1 and v.ones == 3
    assert check_window_condition(regular_closed_form(2, 1, 4000)).valid


def test_classify_phase():
    u = IIDRotorLaw.uniform
    assert classify_phase(u([0, 1]), 2).regime == "escaping"
    v = classify_phase(u([0, 1, 2]), 2)
    assert v.trapped and v.critical
    w = classify_phase(u([1, 2]), 2)
    assert w.trapped and not w.critical
    with pytest.raises(DeterministicLawError):
        classify_phase(u([1]), 2)
    with pytest.raises(ValueError):
        classify_phase(u([0, 3]), 2)


def test_good_child():
    assert good_child_indicator(0, 1) and not good_child_indicator(1, 1)
    with pytest.raises(ValueError):
        good_child_indicator(0, 0)


def test_live_paths_predict_first_escape():
    tree, cfg = truncate(Bary(2, Constant(1)), 4)
    live = find_live_paths(tree, cfg)
    assert live
    pref, _ = run_escape_prefix(tree, cfg.copy(), 1)
    assert pref[1] == 1
    # rotors full: no child is good, so nothing is live and the first particle returns
    full = make_config(tree, "full")
    assert find_live_paths(tree, full) == set()
    assert run_escape_prefix(tree, full, 1)[0][1] == 0


def test_live_paths_depth():
    tree = FiniteTree.from_children([[1], [2, 3], [4], [], []], sinks=[3, 4])
    cfg = make_config(tree, "down")
    assert find_live_paths(tree, cfg) == {tree.path(3), tree.path(4)}
    assert find_live_paths(tree, cfg, depth=2) == {tree.path(2), tree.path(3)}


def test_liminf_helpers():
    assert liminf_bound([Fraction(1, 2), Fraction(1, 2)]) == Fraction(1, 2)
    assert abs(liminf_bound([0.5, 0.5]) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        liminf_bound([2])
    a, it = iterate_liminf(2, 1.0)
    assert abs(a - 0.5) < 1e-8 and it < 200


def test_envelope_violation():
    from rotortree.walker import EscapePrefix
    e = EscapePrefix([1] * 30)
    assert envelope_violation(e, Fraction(1, 2)) == 21  # 21 > 10.5 + 10
    assert envelope_violation(e, Fraction(1, 2), slack=16) is None
    assert envelope_violation(EscapePrefix([1, 0] * 50), Fraction(1, 2), slack=1) is None
