import pytest

from rotortree.rules import Constant, RotorRangeError
from rotortree.tree import (FiniteTree, ParseError, RotorConfig, TreeError, build_bary, build_path,
                            make_config, parse_tree, serialize_tree)


def test_build_bary_small():
    t = build_bary(2, 2)
    assert len(t) == 4
    assert t.sinks == [2, 3]
    assert t.nchild[0] == 1 and t.nchild[1] == 2
    assert [t.level[v] for v in range(4)] == [0, 1, 2, 2]


def test_build_bary_counts():
    t = build_bary(3, 4)
    assert len(t) == 1 + (3 ** 4 - 1) // 2
    assert len(t.sinks) == 27
    assert t.depth == 4


def test_path_and_addresses():
    t = build_path(3)
    assert len(t) == 4
    assert t.sinks == [3]
    assert t.path(3) == "1/1/1"
    assert t.vertex("1/1") == 2


def test_root_must_have_one_child():
    with pytest.raises(TreeError):
        FiniteTree.from_children([[1, 2], [], []])


def test_sink_with_children_rejected():
    with pytest.raises(TreeError):
        FiniteTree.from_children([[1], [2], []], sinks=[1])


def test_not_a_tree():
    with pytest.raises(TreeError):
        FiniteTree.from_children([[1], [2], [1]])


def test_config_range_checked():
    t = build_bary(2, 2)
    with pytest.raises(ValueError):
        RotorConfig(t, [0, 3, 0, 0])
    with pytest.raises(RotorRangeError) as ei:
        make_config(t, Constant(5))
    assert "1" in str(ei.value)


def test_make_config_modes():
    t = build_bary(2, 3)
    assert all(make_config(t, "down")[v] == 0 for v in t.internal())
    assert all(make_config(t, "full")[v] == 2 for v in t.internal())
    cfg = make_config(t, {"1/2": 1})
    assert cfg[t.vertex("1/2")] == 1 and cfg[1] == 0
    with pytest.raises(ValueError):
        make_config(t, {"1/1/1": 1})  # a sink carries no rotor


def test_config_order_and_distance():
    t = build_bary(2, 3)
    a = make_config(t, "down")
    b = make_config(t, "full")
    assert a <= b and not b <= a
    assert a.l1_distance(b) == 2 * len(list(t.internal()))


def test_serialize_roundtrip():
    t = build_bary(2, 3)
    cfg = make_config(t, Constant(1))
    text = serialize_tree(t, cfg)
    t2, cfg2 = parse_tree(text)
    assert t2 == t
    assert list(cfg2.values) == list(cfg.values)


def test_parse_any_line_order():
    text = "1/2 0 S\n- 1 --\n1 2 1\n1/1 0 S\n"
    t, cfg = parse_tree(text)
    assert len(t) == 4 and cfg[1] == 1


@pytest.mark.parametrize("text, line", [
    ("- 1 --\n1 2 3\n1/1 0 S\n1/2 0 S\n", 2),
    ("- 1 --\n1 1 0\n1/1 1 S\n", 3),
    ("- 1 --\n1 1 0\n1 1 0\n", 3),
    ("- 2 --\n", 1),
    ("- 1 --\n1 x 0\n", 2),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as ei:
        parse_tree(text)
    assert ei.value.line == line


def test_parse_missing_child():
    with pytest.raises(ParseError):
        parse_tree("- 1 --\n1 2 0\n1/1 0 S\n")


def test_subtree_and_descendants():
    t = build_bary(2, 3)
    v = t.vertex("1/2")
    sub = t.subtree(v)
    assert len(sub) == 1 + 3
    assert sub.sinks == [2, 3]
    assert t.descendants(v)[0] == v
