import pytest

from rotortree.generators import (BinaryWithBrushes, AttachAtSpine, AttachPath, Bary, Brush, Comb, FiniteShape,
                                  JoinAtNewRoot, attach_at_spine, attach_path, build_generator, graft,
                                  join_at_new_root, parse_family, truncate)
from rotortree.rules import Constant, Full
from rotortree.tree import build_bary


def test_bary_truncation_matches_builder():
    tree, cfg = truncate(Bary(3, Constant(2)), 3)
    assert tree == build_bary(3, 3)
    assert all(cfg[v] == 2 for v in tree.internal())


def test_brush_shape():
    g = Brush(3)
    assert g.children(3) == (3, 2)
    assert g.children(1) == (1,)
    tree, _ = truncate(g, 3)
    # levels: base(3) -> (3, 2) -> (3, 2, 2, 1)
    assert [tree.nchild[v] for v in range(1, 4)] == [2, 2, 2]


def test_comb_teeth_and_tail():
    g = Comb([0, 2])
    s = g.base_state()
    assert len(g.children(s)) == 2  # tooth at x_0
    s1 = g.children(s)[0]
    assert len(g.children(s1)) == 1
    s2 = g.children(s1)[0]
    nxt, tooth = g.children(s2)
    assert nxt == ("tail",) and tooth == ("tooth",)
    with pytest.raises(ValueError):
        Comb([3, 1])


def test_comb_callable():
    g = parse_family("comb:pow2")
    assert g.teeth_upto(10) == [1, 3, 7]


def test_binbrush_levels():
    tree, _ = truncate(BinaryWithBrushes(2, 2), 3)
    # binary levels 1, 2 then four brush bases at level 3
    assert len(tree) == 1 + 1 + 2 + 4
    assert set(tree.sinks) == set(range(4, 8))


def test_attach_path_and_join():
    g = AttachPath(Bary(2), 2)
    tree, _ = truncate(g, 4)
    assert tree.nchild[1] == 1 and tree.nchild[2] == 1 and tree.nchild[3] == 2
    j = JoinAtNewRoot([Bary(2), Brush(1)])
    assert len(j.children(j.base_state())) == 2
    with pytest.raises(ValueError):
        JoinAtNewRoot([])
    with pytest.raises(ValueError):
        AttachPath(Bary(2), 0)


def test_attach_at_spine_positions():
    g = AttachAtSpine(Brush(1), [2], [Bary(2)])
    tree, _ = truncate(g, 4)
    assert tree.nchild[1] == 1
    assert tree.nchild[2] == 2  # spine child plus the graft
    with pytest.raises(ValueError):
        AttachAtSpine(Brush(1), [0], [Bary(2)])


def test_graft_ops():
    g = graft(Bary(2), [attach_path(0)])
    assert isinstance(g, Bary)
    g = graft(Bary(2), [attach_path(3), join_at_new_root([Brush(2)])])
    assert isinstance(g, JoinAtNewRoot) and isinstance(g.parts[0], AttachPath)
    g = graft(Brush(1), [attach_at_spine([1, 3], [Bary(2), Bary(3)])])
    assert isinstance(g, AttachAtSpine)
    with pytest.raises(ValueError):
        graft(Bary(2), [join_at_new_root([])])
    with pytest.raises(ValueError):
        graft(Bary(2), [attach_path(-1)])


def test_with_rule_propagates():
    g = JoinAtNewRoot([Bary(2), AttachPath(Brush(2), 1)]).with_rule(Full())
    tree, cfg = truncate(g, 5)
    assert all(cfg[v] == tree.nchild[v] for v in tree.internal())


def test_build_and_parse():
    assert isinstance(build_generator("bary", 2), Bary)
    assert isinstance(build_generator("path"), Brush)
    assert isinstance(parse_family("binbrush:2,3"), BinaryWithBrushes)
    with pytest.raises(ValueError):
        parse_family("torus:3")
    with pytest.raises(ValueError):
        build_generator("torus")


def test_finite_shape_roundtrip():
    t = build_bary(2, 3)
    tree, _ = truncate(FiniteShape(t), 10)
    # sinks of the source become ordinary childless vertices
    assert tree.sinks == []
    assert list(tree.nchild) == list(t.nchild)
