"""Random finite trees and configurations, and structure-preserving edits.

Used by the property suites: pruning gives rooted subgraphs, reordering
gives the same graph with different child orders.
"""
from __future__ import annotations

import random
from array import array
from typing import Iterable

from .generators import BinaryWithBrushes, AttachPath, Bary, Brush, Comb, JoinAtNewRoot, TreeGenerator
from .tree import FiniteTree, RotorConfig


def random_tree(rng: random.Random, max_vertices: int = 200, max_children: int = 4,
                sink_prob: float = 0.5, min_vertices: int = 3) -> FiniteTree:
    """Random attachment tree with ``min_vertices..max_vertices`` vertices.

    Leaves become sinks with probability ``sink_prob``; at least one leaf
    is always a sink so that particles can leave.
    """
    if max_vertices < min_vertices or min_vertices < 2:
        raise ValueError("bad vertex range")
    n = rng.randint(min_vertices, max_vertices)
    children: list[list[int]] = [[1], []]
    open_ = [1]
    while len(children) < n:
        v = rng.choice(open_)
        children[v].append(len(children))
        open_.append(len(children))
        children.append([])
        if len(children[v]) >= max_children:
            open_.remove(v)
    leaves = [v for v in range(1, n) if not children[v]]
    sinks = [v for v in leaves if rng.random() < sink_prob] or [rng.choice(leaves)]
    return FiniteTree.from_children(children, sinks)


def random_config(tree: FiniteTree, rng: random.Random) -> RotorConfig:
    vals = array("q", bytes(8 * len(tree)))
    for v in tree.internal():
        vals[v] = rng.randint(0, tree.nchild[v])
    return RotorConfig(tree, vals, check=False)


def extremal_config(tree: FiniteTree, rng: random.Random) -> RotorConfig:
    """Each rotor independently at ``0`` or at ``b(v)``."""
    vals = array("q", bytes(8 * len(tree)))
    for v in tree.internal():
        vals[v] = tree.nchild[v] if rng.random() < 0.5 else 0
    return RotorConfig(tree, vals, check=False)


def dominating_config(config: RotorConfig, rng: random.Random) -> RotorConfig:
    """A configuration ``s`` with ``s(v) >= r(v)`` everywhere."""
    tree = config.tree
    vals = array("q", config.values)
    for v in tree.internal():
        if rng.random() < 0.5:
            vals[v] = rng.randint(vals[v], tree.nchild[v])
    return RotorConfig(tree, vals, check=False)


def perturb_config(config: RotorConfig, rng: random.Random, changes: int = 3) -> RotorConfig:
    """Resample the rotors at up to ``changes`` random vertices."""
    tree = config.tree
    vals = array("q", config.values)
    internal = list(tree.internal())
    for v in rng.sample(internal, min(changes, len(internal))):
        vals[v] = rng.randint(0, tree.nchild[v])
    return RotorConfig(tree, vals, check=False)


def _rebuild(tree: FiniteTree, children: list[list[int]], keep: Iterable[int], config: RotorConfig | None):
    keep = list(keep)
    sinks = [v for v in keep if tree.sink[v]]
    sub, new = FiniteTree.from_children_with_map(children, sinks)
    cfg = None
    if config is not None:
        vals = array("q", bytes(8 * len(sub)))
        for old, nv in new.items():
            if sub.nchild[nv]:
                vals[nv] = config.values[old]
        cfg = RotorConfig(sub, vals, check=False)
    return sub, cfg


def prune(tree: FiniteTree, removed: Iterable[int], config: RotorConfig | None = None):
    """Delete the subtrees rooted at ``removed``; returns ``(tree, config)``.

    Kept vertices keep their sink flag and, where they still have children,
    their rotor clipped to the new child count.
    """
    removed = set(removed)
    if 0 in removed or 1 in removed:
        raise ValueError("cannot remove the root or the base")
    gone = set()
    for v in range(len(tree)):
        if v in removed or (v and tree.parent[v] in gone):
            gone.add(v)
    # renumber the kept vertices densely
    keep = [v for v in range(len(tree)) if v not in gone]
    idx = {v: i for i, v in enumerate(keep)}
    children = [[idx[c] for c in tree.children(v) if c not in gone] for v in keep]
    sinks = [idx[v] for v in keep if tree.sink[v]]
    sub, new = FiniteTree.from_children_with_map(children, sinks)
    cfg = None
    if config is not None:
        vals = array("q", bytes(8 * len(sub)))
        for v in keep:
            nv = new[idx[v]]
            if sub.nchild[nv]:
                vals[nv] = min(config.values[v], sub.nchild[nv])
        cfg = RotorConfig(sub, vals, check=False)
    return sub, cfg


def shuffle_children(tree: FiniteTree, rng: random.Random, config: RotorConfig | None = None):
    """Same graph with every child list randomly permuted; rotors carried over."""
    children = tree.children_lists()
    for kids in children:
        rng.shuffle(kids)
    return _rebuild(tree, children, range(len(tree)), config)


def random_generator(rng: random.Random, depth: int = 2) -> TreeGenerator:
    """Random infinite tree built from the standard families and grafts."""
    kinds = ["bary", "brush", "comb", "binbrush"] + (["path", "join"] if depth > 0 else [])
    kind = rng.choice(kinds)
    if kind == "bary":
        return Bary(rng.randint(2, 3))
    if kind == "brush":
        return Brush(rng.randint(1, 3))
    if kind == "comb":
        teeth = sorted(rng.sample(range(0, 10), rng.randint(1, 4)))
        return Comb(teeth)
    if kind == "binbrush":
        return BinaryWithBrushes(rng.randint(1, 3), rng.randint(1, 3))
    if kind == "path":
        return AttachPath(random_generator(rng, depth - 1), rng.randint(1, 4))
    return JoinAtNewRoot([random_generator(rng, depth - 1) for _ in range(rng.randint(2, 3))])
