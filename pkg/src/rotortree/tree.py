"""Finite rooted trees with ordered children, sinks and rotor configurations.

Vertices live in flat arrays in breadth-first order: vertex 0 is the root,
vertex 1 is the base (the root's only child), and the children of every
vertex occupy a contiguous index range, so child ``k`` (1-based) of ``v`` is
``first_child[v] + k - 1``.  Rotor position 0 means "points at the parent".
"""
from __future__ import annotations

from array import array
from collections import deque
from typing import Iterable, Iterator, Mapping, Sequence

from .rules import ROOT_KEY, Down, Explicit, RotorRule, child_key, parse_rule

SINK = 1
EXPANDED = 2
VISITED = 4


class TreeError(ValueError):
    """Structural invariant violated."""


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class FiniteTree:
    """Immutable finite rooted tree; build with :meth:`from_children`."""

    __slots__ = ("parent", "first_child", "nchild", "level", "sink", "key", "_sinks")

    def __init__(self, parent, first_child, nchild, level, sink, key):
        self.parent = parent
        self.first_child = first_child
        self.nchild = nchild
        self.level = level
        self.sink = sink
        self.key = key
        self._sinks = None
        self._check()

    @classmethod
    def from_children(cls, children: Sequence[Sequence[int]], sinks: Iterable[int] = (), root: int = 0) -> "FiniteTree":
        """Build from an adjacency list of ordered children (any vertex numbering).

        Returns the tree renumbered in breadth-first order.  Use
        :meth:`from_children_with_map` to also get the old-to-new numbering.
        """
        return cls.from_children_with_map(children, sinks, root)[0]

    @classmethod
    def from_children_with_map(cls, children, sinks=(), root=0):
        sinks = set(sinks)
        order = [root]
        new = {root: 0}
        parent = array("q", [-1])
        level = array("q", [0])
        key = array("Q", [ROOT_KEY])
        first_child = array("q")
        nchild = array("q")
        i = 0
        while i < len(order):
            v = order[i]
            kids = children[v]
            first_child.append(len(order))
            nchild.append(len(kids))
            pv = new[v]
            for k, c in enumerate(kids, start=1):
                if c in new:
                    raise TreeError(f"vertex {c} reached twice: not a tree")
                new[c] = len(order)
                order.append(c)
                parent.append(pv)
                level.append(level[pv] + 1)
                key.append(child_key(key[pv], k))
            i += 1
        if len(order) != len(children):
            raise TreeError("tree is not connected")
        sink = bytearray(len(order))
        for s in sinks:
            if s not in new:
                raise TreeError(f"sink {s} is not a vertex")
            sink[new[s]] = SINK
        return cls(parent, first_child, nchild, level, sink, key), new

    def _check(self):
        if self.nchild[0] != 1:
            raise TreeError(f"root must have exactly one child, has {self.nchild[0]}")
        if self.sink[0]:
            raise TreeError("the root cannot be a sink")
        for v in range(len(self.parent)):
            if self.sink[v] and self.nchild[v]:
                raise TreeError(f"sink {self.path(v)} has children")

    # -- structure ------------------------------------------------------
    def __len__(self) -> int:
        return len(self.parent)

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    root = 0
    base = 1

    def b(self, v: int) -> int:
        return self.nchild[v]

    def children(self, v: int) -> range:
        f = self.first_child[v]
        return range(f, f + self.nchild[v])

    def child(self, v: int, k: int) -> int:
        if not 1 <= k <= self.nchild[v]:
            raise IndexError(f"vertex {v} has no child {k}")
        return self.first_child[v] + k - 1

    def child_index(self, v: int) -> int:
        """Index ``k`` with ``v = parent^(k)``."""
        return v - self.first_child[self.parent[v]] + 1

    def is_sink(self, v: int) -> bool:
        return bool(self.sink[v])

    @property
    def sinks(self) -> list[int]:
        if self._sinks is None:
            self._sinks = [v for v in range(len(self)) if self.sink[v]]
        return self._sinks

    @property
    def depth(self) -> int:
        return max(self.level)

    @property
    def max_degree(self) -> int:
        """Maximum graph degree (children plus parent)."""
        return max(self.nchild[v] + (v != 0) for v in range(len(self)))

    def internal(self) -> Iterator[int]:
        """Non-root, non-sink vertices: the ones carrying a rotor."""
        for v in range(1, len(self)):
            if not self.sink[v]:
                yield v

    def path_tuple(self, v: int) -> tuple[int, ...]:
        out = []
        while v != 0:
            out.append(self.child_index(v))
            v = self.parent[v]
        return tuple(reversed(out))

    def path(self, v: int) -> str:
        if v == 0:
            return "-"
        return "/".join(map(str, self.path_tuple(v)))

    def vertex(self, path: str | Sequence[int]) -> int:
        if isinstance(path, str):
            if path == "-":
                return 0
            path = [int(x) for x in path.split("/")]
        v = 0
        for k in path:
            v = self.child(v, k)
        return v

    def children_lists(self) -> list[list[int]]:
        return [list(self.children(v)) for v in range(len(self))]

    def subtree(self, v: int) -> "FiniteTree":
        """The subtree based at ``v``: ``v``'s parent as root, ``v`` and its descendants."""
        if v == 0:
            raise TreeError("the root has no based subtree")
        verts = [self.parent[v]]
        kids = {self.parent[v]: [v]}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            verts.append(u)
            kids[u] = list(self.children(u))
            queue.extend(kids[u])
        index = {u: i for i, u in enumerate(verts)}
        children = [[index[c] for c in kids[u]] for u in verts]
        sinks = [index[u] for u in verts[1:] if self.sink[u]]
        return FiniteTree.from_children(children, sinks)

    def descendants(self, v: int) -> list[int]:
        out = []
        queue = deque([v])
        while queue:
            u = queue.popleft()
            out.append(u)
            queue.extend(self.children(u))
        return out

    def __eq__(self, other):
        if not isinstance(other, FiniteTree):
            return NotImplemented
        return (self.parent == other.parent and self.nchild == other.nchild
                and self.sink == other.sink)

    def __repr__(self):
        return f"FiniteTree(vertices={len(self)}, sinks={len(self.sinks)}, depth={self.depth})"


class RotorConfig:
    """Rotor positions indexed by vertex; root and sink entries are unused (kept 0)."""

    __slots__ = ("tree", "values")

    def __init__(self, tree: FiniteTree, values=None, check=True):
        self.tree = tree
        if values is None:
            values = array("q", bytes(8 * len(tree)))
        elif not isinstance(values, array):
            values = array("q", values)
        if len(values) != len(tree):
            raise ValueError("config length does not match the tree")
        self.values = values
        if check:
            self.validate()

    def validate(self):
        t = self.tree
        for v in t.internal():
            r = self.values[v]
            if not 0 <= r <= t.nchild[v]:
                raise ValueError(f"rotor {r} out of range 0..{t.nchild[v]} at vertex {t.path(v)}")

    def __getitem__(self, v: int) -> int:
        return self.values[v]

    def __setitem__(self, v: int, r: int):
        t = self.tree
        if v == 0 or t.sink[v]:
            raise ValueError(f"vertex {t.path(v)} carries no rotor")
        if not 0 <= r <= t.nchild[v]:
            raise ValueError(f"rotor {r} out of range 0..{t.nchild[v]} at vertex {t.path(v)}")
        self.values[v] = r

    def copy(self) -> "RotorConfig":
        return RotorConfig(self.tree, array("q", self.values), check=False)

    def to_dict(self) -> dict[str, int]:
        return {self.tree.path(v): self.values[v] for v in self.tree.internal()}

    def __le__(self, other: "RotorConfig") -> bool:
        return all(self.values[v] <= other.values[v] for v in self.tree.internal())

    def __eq__(self, other):
        if not isinstance(other, RotorConfig):
            return NotImplemented
        return all(self.values[v] == other.values[v] for v in self.tree.internal())

    def l1_distance(self, other: "RotorConfig") -> int:
        return sum(abs(self.values[v] - other.values[v]) for v in self.tree.internal())

    def __repr__(self):
        return f"RotorConfig({self.to_dict()})"


def build_bary(b: int, h: int) -> FiniteTree:
    """The ``b``-ary tree truncated at level ``h``; level-``h`` vertices are sinks."""
    if b < 2:
        raise ValueError("b must be at least 2")
    if h < 1:
        raise ValueError("h must be at least 1")
    children: list[list[int]] = [[1]]
    sinks = []
    frontier = [1]
    children.append([])
    for lvl in range(1, h):
        nxt = []
        for v in frontier:
            kids = list(range(len(children), len(children) + b))
            children[v] = kids
            children.extend([] for _ in kids)
            nxt.extend(kids)
        frontier = nxt
    sinks = frontier
    return FiniteTree.from_children(children, sinks)


def build_path(h: int) -> FiniteTree:
    """Root, then a path of ``h`` edges ending in a sink."""
    if h < 1:
        raise ValueError("h must be at least 1")
    children = [[i + 1] for i in range(h)] + [[]]
    return FiniteTree.from_children(children, [h])


def make_config(tree: FiniteTree, mode: RotorRule | str | Mapping[str, int] = "down",
                default: RotorRule | None = None) -> RotorConfig:
    """Rotor configuration on ``tree`` from a rule.

    ``mode`` is a :class:`RotorRule`, one of ``"down"``/``"full"``, or a
    mapping root-path -> value (explicit mode, other vertices from
    ``default``, itself ``down`` unless given).
    """
    if isinstance(mode, str):
        rule = parse_rule(mode)
    elif isinstance(mode, Mapping):
        known = {tree.path(v) for v in tree.internal()}
        for p in mode:
            if p not in known:
                raise ValueError(f"no rotor-carrying vertex at path {p}")
        rule = Explicit(dict(mode), default or Down())
    else:
        rule = mode
    values = array("q", bytes(8 * len(tree)))
    for v in tree.internal():
        values[v] = rule.checked(tree.nchild[v], tree.key[v], lambda v=v: tree.path(v))
    return RotorConfig(tree, values, check=False)


# -- text format ---------------------------------------------------------

def serialize_tree(tree: FiniteTree, config: RotorConfig | None = None) -> str:
    """One line per vertex: ``<root-path> <n-children> <rotor|--|S>``."""
    lines = []
    for v in range(len(tree)):
        if v == 0:
            mark = "--"
        elif tree.sink[v]:
            mark = "S"
        else:
            mark = str(config.values[v] if config is not None else 0)
        lines.append(f"{tree.path(v)} {tree.nchild[v]} {mark}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> tuple[FiniteTree, RotorConfig]:
    entries: dict[tuple[int, ...], tuple[int, str, int]] = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].rstrip("\r")
        if not line.strip():
            continue
        fields = []
        col = 0
        for tok in line.split():
            col = line.index(tok, col)
            fields.append((tok, col + 1))
            col += len(tok)
        if len(fields) != 3:
            raise ParseError(lineno, 1, f"expected 3 fields, got {len(fields)}")
        (ptok, pcol), (ntok, ncol), (rtok, rcol) = fields
        if ptok == "-":
            path: tuple[int, ...] = ()
        else:
            try:
                path = tuple(int(x) for x in ptok.split("/"))
            except ValueError:
                raise ParseError(lineno, pcol, f"bad root-path {ptok!r}") from None
            if any(k < 1 for k in path):
                raise ParseError(lineno, pcol, "child indices start at 1")
        if not ntok.isdigit():
            raise ParseError(lineno, ncol, f"bad child count {ntok!r}")
        n = int(ntok)
        if path in entries:
            raise ParseError(lineno, pcol, f"duplicate vertex {ptok}")
        if not path:
            if rtok != "--":
                raise ParseError(lineno, rcol, "root rotor must be '--'")
            if n != 1:
                raise ParseError(lineno, ncol, f"root must have exactly one child, has {n}")
            entries[path] = (n, "root", 0)
        elif rtok == "S":
            if n != 0:
                raise ParseError(lineno, ncol, "a sink must have 0 children")
            entries[path] = (n, "sink", 0)
        else:
            if not rtok.isdigit():
                raise ParseError(lineno, rcol, f"bad rotor {rtok!r}")
            r = int(rtok)
            if r > n:
                raise ParseError(lineno, rcol, f"rotor {r} out of range 0..{n}")
            entries[path] = (n, "rotor", r)
    if () not in entries:
        raise ParseError(1, 1, "no root line")
    for path, (n, _, _) in entries.items():
        for k in range(1, n + 1):
            if path + (k,) not in entries:
                raise ParseError(1, 1, f"missing child {'/'.join(map(str, path + (k,)))}")
    for path in entries:
        if path and (path[:-1] not in entries or path[-1] > entries[path[:-1]][0]):
            raise ParseError(1, 1, f"vertex {'/'.join(map(str, path))} has no parent entry")
    paths = list(entries)
    index = {p: i for i, p in enumerate(paths)}
    children = [[index[p + (k,)] for k in range(1, entries[p][0] + 1)] for p in paths]
    sinks = [index[p] for p in paths if entries[p][1] == "sink"]
    tree, new = FiniteTree.from_children_with_map(children, sinks, index[()])
    values = array("q", bytes(8 * len(tree)))
    for p, (n, kind, r) in entries.items():
        values[new[index[p]]] = r
    return tree, RotorConfig(tree, values, check=False)
