"""Lazy descriptions of infinite rooted trees and their finite truncations.

A generator knows the *state* of its base vertex and how to list the
ordered child states of any state.  States are hashable, and two vertices
with equal states root isomorphic subtrees carrying the same rotor rule;
the explosion engine relies on that to evaluate infinite trees type by type.
"""
from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

from .rules import Down, RotorRule, parse_rule
from .tree import FiniteTree, RotorConfig

State = Hashable


class TreeGenerator:
    """An infinite (or finite) rooted tree with a rotor rule.

    Subclasses implement :meth:`base_state` and :meth:`children`.
    """

    kind = "generator"

    def __init__(self, rule: RotorRule | None = None):
        self.rule = rule if rule is not None else Down()

    def base_state(self) -> State:
        raise NotImplementedError

    def children(self, state: State) -> tuple:
        raise NotImplementedError

    def rule_for(self, state: State) -> RotorRule:
        """The rule that owns vertices of this state."""
        return self.rule

    def with_rule(self, rule: RotorRule) -> "TreeGenerator":
        raise NotImplementedError

    def truncate(self, h: int) -> tuple[FiniteTree, RotorConfig]:
        return truncate(self, h)

    @property
    def max_children(self) -> int | None:
        """Upper bound on ``b(v)`` when known (used by laws and constant rules)."""
        return None

    def __repr__(self):
        return f"{self.describe()} [{self.rule}]"

    def describe(self) -> str:
        return self.kind


class Bary(TreeGenerator):
    kind = "bary"

    def __init__(self, b: int, rule=None):
        if b < 2:
            raise ValueError("b must be at least 2")
        super().__init__(rule)
        self.b = b
        self._kids = ("B",) * b

    def base_state(self):
        return "B"

    def children(self, state):
        return self._kids

    def with_rule(self, rule):
        return Bary(self.b, rule)

    @property
    def max_children(self):
        return self.b

    def describe(self):
        return f"bary:{self.b}"


class Brush(TreeGenerator):
    """The ``d``-brush; state ``j`` marks the base of a ``j``-brush.

    Child 1 continues the spine (a ``j``-brush), child 2 is the base of the
    attached ``(j-1)``-brush.
    """

    kind = "brush"

    def __init__(self, d: int, rule=None):
        if d < 1:
            raise ValueError("brush dimension must be >= 1")
        super().__init__(rule)
        self.d = d

    def base_state(self):
        return self.d

    def children(self, state):
        return (state, state - 1) if state > 1 else (1,)

    def with_rule(self, rule):
        return Brush(self.d, rule)

    @property
    def max_children(self):
        return 2 if self.d > 1 else 1

    def describe(self):
        return f"brush:{self.d}"


class Comb(TreeGenerator):
    """Thinned comb: spine ``x_0 x_1 ...`` (``x_0`` the base), a singly
    infinite path attached at each ``x_{a_i}``.

    ``a`` is a strictly increasing sequence of nonnegative integers, given
    as a finite sequence or as a callable ``i -> a_i`` (``i >= 1``).
    """

    kind = "comb"

    def __init__(self, a: Sequence[int] | Callable[[int], int], rule=None):
        super().__init__(rule)
        if callable(a):
            self._fn = a
            self._finite = None
        else:
            a = tuple(int(x) for x in a)
            self._finite = a
            self._fn = None
        self._teeth: list[int] = []
        self._teeth_set: set[int] = set()
        self._exhausted = False
        self._check_prefix(self._finite if self._finite is not None else [a(i) for i in range(1, 6)])

    @staticmethod
    def _check_prefix(seq):
        prev = -1
        for x in seq:
            if x <= prev:
                raise ValueError("comb sequence must be strictly increasing and nonnegative")
            prev = x

    def teeth_upto(self, j: int) -> list[int]:
        """All tooth positions ``<= j``."""
        if self._finite is not None:
            return [x for x in self._finite if x <= j]
        while not self._teeth or self._teeth[-1] < j:
            x = self._fn(len(self._teeth) + 1)
            if self._teeth and x <= self._teeth[-1]:
                raise ValueError("comb sequence must be strictly increasing")
            self._teeth.append(x)
            self._teeth_set.add(x)
        return [x for x in self._teeth if x <= j]

    def has_tooth(self, j: int) -> bool:
        if self._finite is not None:
            return j in self._finite
        self.teeth_upto(j)
        return j in self._teeth_set

    def base_state(self):
        return ("spine", 0)

    def children(self, state):
        if state[0] in ("tooth", "tail"):
            return (state,)
        j = state[1]
        nxt = ("spine", j + 1)
        if self._finite is not None and (not self._finite or j + 1 > self._finite[-1]):
            # past the last tooth the spine is a plain path
            nxt = ("tail",)
        if self.has_tooth(j):
            return (nxt, ("tooth",))
        return (nxt,)

    def with_rule(self, rule):
        return Comb(self._finite if self._finite is not None else self._fn, rule)

    @property
    def max_children(self):
        return 2

    def describe(self):
        if self._finite is not None:
            return "comb:" + ",".join(map(str, self._finite))
        return "comb:<fn>"


class BinaryWithBrushes(TreeGenerator):
    """Binary tree of depth ``k`` with two ``d``-brushes attached at each leaf."""

    kind = "binbrush"

    def __init__(self, k: int, d: int, rule=None):
        if k < 1 or d < 1:
            raise ValueError("binbrush needs k, d >= 1")
        super().__init__(rule)
        self.k = k
        self.d = d

    def base_state(self):
        return ("bin", 1)

    def children(self, state):
        if state[0] == "bin":
            lvl = state[1]
            if lvl < self.k:
                return (("bin", lvl + 1),) * 2
            return (("brush", self.d),) * 2
        j = state[1]
        return (("brush", j), ("brush", j - 1)) if j > 1 else (("brush", 1),)

    def with_rule(self, rule):
        return BinaryWithBrushes(self.k, self.d, rule)

    @property
    def max_children(self):
        return 2

    def describe(self):
        return f"binbrush:{self.k},{self.d}"


class FiniteShape(TreeGenerator):
    """A finite tree as a generator (sinks become childless vertices).

    Useful for grafting finite pieces; states are vertex ids.
    """

    kind = "finite"

    def __init__(self, tree: FiniteTree, rule=None):
        super().__init__(rule)
        self.tree = tree

    def base_state(self):
        return 1

    def children(self, state):
        return tuple(self.tree.children(state))

    def with_rule(self, rule):
        return FiniteShape(self.tree, rule)


# -- composites ------------------------------------------------------------

class AttachPath(TreeGenerator):
    """``H^(k)``: a ``k``-edge path glued at the root of ``H``; its far end is the new root."""

    kind = "attach_path"

    def __init__(self, inner: TreeGenerator, k: int, rule=None):
        if k < 1:
            raise ValueError("path length must be >= 1 (use the inner generator for k = 0)")
        super().__init__(rule if rule is not None else inner.rule)
        self.inner = inner
        self.k = k

    def base_state(self):
        return ("path", 1)

    def children(self, state):
        if state[0] == "path":
            i = state[1]
            if i < self.k:
                return (("path", i + 1),)
            return (("in", self.inner.base_state()),)
        return tuple(("in", s) for s in self.inner.children(state[1]))

    def rule_for(self, state):
        if state[0] == "in":
            return self.inner.rule_for(state[1])
        return self.rule

    def with_rule(self, rule):
        return AttachPath(self.inner.with_rule(rule), self.k, rule)

    @property
    def max_children(self):
        m = self.inner.max_children
        return None if m is None else max(m, 1)

    def describe(self):
        return f"({self.inner.describe()})^({self.k})"


class JoinAtNewRoot(TreeGenerator):
    """Glue the roots of several trees into one vertex, then hang that vertex
    below a new root: the new base's children are the operand bases."""

    kind = "join"

    def __init__(self, parts: Sequence[TreeGenerator], rule=None):
        parts = tuple(parts)
        if not parts:
            raise ValueError("join needs at least one tree")
        super().__init__(rule if rule is not None else parts[0].rule)
        self.parts = parts

    def base_state(self):
        return ("join",)

    def children(self, state):
        if state[0] == "join":
            return tuple((i, g.base_state()) for i, g in enumerate(self.parts))
        i, s = state
        return tuple((i, c) for c in self.parts[i].children(s))

    def rule_for(self, state):
        if state[0] == "join":
            return self.rule
        return self.parts[state[0]].rule_for(state[1])

    def with_rule(self, rule):
        return JoinAtNewRoot([g.with_rule(rule) for g in self.parts], rule)

    @property
    def max_children(self):
        ms = [g.max_children for g in self.parts]
        if any(m is None for m in ms):
            return None
        return max(ms + [len(self.parts)])

    def describe(self):
        return "join(" + ", ".join(g.describe() for g in self.parts) + ")"


class AttachAtSpine(TreeGenerator):
    """Attach trees (via their roots) at positions of the base tree's spine.

    The spine is ``x_1 = base``, ``x_{j+1} = x_j^(1)``.  Attaching ``H`` at
    ``x_j`` adds the base of ``H`` as a new last child of ``x_j``.
    """

    kind = "attach_spine"

    def __init__(self, base: TreeGenerator, positions: Sequence[int], parts: Sequence[TreeGenerator], rule=None):
        if len(positions) != len(parts):
            raise ValueError("positions and generators must pair up")
        super().__init__(rule if rule is not None else base.rule)
        self.base = base
        self.attach: dict[int, list[int]] = {}
        for idx, j in enumerate(positions):
            if j < 1:
                raise ValueError("spine positions start at 1")
            self.attach.setdefault(int(j), []).append(idx)
        self.parts = tuple(parts)
        self._last = max(self.attach) if self.attach else 0

    def base_state(self):
        if not self.attach:
            return ("off", self.base.base_state())
        return ("sp", 1, self.base.base_state())

    def children(self, state):
        tag = state[0]
        if tag == "sp":
            _, j, s = state
            kids = self.base.children(s)
            out = []
            last = j + 1 > self._last
            for k, c in enumerate(kids):
                # beyond the last attachment the spine is an ordinary vertex
                out.append(("sp", j + 1, c) if k == 0 and not last else ("off", c))
            for idx in self.attach.get(j, ()):
                out.append(("att", idx, self.parts[idx].base_state()))
            return tuple(out)
        if tag == "off":
            return tuple(("off", c) for c in self.base.children(state[1]))
        _, idx, s = state
        return tuple(("att", idx, c) for c in self.parts[idx].children(s))

    def rule_for(self, state):
        tag = state[0]
        if tag == "att":
            return self.parts[state[1]].rule_for(state[2])
        return self.base.rule_for(state[-1])

    def with_rule(self, rule):
        return AttachAtSpine(self.base.with_rule(rule), [j for j, idxs in self.attach.items() for _ in idxs],
                             [self.parts[i].with_rule(rule) for idxs in self.attach.values() for i in idxs], rule)

    def describe(self):
        return f"spine({self.base.describe()}; {len(self.parts)} grafts)"


@dataclass(frozen=True)
class GraftOp:
    op: str
    k: int = 0
    parts: tuple = ()
    positions: tuple = ()


def attach_path(k: int) -> GraftOp:
    return GraftOp("attach_path", k=k)


def join_at_new_root(parts: Sequence[TreeGenerator]) -> GraftOp:
    return GraftOp("join", parts=tuple(parts))


def attach_at_spine(positions: Sequence[int], parts: Sequence[TreeGenerator]) -> GraftOp:
    return GraftOp("spine", parts=tuple(parts), positions=tuple(positions))


def graft(base: TreeGenerator, ops: Iterable[GraftOp]) -> TreeGenerator:
    """Apply graft operations left to right.

    ``join`` joins the current tree with the listed trees (current first).
    """
    g = base
    for op in ops:
        if op.op == "attach_path":
            if op.k < 0:
                raise ValueError("path length must be >= 0")
            if op.k > 0:
                g = AttachPath(g, op.k)
        elif op.op == "join":
            if not op.parts:
                raise ValueError("empty join list")
            g = JoinAtNewRoot((g,) + op.parts)
        elif op.op == "spine":
            g = AttachAtSpine(g, op.positions, op.parts)
        else:
            raise ValueError(f"unknown graft op {op.op!r}")
    return g


def build_generator(kind: str, *params, rule: RotorRule | None = None) -> TreeGenerator:
    """``build_generator("bary", 2)``, ``("brush", d)``, ``("comb", a)``, ``("binbrush", k, d)``."""
    if kind == "bary":
        return Bary(*params, rule=rule)
    if kind == "brush":
        return Brush(*params, rule=rule)
    if kind == "path":
        return Brush(1, rule=rule)
    if kind == "comb":
        return Comb(*params, rule=rule)
    if kind == "binbrush":
        return BinaryWithBrushes(*params, rule=rule)
    raise ValueError(f"unknown tree kind {kind!r}")


def parse_family(text: str, rule: RotorRule | str | None = None, seed: int = 0) -> TreeGenerator:
    """``bary:2``, ``brush:3``, ``path``, ``comb:1,3,7``, ``binbrush:2,3``."""
    if isinstance(rule, str):
        rule = parse_rule(rule, seed)
    kind, _, arg = text.partition(":")
    if kind == "bary":
        return Bary(int(arg), rule)
    if kind == "brush":
        return Brush(int(arg), rule)
    if kind == "path":
        return Brush(1, rule)
    if kind == "comb":
        if arg == "pow2":
            return Comb(lambda i: 2 ** i - 1, rule)
        return Comb([int(x) for x in arg.split(",") if x], rule)
    if kind == "binbrush":
        k, d = (int(x) for x in arg.split(","))
        return BinaryWithBrushes(k, d, rule)
    raise ValueError(f"unknown family {text!r}")


def truncate(g: TreeGenerator, h: int) -> tuple[FiniteTree, RotorConfig]:
    """Levels ``0..h`` of the generated tree; level-``h`` vertices become sinks."""
    if h < 1:
        raise ValueError("h must be at least 1")
    children: list[list[int]] = [[1], []]
    states = [None, g.base_state()]
    level = [0, 1]
    sinks = []
    i = 1
    while i < len(states):
        if level[i] == h:
            sinks.append(i)
        else:
            kids = g.children(states[i])
            first = len(states)
            children[i] = list(range(first, first + len(kids)))
            for s in kids:
                states.append(s)
                level.append(level[i] + 1)
                children.append([])
        i += 1
    # construction order is already breadth-first
    tree = FiniteTree.from_children(children, sinks)
    values = tree_rotors(g, tree, states)
    return tree, RotorConfig(tree, values, check=False)


def tree_rotors(g: TreeGenerator, tree: FiniteTree, states):
    values = array("q", bytes(8 * len(tree)))
    for v in tree.internal():
        rule = g.rule_for(states[v])
        values[v] = rule.checked(tree.nchild[v], tree.key[v], lambda v=v: tree.path(v))
    return values
