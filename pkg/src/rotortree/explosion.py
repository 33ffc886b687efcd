"""Escape sequences from the explosion formula, closed forms and fixed points.

For a tree with base ``v`` whose rotor is ``r`` and whose principal
branches have escape sequences ``e_1..e_b``::

    e = ex( sum_{i <= r} shift(e_i) + sum_{i > r} e_i )

with sinks contributing ``111...`` and childless vertices ``000...``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .generators import TreeGenerator
from .lazyseq import LazySeq, add, explode, fixed_point, prefix_iterates, scale, shift
from .tree import FiniteTree, RotorConfig
from .walker import EscapePrefix


# -- digit functions -----------------------------------------------------------

@dataclass(frozen=True)
class DigitStats:
    t: int
    b: int
    z: int  # trailing zeros in base b
    ell: int  # last nonzero digit
    digit_sum: int


def digit_stats(t: int, b: int) -> DigitStats:
    if t < 1 or b < 2:
        raise ValueError("need t >= 1 and b >= 2")
    z = 0
    x = t
    while x % b == 0:
        x //= b
        z += 1
    ell = x % b
    s = 0
    y = t
    while y:
        s += y % b
        y //= b
    return DigitStats(t, b, z, ell, s)


def digit_sum(t: int, b: int) -> int:
    s = 0
    while t:
        s += t % b
        t //= b
    return s


# -- explosion on arrays -------------------------------------------------------

def explode_array(a: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` terms of ``ex(a)``; ``a`` needs at least ``n`` terms."""
    a = np.asarray(a[:n], dtype=np.int64)
    if a.size < n:
        raise ValueError("explode needs n input terms for n output terms")
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    ends = np.cumsum(a + 1)
    out = np.ones(int(ends[-1]), dtype=np.uint8)
    out[ends - 1] = 0
    return out[:n]


def explode_list(a: Sequence[int]) -> list[int]:
    """``ex`` of a finite list: the fully determined output prefix."""
    out: list[int] = []
    for x in a:
        out.extend([1] * x)
        out.append(0)
    return out


def escape_via_explosion(tree: FiniteTree, config: RotorConfig, n: int) -> EscapePrefix:
    """First ``n`` escape bits of ``(tree, sinks, config)`` by the explosion formula."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    ones = np.ones(n, dtype=np.uint8)
    zeros = np.zeros(n, dtype=np.uint8)
    seqs: dict[int, np.ndarray] = {}
    rot = config.values
    # breadth-first numbering: children always come after their parent
    for v in range(len(tree) - 1, 0, -1):
        if tree.sink[v]:
            seqs[v] = ones
            continue
        b = tree.nchild[v]
        if b == 0:
            seqs[v] = zeros
            continue
        r = rot[v]
        a = np.zeros(n, dtype=np.int64)
        for i, c in enumerate(tree.children(v), start=1):
            e = seqs.pop(c)
            if i <= r:
                a[1:] += e[:-1]
            else:
                a += e
        seqs[v] = explode_array(a, n)
    return EscapePrefix(seqs[1])


# -- regular trees --------------------------------------------------------------

def _zeros_then_one_blocks(gaps: Callable[[int], int], n: int) -> EscapePrefix:
    out = bytearray()
    t = 1
    while len(out) < n:
        out.append(1)
        out.extend(bytes(gaps(t)))
        t += 1
    return EscapePrefix(out[:n])


def regular_closed_form(b: int, k: int, n: int) -> EscapePrefix:
    """Escape sequence of the ``b``-ary tree with every rotor at ``k``, ``0 <= k < b``.

    ``k = 0``: ``1 0^{z_1} 1 0^{z_2} ...``; ``0 < k < b``: ``1 0^{[l_1 = b-k]} 1 ...``
    where ``z_t`` and ``l_t`` are the trailing-zero count and last nonzero
    base-``b`` digit of ``t``.  ``k = b`` (all zeros) is not covered.
    """
    if b < 2 or not 0 <= k < b:
        raise ValueError("need b >= 2 and 0 <= k < b")
    if k == 0:
        return _zeros_then_one_blocks(lambda t: digit_stats(t, b).z, n)
    return _zeros_then_one_blocks(lambda t: int(digit_stats(t, b).ell == b - k), n)


def regular_equation(b: int, k: int) -> Callable[[LazySeq], LazySeq]:
    """``e -> ex(k shift(e) + (b-k) e)``."""
    def fn(e: LazySeq) -> LazySeq:
        parts = []
        if k:
            parts.append(scale(k, shift(e)))
        if b - k:
            parts.append(scale(b - k, e))
        return explode(add(*parts))
    return fn


def regular_fixed_point_seq(b: int, k: int) -> LazySeq:
    if b < 2 or not 0 <= k < b:
        raise ValueError("need b >= 2 and 0 <= k < b")
    return fixed_point(regular_equation(b, k), seed=[1])


def regular_fixed_point(b: int, k: int, n: int) -> EscapePrefix:
    """Maximal solution of ``e = ex(k shift(e) + (b-k) e)`` seeded with ``e_1 = 1``."""
    return EscapePrefix(regular_fixed_point_seq(b, k).take(n))


def regular_iterates(b: int, k: int, n: int) -> list[list[int]]:
    """Prefix iterates of the regular equation from ``[1]``; each extends the last."""
    def step(x: list[int]) -> list[int]:
        m = len(x)
        # a_t needs x_t and x_{t-1}: known for t <= m
        a = [k * (x[t - 2] if t >= 2 else 0) + (b - k) * x[t - 1] for t in range(1, m + 1)]
        return explode_list(a)
    return prefix_iterates(step, [1], n)


# -- combs and brushes ------------------------------------------------------------

def comb_closed_form(a: Sequence[int] | Callable[[int], int], n: int) -> EscapePrefix:
    """``1 0^{a_1} 1 0^{a_2} 1 ...`` for teeth at spine positions ``a``.

    For a finite tooth list the sequence ends ``1 0^{a_m} 1 000...``.
    """
    if callable(a):
        fn = a
        finite = None
    else:
        finite = [int(x) for x in a]
        prev = -1
        for x in finite:
            if x <= prev:
                raise ValueError("comb sequence must be strictly increasing and nonnegative")
            prev = x
        fn = None
    out = bytearray([1])
    i = 1
    while len(out) < n:
        if finite is not None:
            if i > len(finite):
                out.extend(bytes(n - len(out)))
                break
            gap = finite[i - 1]
        else:
            gap = fn(i)
        out.extend(bytes(gap))
        out.append(1)
        i += 1
    return EscapePrefix(out[:n])


@dataclass(frozen=True)
class BrushSequence:
    d: int
    prefix: EscapePrefix
    blocks: tuple[int, ...]  # s_1, s_2, ...

    def block_ends(self) -> list[int]:
        """Positions ``s_1 + ... + s_i``."""
        out, acc = [], 0
        for s in self.blocks:
            acc += s
            out.append(acc)
        return out


def _brush_bits(d: int, n: int) -> list[bytearray]:
    """Escape bits of the ``j``-brush for ``j = 1..d``, each of length ``n``."""
    e1 = bytearray(n)
    if n:
        e1[0] = 1
    levels = [e1]
    for _ in range(2, d + 1):
        lower = levels[-1]
        # e = ex(e + lower) seeded with e_1 = 1; block t needs e_t, which an
        # earlier block has already produced
        out = bytearray()
        x = 1 + lower[0]
        out.extend(b"\x01" * x)
        out.append(0)
        t = 1
        while len(out) < n:
            x = out[t] + lower[t]
            out.extend(b"\x01" * x)
            out.append(0)
            t += 1
        levels.append(out[:n])
    return levels


def brush_sequence(d: int, n: int) -> BrushSequence:
    """Escape sequence of the ``d``-brush with all rotors down, plus its block sequence."""
    if d < 1:
        raise ValueError("brush dimension must be >= 1")
    levels = _brush_bits(d, n)
    e = levels[-1]
    blocks: list[int] = [1]
    if d >= 2:
        lower_counts = np.cumsum(np.frombuffer(bytes(levels[-2]), dtype=np.uint8), dtype=np.int64)
        pos = 1
        while True:
            nxt = blocks[-1] + int(lower_counts[pos - 1])
            if pos + nxt > n:
                break
            blocks.append(nxt)
            pos += nxt
    return BrushSequence(d, EscapePrefix(e), tuple(blocks))


# -- infinite trees via generators ------------------------------------------------

class TypeLevelSystem:
    """Escape sequences of every vertex type of a generator with a deterministic rule.

    Bits are produced index by index.  Bit ``j`` of a type is determined by
    earlier bits of its children unless the type has seen no escape yet, in
    which case it depends on bit ``j`` of its good children (those the rotor
    visits before the parent); that same-index system is solved by taking its
    greatest fixed point (an infinite chain of good types carries an escape).
    Types first reached deeper than ``depth_bound`` are treated as sinks.
    """

    def __init__(self, g: TreeGenerator, depth_bound: int | None = None, max_types: int = 200_000):
        self.g = g
        self.depth_bound = depth_bound
        self.max_types = max_types
        self.ids: dict = {}
        self.kids: list[tuple[int, ...]] = []
        self.rotor: list[int] = []
        self.frontier: list[bool] = []
        self.bits: list[bytearray] = []
        self.avals: list[list[int]] = []
        self.done = 0
        self._discover()

    def _discover(self):
        g = self.g
        base = g.base_state()
        self.ids[base] = 0
        states = [base]
        depth = [1]
        i = 0
        while i < len(states):
            s = states[i]
            if self.depth_bound is not None and depth[i] > self.depth_bound:
                self.kids.append(())
                self.rotor.append(0)
                self.frontier.append(True)
                i += 1
                continue
            rule = g.rule_for(s)
            if not rule.deterministic:
                raise ValueError("type-level evaluation needs a deterministic rotor rule")
            ch = g.children(s)
            ids = []
            for c in ch:
                if c not in self.ids:
                    if len(states) >= self.max_types:
                        raise RuntimeError("too many vertex types; pass a depth bound")
                    self.ids[c] = len(states)
                    states.append(c)
                    depth.append(depth[i] + 1)
                ids.append(self.ids[c])
            self.kids.append(tuple(ids))
            self.rotor.append(rule.checked(len(ch), 0, lambda s=s: repr(s)))
            self.frontier.append(False)
            i += 1
        self.states = states
        n = len(states)
        self.bits = [bytearray() for _ in range(n)]
        self.avals = [[] for _ in range(n)]
        self.parents: list[list[int]] = [[] for _ in range(n)]
        for s in range(n):
            r = self.rotor[s]
            for i, c in enumerate(self.kids[s], start=1):
                if i > r and s not in self.parents[c]:
                    self.parents[c].append(s)

    @property
    def exact(self) -> bool:
        return not any(self.frontier)

    def _bit(self, s: int, j: int) -> int:
        if self.frontier[s]:
            return 1
        return self.bits[s][j - 1]

    def extend(self, n: int):
        nt = len(self.states)
        kids, rotor, bits, avals, frontier = self.kids, self.rotor, self.bits, self.avals, self.frontier
        for j in range(self.done + 1, n + 1):
            pending = []
            for s in range(nt):
                if frontier[s] or len(bits[s]) >= j:
                    continue
                t = len(avals[s]) + 1
                if t < j:
                    r = rotor[s]
                    a = 0
                    for i, c in enumerate(kids[s], start=1):
                        if i <= r:
                            if t >= 2:
                                a += 1 if frontier[c] else bits[c][t - 2]
                        else:
                            a += 1 if frontier[c] else bits[c][t - 1]
                    avals[s].append(a)
                    bits[s].extend(b"\x01" * a)
                    bits[s].append(0)
                else:
                    pending.append(s)
            if pending:
                self._solve_same_index(pending, j)
        self.done = max(self.done, n)

    def _solve_same_index(self, pending: list[int], j: int):
        kids, rotor, bits, frontier = self.kids, self.rotor, self.bits, self.frontier
        inset = set(pending)
        shifted = {}
        support = {}
        for s in pending:
            r = rotor[s]
            sh = 0
            sup = 0
            for i, c in enumerate(kids[s], start=1):
                if i <= r:
                    if j >= 2:
                        sh += 1 if frontier[c] else bits[c][j - 2]
                elif c in inset:
                    sup += 1
                elif frontier[c] or bits[c][j - 1]:
                    sup += 1
            shifted[s] = sh
            support[s] = sup + (1 if sh else 0)
        # greatest fixed point: drop types with no remaining support
        alive = {s: True for s in pending}
        queue = deque(s for s in pending if support[s] == 0)
        while queue:
            s = queue.popleft()
            if not alive[s]:
                continue
            alive[s] = False
            for p in self.parents[s]:
                if p in inset and alive[p]:
                    # one support unit per good-child slot pointing at s
                    support[p] -= sum(1 for i, c in enumerate(kids[p], start=1) if c == s and i > rotor[p])
                    if support[p] <= 0:
                        queue.append(p)
        for s in pending:
            r = rotor[s]
            a = shifted[s]
            for i, c in enumerate(kids[s], start=1):
                if i > r:
                    if c in inset:
                        a += 1 if alive[c] else 0
                    else:
                        a += 1 if frontier[c] or bits[c][j - 1] else 0
            self.avals[s].append(a)
            bits[s].extend(b"\x01" * a)
            bits[s].append(0)

    def sequence(self, n: int, state=None) -> EscapePrefix:
        self.extend(n)
        s = 0 if state is None else self.ids[state]
        if self.frontier[s]:
            return EscapePrefix(bytes([1]) * n)
        return EscapePrefix(self.bits[s][:n])


def generator_escape_sequence(g: TreeGenerator, n: int, depth_bound: int | None = None) -> EscapePrefix:
    """First ``n`` escape bits of the infinite tree described by ``g``."""
    return TypeLevelSystem(g, depth_bound).sequence(n)
