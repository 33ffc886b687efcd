"""Rotor-walk engine on finite trees with sinks and on lazily built trees.

Rotor mechanics: at a non-root vertex ``v`` the rotor is first advanced to
``(r(v) + 1) mod (b(v) + 1)`` and the particle then moves to that
neighbour (index 0 is the parent).  The root always forwards to the base.
A particle stops on its first entry to a sink or on its return to the root.
"""
from __future__ import annotations

import heapq
import random
from array import array
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernel
from .rules import ROOT_KEY, child_key
from .tree import EXPANDED, SINK, VISITED, FiniteTree, RotorConfig

DEFAULT_STEP_BUDGET = 10 ** 9
DEFAULT_VERTEX_BUDGET = 10 ** 6
_COUNTER_MAX = 2 ** 63 - 1


class StepBudgetExceeded(RuntimeError):
    """A walk ran past its step budget (on a finite tree this means an engine bug)."""


class VertexBudgetExceeded(RuntimeError):
    """Lazy materialization hit the vertex budget."""


class ImbalanceError(ValueError):
    """Edge counts do not describe a closed path."""


# -- results -------------------------------------------------------------

@dataclass(frozen=True)
class WalkOutcome:
    verdict: str  # "returned" or "absorbed"
    vertex: int | None
    steps: int
    max_level: int

    @property
    def escaped(self) -> bool:
        return self.verdict == "absorbed"


class EscapePrefix:
    """Bits ``e_1..e_N`` with cumulative counts ``E_n``."""

    __slots__ = ("bits", "_cum")

    def __init__(self, bits: Iterable[int]):
        if isinstance(bits, np.ndarray):
            b = bits.astype(np.uint8, copy=False)
        else:
            b = np.frombuffer(bytes(bytearray(bits)), dtype=np.uint8)
        if b.size and b.max() > 1:
            raise ValueError("escape bits must be 0 or 1")
        self.bits = b
        self.bits.flags.writeable = False
        self._cum = None

    @classmethod
    def from_string(cls, text: str) -> "EscapePrefix":
        return cls(int(c) for c in text.replace(",", "").replace(" ", ""))

    def __len__(self) -> int:
        return int(self.bits.size)

    def __getitem__(self, n: int) -> int:
        """``e_n`` (1-based)."""
        if not 1 <= n <= len(self):
            raise IndexError(n)
        return int(self.bits[n - 1])

    @property
    def counts(self) -> np.ndarray:
        """``E_1..E_N`` as an int64 array."""
        if self._cum is None:
            self._cum = np.cumsum(self.bits, dtype=np.int64)
            self._cum.flags.writeable = False
        return self._cum

    def E(self, n: int) -> int:
        if n == 0:
            return 0
        if not 1 <= n <= len(self):
            raise IndexError(n)
        return int(self.counts[n - 1])

    def tolist(self) -> list[int]:
        return self.bits.tolist()

    def prefix(self, n: int) -> "EscapePrefix":
        return EscapePrefix(self.bits[:n])

    def __eq__(self, other):
        if isinstance(other, EscapePrefix):
            return np.array_equal(self.bits, other.bits)
        if isinstance(other, (list, tuple)):
            return self.tolist() == list(other)
        return NotImplemented

    def __str__(self):
        return "".join("1" if x else "0" for x in self.bits.tolist())

    def __repr__(self):
        s = str(self)
        return f"EscapePrefix({s[:60]}{'...' if len(s) > 60 else ''}, N={len(self)})"


@dataclass
class WalkStats:
    """Traversal telemetry: ``n_v`` (parent to ``v``) and ``m_v`` (``v`` to parent)."""

    n: np.ndarray
    m: np.ndarray
    visited: np.ndarray
    outcomes: list = field(default_factory=list)
    steps: int = 0
    max_level: int = 0

    def visited_set(self) -> set[int]:
        return set(np.flatnonzero(self.visited).tolist())


# -- arena -----------------------------------------------------------------

class Arena:
    """Mutable per-run storage: tree columns, rotors and counters.

    Built either from a finite tree (rotors shared with the given config) or
    lazily from a generator, materializing vertices on first arrival.
    """

    def __init__(self):
        self.parent = array("q")
        self.first_child = array("q")
        self.nchild = array("q")
        self.rotor = array("q")
        self.level = array("q")
        self.flags = bytearray()
        self.n_count = array("q")
        self.m_count = array("q")
        self.key = array("Q")
        self.states: list | None = None
        self.generator = None
        self.depth_cap: int | None = None
        self.vertex_budget = DEFAULT_VERTEX_BUDGET
        self.counts = True

    @classmethod
    def from_tree(cls, tree: FiniteTree, config: RotorConfig) -> "Arena":
        if config.tree is not tree and config.tree != tree:
            raise ValueError("config belongs to a different tree")
        a = cls()
        a.tree = tree
        a.parent = tree.parent
        a.first_child = tree.first_child
        a.nchild = tree.nchild
        a.level = tree.level
        a.key = tree.key
        a.rotor = config.values
        a.flags = bytearray(s | EXPANDED if not s else s for s in tree.sink)
        n = len(tree)
        a.n_count = array("q", bytes(8 * n))
        a.m_count = array("q", bytes(8 * n))
        return a

    @classmethod
    def lazy(cls, generator, depth_cap: int | None = None,
             vertex_budget: int = DEFAULT_VERTEX_BUDGET, counts: bool = True) -> "Arena":
        """Arena over the generated tree; vertices at level ``depth_cap`` are sinks.

        With ``counts=False`` no edge counters are stored (runs must not track).
        """
        if depth_cap is not None and depth_cap < 1:
            raise ValueError("depth cap must be at least 1")
        a = cls()
        a.tree = None
        a.generator = generator
        a.depth_cap = depth_cap
        a.vertex_budget = vertex_budget
        a.counts = counts
        a.states = [None]
        a.parent.append(-1)
        a.first_child.append(1)
        a.nchild.append(1)
        a.rotor.append(0)
        a.level.append(0)
        a.flags.append(EXPANDED)
        a.key.append(ROOT_KEY)
        a.n_count.append(0)
        a.m_count.append(0)
        a._new_vertex(0, 1, generator.base_state())
        return a

    def __len__(self):
        return len(self.parent)

    def _new_vertex(self, parent: int, index: int, state):
        lvl = self.level[parent] + 1
        self.parent.append(parent)
        self.first_child.append(0)
        self.nchild.append(0)
        self.rotor.append(0)
        self.level.append(lvl)
        self.flags.append(SINK if self.depth_cap is not None and lvl >= self.depth_cap else 0)
        self.key.append(child_key(self.key[parent], index))
        if self.counts:
            self.n_count.append(0)
            self.m_count.append(0)
        self.states.append(state)

    def expand(self, v: int):
        if len(self) >= self.vertex_budget:
            raise VertexBudgetExceeded(f"vertex budget {self.vertex_budget} exhausted")
        g = self.generator
        state = self.states[v]
        kids = g.children(state)
        b = len(kids)
        self.rotor[v] = g.rule_for(state).checked(b, self.key[v], lambda: self.path(v))
        self.first_child[v] = len(self)
        self.nchild[v] = b
        for k, s in enumerate(kids, start=1):
            self._new_vertex(v, k, s)
        self.flags[v] |= EXPANDED

    def path(self, v: int) -> str:
        out = []
        while v != 0:
            p = self.parent[v]
            out.append(v - self.first_child[p] + 1)
            v = p
        return "/".join(map(str, reversed(out))) or "-"

    def children(self, v: int) -> range:
        f = self.first_child[v]
        return range(f, f + self.nchild[v])

    def is_expanded(self, v: int) -> bool:
        return bool(self.flags[v] & EXPANDED)

    def visited_mask(self) -> np.ndarray:
        return (np.frombuffer(bytes(self.flags), dtype=np.uint8) & VISITED) > 0

    def reset_counts(self):
        for i in range(len(self)):
            self.n_count[i] = 0
            self.m_count[i] = 0


# -- engine ----------------------------------------------------------------

class RotorEngine:
    """Runs particles one at a time from the root."""

    def __init__(self, arena: Arena, step_budget: int = DEFAULT_STEP_BUDGET,
                 track: bool = True, advance: Callable | None = None):
        self.arena = arena
        self.step_budget = step_budget
        self.steps = 0
        if track and not arena.counts:
            raise ValueError("arena was built without edge counters")
        self.track = track
        self.outcomes: list[WalkOutcome] = []
        self.max_level = 0
        self.visited = 0
        self._advance = advance or kernel.advance

    @classmethod
    def for_tree(cls, tree: FiniteTree, config: RotorConfig, **kw) -> "RotorEngine":
        return cls(Arena.from_tree(tree, config), **kw)

    def run_particle(self) -> WalkOutcome:
        a = self.arena
        adv = self._advance
        remaining = self.step_budget - self.steps
        pos = 0
        from_root = True
        steps = 0
        max_level = 0
        while True:
            code, pos, s, lvl, newly = adv(a.parent, a.first_child, a.nchild, a.rotor, a.level,
                                           a.flags, a.n_count, a.m_count, self.track,
                                           pos, remaining - steps, from_root)
            from_root = False
            steps += s
            self.visited += newly
            if lvl > max_level:
                max_level = lvl
            if code == kernel.NEED_EXPAND:
                a.expand(pos)
                continue
            if code == kernel.BUDGET:
                self.steps += steps
                raise StepBudgetExceeded(f"step budget {self.step_budget} exceeded")
            break
        self.steps += steps
        if self.steps > _COUNTER_MAX:
            raise OverflowError("step counter overflow")
        if max_level > self.max_level:
            self.max_level = max_level
        if code == kernel.ABSORBED:
            out = WalkOutcome("absorbed", pos, steps, max_level)
        else:
            out = WalkOutcome("returned", None, steps, max_level)
        self.outcomes.append(out)
        return out

    def run(self, n: int) -> EscapePrefix:
        bits = bytearray(n)
        for i in range(n):
            if self.run_particle().escaped:
                bits[i] = 1
        return EscapePrefix(bits)

    def stats(self) -> WalkStats:
        a = self.arena
        return WalkStats(
            n=np.array(a.n_count, dtype=np.int64),
            m=np.array(a.m_count, dtype=np.int64),
            visited=a.visited_mask(),
            outcomes=list(self.outcomes),
            steps=self.steps,
            max_level=self.max_level,
        )


def run_particle(tree: FiniteTree, config: RotorConfig, step_budget: int = DEFAULT_STEP_BUDGET) -> WalkOutcome:
    """Send one particle from the root; ``config`` is updated in place."""
    return RotorEngine.for_tree(tree, config, step_budget=step_budget, track=False).run_particle()


def run_escape_prefix(tree: FiniteTree, config: RotorConfig, n: int,
                      step_budget: int = DEFAULT_STEP_BUDGET) -> tuple[EscapePrefix, WalkStats]:
    """Run ``n`` particles without resetting rotors; ``config`` is updated in place."""
    if n < 1:
        raise ValueError("n must be at least 1")
    eng = RotorEngine.for_tree(tree, config, step_budget=step_budget)
    prefix = eng.run(n)
    return prefix, eng.stats()


def escape_prefix(tree: FiniteTree, config: RotorConfig, n: int, **kw) -> EscapePrefix:
    """Like :func:`run_escape_prefix` but on a copy of ``config``."""
    return run_escape_prefix(tree, config.copy(), n, **kw)[0]


# -- Abelian firing ----------------------------------------------------------

@dataclass
class FiringResult:
    sink_tally: dict[int, int]
    root: int
    firings: int
    n: np.ndarray
    m: np.ndarray

    def tally_vector(self, tree: FiniteTree) -> tuple[int, ...]:
        return tuple(self.sink_tally.get(s, 0) for s in tree.sinks)


def fire_until_stable(tree: FiniteTree, config: RotorConfig, load: Mapping[int, int],
                      policy: str | Callable = "sequential", seed: int = 0,
                      step_budget: int = DEFAULT_STEP_BUDGET,
                      stop: Iterable[int] = ()) -> FiringResult:
    """Move particles one at a time until all rest at sinks or the root.

    ``load`` maps vertices to particle counts (the root's particles are
    forwarded to the base first).  ``policy`` picks the next occupied vertex
    to fire: ``"sequential"`` always fires the lowest-numbered one,
    ``"round-robin"`` cycles through vertex numbers, ``"random"`` draws
    uniformly with ``seed``; a callable receives the sorted list of
    occupied vertices and returns one of them.  Vertices in ``stop`` act as
    extra sinks.
    """
    rot = config.values
    parent, first, nchild = tree.parent, tree.first_child, tree.nchild
    sink = tree.sink
    stop = set(stop)
    if stop:
        sink = bytearray(tree.sink)
        for v in stop:
            if v == 0:
                raise ValueError("the root cannot be a stop vertex")
            sink[v] = SINK
    nc = np.zeros(len(tree), dtype=np.int64)
    mc = np.zeros(len(tree), dtype=np.int64)
    count = [0] * len(tree)
    root_particles = 0
    for v, c in load.items():
        if c < 0:
            raise ValueError("negative load")
        if v == 0:
            root_particles += c
        else:
            count[v] += c
    # root particles start by stepping to the base
    if root_particles:
        count[1] += root_particles
        nc[1] += root_particles
    tally: dict[int, int] = {}
    root_abs = 0
    for v in range(1, len(tree)):
        if sink[v] and count[v]:
            tally[v] = count[v]
            count[v] = 0
    active = sorted(v for v in range(1, len(tree)) if count[v])
    heap = list(active)
    heapq.heapify(heap)
    occupied = set(active)
    rng = random.Random(seed)
    rr_pointer = 0
    firings = 0
    while occupied:
        if policy == "sequential":
            while heap[0] not in occupied:
                heapq.heappop(heap)
            v = heap[0]
        elif policy == "round-robin":
            cands = sorted(occupied)
            i = next((j for j, u in enumerate(cands) if u >= rr_pointer), 0)
            v = cands[i]
            rr_pointer = v + 1
        elif policy == "random":
            v = rng.choice(sorted(occupied))
        elif callable(policy):
            v = policy(sorted(occupied))
            if v not in occupied:
                raise ValueError(f"policy chose unoccupied vertex {v}")
        else:
            raise ValueError(f"unknown firing policy {policy!r}")
        firings += 1
        if firings > step_budget:
            raise StepBudgetExceeded(f"firing budget {step_budget} exceeded")
        r = rot[v] + 1
        if r > nchild[v]:
            r = 0
        rot[v] = r
        count[v] -= 1
        if not count[v]:
            occupied.discard(v)
        if r == 0:
            mc[v] += 1
            w = parent[v]
        else:
            w = first[v] + r - 1
            nc[w] += 1
        if w == 0:
            root_abs += 1
        elif sink[w]:
            tally[w] = tally.get(w, 0) + 1
        else:
            count[w] += 1
            if w not in occupied:
                occupied.add(w)
                heapq.heappush(heap, w)
    return FiringResult(tally, root_abs, firings, nc, mc)


# -- discrepancy -------------------------------------------------------------

def check_balance(tree: FiniteTree, n: Sequence[int], m: Sequence[int]) -> list[int]:
    """Internal vertices where arrivals differ from departures."""
    bad = []
    for v in tree.internal():
        arrive = n[v] + sum(m[c] for c in tree.children(v))
        leave = m[v] + sum(n[c] for c in tree.children(v))
        if arrive != leave:
            bad.append(v)
    return bad


def edge_discrepancy(tree: FiniteTree, stats: WalkStats, p: Mapping[int, Fraction] | Sequence[Fraction]) -> dict[int, Fraction]:
    """``delta_v = p_v n_v - m_v`` for every non-root vertex, exactly.

    ``stats`` must be taken between particles (a closed path when absorbed
    particles are sent back to the root).
    """
    bad = check_balance(tree, stats.n, stats.m)
    if bad:
        raise ImbalanceError(f"arrivals != departures at {tree.path(bad[0])}: not a closed path")
    return {v: Fraction(p[v]) * int(stats.n[v]) - int(stats.m[v]) for v in range(1, len(tree))}
