"""Memoizing lazy integer sequences and the shift / add / explode calculus.

Terms are 1-based.  A sequence is defined by an iterator factory; terms are
pulled on demand and memoized.  Self-referential sequences are built with
:func:`fixed_point`; a term that (transitively) requests itself or a later
term of the same sequence raises :class:`NonProductiveError`.
"""
from __future__ import annotations

import itertools
import threading
from typing import Callable, Iterable, Iterator, Sequence


class NonProductiveError(RuntimeError):
    """A sequence term depends on itself or on a later term."""


class LazySeq:
    __slots__ = ("_factory", "_iter", "_terms", "_lock", "_filling", "binary", "_verify")

    def __init__(self, factory: Callable[[], Iterator[int]] | None = None, binary: bool = False):
        self._factory = factory
        self._iter: Iterator[int] | None = None
        self._terms: list[int] = []
        self._lock = threading.RLock()
        self._filling = False
        self._verify: list[int] = []
        self.binary = binary

    # -- construction ----------------------------------------------------
    @classmethod
    def from_iterable(cls, make: Callable[[], Iterable[int]], binary: bool = False) -> "LazySeq":
        return cls(lambda: iter(make()), binary)

    @classmethod
    def from_list(cls, values: Sequence[int], tail: int = 0) -> "LazySeq":
        """``values`` followed by ``tail`` forever."""
        vals = list(values)
        binary = all(v in (0, 1) for v in vals) and tail in (0, 1)
        return cls(lambda: itertools.chain(vals, itertools.repeat(tail)), binary)

    @classmethod
    def constant(cls, c: int) -> "LazySeq":
        return cls.from_list([], c)

    @classmethod
    def from_function(cls, f: Callable[[int], int], binary: bool = False) -> "LazySeq":
        return cls(lambda: (f(i) for i in itertools.count(1)), binary)

    # -- access ------------------------------------------------------------
    def _fill(self, n: int):
        with self._lock:
            if len(self._terms) >= n:
                return
            if self._filling:
                raise NonProductiveError(
                    f"term {n} requested while computing term {len(self._terms) + 1}")
            self._filling = True
            try:
                if self._iter is None:
                    if self._factory is None:
                        raise ValueError("sequence has no source")
                    self._iter = self._factory()
                    # skip-and-verify the seeded prefix of a fixed point
                    for i, expected in enumerate(self._verify, start=1):
                        got = next(self._iter)
                        if got != expected:
                            raise ValueError(f"seed term {i} is {expected} but the equation gives {got}")
                    self._verify = []
                terms = self._terms
                it = self._iter
                while len(terms) < n:
                    terms.append(next(it))
            finally:
                self._filling = False

    def __getitem__(self, i: int) -> int:
        """Term ``a_i`` (1-based)."""
        if i < 1:
            raise IndexError("terms are 1-based")
        if len(self._terms) < i:
            self._fill(i)
        return self._terms[i - 1]

    def take(self, n: int) -> list[int]:
        if len(self._terms) < n:
            self._fill(n)
        return self._terms[:n]

    def __iter__(self) -> Iterator[int]:
        i = 1
        while True:
            yield self[i]
            i += 1

    def partial_sums(self, n: int) -> list[int]:
        return list(itertools.accumulate(self.take(n)))

    def __add__(self, other: "LazySeq") -> "LazySeq":
        return add(self, other)

    def __rmul__(self, c: int) -> "LazySeq":
        return scale(c, self)

    def __repr__(self):
        shown = self._terms[:20]
        return f"LazySeq({','.join(map(str, shown))}{',...' if len(self._terms) >= 20 or self._iter is None else ''})"


def shift(a: LazySeq) -> LazySeq:
    """Prepend a zero."""
    return LazySeq(lambda: itertools.chain([0], iter(a)), a.binary)


def add(*seqs: LazySeq) -> LazySeq:
    if not seqs:
        return LazySeq.constant(0)
    if len(seqs) == 1:
        return seqs[0]
    return LazySeq(lambda: (sum(t) for t in zip(*(iter(s) for s in seqs))))


def scale(c: int, a: LazySeq) -> LazySeq:
    if c < 0:
        raise ValueError("negative scale")
    return LazySeq(lambda: (c * x for x in iter(a)), a.binary and c in (0, 1))


def _explode_iter(a: LazySeq) -> Iterator[int]:
    for x in iter(a):
        if x < 0:
            raise ValueError("explode needs nonnegative terms")
        for _ in range(x):
            yield 1
        yield 0


def explode(a: LazySeq) -> LazySeq:
    """``(a_1, a_2, ...) -> 1^{a_1} 0 1^{a_2} 0 ...``."""
    return LazySeq(lambda: _explode_iter(a), binary=True)


def fixed_point(fn: Callable[[LazySeq], LazySeq], seed: Sequence[int] = (), binary: bool = True) -> LazySeq:
    """The sequence ``x`` with ``x = fn(x)`` whose first terms are ``seed``.

    Terms beyond the seed are produced by ``fn`` and may only depend on
    earlier terms; the seed itself is checked against ``fn`` on first use.
    """
    x = LazySeq(binary=binary)
    x._terms = list(seed)
    x._verify = list(seed)
    x._factory = lambda: iter(fn(x))
    return x


def prefix_iterates(step: Callable[[list[int]], list[int]], seed: Sequence[int], n: int,
                    max_rounds: int = 10 ** 6) -> list[list[int]]:
    """Iterate ``x -> step(x)[:n]`` from ``seed`` until the length reaches ``n``.

    ``step`` maps a known finite prefix to the prefix of the image it
    determines.  Returns every iterate (each should extend the previous one).
    """
    out = [list(seed)[:n]]
    for _ in range(max_rounds):
        nxt = step(out[-1])[:n]
        out.append(nxt)
        if len(nxt) >= n or len(nxt) <= len(out[-2]):
            break
    return out


def majorizes(a: LazySeq | Sequence[int], b: LazySeq | Sequence[int], n: int) -> str:
    """Compare prefix sums over the first ``n`` terms.

    Returns ``"equal"``, ``"a>=b"``, ``"b>=a"`` or ``"incomparable"``.
    """
    if n < 1:
        raise ValueError("horizon must be >= 1")
    ta = a.take(n) if isinstance(a, LazySeq) else list(a)[:n]
    tb = b.take(n) if isinstance(b, LazySeq) else list(b)[:n]
    if len(ta) < n or len(tb) < n:
        raise ValueError("prefix shorter than the horizon")
    sa = sb = 0
    ge = le = True
    for x, y in zip(ta, tb):
        sa += x
        sb += y
        if sa < sb:
            ge = False
        elif sa > sb:
            le = False
    if ge and le:
        return "equal"
    if ge:
        return "a>=b"
    if le:
        return "b>=a"
    return "incomparable"
