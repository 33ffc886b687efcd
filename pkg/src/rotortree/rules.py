"""Rotor rules: how an initial rotor position is chosen for each vertex.

A rule maps a vertex (its number of children ``b``, its path key and,
lazily, its root-path string) to an integer in ``0..b``.  Random rules draw
from a per-vertex stream keyed by the vertex's root path, so the value at a
vertex never depends on how much of the tree has been built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Callable, Mapping

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


ROOT_KEY = mix64(0x726F6F74)


def child_key(parent_key: int, index: int) -> int:
    """Key of child ``index`` (1-based) of a vertex with key ``parent_key``."""
    return mix64(parent_key ^ ((index * _GOLDEN) & MASK64))


def path_key(path: tuple[int, ...]) -> int:
    key = ROOT_KEY
    for k in path:
        key = child_key(key, k)
    return key


class RotorRangeError(ValueError):
    """A rotor value falls outside ``0..b(v)``."""

    def __init__(self, path: str, value: int, b: int):
        super().__init__(f"rotor {value} out of range 0..{b} at vertex {path}")
        self.path = path
        self.value = value
        self.b = b


class DeterministicLawError(ValueError):
    """Raised where a non-deterministic law is required."""


@dataclass(frozen=True)
class IIDRotorLaw:
    """Law of an i.i.d. rotor on values ``0..len(weights)-1``."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(Fraction(x) for x in self.weights)
        if not w:
            raise ValueError("empty law")
        if any(x < 0 for x in w):
            raise ValueError("negative weight")
        if sum(w) != 1:
            raise ValueError(f"weights sum to {sum(w)}, not 1")
        # trailing zero weights do not change the support
        while len(w) > 1 and w[-1] == 0:
            w = w[:-1]
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, values) -> "IIDRotorLaw":
        values = sorted(set(int(v) for v in values))
        if not values or values[0] < 0:
            raise ValueError("uniform law needs nonnegative values")
        w = [Fraction(0)] * (values[-1] + 1)
        for v in values:
            w[v] = Fraction(1, len(values))
        return cls(tuple(w))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, object]) -> "IIDRotorLaw":
        top = max(mapping)
        w = [Fraction(0)] * (top + 1)
        for v, p in mapping.items():
            # floats go through their shortest repr, so 0.1 means 1/10
            w[int(v)] = Fraction(str(p)) if isinstance(p, float) else Fraction(p)
        return cls(tuple(w))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(v for v, p in enumerate(self.weights) if p > 0)

    @property
    def max_value(self) -> int:
        return self.support[-1]

    @property
    def mean(self) -> Fraction:
        return sum((v * p for v, p in enumerate(self.weights)), Fraction(0))

    @property
    def is_deterministic(self) -> bool:
        return len(self.support) == 1

    @cached_property
    def _cutoffs(self) -> tuple[int, ...]:
        # u64 / 2**64 < F(v)  <=>  u64 < ceil(F(v) * 2**64), for integer u64
        out = []
        acc = Fraction(0)
        for p in self.weights:
            acc += p
            out.append(-((-acc.numerator << 64) // acc.denominator))
        return tuple(out)

    def sample(self, u64: int) -> int:
        """Value for a uniform 64-bit draw, by exact comparison with the CDF."""
        for v, c in enumerate(self._cutoffs):
            if u64 < c:
                return v
        return len(self.weights) - 1

    def __str__(self):
        return ",".join(f"{v}={p}" for v, p in enumerate(self.weights) if p)


class RotorRule:
    """Base class.  ``value`` returns the initial rotor at one vertex."""

    name = "rule"
    #: value depends only on the vertex's subtree type, not on its position
    deterministic = True

    def value(self, b: int, key: int, path: Callable[[], str]) -> int:
        raise NotImplementedError

    def checked(self, b: int, key: int, path: Callable[[], str]) -> int:
        r = self.value(b, key, path)
        if not 0 <= r <= b:
            raise RotorRangeError(path(), r, b)
        return r

    def __str__(self):
        return self.name


class Down(RotorRule):
    name = "down"

    def value(self, b, key, path):
        return 0

    def __eq__(self, other):
        return type(other) is Down

    def __hash__(self):
        return hash("down")


class Full(RotorRule):
    name = "full"

    def value(self, b, key, path):
        return b

    def __eq__(self, other):
        return type(other) is Full

    def __hash__(self):
        return hash("full")


@dataclass(frozen=True, eq=True)
class Constant(RotorRule):
    k: int
    clamp: bool = False

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("constant rotor must be >= 0")

    @property
    def name(self):
        return f"const:{self.k}"

    def value(self, b, key, path):
        if self.clamp:
            return min(self.k, b)
        return self.k


@dataclass(frozen=True, eq=True)
class IID(RotorRule):
    law: IIDRotorLaw
    seed: int = 0
    deterministic = False

    @property
    def name(self):
        return f"iid:{self.law}@{self.seed}"

    def value(self, b, key, path):
        return self.law.sample(mix64(key ^ mix64(self.seed & MASK64)))


@dataclass(frozen=True)
class Explicit(RotorRule):
    """Given values at listed root-paths, ``default`` elsewhere."""

    values: Mapping[str, int]
    default: RotorRule = field(default_factory=Down)
    deterministic = False

    @property
    def name(self):
        return f"explicit[{len(self.values)}]+{self.default}"

    def value(self, b, key, path):
        if self.values:
            p = path()
            if p in self.values:
                return int(self.values[p])
        return self.default.value(b, key, path)


def parse_law(text: str) -> IIDRotorLaw:
    """``0=1/3,1=1/3,2=1/3`` or ``uniform:0,1,2``."""
    text = text.strip()
    if text.startswith("uniform:"):
        return IIDRotorLaw.uniform(int(x) for x in text[8:].split(","))
    mapping = {}
    for part in text.split(","):
        v, _, p = part.partition("=")
        mapping[int(v)] = Fraction(p)
    return IIDRotorLaw.from_mapping(mapping)


def parse_rule(text: str, seed: int = 0) -> RotorRule:
    """Parse a CLI rule spec: ``down``, ``full``, ``const:K``, ``iid:LAW``."""
    text = text.strip()
    if text == "down":
        return Down()
    if text == "full":
        return Full()
    if text.startswith("const:"):
        return Constant(int(text[6:]))
    if text.startswith("iid:"):
        return IID(parse_law(text[4:]), seed)
    if text.startswith("uniform:"):
        return IID(parse_law(text), seed)
    raise ValueError(f"unknown rotor rule {text!r}")
