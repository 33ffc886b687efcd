"""Exact hitting probabilities, discrepancy series and escape-sequence checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .generators import Bary, TreeGenerator
from .rules import DeterministicLawError, IIDRotorLaw
from .tree import FiniteTree, RotorConfig
from .walker import EscapePrefix


# -- hitting probabilities ------------------------------------------------------

@dataclass(frozen=True)
class HittingProfile:
    """``p[v]``: probability that simple random walk from ``v`` hits ``v``'s
    parent before a sink (``None`` at the root); ``escape_prob = 1 - p[base]``."""

    p: tuple
    escape_prob: Fraction


def escape_probability(tree: FiniteTree) -> HittingProfile:
    """Evaluate ``p = 1 / (1 + sum_i (1 - p_i))`` bottom-up, exactly."""
    p: list = [None] * len(tree)
    one = Fraction(1)
    for v in range(len(tree) - 1, 0, -1):
        if tree.sink[v]:
            p[v] = Fraction(0)
            continue
        s = sum((one - p[c] for c in tree.children(v)), Fraction(0))
        p[v] = one / (one + s)
    return HittingProfile(tuple(p), one - p[1])


def truncated_escape_probability(g: TreeGenerator, h: int) -> Fraction:
    """Exact escape probability of the depth-``h`` truncation of ``g``."""
    if h < 1:
        raise ValueError("h must be at least 1")
    memo: dict = {}
    one = Fraction(1)
    # iterative bottom-up over (state, level) to avoid deep recursion
    levels: list[set] = [set() for _ in range(h + 1)]
    levels[1].add(g.base_state())
    for lvl in range(1, h):
        for s in levels[lvl]:
            levels[lvl + 1].update(g.children(s))
    for s in levels[h]:
        memo[(s, h)] = Fraction(0)
    for lvl in range(h - 1, 0, -1):
        for s in levels[lvl]:
            total = sum((one - memo[(c, lvl + 1)] for c in g.children(s)), Fraction(0))
            memo[(s, lvl)] = one / (one + total)
    return one - memo[(g.base_state(), 1)]


@dataclass(frozen=True)
class EscapeProbabilityEstimate:
    value: Fraction
    exact: bool
    depth: int | None
    converged: bool


def limit_escape_probability(g: TreeGenerator, tol: float = 1e-12, h0: int = 8, h_max: int = 4096) -> EscapeProbabilityEstimate:
    """Escape probability of the infinite tree.

    Exact ``(b-1)/b`` for the ``b``-ary tree; otherwise the decreasing limit
    of truncations, stopped when two successive doublings differ by < ``tol``.
    """
    if isinstance(g, Bary):
        return EscapeProbabilityEstimate(Fraction(g.b - 1, g.b), True, None, True)
    h = h0
    prev = truncated_escape_probability(g, h)
    while 2 * h <= h_max:
        h *= 2
        cur = truncated_escape_probability(g, h)
        if abs(float(prev - cur)) < tol:
            return EscapeProbabilityEstimate(cur, False, h, True)
        prev = cur
    return EscapeProbabilityEstimate(prev, False, h, False)


# -- discrepancy --------------------------------------------------------------

@dataclass
class DiscrepancySeries:
    """``Delta_n = (E_n - escape_prob n) / log_b n`` for ``n = 2..N``.

    ``scaled[n-2] = den * (E_n - escape_prob n)`` is exact (an integer), with
    ``den`` the denominator of ``escape_prob``.
    """

    escape_prob: Fraction
    b: int
    n: np.ndarray
    scaled: np.ndarray
    den: int
    values: np.ndarray

    def numerator(self, n: int) -> Fraction:
        return Fraction(int(self.scaled[n - 2]), self.den)

    def extrema(self, n_lo: int = 2, n_hi: int | None = None) -> tuple[float, float]:
        """Running min and max of ``Delta_n`` over ``n_lo <= n <= n_hi``."""
        n_hi = int(self.n[-1]) if n_hi is None else n_hi
        sel = self.values[max(n_lo, 2) - 2:n_hi - 1]
        return float(sel.min()), float(sel.max())


def discrepancy_series(e: EscapePrefix, escape_prob: Fraction, b: int) -> DiscrepancySeries:
    if len(e) < 2:
        raise ValueError("need at least two terms")
    escape_prob = Fraction(escape_prob)
    N = len(e)
    n = np.arange(2, N + 1, dtype=np.int64)
    E = e.counts[1:].astype(object)
    scaled = np.array([escape_prob.denominator * int(x) - escape_prob.numerator * int(k) for x, k in zip(E, n)], dtype=object)
    values = np.array([float(Fraction(int(s), escape_prob.denominator)) for s in scaled]) / (np.log(n) / math.log(b))
    return DiscrepancySeries(escape_prob, b, n, scaled, escape_prob.denominator, values)


def envelope_violation(e: EscapePrefix, escape_prob: Fraction, slack: Fraction | int = 10) -> int | None:
    """First ``n`` with ``E_n > escape_prob n + slack``, or ``None``.

    The slack is an empirical allowance for finite trees, not a proven
    bound; the comparison itself is exact.
    """
    escape_prob, slack = Fraction(escape_prob), Fraction(slack)
    den = escape_prob.denominator * slack.denominator
    a = escape_prob.numerator * slack.denominator
    c = slack.numerator * escape_prob.denominator
    for n, E in enumerate(e.counts.tolist(), start=1):
        if E * den > a * n + c:
            return n
    return None


def regular_discrepancy_limits(b: int, k: int) -> tuple[Fraction, Fraction]:
    """(liminf, limsup) of ``Delta_n`` for the ``b``-ary tree with constant rotor ``k``."""
    low = Fraction(0) if k == 0 else Fraction(-(k - 1), b)
    return low, Fraction(b - k - 1, b)


# -- sequence checks ------------------------------------------------------------

@dataclass(frozen=True)
class WindowVerdict:
    valid: bool
    window: int | None = None  # violating window length 2^k - 1
    start: int | None = None  # 1-based start of the first violating window
    ones: int | None = None


def check_window_condition(e: EscapePrefix | Sequence[int]) -> WindowVerdict:
    """Every window of length ``2^k - 1`` holds at most ``2^(k-1)`` ones."""
    bits = e.bits if isinstance(e, EscapePrefix) else np.asarray(e, dtype=np.uint8)
    N = bits.size
    cs = np.concatenate([[0], np.cumsum(bits, dtype=np.int64)])
    k = 2
    while (1 << k) - 1 <= N:
        w = (1 << k) - 1
        sums = cs[w:] - cs[:-w]
        bad = np.flatnonzero(sums > (1 << (k - 1)))
        if bad.size:
            i = int(bad[0])
            return WindowVerdict(False, w, i + 1, int(sums[i]))
        k += 1
    return WindowVerdict(True)


@dataclass(frozen=True)
class PhaseVerdict:
    regime: str  # "escaping" or "trapped"
    mean: Fraction
    critical: bool

    @property
    def trapped(self) -> bool:
        return self.regime == "trapped"


def classify_phase(law: IIDRotorLaw, b: int) -> PhaseVerdict:
    """Escaping iff the mean rotor is below ``b - 1``."""
    if law.max_value > b:
        raise ValueError(f"law support exceeds 0..{b}")
    if law.is_deterministic:
        raise DeterministicLawError("deterministic law: use the constant-configuration results instead")
    m = law.mean
    if m < b - 1:
        return PhaseVerdict("escaping", m, False)
    return PhaseVerdict("trapped", m, m == b - 1)


def good_child_indicator(r: int, k: int) -> bool:
    """Child ``k`` of a vertex with rotor ``r`` is good (visited before the parent)."""
    if k < 1:
        raise ValueError("child indices start at 1")
    return r < k


def find_live_paths(tree: FiniteTree, config: RotorConfig, depth: int | None = None) -> set[str]:
    """Root-paths of vertices on all-good chains from the base that reach a sink.

    Reports the vertices at level ``depth`` on such chains, or the sinks
    themselves when ``depth`` is ``None``.
    """
    reach = bytearray(len(tree))
    rot = config.values
    for v in range(len(tree) - 1, 0, -1):
        if tree.sink[v]:
            reach[v] = 1
            continue
        f = tree.first_child[v]
        for k in range(rot[v] + 1, tree.nchild[v] + 1):
            if reach[f + k - 1]:
                reach[v] = 1
                break
    out: set[str] = set()
    if not reach[1]:
        return out
    stack = [1]
    while stack:
        v = stack.pop()
        lvl = tree.level[v]
        if (depth is None and tree.sink[v]) or lvl == depth:
            out.add(tree.path(v))
            continue
        if tree.sink[v]:
            continue
        f = tree.first_child[v]
        for k in range(rot[v] + 1, tree.nchild[v] + 1):
            if reach[f + k - 1]:
                stack.append(f + k - 1)
    return out


def liminf_bound(ells: Sequence[Fraction | float]) -> Fraction | float:
    """``1 - 1 / (1 + sum ells)``."""
    for x in ells:
        if not 0 <= x <= 1:
            raise ValueError("liminf values lie in [0, 1]")
    s = sum(ells)
    if all(isinstance(x, (int, Fraction)) for x in ells):
        return 1 - Fraction(1) / (1 + Fraction(s))
    return 1 - 1 / (1 + s)


def iterate_liminf(b: int, a0: float, tol: float = 1e-9, max_iter: int = 200) -> tuple[float, int]:
    """Iterate ``a -> 1 - 1/(1 + b a)`` until successive values differ by < ``tol``."""
    a = a0
    for i in range(1, max_iter + 1):
        nxt = 1 - 1 / (1 + b * a)
        if abs(nxt - a) < tol:
            return nxt, i
        a = nxt
    return a, max_iter
