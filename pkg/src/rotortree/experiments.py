"""Infinite-tree quantities via truncation, and desk-scale experiment drivers.

Escape counts of an infinite tree are approached from above by truncations:
``E_n`` of the depth-``h`` truncation is nonincreasing in ``h`` and equals
the infinite-tree value for ``h`` large.  A value is reported as stabilized
once two consecutive probe depths give the same prefix; that certificate is
heuristic and always reported with the result.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .analytics import limit_escape_probability, classify_phase
from .explosion import TypeLevelSystem, brush_sequence, digit_sum
from .generators import AttachAtSpine, Bary, Brush, BinaryWithBrushes, TreeGenerator, truncate
from .randomtrees import random_config
from .rules import IID, IIDRotorLaw
from .tree import RotorConfig, build_bary
from .walker import (DEFAULT_VERTEX_BUDGET, Arena, EscapePrefix, RotorEngine,
                     StepBudgetExceeded, VertexBudgetExceeded, fire_until_stable,
                     run_escape_prefix)

DEFAULT_STEP_BUDGET = 10 ** 8


class TruncationMonotonicityError(RuntimeError):
    """A deeper truncation produced more escapes: an engine bug."""


# -- stabilization ---------------------------------------------------------------

@dataclass
class StabilizationReport:
    quantity: str
    depths: list[int] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)  # E_n at each probed depth
    verdict: str = "not stabilized"
    certificate: int | None = None
    reason: str = ""

    @property
    def stabilized(self) -> bool:
        return self.certificate is not None

    def to_dict(self) -> dict:
        return {"quantity": self.quantity, "depths": self.depths, "E_n": self.counts,
                "verdict": self.verdict, "certificate_depth": self.certificate,
                "reason": self.reason}


def default_schedule(h0: int = 8, probes: int = 10) -> list[int]:
    return [h0 << i for i in range(probes)]


def geometric_schedule(h0: int, h_max: int, factor: float = 1.5) -> list[int]:
    out = [h0]
    while out[-1] < h_max:
        out.append(max(out[-1] + 1, int(out[-1] * factor)))
    return out


def escape_prefix_infinite(g: TreeGenerator, n: int, h_schedule: Sequence[int] | None = None,
                           vertex_budget: int = DEFAULT_VERTEX_BUDGET,
                           step_budget: int = DEFAULT_STEP_BUDGET) -> tuple[EscapePrefix, StabilizationReport]:
    """First ``n`` escape bits of the infinite tree, from truncations at increasing depth.

    Returns the last prefix computed (an upper bound in the majorization
    order when not stabilized) and the report.
    """
    schedule = list(h_schedule) if h_schedule is not None else default_schedule()
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or not schedule or schedule[0] < 1:
        raise ValueError("depth schedule must be strictly increasing and positive")
    rep = StabilizationReport(f"E_{n}")
    prev: EscapePrefix | None = None
    steps_left = step_budget
    for h in schedule:
        arena = Arena.lazy(g, depth_cap=h, vertex_budget=vertex_budget, counts=False)
        eng = RotorEngine(arena, step_budget=steps_left, track=False)
        try:
            cur = eng.run(n)
        except (VertexBudgetExceeded, StepBudgetExceeded) as exc:
            rep.reason = f"budget exhausted at depth {h}: {exc}"
            break
        steps_left -= eng.steps
        rep.depths.append(h)
        rep.counts.append(cur.E(n))
        if prev is not None:
            if np.any(cur.counts > prev.counts):
                m = int(np.flatnonzero(cur.counts > prev.counts)[0]) + 1
                raise TruncationMonotonicityError(
                    f"E_{m} grew from depth {rep.depths[-2]} to depth {h}")
            if cur == prev:
                rep.verdict = f"stabilized at h={rep.depths[-2]}"
                rep.certificate = rep.depths[-2]
                return cur, rep
        prev = cur
    if prev is None:
        raise VertexBudgetExceeded(rep.reason or "no depth could be probed")
    if not rep.reason:
        rep.reason = "depth schedule exhausted"
    return prev, rep


def trapped_prefix(g: TreeGenerator, n: int, vertex_budget: int = DEFAULT_VERTEX_BUDGET,
                   step_budget: int = DEFAULT_STEP_BUDGET) -> tuple[EscapePrefix | None, RotorEngine]:
    """Run ``n`` particles on the lazily built infinite tree (no sinks).

    Only meaningful where particles return: an escaping particle never
    stops, so the run ends at a budget and ``None`` is returned.  When all
    ``n`` particles return, ``E_n = 0`` holds exactly (any truncation deeper
    than the explored region gives the same walk).
    """
    arena = Arena.lazy(g, depth_cap=None, vertex_budget=vertex_budget, counts=False)
    eng = RotorEngine(arena, step_budget=step_budget, track=False)
    try:
        pref = eng.run(n)
    except (VertexBudgetExceeded, StepBudgetExceeded):
        return None, eng
    return pref, eng


# -- density -----------------------------------------------------------------------

@dataclass
class DensityReport:
    n: int
    prefix: EscapePrefix
    escape_prob: Fraction
    escape_prob_exact: bool
    ratio: float
    tolerance: float
    within: bool
    stabilization: StabilizationReport


def reference_escape_probability(g: TreeGenerator) -> tuple[Fraction, bool]:
    est = limit_escape_probability(g, h_max=512)
    return est.value, est.exact


def density_experiment(g: TreeGenerator, n_max: int, rule=None, tolerance: float = 0.02,
                       h_schedule: Sequence[int] | None = None, **budget) -> DensityReport:
    """``E_n / n`` against the escape probability for a generator."""
    if rule is not None:
        g = g.with_rule(rule)
    pref, rep = escape_prefix_infinite(g, n_max, h_schedule, **budget)
    escape_prob, exact = reference_escape_probability(g)
    ratio = pref.E(n_max) / n_max
    return DensityReport(n_max, pref, escape_prob, exact, ratio, tolerance,
                         abs(ratio - float(escape_prob)) <= tolerance and rep.stabilized, rep)


# -- brushes ------------------------------------------------------------------------

@dataclass
class BrushReport:
    d: int
    i_max: int
    blocks: tuple[int, ...]
    identity_ok: bool  # E at block ends equals s_i (explosion engine)
    simulation_ok: bool | None  # explosion prefix equals stabilized simulation
    simulated_n: int
    slope: float
    beta: float
    fit_range: tuple[int, int]
    stabilization: StabilizationReport | None


def loglog_slope(prefix: EscapePrefix, positions: Sequence[int], lo: int, hi: int) -> float:
    pts = [p for p in positions if lo <= p <= hi]
    if len(pts) < 2:
        raise ValueError("not enough points in the fitting window")
    x = np.log(np.array(pts, dtype=float))
    y = np.log(np.array([prefix.E(p) for p in pts], dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def brush_experiment(d: int, i_max: int = 50, n_max: int = 10 ** 6, n_sim: int = 2000,
                     h_schedule: Sequence[int] | None = None, vertex_budget: int = 4 * 10 ** 6,
                     step_budget: int = 10 ** 10) -> BrushReport:
    """Block identities and growth exponent for the ``d``-brush with rotors down.

    The slope of ``log E_n`` against ``log n`` is fitted at block ends in
    the last decade ``[n_max/10, n_max]``.
    """
    if d < 2:
        raise ValueError("brush experiment needs d >= 2")
    bs = brush_sequence(d, n_max)
    ends = bs.block_ends()
    if len(bs.blocks) < i_max:
        raise ValueError("n_max too small for i_max blocks")
    identity_ok = all(bs.prefix.E(ends[i]) == bs.blocks[i] for i in range(i_max))
    sim_ok = None
    rep = None
    if n_sim:
        # escapes in brushes reach depths comparable to n
        sched = h_schedule or geometric_schedule(16, 4 * n_sim)
        sim, rep = escape_prefix_infinite(Brush(d), n_sim, sched, vertex_budget, step_budget)
        sim_ok = rep.stabilized and sim == bs.prefix.prefix(n_sim)
    lo = n_max // 10
    slope = loglog_slope(bs.prefix, ends, lo, n_max)
    return BrushReport(d, i_max, bs.blocks[:i_max], identity_ok, sim_ok, n_sim, slope,
                       1 - 2.0 ** (1 - d), (lo, n_max), rep)


# -- regular trees: block ends and discrepancy ---------------------------------------

def block_end_check(b: int, e: EscapePrefix, m_max: int) -> tuple[bool, int]:
    """For rotors down on the ``b``-ary tree: ``E_n - escape_prob n = D_m / b`` at
    ``n = S_m + m`` with ``S_m = (m - D_m)/(b-1)``, ``D_m`` the digit sum of ``m``.

    Returns (all hold, number of block ends checked).
    """
    escape_prob = Fraction(b - 1, b)
    checked = 0
    for m in range(1, m_max + 1):
        D = digit_sum(m, b)
        S = (m - D) // (b - 1)
        n = S + m
        if n > len(e):
            raise ValueError(f"prefix too short for m={m}")
        if Fraction(e.E(n)) - escape_prob * n != Fraction(D, b):
            return False, checked
        checked += 1
    return True, checked


# -- large-discrepancy demo ------------------------------------------------------------

def log_floor_f(n: int) -> int:
    """``floor(n / log2(n + 2))``."""
    return int(n // math.log2(n + 2))


@dataclass
class LargeDiscrepancyReport:
    n_lo: int
    n_max: int
    k_of_n: dict[int, tuple[int, int]]  # k -> (first n, last n) within range
    eps: dict[int, float]
    eps_exact: dict[int, bool]
    parts: dict[int, tuple[int, int]]  # spine position k -> (k', d)
    attachments: int
    prefix: EscapePrefix
    holds_from: int | None  # smallest n0 with E_n >= f(n) for all n0 <= n <= n_max
    monotone_in_K: bool  # adding the next attachment never lowered E_n
    exact: bool


def epsilon_schedule(f: Callable[[int], int], k: int, n_lo: int, scan_limit: int = 2 * 10 ** 6) -> tuple[float, bool]:
    """``min(1, min{log_n sqrt(n/f(n)) : k(n) = k})`` over ``n >= n_lo``.

    Computed exactly when ``{n : k(n) = k}`` ends below ``scan_limit``;
    otherwise a lower bound valid for ``f(n) <= n / log2(n+2)``: there
    ``k(n) = k`` forces ``n < 2^(4(k+1)^2)`` and ``sqrt(n/f(n)) >= 2k``.
    A smaller epsilon only strengthens the attached tree.
    """
    best = 1.0
    found = False
    n = max(n_lo, 2)
    while n < scan_limit:
        fn = f(n)
        if fn > 0:
            kn = int(math.floor(0.5 * math.sqrt(n / fn)))
            if kn == k:
                found = True
                best = min(best, math.log(math.sqrt(n / fn)) / math.log(n))
            elif kn > k and found:
                return best, True
        n += 1
    bound = math.log(2 * k) / (4 * (k + 1) ** 2 * math.log(2))
    return min(best, bound, 1.0), False


def _binbrush_holds(kp: int, d: int, eps: float, n_max: int) -> bool:
    e = TypeLevelSystem(BinaryWithBrushes(kp, d)).sequence(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    return bool(np.all(e.counts > n ** (1 - eps) / 2))


def large_discrepancy_tree(f: Callable[[int], int], n_max: int, n_lo: int, attachments: int,
                           k_prime_max: int = 24) -> tuple[AttachAtSpine, dict, dict, dict]:
    parts = {}
    eps = {}
    exact = {}
    for k in range(1, attachments + 1):
        e, ex = epsilon_schedule(f, k, n_lo)
        eps[k], exact[k] = e, ex
        d = 1
        while 2.0 ** (1 - d) >= e:
            d += 1
        kp = k
        while not _binbrush_holds(kp, d, e, n_max):
            kp += 1
            if kp > k_prime_max:
                raise RuntimeError(f"no T(k', {d}) with k' <= {k_prime_max} meets the bound up to n={n_max}")
        parts[k] = (kp, d)
    g = AttachAtSpine(Brush(1), list(parts), [BinaryWithBrushes(kp, d) for kp, d in parts.values()])
    return g, parts, eps, exact


def discrepancy_tree_demo(f: Callable[[int], int] = log_floor_f, n_max: int = 20000,
                          attachments: int | None = None, max_attachments: int = 6) -> LargeDiscrepancyReport:
    """Build the path-with-grafts tree for ``f`` and report where ``E_n >= f(n)``.

    ``f(n) < n/4`` is required on the probed range, which starts at the
    first ``n`` from which this holds up to ``n_max``.  Only the grafts at
    spine positions ``k <= attachments`` (default: the largest ``k(n)`` in
    range, capped at ``max_attachments``) are built.  The full tree contains this one as a rooted subgraph,
    so its ``E_n`` can only be larger; one extra graft is built to check
    that monotonicity on the computed prefix.
    """
    bad = [n for n in range(1, n_max + 1) if not f(n) < n / 4]
    n_lo = (bad[-1] + 1) if bad else 1
    if n_lo > n_max:
        raise ValueError("f(n) < n/4 fails on the whole range")
    ks: dict[int, tuple[int, int]] = {}
    for n in range(n_lo, n_max + 1):
        k = int(math.floor(0.5 * math.sqrt(n / f(n))))
        lo, hi = ks.get(k, (n, n))
        ks[k] = (min(lo, n), max(hi, n))
    K = attachments or min(max(ks), max_attachments)
    g, parts, eps, exact = large_discrepancy_tree(f, n_max, n_lo, K)
    sysm = TypeLevelSystem(g)
    pref = sysm.sequence(n_max)
    g2, *_ = large_discrepancy_tree(f, n_max, n_lo, K + 1)
    richer = TypeLevelSystem(g2).sequence(n_max)
    monotone = bool(np.all(richer.counts >= pref.counts))
    counts = pref.counts
    fvals = np.array([f(n) for n in range(1, n_max + 1)], dtype=np.int64)
    ok = (counts >= fvals)[n_lo - 1:]
    holds_from = None
    if ok[-1]:
        bad_idx = np.flatnonzero(~ok)
        holds_from = n_lo if bad_idx.size == 0 else n_lo + int(bad_idx[-1]) + 1
    return LargeDiscrepancyReport(n_lo, n_max, ks, eps, exact, parts, K, pref, holds_from,
                                  monotone, sysm.exact)


# -- phase transition -----------------------------------------------------------------

@dataclass
class PhaseRow:
    law: str
    mean: Fraction
    regime: str
    ratio_mean: float  # average E_k / k over seeds, k = particles completed
    first_escape_fraction: float
    certified: int  # seeds whose value is exact (stabilized or trapped run completed)
    seeds: int
    completed_min: int  # fewest particles completed by any seed before a budget ran out


def phase_scan(b: int, laws: Sequence[IIDRotorLaw], n: int, seeds: Iterable[int],
               h_schedule: Sequence[int] | None = None, vertex_budget: int = DEFAULT_VERTEX_BUDGET,
               step_budget: int = DEFAULT_STEP_BUDGET) -> list[PhaseRow]:
    """Classify each law and measure ``E_n / n`` over seeds.

    Trapped laws run on the lazily built infinite tree (all particles should
    return); escaping laws run on truncations until stabilized.  A trapped
    run that exhausts its budget contributes the particles it completed,
    each of which returned.
    """
    seeds = list(seeds)
    rows = []
    for law in laws:
        verdict = classify_phase(law, b)
        ratios, firsts, cert, done = [], 0, 0, n
        for s in seeds:
            g = Bary(b, IID(law, s))
            if verdict.trapped:
                pref, eng = trapped_prefix(g, n, vertex_budget, step_budget)
                k = len(eng.outcomes)
                done = min(done, k)
                if pref is not None:
                    cert += 1
                if k:
                    ratios.append(sum(o.escaped for o in eng.outcomes) / k)
                    firsts += eng.outcomes[0].escaped
            else:
                pref, rep = escape_prefix_infinite(g, n, h_schedule, vertex_budget, step_budget)
                cert += rep.stabilized
                ratios.append(pref.E(n) / n)
                firsts += pref[1]
        rows.append(PhaseRow(str(law), verdict.mean, verdict.regime,
                             float(np.mean(ratios)) if ratios else float("nan"),
                             firsts / len(seeds), cert, len(seeds), done))
    return rows


# -- depth growth ------------------------------------------------------------------------

@dataclass
class DepthRow:
    n: int
    outcome: str
    depth: int  # D_n
    visited: int  # #V_n
    steps: int
    containment: bool | None  # V_n contains V_{n-1} and all children of V_{n-1}
    boundary: int | None  # #(children(V_{n-1}) minus V_{n-1})
    boundary_ok: bool | None  # boundary == (b-1) #V_{n-1} + 1


@dataclass
class DepthReport:
    b: int
    law: str
    seed: int
    rows: list[DepthRow]
    truncated: bool
    reason: str = ""

    def squaring_steps(self, min_size: int = 1) -> list[int]:
        """Indices ``n`` with ``#V_{n+1} >= #V_n^2`` and ``#V_n >= min_size``."""
        out = []
        for a, c in zip(self.rows, self.rows[1:]):
            if a.visited >= min_size and c.visited >= a.visited ** 2:
                out.append(a.n)
        return out

    def depth_ratio(self) -> float:
        return max(r.depth / r.n for r in self.rows) if self.rows else float("nan")


def depth_experiment(b: int, law: IIDRotorLaw, n_max: int, vertex_budget: int = DEFAULT_VERTEX_BUDGET,
                     seed: int = 0, step_budget: int = DEFAULT_STEP_BUDGET) -> DepthReport:
    """Particles on the lazily built ``b``-ary tree with i.i.d. rotors, no sinks."""
    g = Bary(b, IID(law, seed))
    arena = Arena.lazy(g, depth_cap=None, vertex_budget=vertex_budget, counts=False)
    eng = RotorEngine(arena, step_budget=step_budget, track=False)
    rows: list[DepthRow] = []
    prev_mask = None
    depth = 0
    for n in range(1, n_max + 1):
        try:
            out = eng.run_particle()
        except (VertexBudgetExceeded, StepBudgetExceeded) as exc:
            return DepthReport(b, str(law), seed, rows, True, f"particle {n}: {exc}")
        depth = max(depth, out.max_level)
        mask = arena.visited_mask()
        cont = bnd = bnd_ok = None
        if prev_mask is not None:
            parent = np.array(arena.parent, dtype=np.int64)
            k = prev_mask.size
            prev = np.zeros(mask.size, dtype=bool)
            prev[:k] = prev_mask
            # children of V_{n-1}: vertices whose parent was visited
            kids = np.zeros(mask.size, dtype=bool)
            kids[1:] = prev[parent[1:]]
            kids[1] = True  # the base is the root's child
            cont = bool(np.all(mask[prev]) and np.all(mask[kids]))
            bnd = int(np.count_nonzero(kids & ~prev))
            bnd_ok = bnd == (b - 1) * int(prev.sum()) + 1
        rows.append(DepthRow(n, out.verdict, depth, int(mask.sum()), out.steps, cont, bnd, bnd_ok))
        prev_mask = mask
    return DepthReport(b, str(law), seed, rows, False)


# -- exact absorption on finite regular trees ------------------------------------------------

@dataclass
class ExactRegularReport:
    b: int
    h: int
    configs: int
    policies: tuple[str, ...]
    one_per_sink: bool
    policy_invariant: bool
    deep_rotors_untouched: bool
    failures: list = field(default_factory=list)


def exact_regular_experiment(b: int, h: int, n_configs: int = 100,
                             policies: Sequence[str] = ("sequential", "round-robin", "random"),
                             seed: int = 0, deep_check: int = 2) -> ExactRegularReport:
    """``1 + b + ... + b^h`` particles on the ``b``-ary tree with sinks at level ``h+1``.

    Checks one particle per sink under every policy, identical tallies and
    final rotors across policies, and (in a tree ``deep_check`` levels
    deeper, stopping particles at level ``h+1``) that deeper rotors are
    untouched.
    """
    if b < 2 or h < 1:
        raise ValueError("need b >= 2 and h >= 1")
    rng = random.Random(seed)
    tree = build_bary(b, h + 1)
    t = (b ** (h + 1) - 1) // (b - 1)
    one = invariant = deep_ok = True
    failures = []
    deep = build_bary(b, h + 1 + deep_check) if deep_check else None
    for c in range(n_configs):
        cfg = random_config(tree, rng)
        ref = None
        for i, pol in enumerate(policies):
            work = cfg.copy()
            res = fire_until_stable(tree, work, {1: t}, pol, seed=rng.randrange(2 ** 32))
            tally = res.tally_vector(tree)
            if any(x != 1 for x in tally) or res.root != t - b ** h:
                one = False
                failures.append((c, pol, "tally"))
            key = (tally, tuple(work.values))
            if ref is None:
                ref = key
            elif key != ref:
                invariant = False
                failures.append((c, pol, "policy"))
        if deep is not None:
            dcfg = random_config(deep, rng)
            before = list(dcfg.values)
            stop = [v for v in range(len(deep)) if deep.level[v] == h + 1]
            res = fire_until_stable(deep, dcfg, {1: t}, "random", seed=rng.randrange(2 ** 32), stop=stop)
            lv = deep.level
            if any(dcfg.values[v] != before[v] for v in range(len(deep)) if lv[v] >= h + 1):
                deep_ok = False
                failures.append((c, "deep", "rotors"))
            if sorted(res.sink_tally) != sorted(stop) or any(x != 1 for x in res.sink_tally.values()):
                one = False
                failures.append((c, "deep", "tally"))
    return ExactRegularReport(b, h, n_configs, tuple(policies), one, invariant, deep_ok, failures)


def binomial_bound_check(b: int, law: IIDRotorLaw, h: int, H: int, seed: int = 0) -> tuple[int, int]:
    """``(E_n, #X)`` on the depth-``H`` truncation with ``n = 1 + b + ... + b^h``.

    ``X`` is the set of level-``h+1`` vertices whose own subtree lets its
    first particle escape (simulated independently).  ``E_n >= #X`` holds.
    """
    g = Bary(b, IID(law, seed))
    tree, cfg = truncate(g, H)
    n = (b ** (h + 1) - 1) // (b - 1)
    pref, _ = run_escape_prefix(tree, cfg.copy(), n)
    X = 0
    for v in range(len(tree)):
        if tree.level[v] == h + 1:
            sub = tree.subtree(v)
            verts = tree.descendants(v)
            vals = [0] + [cfg.values[u] for u in verts]
            # descendants() lists the subtree breadth-first with ordered
            # children, which is the numbering the subtree itself uses
            sub_cfg = RotorConfig(sub, vals, check=False)
            e1, _ = run_escape_prefix(sub, sub_cfg, 1)
            X += e1[1]
    return pref.E(n), X

