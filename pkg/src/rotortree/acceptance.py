"""Acceptance suite: one check per criterion, each with a pinned time limit.

Every check returns a :class:`CriterionResult`; a criterion passes only if
its condition holds and it finishes within its time limit.  Escape prefixes
of the binary tree produced anywhere in the suite are collected and checked
by the window criterion (number 12).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .analytics import escape_probability, check_window_condition, regular_discrepancy_limits, discrepancy_series
from .explosion import (TypeLevelSystem, brush_sequence, digit_sum, escape_via_explosion,
                        regular_closed_form, regular_fixed_point)
from .experiments import (block_end_check, brush_experiment, density_experiment,
                          depth_experiment, discrepancy_tree_demo, escape_prefix_infinite,
                          exact_regular_experiment, trapped_prefix)
from .generators import Bary
from .lazyseq import majorizes
from .randomtrees import (dominating_config, extremal_config, perturb_config, prune,
                          random_config, random_generator, random_tree, shuffle_children)
from .rules import IID, Constant, Explicit, Full, IIDRotorLaw
from .tree import make_config
from .walker import EscapePrefix, fire_until_stable, run_escape_prefix


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2} {self.name} ({self.seconds:.1f}s / {self.limit:.0f}s): {self.detail}"


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    limit: float
    check: Callable[[], tuple[bool, str]]

    def run(self) -> CriterionResult:
        t0 = time.perf_counter()
        ok, detail = self.check()
        dt = time.perf_counter() - t0
        if ok and dt > self.limit:
            ok = False
            detail += f"; over time limit by {dt - self.limit:.1f}s"
        return CriterionResult(self.number, self.name, ok, detail, dt, self.limit)


CRITERIA: dict[int, Criterion] = {}

# escape prefixes of the binary tree seen during the run: (label, prefix)
BINARY_PREFIXES: list[tuple[str, EscapePrefix]] = []


def _record(label: str, pref: EscapePrefix):
    BINARY_PREFIXES.append((label, pref))


def criterion(number: int, name: str, limit: float):
    def deco(fn):
        CRITERIA[number] = Criterion(number, name, limit, fn)
        return fn
    return deco


# -- 1 ----------------------------------------------------------------------------

@criterion(1, "three-particle example on the binary tree", 1)
def three_particle_example() -> tuple[bool, str]:
    pref, rep = escape_prefix_infinite(Bary(2, Constant(1)), 3)
    _record("bary:2 const:1", pref)
    ok = rep.stabilized and pref.tolist() == [1, 0, 1] and pref.E(3) == 2
    return ok, f"prefix {pref}, E_3={pref.E(3)}, {rep.verdict}"


# -- 2 ----------------------------------------------------------------------------

@criterion(2, "explosion oracle equals simulation", 60)
def oracle_equivalence(trees: int = 500, n: int = 1000, seed: int = 2) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = []
    for i in range(trees):
        tree = random_tree(rng, 200)
        cfg = random_config(tree, rng)
        sim, _ = run_escape_prefix(tree, cfg.copy(), n)
        if sim != escape_via_explosion(tree, cfg, n):
            bad.append(i)
    return not bad, f"{trees - len(bad)}/{trees} random trees agree bitwise for N={n}"


# -- 3 ----------------------------------------------------------------------------

@criterion(3, "regular trees: closed form, fixed point, simulation", 120)
def regular_trees(n: int = 2000) -> tuple[bool, str]:
    bad = []
    for b in (2, 3, 4):
        for k in range(b):
            closed = regular_closed_form(b, k, n)
            fixed = regular_fixed_point(b, k, n)
            sim, rep = escape_prefix_infinite(Bary(b, Constant(k)), n)
            if b == 2:
                _record(f"bary:2 const:{k}", sim)
            if not (rep.stabilized and closed == fixed == sim):
                bad.append((b, k))
    sim1, _ = escape_prefix_infinite(Bary(2, Constant(1)), 1000)
    ceil_ok = all(sim1.E(m) == (m + 1) // 2 for m in range(1, 1001))
    detail = f"9 (b,k) pairs, mismatches {bad or 'none'}; E_n=ceil(n/2) on T_2 with 1: {ceil_ok}"
    return not bad and ceil_ok, detail


# -- 4 ----------------------------------------------------------------------------

@criterion(4, "one particle per sink on finite regular trees", 120)
def exact_regular() -> tuple[bool, str]:
    bad = []
    for b in (2, 3):
        for h in (1, 2, 3, 4):
            rep = exact_regular_experiment(b, h, n_configs=100, seed=100 * b + h)
            if not (rep.one_per_sink and rep.policy_invariant and rep.deep_rotors_untouched):
                bad.append((b, h, rep.failures[:3]))
    return not bad, f"8 (b,h) cases x 100 configs x 3 policies; failures {bad or 'none'}"


# -- 5 ----------------------------------------------------------------------------

@criterion(5, "Abelian invariance of firing order", 60)
def abelian(instances: int = 200, seed: int = 5) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = 0
    for _ in range(instances):
        tree = random_tree(rng, 200)
        cfg = random_config(tree, rng)
        internal = list(tree.internal())
        load = {v: rng.randint(1, 12) for v in rng.sample(internal, min(3, len(internal)))}
        ref = None
        for pol in ("sequential", "round-robin", "random"):
            work = cfg.copy()
            res = fire_until_stable(tree, work, load, pol, seed=rng.randrange(2 ** 32))
            key = (res.tally_vector(tree), res.root, tuple(work.values))
            if ref is None:
                ref = key
            elif key != ref:
                bad += 1
                break
    return bad == 0, f"{instances - bad}/{instances} instances agree across 3 policies"


# -- 6 ----------------------------------------------------------------------------

@criterion(6, "monotonicity, density lower bound, full configuration", 120)
def monotonicity_density_full(seed: int = 6) -> tuple[bool, str]:
    rng = random.Random(seed)
    n = 300
    mono_bad = 0
    for _ in range(200):
        tree = random_tree(rng, 200)
        r = random_config(tree, rng)
        s = dominating_config(r, rng)
        er, _ = run_escape_prefix(tree, r.copy(), n)
        es, _ = run_escape_prefix(tree, s.copy(), n)
        mono_bad += bool(np.any(er.counts < es.counts))
    dens_bad = 0
    for _ in range(100):
        tree = random_tree(rng, 200)
        escape_prob = escape_probability(tree).escape_prob
        e, _ = run_escape_prefix(tree, make_config(tree, "down"), 200)
        m = np.arange(1, 201, dtype=object)
        dens_bad += bool(np.any(e.counts.astype(object) * escape_prob.denominator < escape_prob.numerator * m))
    full_bad = 0
    for _ in range(20):
        g = random_generator(rng).with_rule(Full())
        pref, rep = escape_prefix_infinite(g, 8, vertex_budget=2 * 10 ** 5)
        full_bad += not (rep.stabilized and pref.E(8) == 0)
    detail = (f"(i) {200 - mono_bad}/200 pairs r<=s ordered; (ii) {100 - dens_bad}/100 trees with "
              f"E_n >= escape_prob n exactly; (iii) {20 - full_bad}/20 infinite generators with E_8 = 0")
    return not (mono_bad or dens_bad or full_bad), detail


# -- 7 ----------------------------------------------------------------------------

@criterion(7, "finite modification, subtrees, rotor orders, self-majorization", 120)
def propositions(seed: int = 7) -> tuple[bool, str]:
    rng = random.Random(seed)
    n = 300
    lip = sub = rot = maj = 0
    for _ in range(100):
        tree = random_tree(rng, 200)
        r = random_config(tree, rng)
        r2 = perturb_config(r, rng, changes=rng.randint(1, 5))
        e1, _ = run_escape_prefix(tree, r.copy(), n)
        e2, _ = run_escape_prefix(tree, r2.copy(), n)
        lip += bool(np.all(np.abs(e1.counts - e2.counts) <= r.l1_distance(r2)))
    for _ in range(100):
        tree = random_tree(rng, 200, min_vertices=6)
        cands = list(range(2, len(tree)))
        smaller, _ = prune(tree, rng.sample(cands, rng.randint(1, 3)))
        big, _ = run_escape_prefix(tree, make_config(tree, "down"), n)
        small, _ = run_escape_prefix(smaller, make_config(smaller, "down"), n)
        sub += bool(np.all(small.counts <= big.counts))
    for _ in range(100):
        tree = random_tree(rng, 200)
        cfg = extremal_config(tree, rng)
        other, ocfg = shuffle_children(tree, rng, cfg)
        a, _ = run_escape_prefix(tree, cfg.copy(), n)
        b, _ = run_escape_prefix(other, ocfg.copy(), n)
        rot += a == b
    horizon, shifts = 200, 20
    for _ in range(100):
        g = random_generator(rng)
        sysm = TypeLevelSystem(g)
        e = sysm.sequence(horizon + shifts)
        ok = sysm.exact
        for k in range(1, shifts + 1):
            if majorizes(e.tolist()[:horizon], e.tolist()[k:k + horizon], horizon) != "a>=b":
                ok = False
                break
        maj += ok
    detail = f"Lipschitz {lip}/100, subtrees {sub}/100, rotor orders {rot}/100, self-majorization {maj}/100"
    return lip == sub == rot == maj == 100, detail


# -- 8 ----------------------------------------------------------------------------

@criterion(8, "brush block identities and growth exponents", 300)
def brushes() -> tuple[bool, str]:
    seq = brush_sequence(2, 2000)
    s_ok = list(seq.blocks[:50]) == list(range(1, 51))
    e_ok = all(seq.prefix.E(i * (i + 1) // 2) == i for i in range(1, 51))
    parts = [f"s_i=i: {s_ok}", f"E at i(i+1)/2 = i: {e_ok}"]
    ok = s_ok and e_ok
    for d, tol in ((2, 0.05), (3, 0.07)):
        rep = brush_experiment(d)
        good = rep.identity_ok and bool(rep.simulation_ok) and abs(rep.slope - rep.beta) <= tol
        ok = ok and good
        parts.append(f"d={d}: slope {rep.slope:.4f} vs {rep.beta} (tol {tol}), "
                     f"simulation {'matches' if rep.simulation_ok else 'differs'} to n={rep.simulated_n}")
    return ok, "; ".join(parts)


# -- 9 ----------------------------------------------------------------------------

@criterion(9, "block ends and discrepancy extrema on regular trees", 300)
def regular_discrepancy(m_max: int = 2 ** 14, slack: float = 0.15) -> tuple[bool, str]:
    # the block end for m sits at n = (m - D_m) + m for b = 2
    n_need = max(2 * m - digit_sum(m, 2) for m in range(1, m_max + 1))
    e = regular_closed_form(2, 0, n_need)
    _record("bary:2 down (closed form)", e)
    ends_ok, checked = block_end_check(2, e, m_max)
    parts = [f"{checked} block ends exact: {ends_ok}"]
    ok = ends_ok
    for b, k in ((2, 0), (2, 1), (3, 1), (3, 2)):
        n_hi = b ** 8
        pref = regular_closed_form(b, k, n_hi)
        ser = discrepancy_series(pref, Fraction(b - 1, b), b)
        lo, hi = ser.extrema(b ** 4, n_hi)
        lim_lo, lim_hi = regular_discrepancy_limits(b, k)
        good = abs(lo - float(lim_lo)) <= slack and abs(hi - float(lim_hi)) <= slack
        ok = ok and good
        parts.append(f"(b={b},k={k}) min {lo:.3f} vs {lim_lo}, max {hi:.3f} vs {lim_hi}")
    return ok, "; ".join(parts)


# -- 10 ---------------------------------------------------------------------------

@criterion(10, "phase transition on the binary tree", 600)
def phase_transition(vertex_budget: int = 10 ** 6) -> tuple[bool, str]:
    crit = IIDRotorLaw.uniform([0, 1, 2])
    done = []
    crit_ok = True
    for s in range(20):
        pref, eng = trapped_prefix(Bary(2, IID(crit, s)), 20, vertex_budget=vertex_budget)
        done.append(len(eng.outcomes))
        if pref is None or pref.E(20) != 0 or any(o.escaped for o in eng.outcomes):
            crit_ok = False
    sub = IIDRotorLaw.uniform([0, 1])
    ratios = []
    sub_ok = True
    for s in range(10):
        rep = density_experiment(Bary(2, IID(sub, s)), 2000, tolerance=0.05)
        _record(f"bary:2 iid:uniform0,1@{s}", rep.prefix)
        ratios.append(rep.ratio)
        sub_ok = sub_ok and rep.within
    detail = (f"critical: all 20 particles returned in {sum(d == 20 for d in done)}/20 seeds "
              f"(particles completed before the {vertex_budget}-vertex budget: min {min(done)}, "
              f"max {max(done)}); subcritical: E_2000/2000 in [{min(ratios):.4f}, {max(ratios):.4f}]")
    return crit_ok and sub_ok, detail


# -- 11 ---------------------------------------------------------------------------

@criterion(11, "visited-set growth and depth", 600)
def depth_structure(vertex_budget: int = 10 ** 6) -> tuple[bool, str]:
    crit = IIDRotorLaw.uniform([0, 1, 2])
    seeds = 20
    ident_ok = True
    squaring = 0
    checked = 0
    for s in range(seeds):
        rep = depth_experiment(2, crit, 4, vertex_budget=vertex_budget, seed=s)
        for row in rep.rows[1:]:
            checked += 1
            ident_ok = ident_ok and bool(row.containment) and bool(row.boundary_ok)
        # #V_{n+1} >= 2 #V_n + 1 always, so a squaring step is only informative once #V_n >= 3
        squaring += bool(rep.squaring_steps(min_size=3))
    frac = squaring / seeds
    sup = IIDRotorLaw.uniform([1, 2])
    rep = depth_experiment(2, sup, 200, vertex_budget=vertex_budget, seed=0)
    rows = rep.rows
    half = [r for r in rows if r.n <= 100]
    C = max(r.depth / r.n for r in half) if half else float("nan")
    late = [r for r in rows if r.n > 100]
    sup_ok = not rep.truncated and all(r.depth <= 1.5 * C * r.n for r in late)
    detail = (f"critical: {checked} set-growth steps exact: {ident_ok}; squaring step in {squaring}/{seeds} seeds; "
              f"supercritical-trapped reached n={len(rows)} of 200"
              + (f" ({rep.reason})" if rep.truncated else "")
              + f", max D_n/n {max((r.depth / r.n for r in rows), default=float('nan')):.2f}")
    return ident_ok and frac >= 0.3 and sup_ok, detail


# -- 12 ---------------------------------------------------------------------------

@criterion(12, "window condition on binary-tree escape prefixes", 120)
def window_criterion(seed: int = 12) -> tuple[bool, str]:
    rng = random.Random(seed)
    own: list[tuple[str, EscapePrefix]] = []
    for k in (0, 1):
        own.append((f"const:{k}", regular_closed_form(2, k, 4000)))
    for s in range(20):
        # random rotors on the first few levels, rotors down below
        vals = {}
        for depth in range(1, 5):
            for path in range(2 ** (depth - 1)):
                bits = [(path >> i) & 1 for i in range(depth - 1)]
                key = "/".join(["1"] + [str(b + 1) for b in bits])
                vals[key] = rng.randint(0, 2)
        pref, rep = escape_prefix_infinite(Bary(2, Explicit(vals)), 500)
        if rep.stabilized:
            own.append((f"explicit@{s}", pref))
    everything = BINARY_PREFIXES + own
    bad = [(label, check_window_condition(p)) for label, p in everything if not check_window_condition(p).valid]
    return not bad, f"{len(everything)} prefixes checked; violations {bad or 'none'}"


# -- 13 ---------------------------------------------------------------------------

@criterion(13, "large-discrepancy tree for n/log2(n+2)", 900)
def large_discrepancy(n_max: int = 10 ** 4) -> tuple[bool, str]:
    rep = discrepancy_tree_demo(n_max=n_max)
    ok = rep.holds_from is not None and rep.holds_from <= 10 ** 4 and rep.exact and rep.monotone_in_K
    eps = ", ".join(f"{k}:{v:.4g}{'' if rep.eps_exact[k] else ' (bound)'}" for k, v in rep.eps.items())
    return ok, (f"E_n >= f(n) for {rep.holds_from} <= n <= {n_max} (precondition holds from {rep.n_lo}); "
                f"grafts {rep.parts}; eps {eps}")


def run(numbers=None, report: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order; 12 runs last."""
    BINARY_PREFIXES.clear()
    chosen = sorted(numbers or CRITERIA, key=lambda i: (i == 12, i))
    out = []
    for i in chosen:
        res = CRITERIA[i].run()
        if report is not None:
            report(res)
        out.append(res)
    return out

