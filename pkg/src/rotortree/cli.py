"""Command-line front end.

Every subcommand writes one table, as CSV (header row, LF line ends) or as
JSON ``{"manifest": ..., "data": ...}``.  Column names carry a provenance
tag: ``[exact]`` for integers and rationals, ``[float]`` for floating point
values, ``[flag]`` for booleans.  Rationals print as ``num/den`` and floats
with 12 significant digits.  With ``--output FILE.csv`` the manifest is
written next to it as ``FILE.csv.manifest.json``.

Exit status: 0 success, 1 failed verification (or an unstabilized or
budget-limited result under ``--strict``), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .analytics import limit_escape_probability, truncated_escape_probability, discrepancy_series, escape_probability, regular_discrepancy_limits
from .explosion import TypeLevelSystem, escape_via_explosion, regular_closed_form
from .experiments import (brush_experiment, depth_experiment, discrepancy_tree_demo,
                          escape_prefix_infinite, exact_regular_experiment, log_floor_f, phase_scan)
from .generators import TreeGenerator, parse_family
from .rules import DeterministicLawError, IIDRotorLaw, parse_law, parse_rule
from .tree import make_config, parse_tree
from .walker import (DEFAULT_VERTEX_BUDGET, Arena, RotorEngine, StepBudgetExceeded, VertexBudgetExceeded,
                     run_escape_prefix)

DEFAULT_SEED = 12345
DEFAULT_STEPS = 10 ** 8


class UsageError(ValueError):
    pass


# -- formatting -------------------------------------------------------------------

def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return format(x, ".12g")
    if x is None:
        return ""
    return str(x)


def _json_value(x: Any):
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, float):
        return x if math.isfinite(x) else fmt(x)
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return _json_value(x.item())
    return x


class Table:
    """Columns ``(name, provenance)`` and rows; ``summary`` goes into the manifest."""

    def __init__(self, columns: list[tuple[str, str]]):
        self.columns = columns
        self.rows: list[list[Any]] = []
        self.summary: dict[str, Any] = {}
        self.ok = True  # False: unstabilized or truncated result (matters under --strict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row width does not match the header")
        self.rows.append(list(row))

    def header(self) -> list[str]:
        return [f"{n}[{p}]" if p else n for n, p in self.columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for r in self.rows:
            w.writerow([fmt(x) for x in r])
        return buf.getvalue()

    def to_json(self, manifest: dict) -> str:
        data = {"columns": self.header(), "rows": [[_json_value(x) for x in r] for r in self.rows],
                "summary": _json_value(self.summary)}
        return json.dumps({"manifest": manifest, "data": data}, indent=2, sort_keys=True) + "\n"


def _prefix_table(pref, summary: dict) -> Table:
    t = Table([("n", ""), ("e_n", "exact"), ("E_n", "exact")])
    counts = pref.counts
    for i, bit in enumerate(pref.bits, start=1):
        t.add(i, int(bit), int(counts[i - 1]))
    t.summary.update(summary)
    t.summary["prefix"] = str(pref)
    return t


# -- argument helpers ---------------------------------------------------------------

def _schedule(text: str | None) -> list[int] | None:
    if not text:
        return None
    try:
        hs = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad depth schedule {text!r}") from None
    if not hs or hs[0] < 1 or any(b <= a for a, b in zip(hs, hs[1:])):
        raise UsageError("depth schedule must be strictly increasing positive integers")
    return hs


def _source(args) -> tuple[str, Any]:
    """``("tree", (tree, config))`` or ``("family", generator)``."""
    if bool(args.tree) == bool(args.family):
        raise UsageError("give exactly one of --tree and --family")
    if args.tree:
        try:
            text = Path(args.tree).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.tree}: {exc}") from None
        tree, cfg = parse_tree(text)
        if getattr(args, "config", None):
            cfg = make_config(tree, parse_rule(args.config, args.seed))
        return "tree", (tree, cfg)
    return "family", parse_family(args.family, parse_rule(args.config or "down", args.seed), args.seed)


def _laws(text: str) -> list[IIDRotorLaw]:
    return [parse_law(x) for x in text.split(";") if x.strip()]


def _seeds(args) -> list[int]:
    return [args.seed + i for i in range(args.seeds)]


# -- subcommands ----------------------------------------------------------------------

def cmd_simulate(args) -> Table:
    kind, src = _source(args)
    if kind == "tree":
        tree, cfg = src
        pref, _ = run_escape_prefix(tree, cfg.copy(), args.n, step_budget=args.step_budget)
        return _prefix_table(pref, {"source": "finite tree", "vertices": len(tree)})
    g: TreeGenerator = src
    if args.depth:
        # built lazily so that --budget bounds the vertices actually reached
        arena = Arena.lazy(g, depth_cap=args.depth, vertex_budget=args.budget, counts=False)
        pref = RotorEngine(arena, step_budget=args.step_budget, track=False).run(args.n)
        return _prefix_table(pref, {"source": g.describe(), "truncation_depth": args.depth})
    pref, rep = escape_prefix_infinite(g, args.n, _schedule(args.depth_schedule), args.budget, args.step_budget)
    t = _prefix_table(pref, {"source": g.describe(), "stabilization": rep.to_dict()})
    t.ok = rep.stabilized
    return t


def cmd_explode(args) -> Table:
    kind, src = _source(args)
    if kind == "tree":
        tree, cfg = src
        return _prefix_table(escape_via_explosion(tree, cfg, args.n), {"source": "finite tree"})
    g: TreeGenerator = src
    sysm = TypeLevelSystem(g, depth_bound=args.type_depth)
    pref = sysm.sequence(args.n)
    t = _prefix_table(pref, {"source": g.describe(), "exact": sysm.exact})
    t.ok = sysm.exact
    return t


def cmd_escape_prob(args) -> Table:
    kind, src = _source(args)
    t = Table([("depth", ""), ("escape_prob", "exact"), ("escape_prob", "float")])
    if kind == "tree":
        a = escape_probability(src[0]).escape_prob
        t.add("finite", a, float(a))
        return t
    g: TreeGenerator = src
    if args.depth:
        a = truncated_escape_probability(g, args.depth)
        t.add(args.depth, a, float(a))
    est = limit_escape_probability(g)
    t.add("limit" if est.exact else f"limit~h{est.depth}", est.value, float(est.value))
    t.summary["limit_exact"] = est.exact
    t.summary["limit_converged"] = est.converged
    t.ok = est.converged
    return t


def cmd_phase_scan(args) -> Table:
    laws = _laws(args.laws) if args.laws else [
        IIDRotorLaw.from_mapping({0: Fraction(i, 10), args.b: 1 - Fraction(i, 10)}) for i in range(1, 10)]
    rows = phase_scan(args.b, laws, args.n, _seeds(args), _schedule(args.depth_schedule), args.budget, args.step_budget)
    t = Table([("law", ""), ("mean", "exact"), ("regime", ""), ("E_k/k", "float"),
               ("first_escape_fraction", "float"), ("certified", "exact"), ("seeds", "exact"),
               ("particles_completed_min", "exact")])
    for r in sorted(rows, key=lambda r: (r.mean, r.law)):
        t.add(r.law, r.mean, r.regime, r.ratio_mean, r.first_escape_fraction, r.certified, r.seeds, r.completed_min)
    t.ok = all(r.certified == r.seeds for r in rows)
    return t


def cmd_depth(args) -> Table:
    rep = depth_experiment(args.b, parse_law(args.law), args.n_max, args.budget, args.seed, args.step_budget)
    t = Table([("n", ""), ("outcome", ""), ("D_n", "exact"), ("V_n", "exact"), ("steps", "exact"),
               ("containment", "flag"), ("boundary", "exact"), ("boundary_identity", "flag")])
    for r in rep.rows:
        t.add(r.n, r.outcome, r.depth, r.visited, r.steps, r.containment, r.boundary, r.boundary_ok)
    t.summary.update({"truncated": rep.truncated, "reason": rep.reason,
                      "squaring_steps": rep.squaring_steps(min_size=3)})
    t.ok = not rep.truncated
    return t


def cmd_brush(args) -> Table:
    # brush escapes go about as deep as n, so the defaults here are larger
    if "budget" not in args.given:
        args.budget = 4 * 10 ** 6
    if "step_budget" not in args.given:
        args.step_budget = 10 ** 10
    rep = brush_experiment(args.d, args.i_max, args.n_max, args.n_sim, _schedule(args.depth_schedule),
                           args.budget, args.step_budget)
    t = Table([("i", ""), ("s_i", "exact"), ("block_end", "exact")])
    end = 0
    for i, s in enumerate(rep.blocks, start=1):
        end += s
        t.add(i, s, end)
    t.summary.update({"identity_ok": rep.identity_ok, "simulation_ok": rep.simulation_ok,
                      "slope": rep.slope, "beta": rep.beta, "fit_range": list(rep.fit_range)})
    if rep.stabilization is not None:
        t.summary["stabilization"] = rep.stabilization.to_dict()
    t.ok = rep.identity_ok and rep.simulation_ok is not False
    return t


def cmd_exact_regular(args) -> Table:
    t = Table([("b", ""), ("h", ""), ("configs", "exact"), ("one_per_sink", "flag"),
               ("policy_invariant", "flag"), ("deep_rotors_untouched", "flag")])
    ok = True
    for h in range(1, args.h + 1):
        rep = exact_regular_experiment(args.b, h, args.configs, seed=args.seed)
        t.add(args.b, h, rep.configs, rep.one_per_sink, rep.policy_invariant, rep.deep_rotors_untouched)
        ok = ok and rep.one_per_sink and rep.policy_invariant and rep.deep_rotors_untouched
    t.summary["all_hold"] = ok
    t.ok = ok
    return t


_F_CHOICES: dict[str, Callable[[int], int]] = {
    "nlog": log_floor_f,
    "one": lambda n: 1,
    "sqrt": lambda n: math.isqrt(n),
}


def cmd_discrepancy(args) -> Table:
    if args.regular:
        try:
            b, k = (int(x) for x in args.regular.split(","))
        except ValueError:
            raise UsageError("--regular expects B,K") from None
        pref = regular_closed_form(b, k, args.n_max)
        ser = discrepancy_series(pref, Fraction(b - 1, b), b)
        t = Table([("n", ""), ("E_n", "exact"), ("E_n-escape_prob*n", "exact"), ("Delta_n", "float")])
        for i, n in enumerate(ser.n):
            t.add(int(n), int(pref.counts[n - 1]), ser.numerator(int(n)), float(ser.values[i]))
        lo, hi = regular_discrepancy_limits(b, k)
        t.summary.update({"liminf": lo, "limsup": hi})
        return t
    f = _F_CHOICES[args.f]
    rep = discrepancy_tree_demo(f, args.n_max)
    t = Table([("n", ""), ("f(n)", "exact"), ("E_n", "exact"), ("E_n-f(n)", "exact")])
    for n in range(1, args.n_max + 1):
        e = rep.prefix.E(n)
        t.add(n, f(n), e, e - f(n))
    t.summary.update({"holds_from": rep.holds_from, "precondition_from": rep.n_lo,
                      "grafts": {k: list(v) for k, v in rep.parts.items()},
                      "epsilon": rep.eps, "epsilon_exact": rep.eps_exact,
                      "monotone_in_grafts": rep.monotone_in_K, "exact": rep.exact})
    t.ok = rep.holds_from is not None and rep.exact
    return t


def cmd_verify(args) -> Table:
    from . import acceptance
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise UsageError("--only expects comma-separated criterion numbers") from None
        unknown = set(only) - set(acceptance.CRITERIA)
        if unknown:
            raise UsageError(f"unknown criteria {sorted(unknown)}")
    t = Table([("criterion", ""), ("name", ""), ("passed", "flag"), ("detail", "")])
    results = acceptance.run(only, report=lambda r: print(r.line(), file=sys.stderr, flush=True))
    for r in results:
        t.add(r.number, r.name, r.passed, r.detail)
    t.summary["passed"] = sum(r.passed for r in results)
    t.summary["total"] = len(results)
    t.ok = all(r.passed for r in results)
    t.verification = True
    return t


# -- parser -----------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"seed": DEFAULT_SEED, "depth_schedule": None, "budget": DEFAULT_VERTEX_BUDGET,
                   "step_budget": DEFAULT_STEPS, "format": "csv", "strict": False, "output": None}


def _common() -> argparse.ArgumentParser:
    # defaults are suppressed here and filled in after parsing, so a flag
    # given before the subcommand is not reset by the subcommand's copy
    S = argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=S, help=f"base seed for random rotors (default {DEFAULT_SEED})")
    g.add_argument("--depth-schedule", default=S, help="truncation depths to probe, e.g. 8,16,32")
    g.add_argument("--budget", type=int, default=S, help=f"vertex budget (default {DEFAULT_VERTEX_BUDGET})")
    g.add_argument("--step-budget", type=int, default=S, help=f"step budget (default {DEFAULT_STEPS})")
    g.add_argument("--format", choices=("csv", "json"), default=S, help="output format (default csv)")
    g.add_argument("--strict", action="store_true", default=S,
                   help="exit 1 when a result is unstabilized or budget-limited")
    g.add_argument("--output", default=S, help="write here instead of stdout")
    return p


def _source_args(p: argparse.ArgumentParser, config: bool = True):
    p.add_argument("--family", help="bary:B, brush:D, path, comb:A1,A2,..|pow2, binbrush:K,D")
    p.add_argument("--tree", help="tree file (one line per vertex: path, child count, rotor|S|--)")
    if config:
        p.add_argument("--config", help="down, full, const:K, iid:LAW or uniform:V1,V2,..")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rotortree", description="Rotor walks on rooted trees.",
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"rotortree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="escape prefix by direct simulation")
    _source_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, help="single truncation depth instead of a stabilized run")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("explode", parents=[common], help="escape prefix from the explosion formula")
    _source_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--type-depth", type=int, help="treat subtree types first met below this depth as sinks")
    p.set_defaults(func=cmd_explode)

    p = sub.add_parser("escape-prob", parents=[common], help="escape probability, exact")
    _source_args(p, config=False)
    p.add_argument("--depth", type=int, help="truncation depth for the exact rational")
    p.set_defaults(func=cmd_escape_prob, config=None)

    p = sub.add_parser("phase-scan", parents=[common], help="E_n/n across i.i.d. rotor laws")
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--laws", help="';'-separated laws such as '0=1/4,2=3/4;uniform:0,1'")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_phase_scan)

    p = sub.add_parser("depth", parents=[common], help="visited sets and depth in trapped runs")
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--law", default="uniform:0,1,2")
    p.add_argument("--n-max", type=int, default=5)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("brush", parents=[common], help="brush block identities and growth exponent")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--i-max", type=int, default=50)
    p.add_argument("--n-max", type=int, default=10 ** 6)
    p.add_argument("--n-sim", type=int, default=2000, help="particles to cross-check by simulation (0: skip)")
    p.set_defaults(func=cmd_brush)

    p = sub.add_parser("exact-regular", parents=[common], help="one particle per sink on finite regular trees")
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--h", type=int, default=4, help="check depths 1..H")
    p.add_argument("--configs", type=int, default=100)
    p.set_defaults(func=cmd_exact_regular)

    p = sub.add_parser("discrepancy", parents=[common], help="large-discrepancy tree or regular-tree discrepancy")
    p.add_argument("--f", choices=sorted(_F_CHOICES), default="nlog", help="target function for the graft tree")
    p.add_argument("--regular", metavar="B,K", help="discrepancy series of the B-ary tree with constant rotor K")
    p.add_argument("--n-max", type=int, default=10 ** 4)
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)
    return parser


def _manifest(args) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "format", "command", "given")}
    return {"subcommand": args.command, "parameters": params, "seed": args.seed,
            "version": __version__, "outputs": [args.output] if args.output else []}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    given = {k for k in GLOBAL_DEFAULTS if hasattr(args, k)}
    for k, v in GLOBAL_DEFAULTS.items():
        if k not in given:
            setattr(args, k, v)
    args.given = sorted(given)
    for name in ("n", "n_max", "budget", "step_budget", "depth", "seeds", "configs", "h", "b", "d", "i_max"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    try:
        table = args.func(args)
    except (UsageError, DeterministicLawError) as exc:
        parser.error(str(exc))
    except ValueError as exc:
        # malformed family, rule, law or tree file
        parser.error(str(exc))
    except (VertexBudgetExceeded, StepBudgetExceeded, RuntimeError) as exc:
        print(f"rotortree: {exc}", file=sys.stderr)
        return 1
    manifest = _manifest(args)
    text = table.to_json(manifest) if args.format == "json" else table.to_csv()
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        if args.format == "csv":
            side = Path(str(out) + ".manifest.json")
            side.write_text(json.dumps({"manifest": manifest, "summary": _json_value(table.summary)},
                                       indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    if getattr(table, "verification", False) and not table.ok:
        return 1
    if args.strict and not table.ok:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
