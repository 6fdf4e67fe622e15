"""Batch driver: ``reconfsim <command> ...`` (also ``python -m reconfsim``).

Exit codes: 0 the property holds, 1 it fails (a counterexample is reported),
2 usage or parse error, 3 a resource limit or credit cap was hit.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from . import analysis, cost
from .actions import Reconf, parse_trace
from .clustering import parse_clustering
from .errors import IncoherentError, ParseError, ResourceLimit
from .implementation import ReconfEvent, explore_impl
from .lts import DEFAULT_STATE_CAP
from .reference import detect_races, explore_ref
from .report import Report, format_report, trace_rows
from .workload import load_workload

OK, FAIL, USAGE, LIMIT = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--depth", type=int, default=None, help="BFS depth bound (default: none)")
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    p.add_argument("--kappa", type=int, default=1)
    p.add_argument("--delta", type=int, default=4)
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--mu", type=int, default=1000)
    p.add_argument("--credit-cap", type=int, default=cost.DEFAULT_CREDIT_CAP)
    p.add_argument("--trace-cap", type=int, default=analysis.DEFAULT_TRACE_CAP)
    p.add_argument("--reconf-anywhere", action="store_true")
    p.add_argument("--locks-observable", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=None,
                   help="only used by randomised test drivers; exploration is deterministic")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="reconfsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explore", parents=[common], help="dump a reference or implementation LTS")
    p.add_argument("workload")
    p.add_argument("--on", default="ref", help="'ref' or a clustering (default: ref)")

    p = sub.add_parser("races", parents=[common], help="list reachable racy reference states")
    p.add_argument("workload")

    p = sub.add_parser("drf", parents=[common], help="decide data-race freedom")
    p.add_argument("workload")
    p.add_argument("--on", default=None, help="starting clustering (cold caches)")

    p = sub.add_parser("conform", parents=[common], help="observable trace inclusion")
    p.add_argument("workload")
    p.add_argument("clustering")
    p.add_argument("--against", default="ref", help="'ref' or a clustering")
    p.add_argument("--both", action="store_true", help="check inclusion in both directions")

    p = sub.add_parser("reduct", parents=[common],
                       help="check closed-form reducts against system-transition normal forms")
    p.add_argument("workload")
    p.add_argument("clustering")

    p = sub.add_parser("reconf-sim", parents=[common], help="explore with reconfiguration events")
    p.add_argument("workload")
    p.add_argument("clustering")
    p.add_argument("--to", action="append", required=True, help="target clustering (repeatable)")
    p.add_argument("--at", action="append", type=int, default=[],
                   help="programmed-step trigger for the matching --to")

    p = sub.add_parser("cost", parents=[common], help="cost of a trace file")
    p.add_argument("trace")
    p.add_argument("--cores", type=int, default=None, help="core count for reconf labels")

    p = sub.add_parser("amortise", parents=[common], help="weak amortised efficiency of Q1 over Q2")
    p.add_argument("workload")
    p.add_argument("left", help="'ref' or a clustering")
    p.add_argument("right", help="'ref' or a clustering")

    p = sub.add_parser("breakeven", parents=[common], help="write-back credit of a trace file")
    p.add_argument("trace")
    p.add_argument("--cores", type=int, default=None)
    return parser


def _params(args) -> cost.CostParams:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = cost.CostParams(args.kappa, args.delta, args.theta, args.mu)
    args._warnings = [str(w.message) for w in caught]
    return p


def _lts(w, which, args):
    if which == "ref":
        return explore_ref(w, args.depth, args.state_cap)
    q = parse_clustering(which, w.num_cores)
    return explore_impl(w, q, depth=args.depth, state_cap=args.state_cap,
                        reconf_anywhere=args.reconf_anywhere)


def _cmd_explore(args, r, params):
    w = load_workload(args.workload)
    lts = _lts(w, args.on, args)
    r.artifacts["lts"] = lts.to_dict(params)
    r.stats.update(states=len(lts), edges=len(lts.edges), truncated=len(lts.truncated))
    return OK


def _cmd_races(args, r, params):
    w = load_workload(args.workload)
    races = detect_races(w, args.depth, args.state_cap)
    r.verdicts["race_free"] = not races
    r.verdicts["racy_states"] = [{"state": str(s), "witness": wit.to_dict()} for s, wit in races]
    return OK if not races else FAIL


def _cmd_drf(args, r, params):
    w = load_workload(args.workload)
    q = parse_clustering(args.on, w.num_cores) if args.on else None
    res = analysis.is_drf(w, q, args.depth, args.state_cap)
    r.verdicts["drf"] = res.drf
    if not res.drf:
        r.verdicts["witness"] = res.witness.to_dict()
        r.verdicts["racy_state"] = str(res.state)
    return OK if res.drf else FAIL


def _conform(impl, ref, params, args, r, label):
    v = analysis.check_conformance(impl, ref, params, args.locks_observable, args.trace_cap)
    r.verdicts[label] = v.conforms
    r.stats[f"{label}_traces"] = v.checked_traces
    if not v.conforms:
        r.traces[f"{label}_counterexample"] = trace_rows(v.counterexample, args.locks_observable)
    return v.conforms


def _cmd_conform(args, r, params):
    w = load_workload(args.workload)
    impl = _lts(w, args.clustering, args)
    ref = _lts(w, args.against, args)
    ok = _conform(impl, ref, params, args, r, "conforms")
    if args.both:
        ok = _conform(ref, impl, params, args, r, "conforms_reverse") and ok
    return OK if ok else FAIL


def _cmd_reduct(args, r, params):
    w = load_workload(args.workload)
    lts = _lts(w, args.clustering, args)
    memo = {}
    checked = mismatched = incoherent = 0
    for s in lts.states:
        if not analysis.is_coherent(s):
            incoherent += 1
            continue
        checked += 1
        normals, acyclic = analysis.system_normal_forms(s, memo)
        closed = analysis.reduct(s)
        stores = {n.store for n in normals}
        if not acyclic or stores != {closed.store} or any(any(c) for n in normals for c in n.caches):
            mismatched += 1
            if mismatched <= 5:
                r.messages.append(f"reduct mismatch at {s}")
    r.verdicts["reducts_agree"] = mismatched == 0
    r.stats.update(states=len(lts), coherent_checked=checked, incoherent=incoherent,
                   mismatched=mismatched)
    return OK if mismatched == 0 else FAIL


def _cmd_reconf_sim(args, r, params):
    w = load_workload(args.workload)
    q = parse_clustering(args.clustering, w.num_cores)
    if len(args.at) > len(args.to):
        raise _UsageError("more --at triggers than --to targets")
    at = list(args.at) + [None] * (len(args.to) - len(args.at))
    if None in at and not args.reconf_anywhere:
        raise _UsageError("every --to needs an --at step unless --reconf-anywhere is given")
    events = [ReconfEvent(parse_clustering(t, w.num_cores), a) for t, a in zip(args.to, at)]
    lts = explore_impl(w, q, events, args.depth, args.state_cap, args.reconf_anywhere)
    reconf_edges = [(s, a, t) for s, a, t in lts.edges if isinstance(a, Reconf)]
    preserved = all(analysis.reduct(lts.states[s]) == analysis.reduct(lts.states[t])
                    for s, _, t in reconf_edges)
    r.verdicts["reducts_preserved"] = preserved
    r.stats.update(states=len(lts), reconf_edges=len(reconf_edges),
                   skipped_incoherent=lts.meta["skipped_reconf"])
    ok = _conform(lts, explore_ref(w, args.depth, args.state_cap), params, args, r, "conforms")
    return OK if ok and preserved else FAIL


def _read_trace(args):
    with open(args.trace, encoding="utf-8") as fh:
        return parse_trace(fh.read(), args.cores)


def _cmd_cost(args, r, params):
    actions = _read_trace(args)
    trace = [(a, cost.action_cost(a, params)) for a in actions]
    r.traces["trace"] = trace_rows(trace, args.locks_observable)
    r.verdicts["total_cost"] = cost.trace_cost(trace, params)
    return OK


def _cmd_amortise(args, r, params):
    w = load_workload(args.workload)
    left, right = _lts(w, args.left, args), _lts(w, args.right, args)
    v = cost.amortised_compare(left, right, params, args.credit_cap, args.locks_observable)
    r.verdicts["result"] = v.result
    r.verdicts["min_credit"] = v.min_credit
    if v.bound is not None:
        r.verdicts["bound"] = v.bound
    if v.witness is not None:
        r.artifacts["challenger_strategy"] = v.witness
    r.stats["pairs"] = v.pairs
    return {cost.MORE_EFFICIENT: OK, cost.NOT_MORE_EFFICIENT: FAIL}.get(v.result, LIMIT)


def _cmd_breakeven(args, r, params):
    actions = _read_trace(args)
    rep = cost.breakeven_report(actions, params)
    r.verdicts.update(rep.to_dict())
    return OK if rep.clears_breakeven else FAIL


def _validate(args):
    if args.depth is not None and args.depth < 0:
        raise _UsageError("--depth must be >= 0")
    for name in ("state_cap", "credit_cap", "trace_cap"):
        if getattr(args, name) < 1:
            raise _UsageError(f"--{name.replace('_', '-')} must be >= 1")
    if any(a < 0 for a in getattr(args, "at", [])):
        raise _UsageError("--at steps must be >= 0")


_COMMANDS = {
    "explore": _cmd_explore, "races": _cmd_races, "drf": _cmd_drf,
    "conform": _cmd_conform, "reduct": _cmd_reduct, "reconf-sim": _cmd_reconf_sim,
    "cost": _cmd_cost, "amortise": _cmd_amortise, "breakeven": _cmd_breakeven,
}


def run_command(argv):
    """Parse ``argv``, run it, and return ``(exit_code, Report, fmt)``."""
    fmt = "json" if "json" in argv and "--format" in argv else "text"
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return USAGE, Report("usage", messages=[str(exc)], exit_code=USAGE), fmt
    fmt = args.format
    inputs = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    r = Report(args.command, inputs=inputs)
    try:
        _validate(args)
        params = _params(args)
        r.messages.extend(args._warnings)
        code = _COMMANDS[args.command](args, r, params)
    except (ParseError, _UsageError, ValueError, OSError, IncoherentError) as exc:
        r.messages.append(f"error: {exc}")
        code = USAGE
    except ResourceLimit as exc:
        r.messages.append(f"resource limit: {exc}")
        code = LIMIT
    r.exit_code = code
    return code, r, fmt


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return OK
    code, report, fmt = run_command(argv)
    sys.stdout.write(format_report(report, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
