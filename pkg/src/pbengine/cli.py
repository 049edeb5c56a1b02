"""
Command-line front end: compute outcomes, audit allocations, probe dynamic
axioms and convert between ``.pb`` and JSON.

Exit codes: 0 success or every axiom satisfied, 1 parse error, 2 usage error
(including rule/profile mismatches and unknown axioms), 3 an axiom is
violated or ``--assert-project`` fails, 4 an enumeration cap is exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from pbengine.audit import AXIOMS, check_axiom
from pbengine.caps import default_caps
from pbengine.dynamics import (
    TRANSFORM_KINDS,
    Discount,
    LimitRaise,
    Merge,
    Split,
    check_monotonicity,
    find_manipulation,
)
from pbengine.errors import CapExceeded, ModelError, PabulibError, ScaleOverflow, UnknownAxiom
from pbengine.market import BudgetVariation, GreedyCompletion, Perturbation, complete
from pbengine.model import APPROVAL, CARDINAL, CUMULATIVE, BudgetAllocation, TieBreakOrder
from pbengine.pabulib import (
    Election,
    dumps_json,
    election_from_json,
    election_to_json,
    parse_pabulib,
    serialize_pabulib,
)
from pbengine.rational import format_fraction, parse_rational
from pbengine.rules import RULE_IDS, get_rule
from pbengine.satisfaction import SAT_NAMES, by_name, evaluate
from pbengine.verdict import VIOLATED

EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_VIOLATED, EXIT_CAP = 0, 1, 2, 3, 4

# Rules whose satisfaction function is a parameter (on approval ballots).
_SAT_RULES = ("maxwel_util", "maxwel_egal", "maxwel_nash", "mes")


class _Fail(Exception):
    def __init__(self, code: int, stage: str, message: str):
        super().__init__(message)
        self.code = code
        self.stage = stage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Fail(EXIT_USAGE, "arguments", message)


# Loading -------------------------------------------------------------------


def _load(path: str) -> tuple:
    """``(Election, sha256 of the file bytes)``."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise _Fail(EXIT_PARSE, "parse", f"cannot read {path}: {exc.strerror}") from None
    digest = hashlib.sha256(raw).hexdigest()
    try:
        text = raw.decode("utf-8-sig")
        if path.endswith(".json") or text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise PabulibError(f"invalid JSON: {exc.msg}", exc.lineno) from None
            election = election_from_json(data)
        else:
            election = parse_pabulib(text)
    except (PabulibError, ModelError, UnicodeDecodeError) as exc:
        raise _Fail(EXIT_PARSE, "parse", f"{path}: {exc}") from None
    return election, digest


def _voter_ids(election: Election) -> list:
    ids = list(election.metadata.voter_ids)
    return ids if len(ids) == election.profile.n else [str(i + 1) for i in range(election.profile.n)]


def _caps(args):
    return default_caps().with_overrides(max_n=args.max_n, max_m=args.max_m)


def _tiebreak(text: str | None, election: Election):
    inst = election.instance
    if text is None or text == "lex":
        return TieBreakOrder.lexicographic(inst)
    if text == "file-order":
        return TieBreakOrder.file_order(inst)
    if text.startswith("explicit:"):
        return TieBreakOrder.explicit(inst, [p for p in text[len("explicit:") :].split(",") if p])
    raise _Fail(EXIT_USAGE, "arguments", f"--tiebreak must be lex, file-order or explicit:<list>, got {text!r}")


def _sat(name: str | None, election: Election):
    if name is None:
        return None
    if name not in SAT_NAMES:
        raise _Fail(EXIT_USAGE, "arguments", f"--sat must be one of {', '.join(SAT_NAMES)}")
    return by_name(name, election.profile)


def _completion(text: str | None):
    if text is None:
        return None
    if text.startswith("greedy:"):
        return GreedyCompletion(text[len("greedy:") :])
    if text == "budget-step":
        return BudgetVariation()
    if text.startswith("budget-step:"):
        return BudgetVariation(parse_rational(text[len("budget-step:") :]))
    if text == "perturb":
        return Perturbation()
    raise _Fail(EXIT_USAGE, "arguments", "--completion must be greedy:<key>, budget-step[:<step>] or perturb")


def _projects(text: str, election: Election) -> list:
    ps = [p.strip() for p in text.split(",") if p.strip()]
    election.instance.check_projects(ps)
    return ps


# Report pieces -------------------------------------------------------------


def _fingerprint(election: Election, digest: str) -> dict:
    inst = election.instance
    return {
        "sha256": digest,
        "n": election.profile.n,
        "m": inst.m,
        "budget_limit": format_fraction(inst.budget_limit),
        "vote_type": election.metadata.vote_type,
    }


def _allocation_json(election: Election, alloc: BudgetAllocation) -> dict:
    inst = election.instance
    return {
        "selected": alloc.ordered(inst),
        "total_cost": format_fraction(alloc.total_cost),
        "leftover": format_fraction(alloc.leftover(inst)),
    }


def _satisfaction_table(election: Election, alloc: BudgetAllocation, sat) -> dict:
    prof, inst = election.profile, election.instance
    ids = _voter_ids(election)
    if prof.kind == APPROVAL and sat is not None:
        table = {}
        for vid, b in zip(ids, prof.ballots):
            if sat.transform in ("log", "sqrt"):
                table[vid] = repr(sat.real_value(alloc.selected & b.approved, inst))
            else:
                table[vid] = format_fraction(evaluate(sat, b, alloc, inst))
        return {sat.name: table}
    if prof.kind in (CARDINAL, CUMULATIVE):
        return {"score": {vid: format_fraction(sum((b.score(p) for p in alloc.selected), 0)) for vid, b in zip(ids, prof.ballots)}}
    return {}


def _rule_json(args, rule_id: str) -> dict:
    return {
        "id": rule_id,
        "sat": getattr(args, "sat", None),
        "tiebreak": getattr(args, "tiebreak", None) or "lex",
        "completion": getattr(args, "completion", None),
    }


def _run_rule(args, election: Election, timing: dict) -> tuple:
    """``(allocation, certificate or None)``."""
    rule = get_rule(args.rule, _sat(args.sat, election), _caps(args))
    tb = _tiebreak(args.tiebreak, election)
    method = _completion(args.completion)
    t0 = time.perf_counter()
    if method is None:
        alloc, extra = rule.run(election.instance, election.profile, tb)
    else:
        alloc, extra = complete(rule, method, election.instance, election.profile, tb), None
    timing["rule"] = time.perf_counter() - t0
    return alloc, extra


def _emit(report: dict, args, timing: dict) -> None:
    if getattr(args, "timing", False):
        report["timing"] = {k: round(v, 6) for k, v in timing.items()}
    text = dumps_json(report)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# Commands ------------------------------------------------------------------


def cmd_compute(args) -> int:
    """Run a rule and report its outcome."""
    timing: dict = {}
    t0 = time.perf_counter()
    election, digest = _load(args.file)
    timing["parse"] = time.perf_counter() - t0
    alloc, extra = _run_rule(args, election, timing)
    report = {
        "command": "compute",
        "election": _fingerprint(election, digest),
        "rule": _rule_json(args, args.rule),
        "allocation": _allocation_json(election, alloc),
        "satisfaction": _satisfaction_table(election, alloc, _sat(args.sat, election)),
    }
    if extra is not None and hasattr(extra, "to_json"):
        report["certificate"] = extra.to_json(_voter_ids(election))
    code = EXIT_OK
    if args.assert_project is not None:
        election.instance.cost(args.assert_project)
        held = args.assert_project in alloc.selected
        report["assert_project"] = {"project": args.assert_project, "selected": held}
        code = EXIT_OK if held else EXIT_VIOLATED
    _emit(report, args, timing)
    return code


def cmd_audit(args) -> int:
    """Check axioms on a rule's outcome or on a given allocation."""
    names = [a.strip() for a in args.axioms.split(",") if a.strip()]
    unknown = [a for a in names if a not in AXIOMS]
    if unknown:
        raise UnknownAxiom(f"unknown axiom(s) {', '.join(unknown)}; known: {', '.join(AXIOMS)}")
    if (args.rule is None) == (args.allocation is None):
        raise _Fail(EXIT_USAGE, "arguments", "give exactly one of --rule and --allocation")
    timing: dict = {}
    t0 = time.perf_counter()
    election, digest = _load(args.file)
    timing["parse"] = time.perf_counter() - t0
    if args.rule is not None:
        alloc, _ = _run_rule(args, election, timing)
        source = {"rule": _rule_json(args, args.rule)}
    else:
        alloc = BudgetAllocation.of(election.instance, _projects(args.allocation, election))
        source = {"given": True}
    sat = _sat(args.sat, election)
    alpha = parse_rational(args.alpha) if args.alpha is not None else None
    caps = _caps(args)
    ids = _voter_ids(election)
    verdicts = []
    for name in names:
        t0 = time.perf_counter()
        v = check_axiom(name, election.instance, election.profile, alloc, sat, alpha, args.relative_budget, caps)
        timing[f"axiom:{name}"] = time.perf_counter() - t0
        verdicts.append(v)
    report = {
        "command": "audit",
        "election": _fingerprint(election, digest),
        "source": source,
        "allocation": _allocation_json(election, alloc),
        "satisfaction": _satisfaction_table(election, alloc, sat),
        "axioms": [v.to_json(ids) for v in verdicts],
    }
    _emit(report, args, timing)
    return EXIT_VIOLATED if any(v.status == VIOLATED for v in verdicts) else EXIT_OK


def _transform(args, election: Election):
    need = {
        "discount": ("project", "new_cost"),
        "limit": ("new_budget",),
        "splitting": ("project", "parts"),
        "merging": ("projects", "new_id"),
    }[args.kind]
    missing = [f"--{n.replace('_', '-')}" for n in need if getattr(args, n) is None]
    if missing:
        raise _Fail(EXIT_USAGE, "arguments", f"--kind {args.kind} needs {', '.join(missing)}")
    if args.kind == "discount":
        return Discount(args.project, parse_rational(args.new_cost))
    if args.kind == "limit":
        return LimitRaise(parse_rational(args.new_budget))
    if args.kind == "splitting":
        parts = []
        for item in args.parts.split(","):
            pid, sep, cost = item.partition(":")
            if not sep:
                raise _Fail(EXIT_USAGE, "arguments", "--parts takes id:cost pairs separated by commas")
            parts.append((pid.strip(), parse_rational(cost.strip())))
        return Split(args.project, parts)
    return Merge(frozenset(_projects(args.projects, election)), args.new_id)


def _lenient_rule(args, election: Election):
    """The rule with ``--sat`` passed only where the rule takes one."""
    sat = _sat(args.sat, election)
    takes = args.rule in _SAT_RULES and election.profile.kind == APPROVAL
    return get_rule(args.rule, sat if takes else None, _caps(args)), sat


def cmd_audit_dynamic(args) -> int:
    """Check a monotonicity axiom on one transform of the election."""
    timing: dict = {}
    election, digest = _load(args.file)
    t = _transform(args, election)
    rule, _ = _lenient_rule(args, election)
    t0 = time.perf_counter()
    v = check_monotonicity(rule, args.kind, election.instance, election.profile, t, _tiebreak(args.tiebreak, election))
    timing["check"] = time.perf_counter() - t0
    report = {
        "command": "audit-dynamic",
        "election": _fingerprint(election, digest),
        "rule": _rule_json(args, args.rule),
        "verdict": v.to_json(_voter_ids(election)),
    }
    _emit(report, args, timing)
    return EXIT_VIOLATED if v.violated else EXIT_OK


def cmd_manipulate(args) -> int:
    """Search for a profitable misreport of one voter."""
    timing: dict = {}
    election, digest = _load(args.file)
    ids = _voter_ids(election)
    if args.voter not in ids:
        raise _Fail(EXIT_USAGE, "arguments", f"unknown voter {args.voter!r}")
    voter = ids.index(args.voter)
    rule, sat = _lenient_rule(args, election)
    valuation = sat if election.profile.kind == APPROVAL else None
    t0 = time.perf_counter()
    man = find_manipulation(
        rule,
        election.instance,
        election.profile,
        voter,
        valuation,
        approximate=args.mode == "approx",
        tiebreak=_tiebreak(args.tiebreak, election),
        caps=_caps(args),
    )
    timing["search"] = time.perf_counter() - t0
    report = {
        "command": "manipulate",
        "election": _fingerprint(election, digest),
        "rule": _rule_json(args, args.rule),
        "voter": args.voter,
        "mode": args.mode,
        "manipulation": man.to_json(ids) if man is not None else None,
    }
    _emit(report, args, timing)
    return EXIT_VIOLATED if man is not None else EXIT_OK


def cmd_convert(args) -> int:
    """Convert between ``.pb`` and JSON."""
    election, _ = _load(args.file)
    if args.to == "json":
        text = dumps_json(election_to_json(*election))
    else:
        text = serialize_pabulib(*election)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# Argument parsing ----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="election file (.pb or .json)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--max-n", type=int, help="voter cap for exhaustive checks")
    p.add_argument("--max-m", type=int, help="project cap for exhaustive checks")
    p.add_argument("--timing", action="store_true", help="add per-stage wall-clock times to the report")


def _rule_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--rule", choices=RULE_IDS, required=required)
    p.add_argument("--sat", help=f"satisfaction function: {', '.join(SAT_NAMES)}")
    p.add_argument("--tiebreak", help="lex (default), file-order or explicit:<p1,p2,...>")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbengine", description="Exact participatory budgeting rules and axiom audits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="run a rule")
    _common(p)
    _rule_flags(p, True)
    p.add_argument("--completion", help="greedy:<score_per_cost|score>, budget-step[:<step>] or perturb")
    p.add_argument("--assert-project", help="exit 3 unless this project is selected")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("audit", help="check axioms on an allocation")
    _common(p)
    _rule_flags(p, False)
    p.add_argument("--completion", help="completion method for --rule")
    p.add_argument("--allocation", help="comma-separated project ids (empty string for none)")
    p.add_argument("--axioms", required=True, help=f"comma-separated: {', '.join(AXIOMS)}")
    p.add_argument("--alpha", help="factor for core-sat-approx and core-entitlement")
    p.add_argument("--relative-budget", action="store_true", help="use the allocation's cost as the budget")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("audit-dynamic", help="check a monotonicity axiom on one transform")
    _common(p)
    _rule_flags(p, True)
    p.add_argument("--kind", choices=TRANSFORM_KINDS, required=True)
    p.add_argument("--project", help="project to discount or split")
    p.add_argument("--new-cost", help="discounted cost")
    p.add_argument("--new-budget", help="raised budget limit")
    p.add_argument("--parts", help="split parts as id:cost,id:cost")
    p.add_argument("--projects", help="projects to merge, comma-separated")
    p.add_argument("--new-id", help="id of the merged project")
    p.set_defaults(func=cmd_audit_dynamic)

    p = sub.add_parser("manipulate", help="search for a profitable misreport")
    _common(p)
    _rule_flags(p, True)
    p.add_argument("--voter", required=True, help="voter id as in the file")
    p.add_argument("--mode", choices=("exact", "approx"), default="exact")
    p.set_defaults(func=cmd_manipulate)

    p = sub.add_parser("convert", help="convert between .pb and JSON")
    p.add_argument("file")
    p.add_argument("--to", choices=("json", "pb"), required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    """Entry point; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _Fail as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return exc.code
    except (CapExceeded, ScaleOverflow) as exc:
        print(f"error [caps]: {exc}", file=sys.stderr)
        return EXIT_CAP
    except UnknownAxiom as exc:
        print(f"error [axioms]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, KeyError, ValueError) as exc:
        print(f"error [usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
