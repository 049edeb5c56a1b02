"""
Welfare objectives, exact welfare maximisation and the greedy scheme.

Exact maximisers break ties between optimal allocations with the
tie-break order: scanning projects in that order, the allocation that selects
the first project on which two optima differ wins. Since every objective here
is inclusion-monotone, the winner is always exhaustive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from pbengine.algebraic import RootSum
from pbengine.caps import Caps, resolve
from pbengine.errors import CapExceeded, IncompatibleProfile, MissingSatisfaction, UnsupportedObjective
from pbengine.knapsack import knapsack
from pbengine.model import (
    APPROVAL,
    CARDINAL,
    CUMULATIVE,
    BudgetAllocation,
    Instance,
    Profile,
    TieBreakOrder,
    as_allocation,
    resolve_tiebreak,
)
from pbengine.satisfaction import SatisfactionFunction

OBJECTIVES = ("util", "cc", "egal", "nash")


@dataclass(frozen=True)
class WelfareObjective:
    """
    A social welfare objective.

    Parameters
    ----------
        kind : str
            ``util`` (sum), ``cc`` (sum of each voter's best selected score),
            ``egal`` (minimum) or ``nash`` (product).
        sat : SatisfactionFunction, optional
            Required for ``util``, ``egal`` and ``nash`` on approval profiles;
            must be omitted for cardinal profiles, whose scores are used directly.
    """

    kind: str
    sat: SatisfactionFunction | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.kind!r}")

    @classmethod
    def util(cls, sat=None):
        return cls("util", sat)

    @classmethod
    def egal(cls, sat=None):
        return cls("egal", sat)

    @classmethod
    def nash(cls, sat=None):
        return cls("nash", sat)

    @classmethod
    def cc(cls):
        return cls("cc")


def _check_objective(profile: Profile, objective: WelfareObjective) -> SatisfactionFunction | None:
    if profile.kind not in (APPROVAL, CARDINAL, CUMULATIVE):
        raise IncompatibleProfile(f"welfare objectives need scores, not {profile.kind} ballots")
    if objective.kind == "cc":
        return None
    if profile.kind == APPROVAL:
        if objective.sat is None:
            raise MissingSatisfaction(f"{objective.kind} on approval ballots needs a satisfaction function")
        sat = objective.sat
        if sat.kind == "share" and sat.context is None:
            sat = sat.with_context(profile)
        return sat
    if objective.sat is not None:
        raise IncompatibleProfile("cardinal profiles use their scores; drop the satisfaction function")
    return None


def _voter_scales(instance, profile, sat, selected) -> list:
    """Per-voter utility on the exact comparison scale."""
    if profile.kind == APPROVAL:
        return [sat.value(selected & b.approved, instance) for b in profile.ballots]
    return [sum((b.score(p) for p in selected), Fraction(0)) for b in profile.ballots]


def _cc_value(profile, selected) -> Fraction:
    total = Fraction(0)
    for b in profile.ballots:
        total += max((b.score(p) for p in selected), default=Fraction(0))
    return total


def _transform(profile, sat) -> str:
    return "identity" if profile.kind != APPROVAL else sat.transform


def _objective_key(instance, profile, objective, sat, selected):
    """Exactly comparable key that orders allocations like the objective does."""
    if objective.kind == "cc":
        return _cc_value(profile, selected)
    xs = _voter_scales(instance, profile, sat, selected)
    tr = _transform(profile, sat)
    if objective.kind == "util":
        if tr == "log":
            out = Fraction(1)
            for x in xs:
                out *= 1 + x
            return out
        if tr == "sqrt":
            total = RootSum()
            for x in xs:
                total = total + RootSum.sqrt(x)
            return total
        return sum(xs, Fraction(0))
    if objective.kind == "egal":
        return min(xs)
    if tr == "log":
        raise UnsupportedObjective("the Nash product of LOG satisfactions cannot be compared exactly")
    prod = Fraction(1)
    for x in xs:
        prod *= x
    return (prod, sum(1 for x in xs if x > 0))


def welfare_value(instance: Instance, profile: Profile, allocation, objective: WelfareObjective):
    """
    Social welfare of an allocation.

    Returns
    -------
        Fraction or float
            Exact for rational-valued objectives; a float when LOG or SQRT
            satisfactions make the value irrational.

    Examples
    --------
    >>> from pbengine.satisfaction import COST
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> welfare_value(e1, prof, {"p2", "p3", "p4", "p5"}, WelfareObjective.util(COST))
    Fraction(6, 1)
    """
    alloc = as_allocation(instance, allocation)
    sat = _check_objective(profile, objective)
    selected = alloc.selected
    if objective.kind == "cc":
        return _cc_value(profile, selected)
    xs = _voter_scales(instance, profile, sat, selected)
    tr = _transform(profile, sat)
    if tr in ("log", "sqrt"):
        f = math.log1p if tr == "log" else math.sqrt
        reals = [f(x) for x in xs]
        if objective.kind == "util":
            return math.fsum(reals)
        if objective.kind == "egal":
            return min(reals)
        return math.prod(reals)
    if objective.kind == "util":
        return sum(xs, Fraction(0))
    if objective.kind == "egal":
        return min(xs)
    out = Fraction(1)
    for x in xs:
        out *= x
    return out


def approval_score(profile: Profile, p: str, instance: Instance | None = None) -> int:
    """
    Number of voters approving ``p``.

    Examples
    --------
    >>> approval_score(Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]]), "p1")
    2
    """
    profile.require(APPROVAL)
    if instance is not None:
        instance.cost(p)
    return sum(1 for b in profile.ballots if p in b.approved)


def _additive_weights(instance, profile, sat) -> list | None:
    """Per-project knapsack values when UTIL is additive, else None."""
    if profile.kind == APPROVAL:
        if sat.transform != "identity":
            return None
        counts = {p: 0 for p in instance.projects}
        for b in profile.ballots:
            for p in b.approved:
                counts[p] += 1
        return [counts[p] * sat.weight(p, instance) for p in instance.projects]
    totals = {p: Fraction(0) for p in instance.projects}
    for b in profile.ballots:
        for p in instance.projects:
            totals[p] += b.score(p)
    return [totals[p] for p in instance.projects]


def _subset_search(instance, order, key_of):
    """Lexicographically first optimum over maximal feasible sets (include-first DFS)."""
    costs = [instance.costs[p] for p in order]
    b = instance.budget_limit
    m = len(order)
    best = [None, None]
    chosen = []

    def leaf(total, min_excluded):
        if min_excluded is not None and total + min_excluded <= b:
            return  # not maximal
        sel = frozenset(chosen)
        k = key_of(sel)
        if best[0] is None or k > best[0]:
            best[0], best[1] = k, sel

    def dfs(j, total, min_excluded):
        if j == m:
            leaf(total, min_excluded)
            return
        c = costs[j]
        if total + c <= b:
            chosen.append(order[j])
            dfs(j + 1, total + c, min_excluded)
            chosen.pop()
        me = c if min_excluded is None or c < min_excluded else min_excluded
        dfs(j + 1, total, me)

    dfs(0, Fraction(0), None)
    return best[1] if best[1] is not None else frozenset()


def maximize_welfare(
    instance: Instance,
    profile: Profile,
    objective: WelfareObjective,
    tiebreak: TieBreakOrder | None = None,
    caps: Caps | None = None,
    method: str = "auto",
) -> BudgetAllocation:
    """
    An exact welfare-maximising feasible allocation.

    Additive utilitarian objectives (CARD, COST, SHARE or additive
    satisfactions, or cardinal scores) are solved as a knapsack over
    ``score(p) * weight(p)``; every other objective by a search over maximal
    feasible sets. ``method="search"`` forces the subset search, the
    fallback when the knapsack raises :py:class:`ScaleOverflow`.

    Raises
    ------
        ScaleOverflow
            The knapsack's integer-rescaled budget exceeds ``caps.max_scaled_budget``.
        CapExceeded
            Subset search with more than ``caps.max_subset_m`` projects.

    Examples
    --------
    >>> from pbengine.satisfaction import CARD, COST
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> sorted(maximize_welfare(e1, prof, WelfareObjective.util(COST)).selected)
    ['p1']
    >>> sorted(maximize_welfare(e1, prof, WelfareObjective.util(CARD)).selected)
    ['p2', 'p3', 'p4', 'p5']
    """
    caps = resolve(caps)
    tb = resolve_tiebreak(instance, tiebreak)
    sat = _check_objective(profile, objective)
    if method not in ("auto", "search"):
        raise ValueError("method must be 'auto' or 'search'")
    if objective.kind == "util" and method == "auto":
        weights = _additive_weights(instance, profile, sat)
        if weights is not None:
            idx = instance.index
            order = [idx[p] for p in tb.order]
            chosen, _ = knapsack(
                [instance.costs[p] for p in instance.projects],
                weights,
                instance.budget_limit,
                order=order,
                max_scaled_budget=caps.max_scaled_budget,
            )
            return BudgetAllocation.of(instance, [instance.projects[j] for j in chosen])
    if instance.m > caps.max_subset_m:
        raise CapExceeded(f"subset search: m = {instance.m} exceeds cap max_subset_m = {caps.max_subset_m}")
    best = _subset_search(instance, list(tb.order), lambda sel: _objective_key(instance, profile, objective, sat, sel))
    return BudgetAllocation.of(instance, best)


def greedy_scheme(instance: Instance, order) -> BudgetAllocation:
    """
    Scan projects in ``order`` and add each one that still fits.

    Unaffordable projects are skipped and the scan continues.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> sorted(greedy_scheme(e1, ["p3", "p4", "p5", "p2", "p1"]).selected)
    ['p2', 'p3', 'p4', 'p5']
    """
    order = list(order)
    if set(order) != set(instance.projects) or len(order) != instance.m:
        raise ValueError("the greedy order must list every project exactly once")
    selected = []
    total = Fraction(0)
    for p in order:
        c = instance.costs[p]
        if total + c <= instance.budget_limit:
            selected.append(p)
            total += c
    return BudgetAllocation(frozenset(selected), total)


GREEDY_KEYS = ("score_per_cost", "score")


def _scores(profile: Profile) -> dict:
    totals: dict = {}
    for b in profile.ballots:
        if b.kind == APPROVAL:
            for p in b.approved:
                totals[p] = totals.get(p, 0) + 1
        else:
            for p in b.referenced():
                totals[p] = totals.get(p, Fraction(0)) + b.score(p)
    return totals


def greedy_order(instance: Instance, profile: Profile, key: str, tiebreak: TieBreakOrder | None = None) -> list:
    """Projects by decreasing key value, ties in tie-break order."""
    if key not in GREEDY_KEYS:
        raise ValueError(f"greedy key must be one of {GREEDY_KEYS}")
    if profile.kind not in (APPROVAL, CARDINAL, CUMULATIVE):
        raise IncompatibleProfile("greedy welfare needs approval or cardinal ballots")
    tb = resolve_tiebreak(instance, tiebreak)
    scores = _scores(profile)

    def k(p):
        s = Fraction(scores.get(p, 0))
        return s / instance.costs[p] if key == "score_per_cost" else s

    return sorted(instance.projects, key=lambda p: (-k(p), tb.rank[p]))


def greedy_welfare(instance: Instance, profile: Profile, key: str = "score_per_cost", tiebreak=None) -> BudgetAllocation:
    """
    Greedy welfare rule: order projects by approval score per cost
    (``score_per_cost``) or by approval score (``score``), then run the
    greedy scheme.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> sorted(greedy_welfare(e1, prof, "score_per_cost").selected)
    ['p2', 'p3', 'p4', 'p5']
    >>> sorted(greedy_welfare(e1, prof, "score").selected)
    ['p1']
    """
    return greedy_scheme(instance, greedy_order(instance, profile, key, tiebreak))
