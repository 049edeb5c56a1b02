"""
Instance transforms and the axioms that compare a rule's outcomes across
them: discount, limit, splitting and merging monotonicity, (approximate)
strategy-proofness and weak proportionality on unit-cost party-list profiles.

A rule here is any callable ``rule(instance, profile, tiebreak)`` returning a
:py:class:`~pbengine.model.BudgetAllocation`, such as the entries of
:py:func:`pbengine.rules.get_rule`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from pbengine.caps import Caps, resolve
from pbengine.errors import CapExceeded, InvalidTransform, MissingSatisfaction, WrongProfileVariant
from pbengine.lattice import lattice, members
from pbengine.model import (
    APPROVAL,
    CARDINAL,
    ApprovalBallot,
    BudgetAllocation,
    CardinalBallot,
    Instance,
    Profile,
    TieBreakOrder,
    resolve_tiebreak,
)
from pbengine.rational import to_fraction
from pbengine.satisfaction import SatisfactionFunction
from pbengine.verdict import INAPPLICABLE, SATISFIED, VIOLATED, CohesiveWitness, OutcomePairWitness, Verdict

# Transforms ----------------------------------------------------------------


@dataclass(frozen=True)
class Discount:
    """Lower the cost of ``project`` to ``new_cost``."""

    project: str
    new_cost: Fraction

    kind = "discount"

    def __post_init__(self):
        object.__setattr__(self, "new_cost", to_fraction(self.new_cost))

    def describe(self) -> str:
        return f"discount {self.project} to {self.new_cost}"


@dataclass(frozen=True)
class LimitRaise:
    """Raise the budget limit to ``budget_limit``."""

    budget_limit: Fraction

    kind = "limit"

    def __post_init__(self):
        object.__setattr__(self, "budget_limit", to_fraction(self.budget_limit))

    def describe(self) -> str:
        return f"raise the budget limit to {self.budget_limit}"


@dataclass(frozen=True)
class Split:
    """Replace ``project`` by new projects ``parts``, a sequence of ``(id, cost)``."""

    project: str
    parts: tuple

    kind = "splitting"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple((str(q), to_fraction(c)) for q, c in self.parts))

    @property
    def part_ids(self) -> frozenset:
        return frozenset(q for q, _ in self.parts)

    def describe(self) -> str:
        return f"split {self.project} into {', '.join(q for q, _ in self.parts)}"


@dataclass(frozen=True)
class Merge:
    """Replace the projects ``projects`` by one new project ``new_id`` of their total cost."""

    projects: frozenset
    new_id: str

    kind = "merging"

    def __post_init__(self):
        object.__setattr__(self, "projects", frozenset(self.projects))

    def describe(self) -> str:
        return f"merge {', '.join(sorted(self.projects))} into {self.new_id}"


TRANSFORM_KINDS = ("discount", "limit", "splitting", "merging")


def apply_transform(t, instance: Instance, profile: Profile) -> tuple:
    """
    The transformed ``(instance, profile)``.

    Splitting replaces the project in place by its parts, and every approver
    of the project approves all parts. Merging puts the new project at the
    position of the first merged one, and every approver of some merged
    project approves the new one.

    Raises
    ------
        InvalidTransform
            The transform breaks its own definition (a discount that does not
            lower the cost, a limit that does not rise, parts that do not add
            up, reused ids, an empty merge, a merged cost above the limit).
        WrongProfileVariant
            Splitting or merging a non-approval profile.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> inst2, prof2 = apply_transform(Split("p1", [("a", 3), ("b", 3)]), e1, prof)
    >>> inst2.projects, sorted(prof2[0].approved)
    (('a', 'b', 'p2', 'p3', 'p4', 'p5'), ['a', 'b'])
    >>> inst3, prof3 = apply_transform(Merge({"p3", "p4", "p5"}, "q"), e1, prof)
    >>> inst3.costs["q"], sorted(prof3[2].approved)
    (Fraction(3, 1), ['q'])
    """
    if isinstance(t, Discount):
        old = instance.cost(t.project)
        if not 0 < t.new_cost < old:
            raise InvalidTransform(f"a discount needs 0 < new cost < {old}, got {t.new_cost}")
        costs = dict(instance.costs)
        costs[t.project] = t.new_cost
        return Instance(instance.projects, costs, instance.budget_limit), profile
    if isinstance(t, LimitRaise):
        if not t.budget_limit > instance.budget_limit:
            raise InvalidTransform(f"the new limit {t.budget_limit} must exceed {instance.budget_limit}")
        return Instance(instance.projects, instance.costs, t.budget_limit), profile
    if isinstance(t, Split):
        _approval_transform(t, profile)
        instance.cost(t.project)
        if not t.parts:
            raise InvalidTransform("a split needs at least one part")
        ids = [q for q, _ in t.parts]
        if len(set(ids)) != len(ids) or set(ids) & set(instance.projects):
            raise InvalidTransform("part ids must be distinct and new")
        if any(c <= 0 for _, c in t.parts):
            raise InvalidTransform("part costs must be positive")
        if sum((c for _, c in t.parts), Fraction(0)) != instance.costs[t.project]:
            raise InvalidTransform(f"part costs must add up to the cost of {t.project}")
        items = []
        for p in instance.projects:
            items.extend(t.parts if p == t.project else [(p, instance.costs[p])])
        parts = t.part_ids
        ballots = [b.approved - {t.project} | parts if t.project in b.approved else b.approved for b in profile.ballots]
        return Instance.from_costs(items, instance.budget_limit), Profile.approval(ballots)
    if isinstance(t, Merge):
        _approval_transform(t, profile)
        merged = instance.check_projects(t.projects)
        if not merged:
            raise InvalidTransform("a merge needs at least one project")
        if t.new_id in set(instance.projects):
            raise InvalidTransform(f"merged id {t.new_id} is already in use")
        cost = instance.total_cost(merged)
        if cost > instance.budget_limit:
            raise InvalidTransform(f"merged cost {cost} exceeds the budget limit")
        items = []
        for p in instance.projects:
            if p not in merged:
                items.append((p, instance.costs[p]))
            elif (t.new_id, cost) not in items:
                items.append((t.new_id, cost))
        ballots = [b.approved - merged | {t.new_id} if b.approved & merged else b.approved for b in profile.ballots]
        return Instance.from_costs(items, instance.budget_limit), Profile.approval(ballots)
    raise InvalidTransform(f"unknown transform {t!r}")


def _approval_transform(t, profile: Profile) -> None:
    if profile.kind != APPROVAL:
        raise WrongProfileVariant(f"{t.kind} is defined for approval profiles, got {profile.kind}")


def carry_tiebreak(t, tiebreak: TieBreakOrder) -> TieBreakOrder:
    """
    The tie-break order on the transformed instance: split parts take the
    place of the split project in their given order, and a merged project
    takes the place of the best ranked merged one.
    """
    if isinstance(t, Split):
        order = []
        for p in tiebreak.order:
            order.extend([q for q, _ in t.parts] if p == t.project else [p])
        return TieBreakOrder(tuple(order))
    if isinstance(t, Merge):
        order = []
        for p in tiebreak.order:
            if p not in t.projects:
                order.append(p)
            elif t.new_id not in order:
                order.append(t.new_id)
        return TieBreakOrder(tuple(order))
    return tiebreak


def _rule_name(rule) -> str:
    return getattr(rule, "rule_id", None) or getattr(rule, "__name__", None) or repr(rule)


def check_monotonicity(rule, kind: str, instance: Instance, profile: Profile, transform, tiebreak=None) -> Verdict:
    """
    Check one monotonicity axiom on one ``(instance, transform)`` pair.

    * discount: if the discounted project is selected, it stays selected;
    * limit: every selected project stays selected under the larger limit;
    * splitting: if the split project is selected, some part is selected;
    * merging: if all merged projects are selected, the merged one is.

    The tie-break order (lexicographic on ``instance`` by default) is carried
    over to the transformed instance by :py:func:`carry_tiebreak`.

    Returns
    -------
        Verdict
            ``inapplicable`` when the premise does not hold on ``instance``,
            ``violated`` with both outcomes as witness when the conclusion fails.

    Examples
    --------
    >>> from pbengine.rules import get_rule
    >>> inst = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p1", "p2"], ["p3"]])
    >>> rule = get_rule("maxwel_card")
    >>> check_monotonicity(rule, "limit", inst, prof, LimitRaise(3)).status
    'satisfied'
    >>> check_monotonicity(rule, "discount", inst, prof, Discount("p3", Fraction(1, 2))).status
    'inapplicable'
    """
    if kind not in TRANSFORM_KINDS:
        raise ValueError(f"kind must be one of {TRANSFORM_KINDS}")
    if getattr(transform, "kind", None) != kind:
        raise InvalidTransform(f"a {kind} check needs a {kind} transform, got {transform!r}")
    axiom = f"{kind}-monotonic"
    params = {"rule": _rule_name(rule), "transform": transform.describe()}
    inst2, prof2 = apply_transform(transform, instance, profile)
    order = resolve_tiebreak(instance, tiebreak)
    before = rule(instance, profile, order).selected
    if isinstance(transform, (Discount, Split)) and transform.project not in before:
        return Verdict(axiom, INAPPLICABLE, None, params, note=f"{transform.project} is not selected before the transform")
    if isinstance(transform, Merge) and not transform.projects <= before:
        return Verdict(axiom, INAPPLICABLE, None, params, note="not every merged project is selected before the transform")
    after = rule(inst2, prof2, carry_tiebreak(transform, order)).selected
    if isinstance(transform, Discount):
        ok = transform.project in after
    elif isinstance(transform, LimitRaise):
        ok = before <= after
    elif isinstance(transform, Split):
        ok = bool(after & transform.part_ids)
    else:
        ok = transform.new_id in after
    if ok:
        return Verdict(axiom, SATISFIED, None, params)
    return Verdict(axiom, VIOLATED, OutcomePairWitness(before, after, transform.describe()), params)


# Strategy-proofness --------------------------------------------------------


@dataclass(frozen=True)
class Manipulation:
    """
    A profitable misreport.

    Attributes
    ----------
        voter : int
        ballot : ApprovalBallot or CardinalBallot
            The reported ballot.
        before, after : BudgetAllocation
            Outcomes under the truthful and the reported ballot.
        truthful_value, manipulated_value : Fraction
            The voter's true valuation of both outcomes (comparison scale).
        approximate : bool
            Whether the gain also beats every single-project extension of the
            truthful outcome.
    """

    voter: int
    ballot: object
    before: BudgetAllocation
    after: BudgetAllocation
    truthful_value: Fraction
    manipulated_value: Fraction
    approximate: bool

    def to_json(self, voter_ids=None) -> dict:
        from pbengine.verdict import _jsonable

        if isinstance(self.ballot, ApprovalBallot):
            ballot = sorted(self.ballot.approved)
        else:
            ballot = _jsonable(dict(self.ballot.scores))
        return {
            "voter": voter_ids[self.voter] if voter_ids is not None else self.voter,
            "ballot": ballot,
            "before": sorted(self.before.selected),
            "after": sorted(self.after.selected),
            "truthful_value": _jsonable(self.truthful_value),
            "manipulated_value": _jsonable(self.manipulated_value),
            "mode": "approx" if self.approximate else "exact",
        }


def _valuation(instance: Instance, profile: Profile, voter: int, sat: SatisfactionFunction | None):
    """``(value of a project set, the voter's valued projects)`` under the truthful ballot."""
    ballot = profile.ballots[voter]
    if profile.kind == APPROVAL:
        if sat is None:
            raise MissingSatisfaction("manipulation on approval ballots needs a satisfaction function")
        if sat.kind == "share" and sat.context is None:
            sat = sat.with_context(profile)
        approved = ballot.approved

        def value(projects):
            return sat.value(frozenset(projects) & approved, instance)

        return value, approved
    if profile.kind != CARDINAL:
        raise WrongProfileVariant(f"manipulation search needs approval or cardinal ballots, got {profile.kind}")
    if sat is not None:
        raise WrongProfileVariant("cardinal ballots are their own valuation; drop the satisfaction function")

    def value(projects):
        return sum((ballot.score(p) for p in projects), Fraction(0))

    return value, ballot.referenced()


def candidate_ballots(instance: Instance, profile: Profile, voter: int, caps: Caps | None = None):
    """
    Misreports of ``voter`` in search order.

    Approval ballots: every other approval set, by Hamming distance to the
    truthful one, then lexicographically by the flipped projects.

    Cardinal ballots: every score vector over the values ``{0, max score}``
    and the voter's own scores (which covers all permutations of the
    truthful scores and all substitutions of 0 or the maximum), by the number
    of changed projects, then lexicographically.

    Raises
    ------
        CapExceeded
            The space is larger than ``caps.max_ballots``.
    """
    caps = resolve(caps)
    m = instance.m
    projects = instance.projects
    ballot = profile.ballots[voter]
    if profile.kind == APPROVAL:
        if (1 << m) > caps.max_ballots:
            raise CapExceeded(f"manipulation search: 2^{m} ballots exceed cap max_ballots = {caps.max_ballots}")
        for flip in lattice(m).iter_nonempty():
            flipped = {projects[j] for j in members(flip)}
            yield ApprovalBallot(ballot.approved ^ flipped)
        return
    truth = [ballot.score(p) for p in projects]
    grid = sorted({Fraction(0), max(truth, default=Fraction(0))} | set(truth))
    if len(grid) ** m > caps.max_ballots:
        raise CapExceeded(f"manipulation search: {len(grid)}^{m} ballots exceed cap max_ballots = {caps.max_ballots}")
    for change in lattice(m).iter_nonempty():
        pos = members(change)
        options = [[v for v in grid if v != truth[j]] for j in pos]
        for values in product(*options):
            scores = list(truth)
            for j, v in zip(pos, values):
                scores[j] = v
            yield CardinalBallot({p: s for p, s in zip(projects, scores)})


def _replace(profile: Profile, voter: int, ballot) -> Profile:
    ballots = list(profile.ballots)
    ballots[voter] = ballot
    return Profile(tuple(ballots))


def find_manipulation(
    rule,
    instance: Instance,
    profile: Profile,
    voter: int,
    sat: SatisfactionFunction | None = None,
    approximate: bool = False,
    tiebreak=None,
    caps: Caps | None = None,
) -> Manipulation | None:
    """
    First misreport (in :py:func:`candidate_ballots` order) that strictly
    improves ``voter``'s truthful valuation of the outcome.

    The voter's ballot in ``profile`` is the truth: approvals valued with
    ``sat``, or cardinal scores valued additively. In approximate mode the
    new outcome must also beat the truthful outcome extended by any single
    valued project.

    Returns
    -------
        Manipulation or None
            None certifies only that the searched space holds no manipulation.

    Examples
    --------
    >>> from pbengine.rules import get_rule
    >>> from pbengine.satisfaction import CARD
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> man = find_manipulation(get_rule("maxwel_cost"), e1, prof, 2, CARD, approximate=True)
    >>> sorted(man.ballot.approved), sorted(man.after.selected)
    (['p2', 'p3', 'p4', 'p5'], ['p2', 'p3', 'p4', 'p5'])
    """
    if not 0 <= voter < profile.n:
        raise IndexError(f"voter {voter} out of range")
    value, valued = _valuation(instance, profile, voter, sat)
    order = resolve_tiebreak(instance, tiebreak)
    before = rule(instance, profile, order)
    base = value(before.selected)
    extended = [value(before.selected | {p}) for p in instance.projects if p in valued and p not in before.selected]
    bar = max([base] + extended) if approximate else base
    for ballot in candidate_ballots(instance, profile, voter, caps):
        after = rule(instance, _replace(profile, voter, ballot), order)
        got = value(after.selected)
        if got > bar:
            return Manipulation(voter, ballot, before, after, base, got, approximate)
    return None


# Weak proportionality ------------------------------------------------------


def is_party_list(profile: Profile) -> bool:
    """
    Whether any two voters support the same projects or disjoint ones.

    Examples
    --------
    >>> is_party_list(Profile.approval([["a", "b"], ["a", "b"], ["c"]]))
    True
    >>> is_party_list(Profile.approval([["a", "b"], ["b"]]))
    False
    """
    supports = list({b.referenced() for b in profile.ballots})
    return all(not (s & t) for k, s in enumerate(supports) for t in supports[k + 1 :])


def check_weak_proportionality(rule, instance: Instance, profile: Profile, tiebreak=None) -> Verdict:
    """
    On a unit-cost instance with a party-list profile, every project with at
    least ``n / b`` supporters must be selected.

    Returns an ``inapplicable`` verdict outside that domain.

    Examples
    --------
    >>> from pbengine.rules import get_rule
    >>> prof = Profile.approval([["p1"], ["p1"], ["p2"]])
    >>> check_weak_proportionality(get_rule("phragmen"), Instance.unit_cost(2, 2), prof).status
    'satisfied'
    """
    axiom = "weak-proportionality"
    params = {"rule": _rule_name(rule)}
    if profile.kind not in (APPROVAL, CARDINAL):
        raise WrongProfileVariant(f"weak proportionality needs approval or cardinal ballots, got {profile.kind}")
    if not instance.is_unit_cost():
        return Verdict(axiom, INAPPLICABLE, None, params, note="the instance is not unit-cost")
    if not is_party_list(profile):
        return Verdict(axiom, INAPPLICABLE, None, params, note="the profile is not a party-list profile")
    chosen = rule(instance, profile, resolve_tiebreak(instance, tiebreak)).selected
    b = instance.budget_limit
    for p in instance.projects:
        supp = profile.supporters(p)
        if len(supp) * b >= profile.n and p not in chosen:
            return Verdict(axiom, VIOLATED, CohesiveWitness(frozenset(supp), frozenset({p}), project=p), params)
    return Verdict(axiom, SATISFIED, None, params)


def impossibility_probe(rule, cases, sat: SatisfactionFunction | None = None, tiebreak=None, caps: Caps | None = None) -> dict:
    """
    Run the weak-proportionality check and the exact manipulation search on
    every ``(instance, profile)`` of ``cases``.

    No rule is both weakly proportional and strategy-proof, so a rule that
    passes both on every case is flagged ``needs_review``: the sample was too
    small to show either failure, and neither property may be claimed.
    """
    weak_fail = 0
    manipulable = 0
    for instance, profile in cases:
        if check_weak_proportionality(rule, instance, profile, tiebreak).violated:
            weak_fail += 1
        s = sat if profile.kind == APPROVAL else None
        if any(find_manipulation(rule, instance, profile, i, s, False, tiebreak, caps) for i in range(profile.n)):
            manipulable += 1
    return {
        "cases": len(cases),
        "weak_proportionality_violations": weak_fail,
        "manipulable_cases": manipulable,
        "needs_review": weak_fail == 0 and manipulable == 0,
    }
