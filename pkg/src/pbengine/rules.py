"""
Registry of resolute rules by stable identifier.

Every registered rule is exposed as a callable ``rule(instance, profile,
tiebreak)`` returning a :py:class:`~pbengine.model.BudgetAllocation`, so that
completion methods, monotonicity checks and manipulation searches can treat
all rules alike.
"""

from __future__ import annotations

from dataclasses import dataclass

from pbengine.caps import Caps
from pbengine.errors import IncompatibleProfile, MissingSatisfaction, ScaleOverflow
from pbengine.market import maximin_support, mes, seq_phragmen
from pbengine.model import APPROVAL, BudgetAllocation, Instance, Profile, TieBreakOrder
from pbengine.satisfaction import CARD, COST, SatisfactionFunction
from pbengine.welfare import WelfareObjective, greedy_welfare, maximize_welfare

RULE_IDS = (
    "maxwel_card",
    "maxwel_cost",
    "maxwel_util",
    "maxwel_cc",
    "maxwel_egal",
    "maxwel_nash",
    "greedy_card",
    "greedy_cost",
    "phragmen",
    "maximin_support",
    "mes",
)


def _maximize(instance, profile, objective, tiebreak, caps):
    try:
        return maximize_welfare(instance, profile, objective, tiebreak, caps)
    except ScaleOverflow:
        return maximize_welfare(instance, profile, objective, tiebreak, caps, method="search")


def _approval_only(rule_id, profile):
    if profile.kind != APPROVAL:
        raise IncompatibleProfile(f"{rule_id} is defined for approval ballots, got {profile.kind}")


def _sat_for(rule_id, profile, sat):
    """The satisfaction function to use, or None for score-based profiles."""
    if profile.kind == APPROVAL:
        if sat is None:
            raise MissingSatisfaction(f"{rule_id} on approval ballots needs a satisfaction function (--sat)")
        return sat
    if sat is not None:
        raise IncompatibleProfile(f"{rule_id} uses the ballot scores of {profile.kind} profiles; drop --sat")
    return None


@dataclass(frozen=True)
class Rule:
    """
    A registered rule bound to its parameters.

    Attributes
    ----------
        rule_id : str
        sat : SatisfactionFunction, optional
        caps : Caps, optional
    """

    rule_id: str
    sat: SatisfactionFunction | None = None
    caps: Caps | None = None

    def __post_init__(self):
        if self.rule_id not in RULE_IDS:
            raise KeyError(f"unknown rule {self.rule_id!r}; known: {', '.join(RULE_IDS)}")

    def __call__(self, instance: Instance, profile: Profile, tiebreak: TieBreakOrder | None = None) -> BudgetAllocation:
        return self.run(instance, profile, tiebreak)[0]

    def run(self, instance: Instance, profile: Profile, tiebreak: TieBreakOrder | None = None) -> tuple:
        """
        Run the rule.

        Returns
        -------
            tuple
                ``(BudgetAllocation, extra)`` where ``extra`` is the rule's
                certificate (loads, load distribution, price system) or None.
        """
        rid, sat, caps = self.rule_id, self.sat, self.caps
        if rid in ("maxwel_card", "maxwel_cost"):
            _approval_only(rid, profile)
            if sat is not None:
                raise IncompatibleProfile(f"{rid} fixes its satisfaction function; use maxwel_util with --sat")
            obj = WelfareObjective.util(CARD if rid == "maxwel_card" else COST)
            return _maximize(instance, profile, obj, tiebreak, caps), None
        if rid in ("maxwel_util", "maxwel_egal", "maxwel_nash"):
            obj = WelfareObjective(rid.split("_")[1], _sat_for(rid, profile, sat))
            return _maximize(instance, profile, obj, tiebreak, caps), None
        if rid == "maxwel_cc":
            return _maximize(instance, profile, WelfareObjective.cc(), tiebreak, caps), None
        if rid in ("greedy_card", "greedy_cost"):
            key = "score_per_cost" if rid == "greedy_card" else "score"
            return greedy_welfare(instance, profile, key, tiebreak), None
        if rid in ("phragmen", "maximin_support"):
            _approval_only(rid, profile)
            fn = seq_phragmen if rid == "phragmen" else maximin_support
            return fn(instance, profile, tiebreak)
        return mes(instance, profile, _sat_for(rid, profile, sat), tiebreak)


def get_rule(rule_id: str, sat: SatisfactionFunction | None = None, caps: Caps | None = None) -> Rule:
    """
    Look up a rule by identifier.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    >>> sorted(get_rule("maxwel_cost")(e1, prof).selected)
    ['p1']
    >>> sorted(get_rule("greedy_card")(e1, prof).selected)
    ['p2', 'p3', 'p4', 'p5']
    """
    return Rule(rule_id, sat, caps)
