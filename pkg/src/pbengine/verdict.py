"""
Verdicts of axiom checkers and the witnesses they carry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

from pbengine.rational import format_fraction

SATISFIED = "satisfied"
VIOLATED = "violated"
INAPPLICABLE = "inapplicable"


def _jsonable(value, voter_ids=None, key=None):
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return voter_ids[value] if voter_ids is not None and key == "voter" else value
    if isinstance(value, (frozenset, set)):
        items = sorted(value, key=lambda x: (str(type(x)), x))
        if key == "group" and voter_ids is not None:
            return [voter_ids[i] for i in items]
        return [_jsonable(v) for v in items]
    if isinstance(value, (tuple, list)):
        return [_jsonable(v, voter_ids, key) for v in value]
    if hasattr(value, "items"):
        return {str(k): _jsonable(v, voter_ids, k) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if hasattr(value, "to_json"):
        return value.to_json(voter_ids)
    return str(value)


@dataclass(frozen=True)
class CohesiveWitness:
    """
    A group of voters and a bundle of projects witnessing a violation.

    Attributes
    ----------
        group : frozenset of int
            Voter indices (zero-based).
        bundle : frozenset of str
            The projects the group could claim.
        alpha : Mapping, optional
            Cardinal case: the pointwise minimum score of the group on ``bundle``.
        beta : Fraction, optional
            Full justified representation: the satisfaction every member gets from ``bundle``.
        ell : Fraction, optional
            Budget amount the group controls (budget-based axioms).
        project : str, optional
            The extra project of a relaxed or inclusion condition, when one is singled out.
    """

    group: frozenset
    bundle: frozenset
    alpha: object = None
    beta: Fraction | None = None
    ell: Fraction | None = None
    project: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "group", frozenset(self.group))
        object.__setattr__(self, "bundle", frozenset(self.bundle))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", MappingProxyType(dict(self.alpha)))

    def __hash__(self):
        return hash((self.group, self.bundle, self.beta, self.ell, self.project))

    def to_json(self, voter_ids=None) -> dict:
        out = {"kind": "cohesive", "group": _jsonable(self.group, voter_ids, "group"), "bundle": sorted(self.bundle)}
        for name in ("alpha", "beta", "ell", "project"):
            v = getattr(self, name)
            if v is not None:
                out[name] = _jsonable(v)
        return out


@dataclass(frozen=True)
class VoterWitness:
    """A single voter who receives less than some threshold."""

    voter: int
    received: Fraction
    required: Fraction

    def to_json(self, voter_ids=None) -> dict:
        return {
            "kind": "voter",
            "voter": voter_ids[self.voter] if voter_ids is not None else self.voter,
            "received": format_fraction(self.received),
            "required": format_fraction(self.required),
        }


@dataclass(frozen=True)
class AllocationWitness:
    """A feasible allocation that beats the judged one (e.g. on total cost)."""

    selected: frozenset
    reason: str

    def to_json(self, voter_ids=None) -> dict:
        return {"kind": "allocation", "selected": sorted(self.selected), "reason": self.reason}


@dataclass(frozen=True)
class OutcomePairWitness:
    """Outcomes of a rule before and after an instance transform."""

    before: frozenset
    after: frozenset
    transform: str

    def to_json(self, voter_ids=None) -> dict:
        return {"kind": "outcomes", "before": sorted(self.before), "after": sorted(self.after), "transform": self.transform}


@dataclass(frozen=True)
class Verdict:
    """
    Result of an axiom checker.

    Attributes
    ----------
        axiom : str
        status : str
            ``satisfied``, ``violated`` or ``inapplicable``.
        witness : object, optional
            Present whenever the status is ``violated``, except for
            priceability, whose violation is the infeasibility of a linear
            system and carries no finite witness.
        params : Mapping
            Satisfaction function, approximation factor, relative-budget flag.
        certificate : object, optional
            Positive certificate, e.g. the price system of a priceable allocation.
        note : str
    """

    axiom: str
    status: str
    witness: object = None
    params: object = field(default_factory=dict)
    certificate: object = None
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def satisfied(self) -> bool:
        return self.status == SATISFIED

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED

    def __bool__(self):
        return self.satisfied

    def to_json(self, voter_ids=None) -> dict:
        out = {"axiom": self.axiom, "status": self.status, "params": _jsonable(dict(self.params))}
        if self.witness is not None:
            out["witness"] = self.witness.to_json(voter_ids)
        if self.certificate is not None and hasattr(self.certificate, "to_json"):
            out["certificate"] = self.certificate.to_json(voter_ids)
        if self.note:
            out["note"] = self.note
        return out
