"""
Core domain types: instances, ballots, profiles, allocations and tie-breaking.

Every number is an exact :py:class:`fractions.Fraction`. All types are
immutable after construction.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType

from pbengine.errors import (
    FormatMismatch,
    InconsistentInputs,
    InfeasibleAllocation,
    InvalidBallot,
    InvalidInstance,
    UnknownProject,
    WrongProfileVariant,
)
from pbengine.rational import to_fraction

ProjectId = str

APPROVAL = "approval"
CARDINAL = "cardinal"
ORDINAL = "ordinal"
WEAK_ORDINAL = "weak_ordinal"
CUMULATIVE = "cumulative"


def _frozen_map(items) -> Mapping:
    return MappingProxyType(dict(items))


@dataclass(frozen=True, eq=False)
class Instance:
    """
    A participatory budgeting instance: projects with costs and a budget limit.

    Parameters
    ----------
        projects : Iterable[str]
            Project ids in their canonical order.
        costs : Mapping[str, Fraction]
            Positive cost of every project.
        budget_limit : Fraction
            Positive budget limit; no single project may cost more.

    Examples
    --------
    >>> inst = Instance.from_costs({"p1": 6, "p2": 3}, 6)
    >>> inst.m, inst.total_cost(["p1"])
    (2, Fraction(6, 1))
    """

    projects: tuple[ProjectId, ...]
    costs: Mapping[ProjectId, Fraction]
    budget_limit: Fraction

    def __post_init__(self):
        projects = tuple(self.projects)
        if len(set(projects)) != len(projects):
            raise InvalidInstance("project ids must be unique")
        for p in projects:
            if not isinstance(p, str):
                raise InvalidInstance(f"project id {p!r} is not a string")
        costs = dict(self.costs)
        if set(costs) != set(projects):
            raise InvalidInstance("costs must be given for exactly the listed projects")
        budget = to_fraction(self.budget_limit)
        if budget <= 0:
            raise InvalidInstance("budget limit must be positive")
        for p in projects:
            c = to_fraction(costs[p])
            if c <= 0:
                raise InvalidInstance(f"cost of {p} must be positive")
            if c > budget:
                raise InvalidInstance(f"cost of {p} exceeds the budget limit")
            costs[p] = c
        object.__setattr__(self, "projects", projects)
        object.__setattr__(self, "costs", _frozen_map((p, costs[p]) for p in projects))
        object.__setattr__(self, "budget_limit", budget)

    @classmethod
    def from_costs(cls, costs, budget_limit) -> "Instance":
        """
        Build an instance from an ordered mapping or a sequence of ``(id, cost)`` pairs.
        """
        items = list(costs.items()) if isinstance(costs, Mapping) else list(costs)
        return cls(tuple(p for p, _ in items), dict(items), budget_limit)

    @classmethod
    def unit_cost(cls, m: int, budget_limit: int, prefix: str = "p") -> "Instance":
        """Unit-cost instance with ids ``p1 .. pm``."""
        return cls.from_costs({f"{prefix}{j + 1}": 1 for j in range(m)}, budget_limit)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.projects == other.projects
            and dict(self.costs) == dict(other.costs)
            and self.budget_limit == other.budget_limit
        )

    def __hash__(self):
        return hash((self.projects, tuple(self.costs.values()), self.budget_limit))

    def __repr__(self):
        costs = ", ".join(f"{p}: {c}" for p, c in self.costs.items())
        return f"Instance({{{costs}}}, b={self.budget_limit})"

    @property
    def m(self) -> int:
        return len(self.projects)

    def cost(self, p: ProjectId) -> Fraction:
        try:
            return self.costs[p]
        except KeyError:
            raise UnknownProject(p) from None

    def total_cost(self, projects: Iterable[ProjectId]) -> Fraction:
        return sum((self.cost(p) for p in projects), Fraction(0))

    @cached_property
    def index(self) -> Mapping[ProjectId, int]:
        """Position of every project in :py:attr:`projects`."""
        return MappingProxyType({p: j for j, p in enumerate(self.projects)})

    def is_unit_cost(self) -> bool:
        """True iff every cost is 1 and the budget limit is an integer."""
        return self.budget_limit.denominator == 1 and all(c == 1 for c in self.costs.values())

    def check_projects(self, projects: Iterable[ProjectId]) -> frozenset:
        """Return ``projects`` as a frozenset, raising for unknown ids."""
        ps = frozenset(projects)
        unknown = ps - set(self.costs)
        if unknown:
            raise UnknownProject(", ".join(sorted(unknown)))
        return ps

    def with_budget(self, budget_limit) -> "Instance":
        """Copy with another budget limit; projects that no longer fit are dropped."""
        b = to_fraction(budget_limit)
        kept = [(p, c) for p, c in self.costs.items() if c <= b]
        return Instance.from_costs(kept, b)

    def restricted(self, projects: Iterable[ProjectId], budget_limit=None) -> "Instance":
        """Sub-instance on ``projects`` (canonical order kept)."""
        keep = self.check_projects(projects)
        b = self.budget_limit if budget_limit is None else to_fraction(budget_limit)
        return Instance.from_costs([(p, self.costs[p]) for p in self.projects if p in keep], b)


# Ballots -------------------------------------------------------------------


@dataclass(frozen=True)
class ApprovalBallot:
    """
    Approval ballot: the set of approved projects.

    Examples
    --------
    >>> ApprovalBallot({"p1", "p2"}).approves("p1")
    True
    """

    approved: frozenset

    kind = APPROVAL

    def __post_init__(self):
        object.__setattr__(self, "approved", frozenset(self.approved))

    def approves(self, p: ProjectId) -> bool:
        return p in self.approved

    def score(self, p: ProjectId) -> Fraction:
        return Fraction(1) if p in self.approved else Fraction(0)

    def referenced(self) -> frozenset:
        return self.approved


@dataclass(frozen=True, eq=False)
class CardinalBallot:
    """
    Cardinal ballot: a nonnegative score per project (missing projects score 0).

    Zero scores are not stored, so two ballots that differ only in explicit
    zeros compare equal.
    """

    scores: Mapping[ProjectId, Fraction]

    kind = CARDINAL

    def __post_init__(self):
        clean = {}
        for p, s in dict(self.scores).items():
            s = to_fraction(s)
            if s < 0:
                raise InvalidBallot(f"negative score for {p}")
            if s != 0:
                clean[p] = s
        object.__setattr__(self, "scores", _frozen_map(sorted(clean.items())))

    def __eq__(self, other):
        if not isinstance(other, CardinalBallot):
            return NotImplemented
        return dict(self.scores) == dict(other.scores)

    def __hash__(self):
        return hash(tuple(self.scores.items()))

    def __repr__(self):
        return f"CardinalBallot({dict(self.scores)!r})"

    def score(self, p: ProjectId) -> Fraction:
        return self.scores.get(p, Fraction(0))

    def approves(self, p: ProjectId) -> bool:
        return p in self.scores

    def referenced(self) -> frozenset:
        return frozenset(self.scores)


@dataclass(frozen=True)
class OrdinalBallot:
    """
    Strict ordinal ballot, most preferred first. Unlisted projects are ranked
    below every listed one and are mutually indifferent.
    """

    ranking: tuple

    kind = ORDINAL

    def __post_init__(self):
        ranking = tuple(self.ranking)
        if len(set(ranking)) != len(ranking):
            raise InvalidBallot("ordinal ranking lists a project twice")
        object.__setattr__(self, "ranking", ranking)

    def referenced(self) -> frozenset:
        return frozenset(self.ranking)

    def as_weak(self) -> "WeakOrdinalBallot":
        return WeakOrdinalBallot(tuple(frozenset([p]) for p in self.ranking))


@dataclass(frozen=True)
class WeakOrdinalBallot:
    """
    Weak ordinal ballot: a list of indifference classes, best first.

    Projects not in any class form an implicit last class.
    """

    classes: tuple

    kind = WEAK_ORDINAL

    def __post_init__(self):
        classes = tuple(frozenset(c) for c in self.classes)
        seen = set()
        for c in classes:
            if not c:
                raise InvalidBallot("indifference classes must be nonempty")
            if seen & c:
                raise InvalidBallot("indifference classes must be disjoint")
            seen |= c
        object.__setattr__(self, "classes", classes)

    def referenced(self) -> frozenset:
        return frozenset().union(*self.classes) if self.classes else frozenset()

    def as_weak(self) -> "WeakOrdinalBallot":
        return self


@dataclass(frozen=True, eq=False)
class CumulativeBallot:
    """
    Cumulative ballot: nonnegative weights summing to at most one.
    """

    weights: Mapping[ProjectId, Fraction]

    kind = CUMULATIVE

    def __post_init__(self):
        clean = {}
        for p, w in dict(self.weights).items():
            w = to_fraction(w)
            if w < 0:
                raise InvalidBallot(f"negative weight for {p}")
            if w != 0:
                clean[p] = w
        if sum(clean.values(), Fraction(0)) > 1:
            raise InvalidBallot("cumulative weights sum to more than 1")
        object.__setattr__(self, "weights", _frozen_map(sorted(clean.items())))

    def __eq__(self, other):
        if not isinstance(other, CumulativeBallot):
            return NotImplemented
        return dict(self.weights) == dict(other.weights)

    def __hash__(self):
        return hash(tuple(self.weights.items()))

    def __repr__(self):
        return f"CumulativeBallot({dict(self.weights)!r})"

    def score(self, p: ProjectId) -> Fraction:
        return self.weights.get(p, Fraction(0))

    def approves(self, p: ProjectId) -> bool:
        return p in self.weights

    def referenced(self) -> frozenset:
        return frozenset(self.weights)


Ballot = ApprovalBallot | CardinalBallot | OrdinalBallot | WeakOrdinalBallot | CumulativeBallot


@dataclass(frozen=True)
class Profile:
    """
    A nonempty, homogeneous list of ballots. Voters are identified by their
    zero-based position.

    Examples
    --------
    >>> prof = Profile.approval([["p1"], ["p1", "p2"]])
    >>> prof.n, prof.kind, prof.supporters("p1")
    (2, 'approval', (0, 1))
    """

    ballots: tuple

    def __post_init__(self):
        ballots = tuple(self.ballots)
        if not ballots:
            raise InconsistentInputs("a profile needs at least one ballot")
        kinds = {type(b) for b in ballots}
        if len(kinds) != 1:
            raise InconsistentInputs("all ballots of a profile must have the same variant")
        object.__setattr__(self, "ballots", ballots)

    @classmethod
    def approval(cls, sets) -> "Profile":
        return cls(tuple(ApprovalBallot(frozenset(s)) for s in sets))

    @classmethod
    def cardinal(cls, score_maps) -> "Profile":
        return cls(tuple(CardinalBallot(s) for s in score_maps))

    @classmethod
    def ordinal(cls, rankings) -> "Profile":
        return cls(tuple(OrdinalBallot(tuple(r)) for r in rankings))

    @classmethod
    def weak_ordinal(cls, class_lists) -> "Profile":
        return cls(tuple(WeakOrdinalBallot(tuple(c)) for c in class_lists))

    @classmethod
    def cumulative(cls, weight_maps) -> "Profile":
        return cls(tuple(CumulativeBallot(w) for w in weight_maps))

    @property
    def n(self) -> int:
        return len(self.ballots)

    @property
    def kind(self) -> str:
        return self.ballots[0].kind

    def __len__(self):
        return len(self.ballots)

    def __iter__(self) -> Iterator:
        return iter(self.ballots)

    def __getitem__(self, i):
        return self.ballots[i]

    def require(self, *kinds: str) -> None:
        """Raise :py:class:`WrongProfileVariant` unless the profile has one of ``kinds``."""
        if self.kind not in kinds:
            raise WrongProfileVariant(f"expected a {' or '.join(kinds)} profile, got {self.kind}")

    def validate(self, instance: Instance) -> None:
        """Check that every ballot only references projects of ``instance``."""
        known = set(instance.projects)
        for i, b in enumerate(self.ballots):
            unknown = b.referenced() - known
            if unknown:
                raise UnknownProject(f"voter {i} references {', '.join(sorted(unknown))}")

    @cached_property
    def _supporters(self) -> Mapping:
        out: dict = {}
        for i, b in enumerate(self.ballots):
            if b.kind in (ORDINAL, WEAK_ORDINAL):
                return MappingProxyType({})
            for p in b.referenced():
                out.setdefault(p, []).append(i)
        return MappingProxyType({p: tuple(v) for p, v in out.items()})

    def supporters(self, p: ProjectId) -> tuple:
        """
        Voters that approve ``p`` (approval) or give it a positive score
        (cardinal, cumulative).
        """
        if self.kind in (ORDINAL, WEAK_ORDINAL):
            raise WrongProfileVariant("supporters are undefined for ordinal ballots")
        return self._supporters.get(p, ())

    def score(self, i: int, p: ProjectId) -> Fraction:
        """Score ``A_i(p)``: 0/1 for approvals, the raw value otherwise."""
        return self.ballots[i].score(p)

    def restricted(self, projects: Iterable[ProjectId]) -> "Profile":
        """Drop every reference to projects outside ``projects``."""
        keep = set(projects)
        out = []
        for b in self.ballots:
            if b.kind == APPROVAL:
                out.append(ApprovalBallot(b.approved & keep))
            elif b.kind == CARDINAL:
                out.append(CardinalBallot({p: s for p, s in b.scores.items() if p in keep}))
            elif b.kind == CUMULATIVE:
                out.append(CumulativeBallot({p: w for p, w in b.weights.items() if p in keep}))
            elif b.kind == ORDINAL:
                out.append(OrdinalBallot(tuple(p for p in b.ranking if p in keep)))
            else:
                classes = tuple(c & keep for c in b.classes)
                out.append(WeakOrdinalBallot(tuple(c for c in classes if c)))
        return Profile(tuple(out))

    def as_cardinal(self) -> "Profile":
        """Approval or cumulative profile viewed as a cardinal one (scores 0/1 or weights)."""
        if self.kind == CARDINAL:
            return self
        if self.kind == APPROVAL:
            return Profile(tuple(CardinalBallot({p: 1 for p in b.approved}) for b in self.ballots))
        if self.kind == CUMULATIVE:
            return Profile(tuple(CardinalBallot(b.weights) for b in self.ballots))
        raise WrongProfileVariant("ordinal profiles need a scoring vector to become cardinal")


@dataclass(frozen=True)
class BudgetAllocation:
    """
    A feasible set of selected projects.

    Use :py:meth:`of` to build one from an instance; it checks feasibility.

    Examples
    --------
    >>> inst = Instance.from_costs({"p1": 6, "p2": 3}, 6)
    >>> BudgetAllocation.of(inst, ["p2"]).total_cost
    Fraction(3, 1)
    """

    selected: frozenset
    total_cost: Fraction = field(compare=False)

    @classmethod
    def of(cls, instance: Instance, projects: Iterable[ProjectId]) -> "BudgetAllocation":
        ps = instance.check_projects(projects)
        total = instance.total_cost(ps)
        if total > instance.budget_limit:
            raise InfeasibleAllocation(f"cost {total} exceeds budget limit {instance.budget_limit}")
        return cls(ps, total)

    @classmethod
    def empty(cls) -> "BudgetAllocation":
        return cls(frozenset(), Fraction(0))

    def __contains__(self, p) -> bool:
        return p in self.selected

    def __iter__(self):
        return iter(self.selected)

    def __len__(self):
        return len(self.selected)

    def ordered(self, instance: Instance) -> list:
        """Selected ids in the instance's canonical order."""
        return [p for p in instance.projects if p in self.selected]

    def leftover(self, instance: Instance) -> Fraction:
        return instance.budget_limit - self.total_cost


def as_allocation(instance: Instance, allocation) -> BudgetAllocation:
    """Accept a :py:class:`BudgetAllocation` or any iterable of project ids."""
    if isinstance(allocation, BudgetAllocation):
        instance.check_projects(allocation.selected)
        return allocation
    return BudgetAllocation.of(instance, allocation)


@dataclass(frozen=True)
class TieBreakOrder:
    """
    Strict total order over the projects of an instance; earlier wins ties.

    Examples
    --------
    >>> inst = Instance.from_costs({"b": 1, "a": 1}, 1)
    >>> TieBreakOrder.lexicographic(inst).order
    ('a', 'b')
    >>> TieBreakOrder.file_order(inst).order
    ('b', 'a')
    """

    order: tuple

    def __post_init__(self):
        order = tuple(self.order)
        if len(set(order)) != len(order):
            raise InvalidInstance("tie-break order lists a project twice")
        object.__setattr__(self, "order", order)

    @classmethod
    def lexicographic(cls, instance: Instance) -> "TieBreakOrder":
        return cls(tuple(sorted(instance.projects)))

    @classmethod
    def file_order(cls, instance: Instance) -> "TieBreakOrder":
        return cls(instance.projects)

    @classmethod
    def explicit(cls, instance: Instance, order) -> "TieBreakOrder":
        t = cls(tuple(order))
        t.check(instance)
        return t

    @cached_property
    def rank(self) -> Mapping[ProjectId, int]:
        return MappingProxyType({p: r for r, p in enumerate(self.order)})

    def check(self, instance: Instance) -> None:
        if set(self.order) != set(instance.projects) or len(self.order) != instance.m:
            raise InvalidInstance("tie-break order must cover exactly the instance's projects")

    def sort(self, projects: Iterable[ProjectId]) -> list:
        return sorted(projects, key=self.rank.__getitem__)

    def first(self, projects: Iterable[ProjectId]) -> ProjectId:
        return min(projects, key=self.rank.__getitem__)


def resolve_tiebreak(instance: Instance, tiebreak: TieBreakOrder | None) -> TieBreakOrder:
    """The given order (checked against ``instance``) or the lexicographic default."""
    if tiebreak is None:
        return TieBreakOrder.lexicographic(instance)
    tiebreak.check(instance)
    return tiebreak


# Feasibility ---------------------------------------------------------------


def is_feasible(instance: Instance, projects: Iterable[ProjectId]) -> bool:
    """
    Whether the projects fit within the budget limit.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> is_feasible(e1, {"p2", "p3", "p4", "p5"}), is_feasible(e1, {"p1", "p2"})
    (True, False)
    """
    ps = instance.check_projects(projects)
    return instance.total_cost(ps) <= instance.budget_limit


def is_exhaustive(instance: Instance, allocation) -> bool:
    """
    Whether no unselected project still fits in the leftover budget.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> is_exhaustive(e1, {"p1"}), is_exhaustive(e1, {"p2", "p3", "p4"})
    (True, False)
    """
    alloc = as_allocation(instance, allocation)
    left = instance.budget_limit - alloc.total_cost
    return all(instance.costs[p] > left for p in instance.projects if p not in alloc.selected)


BALLOT_FORMATS = ("plain", "t_approval", "t_threshold", "knapsack", "cumulative")


def validate_ballot_format(ballot, instance: Instance, format: str = "plain", t: int | None = None) -> bool:
    """
    Check a ballot against the syntactic constraint of a ballot format.

    Parameters
    ----------
        ballot : Ballot
            The ballot to check.
        instance : Instance
            The instance it is cast for.
        format : str
            One of ``plain``, ``t_approval``, ``t_threshold``, ``knapsack``, ``cumulative``.
        t : int, optional
            The bound of ``t_approval`` ballots.

    Returns
    -------
        bool
            ``t_approval``: at most ``t`` approvals; ``knapsack``: approved cost
            within the budget; ``cumulative``: weights sum to at most one;
            ``plain`` and ``t_threshold`` carry no syntactic constraint.

    Raises
    ------
        FormatMismatch
            Ballot variant incompatible with ``format``.
        UnknownProject
            Ballot references a project outside ``instance``.
    """
    if format not in BALLOT_FORMATS:
        raise FormatMismatch(f"unknown ballot format {format!r}")
    instance.check_projects(ballot.referenced())
    if format == "plain":
        return True
    if format in ("t_approval", "t_threshold", "knapsack"):
        if not isinstance(ballot, ApprovalBallot):
            raise FormatMismatch(f"{format} ballots are approval ballots")
        if format == "t_threshold":
            return True
        if format == "knapsack":
            return instance.total_cost(ballot.approved) <= instance.budget_limit
        if t is None or t < 0:
            raise FormatMismatch("t_approval needs a nonnegative t")
        return len(ballot.approved) <= t
    if not isinstance(ballot, CumulativeBallot):
        raise FormatMismatch("cumulative format needs a cumulative ballot")
    return sum(ballot.weights.values(), Fraction(0)) <= 1
