"""
Satisfaction functions for approval ballots and positional scoring for
ordinal ballots.

Every built-in satisfaction function has the form ``g(w(P))`` where ``w`` is
additive over projects and ``g`` is nondecreasing: the identity for CARD,
COST, SHARE and ADDITIVE, ``log(1 + x)`` for LOG, ``sqrt(x)`` for SQRT and the
indicator ``x > 0`` for CC. Exact comparisons therefore only need the
rational ``w(P)`` (or the indicator), which is what :py:meth:`value` returns.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from types import MappingProxyType

from pbengine.errors import EmptyApprovalSet, InvalidBallot, MissingContext, WrongProfileVariant
from pbengine.knapsack import knapsack
from pbengine.model import (
    APPROVAL,
    ApprovalBallot,
    CardinalBallot,
    Instance,
    OrdinalBallot,
    Profile,
    WeakOrdinalBallot,
    as_allocation,
)
from pbengine.rational import to_fraction

SAT_NAMES = ("card", "cost", "cc", "share", "log", "sqrt")

_TRANSFORM = {
    "card": "identity",
    "cost": "identity",
    "share": "identity",
    "additive": "identity",
    "cc": "indicator",
    "log": "log",
    "sqrt": "sqrt",
}


@dataclass(frozen=True, eq=False)
class SatisfactionFunction:
    """
    A named satisfaction function.

    Parameters
    ----------
        kind : str
            One of ``card``, ``cost``, ``cc``, ``share``, ``log``, ``sqrt``, ``additive``.
        values : Mapping[str, Fraction], optional
            Positive per-project values (``additive`` only).
        context : Profile, optional
            The approval profile that ``share`` divides costs by.

    Notes
    -----
    :py:meth:`value` returns an exact rational on a comparison scale: the true
    satisfaction is a strictly increasing function of it (for LOG it is
    ``log(1 + value)``, for SQRT ``sqrt(value)``) and it equals the true
    satisfaction for every other kind. Use :py:meth:`real_value` for the
    floating-point true value.
    """

    kind: str
    values: Mapping | None = None
    context: Profile | None = None

    def __post_init__(self):
        if self.kind not in _TRANSFORM:
            raise ValueError(f"unknown satisfaction function {self.kind!r}")
        if self.kind == "additive":
            if self.values is None:
                raise ValueError("additive satisfaction needs per-project values")
            vals = {p: to_fraction(v) for p, v in dict(self.values).items()}
            if any(v <= 0 for v in vals.values()):
                raise ValueError("additive satisfaction values must be positive")
            object.__setattr__(self, "values", MappingProxyType(vals))
        if self.kind == "share" and self.context is not None:
            self.context.require(APPROVAL)

    def __eq__(self, other):
        if not isinstance(other, SatisfactionFunction):
            return NotImplemented
        return (
            self.kind == other.kind
            and (dict(self.values) if self.values else None) == (dict(other.values) if other.values else None)
            and self.context == other.context
        )

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return f"SatisfactionFunction({self.kind!r})"

    @property
    def name(self) -> str:
        return self.kind

    @property
    def transform(self) -> str:
        """``identity``, ``log``, ``sqrt`` or ``indicator``."""
        return _TRANSFORM[self.kind]

    @property
    def is_additive(self) -> bool:
        return self.transform == "identity"

    @property
    def is_strictly_increasing(self) -> bool:
        """Strict inclusion-monotonicity: adding a project strictly increases satisfaction."""
        return self.kind != "cc"

    def with_context(self, profile: Profile) -> "SatisfactionFunction":
        return SatisfactionFunction(self.kind, self.values, profile)

    def weight(self, p: str, instance: Instance) -> Fraction:
        """Additive per-project weight ``w(p)``."""
        k = self.kind
        if k in ("card", "cc"):
            return Fraction(1)
        if k in ("cost", "log", "sqrt"):
            return instance.cost(p)
        if k == "additive":
            return self.values[p]
        if self.context is None:
            raise MissingContext("the share satisfaction function needs a profile")
        supp = len(self.context.supporters(p))
        return instance.cost(p) / max(supp, 1)

    def weights(self, instance: Instance) -> dict:
        return {p: self.weight(p, instance) for p in instance.projects}

    def value(self, projects: Iterable[str], instance: Instance) -> Fraction:
        """Exact comparison-scale satisfaction of the project set."""
        ps = list(projects)
        if self.transform == "indicator":
            return Fraction(1) if ps else Fraction(0)
        return sum((self.weight(p, instance) for p in ps), Fraction(0))

    def real_value(self, projects: Iterable[str], instance: Instance) -> float:
        """True satisfaction as a float (transcendental for LOG and SQRT)."""
        v = self.value(projects, instance)
        if self.transform == "log":
            return math.log1p(v)
        if self.transform == "sqrt":
            return math.sqrt(v)
        return float(v)

    def singleton(self, p: str, instance: Instance) -> Fraction:
        return self.value([p], instance)


CARD = SatisfactionFunction("card")
COST = SatisfactionFunction("cost")
CC = SatisfactionFunction("cc")
LOG = SatisfactionFunction("log")
SQRT = SatisfactionFunction("sqrt")


def share(profile: Profile) -> SatisfactionFunction:
    """The share satisfaction function bound to ``profile``."""
    return SatisfactionFunction("share", context=profile)


def additive(values: Mapping) -> SatisfactionFunction:
    """Additive satisfaction with the given positive per-project values."""
    return SatisfactionFunction("additive", values=values)


def by_name(name: str, profile: Profile | None = None) -> SatisfactionFunction:
    """
    Look up a built-in function by its identifier.

    ``share`` is bound to ``profile``.
    """
    name = name.strip().lower()
    table = {"card": CARD, "cost": COST, "cc": CC, "log": LOG, "sqrt": SQRT}
    if name in table:
        return table[name]
    if name == "share":
        if profile is None:
            raise MissingContext("the share satisfaction function needs a profile")
        return share(profile)
    raise ValueError(f"unknown satisfaction function {name!r}; expected one of {', '.join(SAT_NAMES)}")


def _approved(ballot) -> frozenset:
    if isinstance(ballot, ApprovalBallot):
        return ballot.approved
    raise WrongProfileVariant("satisfaction functions are evaluated on approval ballots")


def evaluate(fn: SatisfactionFunction, ballot: ApprovalBallot, allocation, instance: Instance) -> Fraction:
    """
    Satisfaction of a voter with an allocation, ``sat(pi & A_i)``.

    Parameters
    ----------
        fn : SatisfactionFunction
            The function; ``share`` must carry its profile.
        ballot : ApprovalBallot
            The voter's approvals.
        allocation : BudgetAllocation or iterable of str
            The selected projects.
        instance : Instance
            The instance.

    Returns
    -------
        Fraction
            The comparison-scale value (see :py:class:`SatisfactionFunction`):
            for SQRT the square of the true value, for LOG the cost whose
            ``log(1 + .)`` is the true value.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> v3 = ApprovalBallot({"p3", "p4", "p5"})
    >>> evaluate(CARD, v3, {"p2", "p3", "p4", "p5"}, e1)
    Fraction(3, 1)
    """
    alloc = as_allocation(instance, allocation)
    if fn.kind == "share" and fn.context is None:
        raise MissingContext("the share satisfaction function needs a profile")
    return fn.value(alloc.selected & _approved(ballot), instance)


def relative_satisfaction(base: SatisfactionFunction, ballot: ApprovalBallot, allocation, instance: Instance):
    """
    Satisfaction divided by the best satisfaction the voter could get from any
    feasible set of approved projects.

    Returns
    -------
        Fraction or float
            Exact for every kind except LOG and SQRT, whose ratio of
            transcendental values is returned as a float.

    Raises
    ------
        EmptyApprovalSet
            The voter approves nothing.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> relative_satisfaction(COST, ApprovalBallot({"p3", "p4", "p5"}), {"p3"}, e1)
    Fraction(1, 3)
    """
    approved = [p for p in instance.projects if p in _approved(ballot)]
    if not approved:
        raise EmptyApprovalSet("the voter approves no project")
    num = evaluate(base, ballot, allocation, instance)
    if base.transform == "indicator":
        den = Fraction(1)
    else:
        _, den = knapsack(
            [instance.cost(p) for p in approved],
            [base.weight(p, instance) for p in approved],
            instance.budget_limit,
            max_scaled_budget=None,
        )
    if base.transform == "log":
        return math.log1p(num) / math.log1p(den)
    if base.transform == "sqrt":
        return math.sqrt(num / den)
    return num / den


# Positional scoring --------------------------------------------------------


@dataclass(frozen=True)
class ScoringVector:
    """
    Nonincreasing nonnegative scores by rank position, implicitly zero-padded.

    Examples
    --------
    >>> ScoringVector.borda(3).entries
    (Fraction(2, 1), Fraction(1, 1), Fraction(0, 1))
    """

    entries: tuple

    def __post_init__(self):
        entries = tuple(to_fraction(x) for x in self.entries)
        if any(x < 0 for x in entries):
            raise InvalidBallot("scoring vector entries must be nonnegative")
        if any(a < b for a, b in zip(entries, entries[1:])):
            raise InvalidBallot("scoring vector must be nonincreasing")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def borda(cls, m: int) -> "ScoringVector":
        return cls(tuple(range(m - 1, -1, -1)))

    def at(self, r: int) -> Fraction:
        return self.entries[r] if r < len(self.entries) else Fraction(0)

    def mean(self, start: int, stop: int) -> Fraction:
        """Mean of the entries at positions ``start .. stop - 1``."""
        return sum((self.at(r) for r in range(start, stop)), Fraction(0)) / (stop - start)


def positional_cardinal(ballot, vector, projects: Iterable[str] | None = None) -> CardinalBallot:
    """
    Convert an ordinal or weak-ordinal ballot into cardinal scores.

    Position ``r`` (zero based) of a strict ranking scores ``vector[r]``. A
    class of indifferent projects spanning positions ``r .. r + k - 1`` gives
    each member the mean of those entries.

    Parameters
    ----------
        ballot : OrdinalBallot or WeakOrdinalBallot
        vector : ScoringVector or sequence of numbers
        projects : iterable of str, optional
            All project ids. When given, unranked projects form a final
            indifference class; otherwise they score 0.

    Examples
    --------
    >>> dict(positional_cardinal(OrdinalBallot(("p2", "p1", "p3")), (2, 1, 0)).scores)
    {'p1': Fraction(1, 1), 'p2': Fraction(2, 1)}
    >>> dict(positional_cardinal(WeakOrdinalBallot((frozenset({"p1", "p2"}),)), (2, 0)).scores)
    {'p1': Fraction(1, 1), 'p2': Fraction(1, 1)}
    """
    if not isinstance(vector, ScoringVector):
        vector = ScoringVector(tuple(vector))
    if isinstance(ballot, OrdinalBallot):
        classes = [frozenset([p]) for p in ballot.ranking]
    elif isinstance(ballot, WeakOrdinalBallot):
        classes = list(ballot.classes)
    else:
        raise WrongProfileVariant("positional scoring applies to ordinal ballots")
    if projects is not None:
        rest = frozenset(projects) - frozenset().union(*classes)
        if rest:
            classes.append(rest)
    scores = {}
    pos = 0
    for cls in classes:
        s = vector.mean(pos, pos + len(cls))
        for p in cls:
            scores[p] = s
        pos += len(cls)
    return CardinalBallot(scores)


# Classification ------------------------------------------------------------


def _log_ratio_cmp(a: Fraction, b: Fraction) -> int:
    """Sign of ``log(1+a)/a - log(1+b)/b`` for positive rationals."""
    if a == b:
        return 0
    # log(1+a)/a >= log(1+b)/b  <=>  (1+a)^b >= (1+b)^a
    e1 = b.numerator * a.denominator
    e2 = a.numerator * b.denominator
    if max(e1, e2) <= 4096:
        # both sides raised to the power a.den * b.den
        lhs = (1 + a) ** e1
        rhs = (1 + b) ** e2
        return (lhs > rhs) - (lhs < rhs)
    with localcontext() as ctx:
        ctx.prec = 80
        da = Decimal(a.numerator) / Decimal(a.denominator)
        db = Decimal(b.numerator) / Decimal(b.denominator)
        diff = db * (1 + da).ln() - da * (1 + db).ln()
    return (diff > 0) - (diff < 0)


def _normalised_cmp(fn: SatisfactionFunction, p: str, q: str, instance: Instance) -> int:
    """Sign of ``sat(p)/c(p) - sat(q)/c(q)`` computed exactly."""
    cp, cq = instance.cost(p), instance.cost(q)
    if fn.transform == "log":
        return _log_ratio_cmp(cp, cq)
    if fn.transform == "sqrt":
        # sqrt(c)/c = 1/sqrt(c)
        return (cq > cp) - (cq < cp)
    x = fn.singleton(p, instance) / cp
    y = fn.singleton(q, instance) / cq
    return (x > y) - (x < y)


def is_dns(fn: SatisfactionFunction, instance: Instance) -> bool:
    """
    Whether ``fn`` has weakly decreasing normalised satisfaction on ``instance``.

    True iff for all projects with ``c(p) <= c(p')``: ``sat(p) <= sat(p')`` and
    ``sat(p)/c(p) >= sat(p')/c(p')``.

    Examples
    --------
    >>> inst = Instance.from_costs({"a": 1, "b": 2}, 2)
    >>> is_dns(CARD, inst), is_dns(additive({"a": 1, "b": 100}), inst)
    (True, False)
    """
    ps = instance.projects
    for p in ps:
        for q in ps:
            if p == q or instance.cost(p) > instance.cost(q):
                continue
            if fn.singleton(p, instance) > fn.singleton(q, instance):
                return False
            if _normalised_cmp(fn, p, q, instance) < 0:
                return False
    return True
