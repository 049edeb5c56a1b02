"""
Load-balancing and market-based rules: sequential Phragmén, maximin support
and the Method of Equal Shares, plus completion methods that make any rule
exhaustive.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from types import MappingProxyType

from pbengine.errors import IncompatibleProfile, MethodInapplicable, MissingSatisfaction, UnsupportedProject
from pbengine.lp import OPTIMAL, solve_lp
from pbengine.model import (
    APPROVAL,
    CARDINAL,
    CUMULATIVE,
    BudgetAllocation,
    CardinalBallot,
    Instance,
    Profile,
    TieBreakOrder,
    is_exhaustive,
    resolve_tiebreak,
)
from pbengine.rational import format_fraction
from pbengine.satisfaction import SatisfactionFunction
from pbengine.welfare import GREEDY_KEYS, greedy_welfare


@dataclass(frozen=True)
class VoterLoads:
    """
    Per-voter loads of sequential Phragmén.

    Attributes
    ----------
        loads : tuple of Fraction
            Final load of every voter.
        history : tuple
            One ``(project, {voter: increment})`` record per selected project.
    """

    loads: tuple
    history: tuple = ()


@dataclass(frozen=True, eq=False)
class LoadDistribution:
    """
    How the cost of each covered project is split among its supporters.

    Attributes
    ----------
        contributions : Mapping[str, Mapping[int, Fraction]]
            ``contributions[p][i]`` is voter ``i``'s share of ``c(p)``.
        n : int
            Number of voters.
    """

    contributions: Mapping
    n: int

    def __post_init__(self):
        clean = {p: MappingProxyType({i: Fraction(v) for i, v in d.items() if v}) for p, d in self.contributions.items()}
        object.__setattr__(self, "contributions", MappingProxyType(clean))

    def __eq__(self, other):
        if not isinstance(other, LoadDistribution):
            return NotImplemented
        return self.n == other.n and {p: dict(d) for p, d in self.contributions.items()} == {
            p: dict(d) for p, d in other.contributions.items()
        }

    def load(self, i: int) -> Fraction:
        return sum((d.get(i, Fraction(0)) for d in self.contributions.values()), Fraction(0))

    def loads(self) -> tuple:
        return tuple(self.load(i) for i in range(self.n))

    def max_load(self) -> Fraction:
        return max(self.loads(), default=Fraction(0))


@dataclass(frozen=True, eq=False)
class PriceSystem:
    """
    Entitlement ``alpha`` and contributions ``gamma[(i, p)]`` of voters to projects.

    Only positive contributions are stored.
    """

    alpha: Fraction
    contributions: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        clean = {k: Fraction(v) for k, v in dict(self.contributions).items() if v}
        object.__setattr__(self, "contributions", MappingProxyType(clean))

    def __eq__(self, other):
        if not isinstance(other, PriceSystem):
            return NotImplemented
        return self.alpha == other.alpha and dict(self.contributions) == dict(other.contributions)

    def gamma(self, i: int, p: str) -> Fraction:
        return self.contributions.get((i, p), Fraction(0))

    def spent(self, i: int) -> Fraction:
        return sum((v for (j, _), v in self.contributions.items() if j == i), Fraction(0))

    def to_json(self, voter_ids=None) -> dict:
        rows = []
        for (i, p), v in sorted(self.contributions.items()):
            rows.append({"voter": voter_ids[i] if voter_ids is not None else i, "project": p, "amount": format_fraction(v)})
        return {"kind": "price_system", "alpha": format_fraction(self.alpha), "contributions": rows}

    def __repr__(self):
        return f"PriceSystem(alpha={self.alpha}, contributions={dict(self.contributions)!r})"


def _rule_result(value) -> BudgetAllocation:
    return value[0] if isinstance(value, tuple) else value


# Sequential Phragmén -------------------------------------------------------


def seq_phragmen(
    instance: Instance,
    profile: Profile,
    tiebreak: TieBreakOrder | None = None,
    stop_on_any_tied_overflow: bool = True,
) -> tuple:
    """
    Sequential Phragmén, discrete formulation.

    Each round computes for every unselected project with supporters the new
    maximum load ``(c(p) + sum of supporters' loads) / #supporters`` and takes
    the minimisers. If a minimiser no longer fits the budget the rule stops;
    otherwise the tie-break-first minimiser is selected and its supporters'
    loads are set to that value.

    Parameters
    ----------
        stop_on_any_tied_overflow : bool
            Stop as soon as any minimiser overflows (default). With ``False``
            only the tie-break-chosen minimiser is tested.

    Returns
    -------
        tuple
            ``(BudgetAllocation, VoterLoads)``.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 2)
    >>> alloc, loads = seq_phragmen(inst, Profile.approval([["p1", "p2"], ["p1"]]))
    >>> sorted(alloc.selected), loads.loads
    (['p1', 'p2'], (Fraction(3, 2), Fraction(1, 2)))
    """
    profile.require(APPROVAL)
    tb = resolve_tiebreak(instance, tiebreak)
    loads = [Fraction(0)] * profile.n
    selected: list = []
    total = Fraction(0)
    history = []
    supporters = {p: profile.supporters(p) for p in instance.projects}
    while True:
        best = None
        tied: list = []
        for p in instance.projects:
            if p in selected or not supporters[p]:
                continue
            s = supporters[p]
            val = (instance.costs[p] + sum(loads[i] for i in s)) / len(s)
            if best is None or val < best:
                best, tied = val, [p]
            elif val == best:
                tied.append(p)
        if best is None:
            break
        chosen = tb.first(tied)
        check = tied if stop_on_any_tied_overflow else [chosen]
        if any(total + instance.costs[p] > instance.budget_limit for p in check):
            break
        inc = {i: best - loads[i] for i in supporters[chosen]}
        for i in supporters[chosen]:
            loads[i] = best
        selected.append(chosen)
        total += instance.costs[chosen]
        history.append((chosen, MappingProxyType(inc)))
    return BudgetAllocation(frozenset(selected), total), VoterLoads(tuple(loads), tuple(history))


# Maximin support -----------------------------------------------------------


def optimal_load_distribution(instance: Instance, profile: Profile, projects) -> tuple:
    """
    A load distribution over ``projects`` minimising the largest voter load.

    Solved exactly as a linear program: minimise ``t`` subject to
    ``sum_i l_i(p) = c(p)`` for every project and ``sum_p l_i(p) <= t`` for
    every voter, with ``l_i(p) = 0`` unless ``i`` approves ``p``.

    Returns
    -------
        tuple
            ``(LoadDistribution, optimal maximum load)``.

    Raises
    ------
        UnsupportedProject
            A project in ``projects`` has no supporter.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 2)
    >>> dist, value = optimal_load_distribution(inst, Profile.approval([["p1", "p2"], ["p1"]]), {"p1", "p2"})
    >>> value, dist.loads()
    (Fraction(1, 1), (Fraction(1, 1), Fraction(1, 1)))
    """
    profile.require(APPROVAL)
    ps = [p for p in instance.projects if p in set(projects)]
    if len(ps) != len(set(projects)):
        instance.check_projects(projects)
    pairs = []
    for p in ps:
        s = profile.supporters(p)
        if not s:
            raise UnsupportedProject(f"project {p} has no supporter")
        pairs.extend((i, p) for i in s)
    if not ps:
        return LoadDistribution({}, profile.n), Fraction(0)
    t = len(pairs)
    eq = []
    for p in ps:
        eq.append(({k: 1 for k, (_, q) in enumerate(pairs) if q == p}, instance.costs[p]))
    ub = []
    voters = sorted({i for i, _ in pairs})
    for i in voters:
        row = {k: 1 for k, (j, _) in enumerate(pairs) if j == i}
        row[t] = -1
        ub.append((row, 0))
    res = solve_lp(t + 1, {t: 1}, ub=ub, eq=eq)
    assert res.status == OPTIMAL
    contrib: dict = {p: {} for p in ps}
    for k, (i, p) in enumerate(pairs):
        if res.x[k]:
            contrib[p][i] = res.x[k]
    return LoadDistribution(contrib, profile.n), res.value


def maximin_support(
    instance: Instance,
    profile: Profile,
    tiebreak: TieBreakOrder | None = None,
    stop_on_any_tied_overflow: bool = True,
) -> tuple:
    """
    Maximin support: each round adds the project whose inclusion yields the
    smallest optimal maximum load, stopping like :py:func:`seq_phragmen`.

    Returns
    -------
        tuple
            ``(BudgetAllocation, LoadDistribution)`` with the optimal
            distribution of the final allocation.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 2)
    >>> alloc, dist = maximin_support(inst, Profile.approval([["p1", "p2"], ["p1"]]))
    >>> sorted(alloc.selected), dist.max_load()
    (['p1', 'p2'], Fraction(1, 1))
    """
    profile.require(APPROVAL)
    tb = resolve_tiebreak(instance, tiebreak)
    selected: list = []
    total = Fraction(0)
    dist = LoadDistribution({}, profile.n)
    supported = [p for p in instance.projects if profile.supporters(p)]
    while True:
        best = None
        tied: list = []
        cand_dist = {}
        for p in supported:
            if p in selected:
                continue
            d, val = optimal_load_distribution(instance, profile, selected + [p])
            cand_dist[p] = d
            if best is None or val < best:
                best, tied = val, [p]
            elif val == best:
                tied.append(p)
        if best is None:
            break
        chosen = tb.first(tied)
        check = tied if stop_on_any_tied_overflow else [chosen]
        if any(total + instance.costs[p] > instance.budget_limit for p in check):
            break
        selected.append(chosen)
        total += instance.costs[chosen]
        dist = cand_dist[chosen]
    return BudgetAllocation(frozenset(selected), total), dist


# Method of Equal Shares ----------------------------------------------------


def _utilities(instance: Instance, profile: Profile, sat: SatisfactionFunction | None) -> list:
    """Per-voter ``{project: positive utility}`` used by MES."""
    if profile.kind == APPROVAL:
        if sat is None:
            raise MissingSatisfaction("MES on approval ballots needs a satisfaction function")
        if sat.kind == "share" and sat.context is None:
            sat = sat.with_context(profile)
        single = {p: sat.singleton(p, instance) for p in instance.projects}
        return [{p: single[p] for p in b.approved} for b in profile.ballots]
    if profile.kind in (CARDINAL, CUMULATIVE):
        if sat is not None:
            raise IncompatibleProfile("cardinal MES uses the ballot scores; drop the satisfaction function")
        return [{p: b.score(p) for p in b.referenced()} for b in profile.ballots]
    raise IncompatibleProfile(f"MES is not defined for {profile.kind} ballots")


def min_rho(cost: Fraction, money: list, utils: list) -> Fraction | None:
    """
    Smallest ``rho`` with ``sum_i min(money_i, rho * u_i) >= cost``, or None.

    Only voters with positive utility are passed.

    Examples
    --------
    >>> min_rho(Fraction(2), [Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)])
    Fraction(1, 2)
    """
    if sum(money, Fraction(0)) < cost:
        return None
    order = sorted(range(len(money)), key=lambda k: money[k] / utils[k])
    paid = Fraction(0)
    rest = sum(utils, Fraction(0))
    for k in order:
        rho = (cost - paid) / rest
        if rho * utils[k] <= money[k]:
            return rho
        paid += money[k]
        rest -= utils[k]
    return None


def mes(
    instance: Instance,
    profile: Profile,
    sat: SatisfactionFunction | None = None,
    tiebreak: TieBreakOrder | None = None,
) -> tuple:
    """
    Method of Equal Shares.

    Every voter starts with ``b/n``. A project is ``rho``-affordable if its
    supporters can pay ``min(remaining_i, rho * u_i(p))`` each and cover its
    cost. Each round selects the project with the smallest such ``rho``
    (tie-break on ties) and charges its supporters; the rule stops when no
    project is affordable. Utilities are cardinal scores, or ``s({p})`` for
    approvers under satisfaction function ``sat``.

    Returns
    -------
        tuple
            ``(BudgetAllocation, PriceSystem)`` with ``alpha = b/n``.

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> inst = Instance.unit_cost(2, 2)
    >>> alloc, prices = mes(inst, Profile.approval([["p1"], ["p2"]]), CARD)
    >>> sorted(alloc.selected), prices.alpha
    (['p1', 'p2'], Fraction(1, 1))
    """
    tb = resolve_tiebreak(instance, tiebreak)
    utils = _utilities(instance, profile, sat)
    n = profile.n
    alpha = instance.budget_limit / n
    money = [alpha] * n
    supporters = {p: [i for i in range(n) if utils[i].get(p, 0) > 0] for p in instance.projects}
    selected: list = []
    total = Fraction(0)
    contributions: dict = {}
    while True:
        best = None
        tied: list = []
        for p in instance.projects:
            if p in selected:
                continue
            s = [i for i in supporters[p] if money[i] > 0]
            rho = min_rho(instance.costs[p], [money[i] for i in s], [utils[i][p] for i in s])
            if rho is None:
                continue
            if best is None or rho < best:
                best, tied = rho, [p]
            elif rho == best:
                tied.append(p)
        if best is None:
            break
        chosen = tb.first(tied)
        for i in supporters[chosen]:
            pay = min(money[i], best * utils[i][chosen])
            if pay:
                money[i] -= pay
                contributions[(i, chosen)] = pay
        selected.append(chosen)
        total += instance.costs[chosen]
    return BudgetAllocation(frozenset(selected), total), PriceSystem(alpha, contributions)


# Completion ----------------------------------------------------------------


@dataclass(frozen=True)
class GreedyCompletion:
    """Fill the leftover budget greedily (``score_per_cost`` or ``score``)."""

    key: str = "score_per_cost"

    def __post_init__(self):
        if self.key not in GREEDY_KEYS:
            raise ValueError(f"greedy completion key must be one of {GREEDY_KEYS}")


@dataclass(frozen=True)
class BudgetVariation:
    """
    Re-run with budget ``b + k * step`` for ``k = 0, 1, ...``; ``step``
    defaults to ``b/n``.
    """

    step: Fraction | None = None


@dataclass(frozen=True)
class Perturbation:
    """
    Replace zero scores by ``epsilon`` and re-run cardinal MES; ``epsilon``
    defaults to the smallest positive score divided by ``2 m n``.
    """

    epsilon: Fraction | None = None


def complete(rule, method, instance: Instance, profile: Profile, tiebreak: TieBreakOrder | None = None) -> BudgetAllocation:
    """
    Make a rule's outcome exhaustive.

    Parameters
    ----------
        rule : callable
            ``rule(instance, profile, tiebreak)`` returning an allocation (or a
            tuple whose first item is one).
        method : GreedyCompletion or BudgetVariation or Perturbation
        instance, profile, tiebreak
            The election.

    Returns
    -------
        BudgetAllocation
            Feasible for ``instance``.

    Raises
    ------
        MethodInapplicable
            Perturbation with a rule other than cardinal MES or a non-cardinal profile.

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> inst = Instance.from_costs({"p1": 2}, 2)
    >>> prof = Profile.approval([["p1"], []])
    >>> rule = lambda i, a, t: mes(i, a, CARD, t)
    >>> sorted(rule(inst, prof, None)[0].selected), sorted(complete(rule, GreedyCompletion("score"), inst, prof).selected)
    ([], ['p1'])
    """
    tb = resolve_tiebreak(instance, tiebreak)
    if isinstance(method, GreedyCompletion):
        first = _rule_result(rule(instance, profile, tb))
        rest = [p for p in instance.projects if p not in first.selected]
        left = instance.budget_limit - first.total_cost
        fitting = [p for p in rest if instance.costs[p] <= left]
        if not fitting:
            return first
        sub = instance.restricted(fitting, left)
        sub_tb = TieBreakOrder(tuple(p for p in tb.order if p in set(fitting)))
        extra = greedy_welfare(sub, profile.restricted(fitting), method.key, sub_tb)
        return BudgetAllocation.of(instance, first.selected | extra.selected)
    if isinstance(method, BudgetVariation):
        b = instance.budget_limit
        step = Fraction(method.step) if method.step is not None else b / profile.n
        if step <= 0:
            raise ValueError("budget step must be positive")
        current = _rule_result(rule(instance, profile, tb))
        if is_exhaustive(instance, current):
            return current
        horizon = max(b, profile.n * sum(instance.costs.values(), Fraction(0)))
        rounds = ceil((horizon - b) / step) + 1
        for k in range(1, rounds + 1):
            raised = instance.with_budget(b + k * step)
            out = _rule_result(rule(raised, profile, tb))
            if out.total_cost > b:
                return current
            current = BudgetAllocation.of(instance, out.selected)
            if is_exhaustive(instance, current):
                return current
        return current
    if isinstance(method, Perturbation):
        if profile.kind != CARDINAL:
            raise MethodInapplicable("perturbation needs a cardinal profile")
        if rule is not mes and getattr(rule, "rule_id", None) != "mes":
            raise MethodInapplicable("perturbation is defined for cardinal MES only")
        eps = method.epsilon
        if eps is None:
            positive = [s for b in profile.ballots for s in b.scores.values() if s > 0]
            base = min(positive) if positive else Fraction(1)
            eps = base / (2 * instance.m * profile.n)
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        bumped = Profile(
            tuple(CardinalBallot({p: b.score(p) or eps for p in instance.projects}) for b in profile.ballots)
        )
        return BudgetAllocation.of(instance, _rule_result(mes(instance, bumped, None, tb)).selected)
    raise TypeError(f"unknown completion method {method!r}")
