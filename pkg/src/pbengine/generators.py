"""
Seeded random instances, profiles and allocations for sampling-based checks,
plus exhaustive enumeration of feasible allocations.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from pbengine.model import BudgetAllocation, Instance, Profile


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_instance(
    seed, m: int, budget=None, unit_cost: bool = False, max_cost: int = 4, denominators=(1, 2, 3)
) -> Instance:
    """
    Instance with projects ``p1 .. pm``.

    Costs are rationals ``k/d`` with ``d`` drawn from ``denominators`` and
    ``1 <= k/d <= max_cost``; the budget limit (default: a random value
    between the largest cost and the total cost) is never below any cost.

    Examples
    --------
    >>> inst = random_instance(0, 4)
    >>> inst.m, all(c <= inst.budget_limit for c in inst.costs.values())
    (4, True)
    """
    rng = _rng(seed)
    if unit_cost:
        costs = [Fraction(1)] * m
    else:
        costs = []
        for _ in range(m):
            d = rng.choice(denominators)
            costs.append(Fraction(rng.randint(d, max_cost * d), d))
    if budget is None:
        lo, hi = max(costs), sum(costs)
        if unit_cost:
            budget = rng.randint(1, m)
        else:
            d = rng.choice(denominators)
            budget = lo + Fraction(rng.randint(0, int((hi - lo) * d)), d)
    budget = Fraction(budget)
    return Instance.from_costs([(f"p{j + 1}", min(c, budget)) for j, c in enumerate(costs)], budget)


def random_approval_profile(seed, instance: Instance, n: int, density: float = 0.5) -> Profile:
    """Every voter approves every project independently with probability ``density``."""
    rng = _rng(seed)
    return Profile.approval([[p for p in instance.projects if rng.random() < density] for _ in range(n)])


def random_cardinal_profile(seed, instance: Instance, n: int, scores=(0, 1, 2), positive: bool = False) -> Profile:
    """Scores drawn uniformly from ``scores`` (from its positive part if ``positive``)."""
    rng = _rng(seed)
    pool = [s for s in scores if s > 0] if positive else list(scores)
    return Profile.cardinal([{p: rng.choice(pool) for p in instance.projects} for _ in range(n)])


def random_cumulative_profile(seed, instance: Instance, n: int, points: int = 3) -> Profile:
    """
    Each voter spreads ``points`` unit points over the projects at random;
    weights are the points divided by ``points``.

    Examples
    --------
    >>> prof = random_cumulative_profile(0, Instance.unit_cost(3, 2), 2)
    >>> all(sum(b.weights.values()) == 1 for b in prof.ballots)
    True
    """
    rng = _rng(seed)
    out = []
    for _ in range(n):
        w: dict = {}
        for _ in range(points):
            p = rng.choice(instance.projects)
            w[p] = w.get(p, 0) + Fraction(1, points)
        out.append(w)
    return Profile.cumulative(out)


def random_ordinal_profile(seed, instance: Instance, n: int, weak: bool = False, truncate: bool = False) -> Profile:
    """
    Random rankings. ``weak`` groups neighbours into indifference classes;
    ``truncate`` leaves a random tail unranked.
    """
    rng = _rng(seed)
    out = []
    for _ in range(n):
        order = list(instance.projects)
        rng.shuffle(order)
        if truncate:
            order = order[: rng.randint(1, len(order))]
        if not weak:
            out.append(order)
            continue
        classes = [[order[0]]]
        for p in order[1:]:
            if rng.random() < 0.4:
                classes[-1].append(p)
            else:
                classes.append([p])
        out.append([frozenset(c) for c in classes])
    return Profile.weak_ordinal(out) if weak else Profile.ordinal(out)


def party_list_profile(seed, instance: Instance, n: int, parties: int = 2) -> Profile:
    """Approval profile where voters of a party approve exactly the party's projects."""
    rng = _rng(seed)
    label = {p: rng.randrange(parties) for p in instance.projects}
    out = []
    for _ in range(n):
        k = rng.randrange(parties)
        out.append([p for p in instance.projects if label[p] == k])
    return Profile.approval(out)


def random_allocation(seed, instance: Instance) -> BudgetAllocation:
    """Add projects in random order while they fit, stopping at a random point."""
    rng = _rng(seed)
    order = list(instance.projects)
    rng.shuffle(order)
    stop = rng.randint(0, len(order))
    chosen: list = []
    left = instance.budget_limit
    for p in order[:stop]:
        if instance.costs[p] <= left:
            chosen.append(p)
            left -= instance.costs[p]
    return BudgetAllocation.of(instance, chosen)


def feasible_allocations(instance: Instance):
    """
    Every feasible allocation, by size then lexicographically by position.

    Examples
    --------
    >>> e = Instance.unit_cost(3, 2)
    >>> [sorted(a.selected) for a in feasible_allocations(e)]
    [[], ['p1'], ['p2'], ['p3'], ['p1', 'p2'], ['p1', 'p3'], ['p2', 'p3']]
    """
    projects = instance.projects
    for r in range(len(projects) + 1):
        for combo in combinations(projects, r):
            if instance.total_cost(combo) <= instance.budget_limit:
                yield BudgetAllocation.of(instance, combo)
