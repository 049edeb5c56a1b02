"""
Fair share, proportionality for solid coalitions (ordinal and approval
forms) and proportional representation for cumulative ballots.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from pbengine.caps import Caps, resolve
from pbengine.cohesion import PJR, _Context, check_jr
from pbengine.errors import NonIntegerBudget, WrongProfileVariant
from pbengine.lattice import members
from pbengine.model import APPROVAL, CUMULATIVE, ORDINAL, WEAK_ORDINAL, Instance, Profile, as_allocation, is_exhaustive
from pbengine.satisfaction import COST
from pbengine.verdict import SATISFIED, VIOLATED, AllocationWitness, CohesiveWitness, Verdict, VoterWitness

CPSC = "cpsc"
IPSC = "ipsc"


def fair_share_of(instance: Instance, profile: Profile, allocation, i: int) -> tuple:
    """
    ``(received, entitled)`` of voter ``i``: the share of selected approved
    projects, and ``min(b/n, share of all approved projects)``.
    """
    alloc = as_allocation(instance, allocation)
    ballot = profile.ballots[i]
    share = {p: instance.costs[p] / len(profile.supporters(p)) for p in ballot.approved}
    received = sum((share[p] for p in ballot.approved if p in alloc.selected), Fraction(0))
    entitled = min(instance.budget_limit / profile.n, sum(share.values(), Fraction(0)))
    return received, entitled


def check_fair_share(instance: Instance, profile: Profile, allocation) -> Verdict:
    """
    Every voter receives at least ``min(b/n, sum over approved p of c(p)/|supporters(p)|)``
    from the selected projects they approve, each project's cost split evenly
    among its supporters.

    Examples
    --------
    >>> e3 = Instance.unit_cost(2, 2)
    >>> check_fair_share(e3, Profile.approval([["p1"], ["p2"]]), {"p1", "p2"}).status
    'satisfied'
    >>> v = check_fair_share(Instance.from_costs({"p1": 2}, 2), Profile.approval([["p1"], []]), set())
    >>> v.status, v.witness.voter, v.witness.required
    ('violated', 0, Fraction(1, 1))
    """
    profile.require(APPROVAL)
    for i in range(profile.n):
        received, entitled = fair_share_of(instance, profile, allocation, i)
        if received < entitled:
            return Verdict("fair-share", VIOLATED, VoterWitness(i, received, entitled))
    return Verdict("fair-share", SATISFIED)


# Solid coalitions ----------------------------------------------------------


def weak_classes(ballot, projects) -> list:
    """Indifference classes of an ordinal ballot; unranked projects form a last class."""
    classes = [list(c) for c in ballot.as_weak().classes]
    seen = {p for c in classes for p in c}
    rest = [p for p in projects if p not in seen]
    if rest:
        classes.append(rest)
    return classes


def top(classes, k: int) -> frozenset:
    """
    ``top(>=, k)``: the classes before the first one that brings the count to
    ``k`` or more, plus that class.

    Examples
    --------
    >>> sorted(top([["a"], ["b", "c"], ["d"]], 2))
    ['a', 'b', 'c']
    >>> sorted(top([["a"], ["b", "c"], ["d"]], 1))
    ['a']
    """
    out: set = set()
    for c in classes:
        if len(out) >= k:
            break
        out |= set(c)
    return frozenset(out)


def check_psc(
    instance: Instance, profile: Profile, allocation, variant: str = IPSC, caps: Caps | None = None
) -> Verdict:
    """
    Proportionality for solid coalitions.

    For ordinal ballots a group ``N`` is ``P``-solid if every member ranks
    every project of ``P`` weakly above every other project. Let ``X`` be the
    selected projects in some member's ``top(>=, |P|)``.

    * CPSC fails if some ``P' subset of P`` has ``c(X) < c(P') <= |N| b / n``.
    * IPSC fails if some ``p*`` in ``P`` outside ``X`` has ``c(X) + c(p*) <= |N| b / n``.

    For approval ballots, CPSC is PJR[cost] plus maximal total cost, and IPSC
    is exhaustiveness plus: no group ``N`` and commonly approved unselected
    ``p`` with ``c(p) + c(U_N) <= |N| b / n``, where ``U_N`` is the selected
    projects approved by some member.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 1)
    >>> prof = Profile.ordinal([["p1", "p2"], ["p1", "p2"]])
    >>> check_psc(inst, prof, {"p2"}, "ipsc").status
    'violated'
    >>> check_psc(inst, prof, {"p1"}, "ipsc").status
    'satisfied'
    >>> check_psc(inst, prof, set(), "cpsc").status
    'violated'
    """
    if variant not in (CPSC, IPSC):
        raise ValueError("variant must be 'cpsc' or 'ipsc'")
    caps = resolve(caps)
    if profile.kind == APPROVAL:
        return _approval_psc(instance, profile, allocation, variant, caps)
    if profile.kind not in (ORDINAL, WEAK_ORDINAL):
        raise WrongProfileVariant(f"{variant} needs ordinal or approval ballots, not {profile.kind}")
    ctx = _Context(instance, profile, allocation, caps, variant)
    lat, C, n, m = ctx.lat, ctx.C, ctx.n, ctx.m
    full = (1 << m) - 1
    idx = instance.index
    solid = []
    tops = []
    for b in profile.ballots:
        classes = weak_classes(b, instance.projects)
        rank = [0] * m
        for r, c in enumerate(classes):
            for p in c:
                rank[idx[p]] = r
        worst_in = lat.maxes(np.array(rank, dtype=np.int64), -1)
        best_in = lat.mins(np.array(rank, dtype=np.int64), m + 1)
        solid.append(worst_in <= best_in[full ^ lat.masks])
        tops.append([ctx.mask_of(top(classes, k)) for k in range(m + 1)])
    nonempty = lat.masks != 0
    if variant == CPSC:
        within = [lat.subset_max(np.where(ctx.affordable[k], C, -1)) for k in range(n + 1)]
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        ok = nonempty.copy()
        for i in mem:
            ok &= solid[i]
        if not ok.any():
            continue
        union = [0] * (m + 1)
        for k in range(m + 1):
            for i in mem:
                union[k] |= tops[i][k]
        X = np.array(union, dtype=np.int64)[lat.popcount] & ctx.pi
        got = C[X]
        k = len(mem)
        if variant == CPSC:
            fail = within[k] > got
            P = lat.first(ok & fail)
            if P is not None:
                return Verdict(CPSC, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P)))
        else:
            big = int(C[full]) + 1
            cheapest = np.full(lat.size, big, dtype=C.dtype)
            star = np.full(lat.size, -1, dtype=np.int64)
            for j in range(m):
                here = ((lat.masks >> j) & 1).astype(bool) & ~((X >> j) & 1).astype(bool)
                better = here & (ctx.cost_ints[j] < cheapest)
                cheapest = np.where(better, ctx.cost_ints[j], cheapest)
                star = np.where(better, j, star)
            fail = (cheapest < big) & (n * (got + cheapest) <= k * ctx.B)
            P = lat.first(ok & fail)
            if P is not None:
                p_star = instance.projects[int(star[P])]
                return Verdict(IPSC, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P), project=p_star))
    return Verdict(variant, SATISFIED)


def _approval_psc(instance, profile, allocation, variant, caps) -> Verdict:
    alloc = as_allocation(instance, allocation)
    if variant == CPSC:
        pjr = check_jr(instance, profile, alloc, PJR, COST, caps=caps)
        if pjr.violated:
            return Verdict(CPSC, VIOLATED, pjr.witness, note="PJR[cost] fails")
        ctx = _Context(instance, profile, alloc, caps, variant)
        feasible = ctx.C <= ctx.B
        best = ctx.C[feasible].max()
        if ctx.C[ctx.pi] < best:
            better = ctx.bundle(ctx.lat.first(feasible & (ctx.C == best)))
            return Verdict(CPSC, VIOLATED, AllocationWitness(better, "a feasible allocation of larger total cost"))
        return Verdict(CPSC, SATISFIED)
    ctx = _Context(instance, profile, alloc, caps, variant)
    A = [ctx.mask_of(b.approved) for b in profile.ballots]
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        T = (1 << ctx.m) - 1
        U = 0
        for i in mem:
            T &= A[i]
            U |= A[i] & ctx.pi
        for j in members(T & ~ctx.pi):
            if ctx.n * (int(ctx.C[U]) + ctx.cost_ints[j]) <= len(mem) * ctx.B:
                p = instance.projects[j]
                return Verdict(IPSC, VIOLATED, CohesiveWitness(ctx.group(g), frozenset({p}), project=p))
    if not is_exhaustive(instance, alloc):
        extra = next(p for p in instance.projects if p not in alloc.selected and alloc.total_cost + instance.costs[p] <= instance.budget_limit)
        return Verdict(IPSC, VIOLATED, AllocationWitness(alloc.selected | {extra}, "the allocation is not exhaustive"))
    return Verdict(IPSC, SATISFIED)


# Cumulative ballots --------------------------------------------------------


def check_cumulative_pr(instance: Instance, profile: Profile, allocation, caps: Caps | None = None) -> Verdict:
    """
    Proportional representation for cumulative ballots, checked as written:
    for every integer ``l`` in ``1..b``, group ``N`` with ``|N| b / n >= l``
    and bundle ``P`` with ``c(P) <= l``, if every member puts positive weight
    on every project of ``P`` and every voter outside ``N`` puts zero weight
    on every project outside ``P``, then ``P`` must be selected.

    Raises
    ------
        NonIntegerBudget
            The budget limit is not an integer.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 2)
    >>> prof = Profile.cumulative([{"p1": 1}, {"p1": 1}])
    >>> check_cumulative_pr(inst, prof, {"p1"}).status
    'satisfied'
    >>> v = check_cumulative_pr(inst, prof, {"p2"})
    >>> v.status, sorted(v.witness.bundle)
    ('violated', ['p1'])
    """
    profile.require(CUMULATIVE)
    b = instance.budget_limit
    if b.denominator != 1:
        raise NonIntegerBudget(f"proportional representation ranges over 1..b and needs an integer b, got {b}")
    caps = resolve(caps)
    ctx = _Context(instance, profile, allocation, caps, "cumulative-pr")
    lat, C, n = ctx.lat, ctx.C, ctx.n
    supp = [ctx.mask_of(bal.referenced()) for bal in profile.ballots]
    full = (1 << ctx.m) - 1
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        ell_max = min(int(b), (len(mem) * b.numerator) // n)
        if ell_max < 1:
            continue
        T = full
        for i in mem:
            T &= supp[i]
        outside = 0
        for i in range(n):
            if not (g >> i) & 1:
                outside |= supp[i]
        if outside & ~T:
            continue
        ok = lat.subsets_of(T) & lat.supersets_of(outside) & (lat.masks != 0)
        ok &= C <= ell_max * ctx.cost_scale
        ok &= (lat.masks & ~ctx.pi) != 0
        P = lat.first(ok)
        if P is not None:
            cost = Fraction(int(C[P]), ctx.cost_scale)
            ell = max(Fraction(1), Fraction(-(-cost.numerator // cost.denominator)))
            return Verdict("cumulative-pr", VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P), ell=ell))
    return Verdict("cumulative-pr", SATISFIED)
