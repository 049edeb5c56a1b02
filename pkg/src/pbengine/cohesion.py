"""
Justified-representation axioms and the core, checked by exhaustive search.

Every checker enumerates voter groups ``N`` by size and then
lexicographically, and for each group evaluates the defining inequality on
all bundles ``P`` at once over the subset lattice of the projects. The first
violating group, together with its first violating bundle in the same
order, is returned as the witness. All quantities are exact integers after
scaling costs and satisfactions to common denominators.

Approval satisfaction functions are compared on their additive scale
``w(P)``: every built-in function is a strictly increasing transform of
``w`` (or, for CC, an indicator of it), so comparisons between two sets
never need the transcendental value.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from pbengine.caps import Caps, resolve
from pbengine.errors import MissingSatisfaction, UnsupportedObjective, WrongProfileVariant
from pbengine.lattice import int_array, lattice, members, scale
from pbengine.model import APPROVAL, CARDINAL, CUMULATIVE, Instance, Profile, as_allocation
from pbengine.satisfaction import SatisfactionFunction
from pbengine.verdict import SATISFIED, VIOLATED, CohesiveWitness, Verdict

STRONG_EJR = "strong-ejr"
EJR = "ejr"
EJR1 = "ejr1"
EJRX = "ejrx"
PJR = "pjr"
PJR1 = "pjr1"
PJRX = "pjrx"
LOCAL_BPJR_L = "local-bpjr-l"
STRONG_BPJR_L = "strong-bpjr-l"
FJR = "fjr"

JR_AXIOMS = (STRONG_EJR, EJR, EJR1, EJRX, PJR, PJR1, PJRX, LOCAL_BPJR_L, STRONG_BPJR_L, FJR)
CARDINAL_JR = (STRONG_EJR, EJR, EJR1, PJR, PJR1, FJR)

CORE_MODES = ("exact", "sat_approx", "entitlement_approx")


class _Context:
    """Scaled integer data shared by all checks on one (instance, profile, allocation)."""

    def __init__(self, instance: Instance, profile: Profile, allocation, caps: Caps, what: str, relative_budget=False):
        caps.check(profile.n, instance.m, what)
        self.instance = instance
        self.profile = profile
        self.allocation = as_allocation(instance, allocation)
        self.projects = instance.projects
        self.m = instance.m
        self.n = profile.n
        self.lat = lattice(self.m)
        self.groups = lattice(self.n)
        idx = instance.index
        self.pi = sum(1 << idx[p] for p in self.allocation.selected)
        b = self.allocation.total_cost if relative_budget else instance.budget_limit
        ints, self.cost_scale = scale([instance.costs[p] for p in self.projects] + [b])
        self.cost_ints = ints[:-1]
        self.B = ints[-1]
        bound = (sum(self.cost_ints) + self.B + 1) * (self.n + 1) * 4
        self.C = self.lat.sums(int_array(self.cost_ints, bound))
        self.budget = b
        self.affordable = [self.n * self.C <= k * self.B for k in range(self.n + 1)]

    def mask_of(self, projects) -> int:
        idx = self.instance.index
        return sum(1 << idx[p] for p in projects)

    def bundle(self, mask: int) -> frozenset:
        return frozenset(self.projects[j] for j in members(mask))

    def group(self, mask: int) -> frozenset:
        return frozenset(members(mask))


class _ApprovalData:
    """Approval masks and the comparison-scale satisfaction table ``W``."""

    def __init__(self, ctx: _Context, sat: SatisfactionFunction):
        profile, instance = ctx.profile, ctx.instance
        if sat.kind == "share" and sat.context is None:
            sat = sat.with_context(profile)
        self.sat = sat
        ints, _ = scale([sat.weight(p, instance) for p in ctx.projects])
        bound = (sum(ints) + 1) * 4
        w = int_array(ints, bound)
        W = ctx.lat.sums(w)
        if sat.transform == "indicator":
            W = (W > 0).astype(np.int64)
        self.W = W
        self.LO = -1
        self.HI = int(W.max()) + 1
        self.A = [ctx.mask_of(b.approved) for b in profile.ballots]
        self.a = [A & ctx.pi for A in self.A]
        self.Wa = [int(W[a]) for a in self.a]

    def plus_one(self, ctx: _Context, base: int, fill: int) -> list:
        """``W[base + p]`` for every project ``p`` outside the allocation, ``fill`` for the rest."""
        return [int(self.W[base | (1 << j)]) if not (ctx.pi >> j) & 1 else fill for j in range(ctx.m)]


def _require_sat(axiom, profile, sat):
    if profile.kind == APPROVAL:
        if sat is None:
            raise MissingSatisfaction(f"{axiom} on approval ballots needs a satisfaction function")
        return
    if profile.kind in (CARDINAL, CUMULATIVE):
        if sat is not None:
            raise WrongProfileVariant(f"{axiom} on {profile.kind} ballots uses the scores; drop the satisfaction function")
        return
    raise WrongProfileVariant(f"{axiom} is not defined for {profile.kind} ballots")


def _params(sat, relative_budget, **extra) -> dict:
    out = {"sat": sat.name if sat is not None else None, "relative_budget": relative_budget}
    out.update(extra)
    return out


def check_jr(
    instance: Instance,
    profile: Profile,
    allocation,
    axiom: str,
    sat: SatisfactionFunction | None = None,
    relative_budget: bool = False,
    caps: Caps | None = None,
    ell_domain: str = "continuum",
) -> Verdict:
    """
    Check a justified-representation axiom.

    Parameters
    ----------
        instance, profile, allocation
            The election and the allocation to judge.
        axiom : str
            One of :py:data:`JR_AXIOMS`. Cardinal profiles support
            :py:data:`CARDINAL_JR`; approval profiles support all of them.
        sat : SatisfactionFunction, optional
            Required for approval profiles, except for ``strong-bpjr-l``
            which always measures cost.
        relative_budget : bool
            Replace the budget limit by the cost of the allocation in the
            group-size condition.
        caps : Caps, optional
            Enumeration limits.
        ell_domain : str
            For ``strong-bpjr-l``: ``continuum`` (every real amount in
            ``[1, b]``) or ``cost_points`` (only amounts equal to the cost of
            a commonly approved bundle).

    Returns
    -------
        Verdict

    Raises
    ------
        CapExceeded, MissingSatisfaction, WrongProfileVariant

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> e2 = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    >>> v = check_jr(e2, prof, {"p1", "p2"}, "strong-ejr", CARD)
    >>> v.status, sorted(v.witness.group), sorted(v.witness.bundle)
    ('violated', [2, 3], ['p3'])
    >>> check_jr(e2, prof, {"p1", "p2"}, "ejr", CARD).status
    'satisfied'
    """
    if axiom not in JR_AXIOMS:
        raise ValueError(f"unknown axiom {axiom!r}")
    caps = resolve(caps)
    if axiom == STRONG_BPJR_L:
        if profile.kind != APPROVAL:
            raise WrongProfileVariant("strong-bpjr-l is defined for approval ballots")
        if ell_domain not in ("continuum", "cost_points"):
            raise ValueError("ell_domain must be 'continuum' or 'cost_points'")
        ctx = _Context(instance, profile, allocation, caps, axiom, relative_budget)
        return _strong_bpjr(ctx, relative_budget, ell_domain)
    _require_sat(axiom, profile, sat)
    ctx = _Context(instance, profile, allocation, caps, axiom, relative_budget)
    if profile.kind == APPROVAL:
        return _approval_jr(ctx, axiom, _ApprovalData(ctx, sat), relative_budget)
    if axiom not in CARDINAL_JR:
        raise WrongProfileVariant(f"{axiom} is defined for approval ballots with a satisfaction function")
    return _cardinal_jr(ctx, axiom, relative_budget)


# Approval ------------------------------------------------------------------


def _approval_jr(ctx: _Context, axiom: str, data: _ApprovalData, relative_budget: bool) -> Verdict:
    lat, W = ctx.lat, data.W
    params = _params(data.sat, relative_budget)
    if axiom == FJR:
        return _core_search(ctx, _approval_utilities(ctx, data), data.Wa, FJR, params)
    per_voter_max = per_voter_min = None
    if axiom == EJR1:
        per_voter_max = [lat.maxes(np.array(data.plus_one(ctx, a, data.LO), dtype=W.dtype), data.LO) for a in data.a]
    if axiom == EJRX:
        per_voter_min = [lat.mins(np.array(data.plus_one(ctx, a, data.HI), dtype=W.dtype), data.HI) for a in data.a]
    union_cache: dict = {}
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        T = -1
        U = 0
        for i in mem:
            T &= data.A[i]
            U |= data.a[i]
        T &= (1 << ctx.m) - 1
        if T == 0:
            continue
        valid = ctx.affordable[len(mem)] & lat.subsets_of(T)
        if axiom == STRONG_EJR:
            fail = W > min(data.Wa[i] for i in mem)
        elif axiom == EJR:
            fail = W > max(data.Wa[i] for i in mem)
        elif axiom == EJR1:
            fail = valid.copy()
            for i in mem:
                fail &= (data.Wa[i] < W) & (per_voter_max[i] <= W)
        elif axiom == EJRX:
            fail = valid.copy()
            for i in mem:
                fail &= per_voter_min[i] <= W
        elif axiom == PJR:
            fail = W[U] < W
        elif axiom in (PJR1, PJRX):
            if (U, axiom) not in union_cache:
                if axiom == PJR1:
                    union_cache[(U, axiom)] = lat.maxes(np.array(data.plus_one(ctx, U, data.LO), dtype=W.dtype), data.LO)
                else:
                    union_cache[(U, axiom)] = lat.mins(np.array(data.plus_one(ctx, U, data.HI), dtype=W.dtype), data.HI)
            ext = union_cache[(U, axiom)]
            fail = (W[U] < W) & (ext <= W) if axiom == PJR1 else ext <= W
        else:
            fail = _local_bpjr_fail(ctx, W, T, U, valid)
        P = lat.first(valid & fail)
        if P is not None:
            return Verdict(axiom, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P)), params)
    return Verdict(axiom, SATISFIED, None, params)


def _local_bpjr_fail(ctx: _Context, W, T: int, U: int, valid) -> np.ndarray:
    """Bundles ``P`` strictly containing ``U`` whose satisfaction is optimal among subsets of ``T`` costing at most ``c(P)``."""
    lat, C = ctx.lat, ctx.C
    fail = np.zeros(lat.size, dtype=bool)
    if U & ~T:
        return fail
    cand = valid & lat.supersets_of(U) & (lat.masks != U)
    if not cand.any():
        return fail
    sub = np.flatnonzero(lat.subsets_of(T))
    order = np.argsort(C[sub], kind="stable")
    costs = C[sub][order]
    best = np.maximum.accumulate(W[sub][order])
    idx = np.flatnonzero(cand)
    pos = np.searchsorted(costs, C[idx], side="right") - 1
    fail[idx] = W[idx] == best[pos]
    return fail


def _strong_bpjr(ctx: _Context, relative_budget: bool, ell_domain: str) -> Verdict:
    lat, C, n = ctx.lat, ctx.C, ctx.n
    params = {"sat": "cost", "relative_budget": relative_budget, "ell_domain": ell_domain}
    A = [ctx.mask_of(b.approved) for b in ctx.profile.ballots]
    a = [x & ctx.pi for x in A]
    one = ctx.cost_scale
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        T = (1 << ctx.m) - 1
        U = 0
        for i in mem:
            T &= A[i]
            U |= a[i]
        share = len(mem) * ctx.B  # n * (|N| b / n), scaled
        if ell_domain == "continuum":
            top = min(share, n * int(C[T]))
            if top >= n * one and n * int(C[U]) < top:
                ell = Fraction(top, n * ctx.cost_scale)
                return Verdict(STRONG_BPJR_L, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(T), ell=ell), params)
        else:
            ok = lat.subsets_of(T) & (C >= one) & (n * C <= share) & (C > C[U])
            P = lat.first(ok)
            if P is not None:
                ell = Fraction(int(C[P]), ctx.cost_scale)
                return Verdict(STRONG_BPJR_L, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P), ell=ell), params)
    return Verdict(STRONG_BPJR_L, SATISFIED, None, params)


# Cardinal ------------------------------------------------------------------


class _ScoreData:
    def __init__(self, ctx: _Context):
        prof = ctx.profile
        raw = [[prof.score(i, p) for p in ctx.projects] for i in range(ctx.n)]
        flat, self.scale = scale([v for row in raw for v in row])
        bound = (max([sum(flat[i * ctx.m:(i + 1) * ctx.m]) for i in range(ctx.n)] + [0]) + 1) * (ctx.n + 1) * 4
        self.S = [int_array(flat[i * ctx.m:(i + 1) * ctx.m], bound) for i in range(ctx.n)]
        self.dtype = self.S[0].dtype if self.S else np.int64
        inside = [(ctx.pi >> j) & 1 for j in range(ctx.m)]
        self.u = [sum(int(s[j]) for j in range(ctx.m) if inside[j]) for s in self.S]
        self.U = [ctx.lat.sums(s) for s in self.S]
        self.outside = np.array([not x for x in inside], dtype=bool)


def _cardinal_jr(ctx: _Context, axiom: str, relative_budget: bool) -> Verdict:
    lat = ctx.lat
    sd = _ScoreData(ctx)
    params = _params(None, relative_budget)
    if axiom == FJR:
        return _fjr_cardinal(ctx, sd, params)
    inside = ~sd.outside
    ejr1_ext = None
    if axiom == EJR1:
        ejr1_ext = [lat.maxes(np.where(sd.outside, s, -1).astype(sd.dtype), -1) for s in sd.S]
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        alpha = sd.S[mem[0]]
        for i in mem[1:]:
            alpha = np.minimum(alpha, sd.S[i])
        rhs = lat.sums(alpha)
        valid = ctx.affordable[len(mem)]
        if axiom == STRONG_EJR:
            fail = rhs > min(sd.u[i] for i in mem)
        elif axiom == EJR:
            fail = rhs > max(sd.u[i] for i in mem)
        elif axiom == EJR1:
            fail = valid.copy()
            for i in mem:
                fail &= (sd.u[i] < rhs) & (sd.u[i] + ejr1_ext[i] <= rhs)
        else:
            beta = sd.S[mem[0]]
            for i in mem[1:]:
                beta = np.maximum(beta, sd.S[i])
            lhs = int(beta[inside].sum()) if inside.any() else 0
            if axiom == PJR:
                fail = lhs < rhs
            else:
                ext = lat.maxes(np.where(sd.outside, beta, -1).astype(sd.dtype), -1)
                fail = (lhs < rhs) & (lhs + ext <= rhs)
        P = lat.first(valid & fail)
        if P is not None:
            bundle = ctx.bundle(P)
            amap = {p: min(ctx.profile.score(i, p) for i in mem) for p in bundle}
            return Verdict(axiom, VIOLATED, CohesiveWitness(ctx.group(g), bundle, alpha=amap), params)
    return Verdict(axiom, SATISFIED, None, params)


def _fjr_cardinal(ctx: _Context, sd: _ScoreData, params) -> Verdict:
    lat = ctx.lat
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        low = sd.U[mem[0]]
        for i in mem[1:]:
            low = np.minimum(low, sd.U[i])
        fail = low > max(sd.u[i] for i in mem)
        P = lat.first(ctx.affordable[len(mem)] & fail)
        if P is not None:
            bundle = ctx.bundle(P)
            beta = min(sum((ctx.profile.score(i, p) for p in bundle), Fraction(0)) for i in mem)
            return Verdict(FJR, VIOLATED, CohesiveWitness(ctx.group(g), bundle, beta=beta), params)
    return Verdict(FJR, SATISFIED, None, params)


# Core ----------------------------------------------------------------------


def _approval_utilities(ctx: _Context, data: _ApprovalData) -> list:
    """``V_i[P] = s(P and A_i)`` on the comparison scale, for every voter."""
    return [data.W[ctx.lat.masks & A] for A in data.A]


def _core_search(ctx: _Context, util, base, axiom: str, params, improve=None, afford=None) -> Verdict:
    """
    First group (size, then lexicographic) with an affordable bundle that every
    member values strictly above ``base`` (or per ``improve``).
    """
    lat = ctx.lat
    afford = afford if afford is not None else ctx.affordable
    better = [improve(i) if improve else util[i] > base[i] for i in range(ctx.n)]
    for g in ctx.groups.iter_nonempty():
        mem = members(g)
        fail = afford[len(mem)].copy()
        for i in mem:
            fail &= better[i]
            if not fail.any():
                break
        P = lat.first(fail)
        if P is not None:
            return Verdict(axiom, VIOLATED, CohesiveWitness(ctx.group(g), ctx.bundle(P)), params)
    return Verdict(axiom, SATISFIED, None, params)


def _utilities(ctx: _Context, sat):
    """Per-voter utility arrays over all bundles, allocation utilities, and the satisfaction in use."""
    if ctx.profile.kind == APPROVAL:
        data = _ApprovalData(ctx, sat)
        return _approval_utilities(ctx, data), data.Wa, data
    sd = _ScoreData(ctx)
    return sd.U, sd.u, sd


def check_core(
    instance: Instance,
    profile: Profile,
    allocation,
    mode: str = "exact",
    alpha=None,
    sat: SatisfactionFunction | None = None,
    caps: Caps | None = None,
) -> Verdict:
    """
    Check core membership, exactly or approximately.

    Parameters
    ----------
        mode : str
            ``exact``: no group ``N`` and bundle ``P`` with
            ``|N|/n >= c(P)/b`` such that every member strictly prefers ``P``.
            ``sat_approx``: no such pair with ``u_i(P) / alpha`` above
            ``u_i(pi + {p*})`` for every member and every single project ``p*``.
            ``entitlement_approx``: the exact condition restricted to groups
            with ``|N|/n >= alpha * c(P)/b``.
        alpha : rational, optional
            Approximation factor (``>= 1``) for the approximate modes.
        sat : SatisfactionFunction, optional
            Required for approval profiles.

    Raises
    ------
        CapExceeded, MissingSatisfaction, WrongProfileVariant, UnsupportedObjective

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> e2 = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    >>> check_core(e2, prof, {"p1", "p2"}, sat=CARD).status
    'satisfied'
    >>> v = check_core(e2, prof, set(), sat=CARD)
    >>> v.status, sorted(v.witness.group), sorted(v.witness.bundle)
    ('violated', [0, 3], ['p1'])
    """
    if mode not in CORE_MODES:
        raise ValueError(f"mode must be one of {CORE_MODES}")
    caps = resolve(caps)
    _require_sat("core", profile, sat)
    if mode != "exact":
        if alpha is None:
            raise ValueError(f"{mode} needs an approximation factor alpha")
        alpha = Fraction(alpha)
        if alpha < 1:
            raise ValueError("alpha must be at least 1")
    axiom = {"exact": "core", "sat_approx": "core-sat-approx", "entitlement_approx": "core-entitlement"}[mode]
    ctx = _Context(instance, profile, allocation, caps, axiom)
    params = _params(sat, False, **({"alpha": alpha} if alpha is not None else {}))
    util, base, data = _utilities(ctx, sat)
    if mode == "exact":
        return _core_search(ctx, util, base, axiom, params)
    num, den = alpha.numerator, alpha.denominator
    if mode == "entitlement_approx":
        afford = [ctx.n * num * ctx.C <= k * den * ctx.B for k in range(ctx.n + 1)]
        return _core_search(ctx, util, base, axiom, params, afford=afford)
    # sat_approx: the best single extra project for each voter
    if profile.kind == APPROVAL:
        if data.sat.transform not in ("identity", "indicator"):
            raise UnsupportedObjective("the sat-approximate core needs a satisfaction linear in its scale")
        boosted = []
        for i in range(ctx.n):
            extra = [int(data.W[data.a[i] | (1 << j)]) for j in range(ctx.m) if (data.A[i] >> j) & 1 and not (ctx.pi >> j) & 1]
            boosted.append(max(extra + [data.Wa[i]]))
    else:
        boosted = []
        for i in range(ctx.n):
            extra = [int(data.S[i][j]) for j in range(ctx.m) if data.outside[j]]
            boosted.append(base[i] + max(extra + [0]))
    return _core_search(ctx, util, base, axiom, params, improve=lambda i: den * util[i] > num * boosted[i])


def audit_core_entitlement(
    instance: Instance,
    profile: Profile,
    allocation,
    sat: SatisfactionFunction | None = None,
    caps: Caps | None = None,
) -> Fraction:
    """
    Core auditing: the largest ``|N| b / (n c(P))`` over groups ``N`` and
    bundles ``P`` that every member of ``N`` strictly prefers to the allocation.

    The allocation is in the ``alpha``-entitlement approximate core exactly
    for ``alpha`` strictly above the returned value; 0 means no improving
    deviation exists at all.

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> e2 = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    >>> audit_core_entitlement(e2, prof, {"p1", "p2"}, CARD)
    Fraction(1, 2)
    >>> audit_core_entitlement(e2, prof, set(), CARD)
    Fraction(1, 1)
    """
    caps = resolve(caps)
    _require_sat("core audit", profile, sat)
    ctx = _Context(instance, profile, allocation, caps, "core audit")
    util, base, _ = _utilities(ctx, sat)
    count = np.zeros(ctx.lat.size, dtype=np.int64)
    for i in range(ctx.n):
        count += util[i] > base[i]
    best = Fraction(0)
    for P in np.flatnonzero(count > 0):
        c = Fraction(int(ctx.C[P]), ctx.cost_scale)
        best = max(best, Fraction(int(count[P])) * instance.budget_limit / (ctx.n * c))
    return best


def sat_core_alpha(instance: Instance, profile: Profile) -> float:
    """
    ``4 log2(2 u_max / u_min)`` for a cardinal profile, where ``u_max`` is the
    largest utility any voter gets from a feasible allocation and ``u_min``
    the smallest positive one.

    Returns
    -------
        float
            ``nan`` when no voter has a positive score.
    """
    from math import log2

    from pbengine.knapsack import knapsack

    costs = [instance.costs[p] for p in instance.projects]
    u_max = Fraction(0)
    u_min = None
    for i in range(profile.n):
        scores = [profile.score(i, p) for p in instance.projects]
        if not any(scores):
            continue
        _, best = knapsack(costs, scores, instance.budget_limit)
        u_max = max(u_max, best)
        low = min(s for s in scores if s > 0)
        u_min = low if u_min is None else min(u_min, low)
    if u_min is None:
        return float("nan")
    return 4 * log2(2 * u_max / u_min)

