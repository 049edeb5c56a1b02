"""
One entry point for every allocation-level axiom, addressed by name.
"""

from __future__ import annotations

from pbengine.caps import Caps
from pbengine.cohesion import JR_AXIOMS, check_core, check_jr
from pbengine.errors import UnknownAxiom
from pbengine.model import APPROVAL, Instance, Profile, as_allocation
from pbengine.priceability import check_priceable
from pbengine.proportionality import CPSC, IPSC, check_cumulative_pr, check_fair_share, check_psc
from pbengine.satisfaction import SatisfactionFunction
from pbengine.verdict import SATISFIED, VIOLATED, AllocationWitness, Verdict

CORE_AXIOMS = {"core": "exact", "core-sat-approx": "sat_approx", "core-entitlement": "entitlement_approx"}
PRICEABILITY_AXIOMS = {
    "priceable": "none",
    "priceable-alpha-gt-b": "alpha_gt_b",
    "priceable-c6-and-alpha-gt-b": "c6_and_alpha_gt_b",
    "priceable-c6": "c6_and_alpha_gt_b",
}
OTHER_AXIOMS = ("fair-share", CPSC, IPSC, "cumulative-pr", "exhaustive")
AXIOMS = tuple(JR_AXIOMS) + tuple(CORE_AXIOMS) + tuple(PRICEABILITY_AXIOMS) + OTHER_AXIOMS


def check_exhaustive(instance: Instance, allocation) -> Verdict:
    """
    Whether no unselected project fits in the leftover budget.

    Examples
    --------
    >>> e1 = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    >>> v = check_exhaustive(e1, {"p2", "p3", "p4"})
    >>> v.status, sorted(v.witness.selected)
    ('violated', ['p2', 'p3', 'p4', 'p5'])
    """
    alloc = as_allocation(instance, allocation)
    left = instance.budget_limit - alloc.total_cost
    for p in instance.projects:
        if p not in alloc.selected and instance.costs[p] <= left:
            return Verdict("exhaustive", VIOLATED, AllocationWitness(alloc.selected | {p}, f"{p} still fits"))
    return Verdict("exhaustive", SATISFIED)


def check_axiom(
    name: str,
    instance: Instance,
    profile: Profile,
    allocation,
    sat: SatisfactionFunction | None = None,
    alpha=None,
    relative_budget: bool = False,
    caps: Caps | None = None,
) -> Verdict:
    """
    Check the axiom called ``name`` (one of :py:data:`AXIOMS`).

    ``sat`` is used for approval profiles only; score-based profiles are
    judged on their scores. ``alpha`` is the factor of the approximate core
    variants.

    Raises
    ------
        UnknownAxiom
            ``name`` is not in :py:data:`AXIOMS`.

    Examples
    --------
    >>> from pbengine.satisfaction import CARD
    >>> e2 = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    >>> check_axiom("ejr", e2, prof, {"p1", "p2"}, CARD).status
    'satisfied'
    """
    if name not in AXIOMS:
        raise UnknownAxiom(f"unknown axiom {name!r}; known: {', '.join(AXIOMS)}")
    s = sat if profile.kind == APPROVAL else None
    if name in JR_AXIOMS:
        return check_jr(instance, profile, allocation, name, s, relative_budget, caps)
    if name in CORE_AXIOMS:
        return check_core(instance, profile, allocation, CORE_AXIOMS[name], alpha, s, caps)
    if name in PRICEABILITY_AXIOMS:
        return check_priceable(instance, profile, allocation, PRICEABILITY_AXIOMS[name])
    if name == "fair-share":
        return check_fair_share(instance, profile, allocation)
    if name in (CPSC, IPSC):
        return check_psc(instance, profile, allocation, name, caps)
    if name == "cumulative-pr":
        return check_cumulative_pr(instance, profile, allocation, caps)
    return check_exhaustive(instance, allocation)
