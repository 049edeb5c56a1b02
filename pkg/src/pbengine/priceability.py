"""
Priceability: does an entitlement and a contribution scheme fund exactly the
selected projects?

Conditions on a price system ``(alpha, gamma)`` for an allocation ``pi``:

* C1: voters only pay for projects they support (positive score);
* C2: only selected projects receive money;
* C3: no voter pays more than ``alpha``;
* C4: every selected project is paid in full;
* C5: the supporters of an unselected project have at most its cost left;
* C6 (optional): the supporters of an unselected project ``p`` pay at most
  ``c(p)`` towards any single selected project.

Existence is a linear feasibility problem in ``alpha`` and the contributions
of supporters to selected projects; it is solved exactly.
"""

from __future__ import annotations

from fractions import Fraction

from pbengine.errors import WrongProfileVariant
from pbengine.lp import OPTIMAL, solve_lp
from pbengine.market import PriceSystem
from pbengine.model import APPROVAL, CARDINAL, CUMULATIVE, Instance, Profile, as_allocation
from pbengine.verdict import SATISFIED, VIOLATED, Verdict

STRENGTHENINGS = ("none", "alpha_gt_b", "c6_and_alpha_gt_b")


def validate_price_system(instance: Instance, profile: Profile, allocation, prices: PriceSystem, c6: bool = False) -> list:
    """
    Conditions (``"C1"`` .. ``"C6"``) that ``prices`` fails for ``allocation``.

    An empty list means the price system is valid.

    Examples
    --------
    >>> inst = Instance.unit_cost(2, 2)
    >>> prof = Profile.approval([["p1"], ["p2"]])
    >>> ps = PriceSystem(1, {(0, "p1"): 1, (1, "p2"): 1})
    >>> validate_price_system(inst, prof, {"p1", "p2"}, ps)
    []
    >>> validate_price_system(inst, prof, {"p1"}, ps)
    ['C2']
    """
    alloc = as_allocation(instance, allocation)
    failed = []
    gamma = prices.contributions
    alpha = prices.alpha
    if any(v < 0 for v in gamma.values()) or alpha < 0:
        failed.append("nonnegativity")
    if any(profile.score(i, p) <= 0 for (i, p), v in gamma.items() if v > 0):
        failed.append("C1")
    if any(p not in alloc.selected for (i, p), v in gamma.items() if v > 0):
        failed.append("C2")
    spent = [prices.spent(i) for i in range(profile.n)]
    if any(s > alpha for s in spent):
        failed.append("C3")
    if any(sum((prices.gamma(i, p) for i in range(profile.n)), Fraction(0)) != instance.costs[p] for p in alloc.selected):
        failed.append("C4")
    rest = [p for p in instance.projects if p not in alloc.selected]
    if any(sum((alpha - spent[i] for i in profile.supporters(p)), Fraction(0)) > instance.costs[p] for p in rest):
        failed.append("C5")
    if c6:
        for p in rest:
            supp = profile.supporters(p)
            if any(sum((prices.gamma(i, q) for i in supp), Fraction(0)) > instance.costs[p] for q in alloc.selected):
                failed.append("C6")
                break
    return failed


def find_price_system(
    instance: Instance, profile: Profile, allocation, c6: bool = False, maximize_alpha_below=None
) -> PriceSystem | None:
    """
    A price system satisfying C1 to C5 (and C6 if asked), or None.

    With ``maximize_alpha_below = x`` the returned system has the largest
    ``alpha`` not exceeding ``x``.
    """
    alloc = as_allocation(instance, allocation)
    selected = [p for p in instance.projects if p in alloc.selected]
    for p in selected:
        if not profile.supporters(p):
            return None
    pairs = [(i, p) for p in selected for i in profile.supporters(p)]
    col = {pair: k + 1 for k, pair in enumerate(pairs)}
    nv = len(pairs) + 1
    by_voter: dict = {}
    for (i, p), k in col.items():
        by_voter.setdefault(i, []).append(k)
    ub = []
    eq = []
    for i, ks in by_voter.items():  # C3
        row = {k: 1 for k in ks}
        row[0] = -1
        ub.append((row, 0))
    for p in selected:  # C4
        eq.append(({col[(i, p)]: 1 for i in profile.supporters(p)}, instance.costs[p]))
    rest = [p for p in instance.projects if p not in alloc.selected]
    for p in rest:  # C5
        supp = profile.supporters(p)
        if not supp:
            continue
        row = {0: len(supp)}
        for i in supp:
            for k in by_voter.get(i, ()):
                row[k] = row.get(k, 0) - 1
        ub.append((row, instance.costs[p]))
    if c6:
        for p in rest:
            supp = set(profile.supporters(p))
            for q in selected:
                row = {col[(i, q)]: 1 for i in profile.supporters(q) if i in supp}
                if row:
                    ub.append((row, instance.costs[p]))
    if maximize_alpha_below is not None:
        ub.append(({0: 1}, Fraction(maximize_alpha_below)))
        res = solve_lp(nv, {0: 1}, ub=ub, eq=eq, maximize=True)
    else:
        res = solve_lp(nv, {0: 1}, ub=ub, eq=eq)
    if res.status != OPTIMAL:
        return None
    return PriceSystem(res.x[0], {pair: res.x[k] for pair, k in col.items()})


def check_priceable(instance: Instance, profile: Profile, allocation, strengthening: str = "none") -> Verdict:
    """
    Decide priceability exactly.

    Parameters
    ----------
        strengthening : str
            ``none`` (C1 to C5), ``alpha_gt_b`` (additionally ``alpha > b``)
            or ``c6_and_alpha_gt_b`` (C6 as well). The strict bound is decided
            by maximising ``alpha`` over the system capped at ``b + 1``.

    Returns
    -------
        Verdict
            Satisfied verdicts carry the price system as certificate. A
            violation is the infeasibility of the system and has no witness.

    Examples
    --------
    >>> e2 = Instance.unit_cost(3, 2)
    >>> prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    >>> v = check_priceable(e2, prof, {"p1"})
    >>> v.status, validate_price_system(e2, prof, {"p1"}, v.certificate)
    ('satisfied', [])
    >>> check_priceable(Instance.unit_cost(2, 1), Profile.approval([["p1"]]), {"p2"}).status
    'violated'
    """
    if strengthening not in STRENGTHENINGS:
        raise ValueError(f"strengthening must be one of {STRENGTHENINGS}")
    if profile.kind not in (APPROVAL, CARDINAL, CUMULATIVE):
        raise WrongProfileVariant(f"priceability needs approval or cardinal ballots, not {profile.kind}")
    axiom = "priceable" if strengthening == "none" else f"priceable-{strengthening.replace('_', '-')}"
    params = {"strengthening": strengthening}
    b = instance.budget_limit
    c6 = strengthening == "c6_and_alpha_gt_b"
    if strengthening == "none":
        ps = find_price_system(instance, profile, allocation)
        if ps is None:
            return Verdict(axiom, VIOLATED, None, params, note="no price system satisfies C1-C5")
        return Verdict(axiom, SATISFIED, None, params, certificate=ps)
    ps = find_price_system(instance, profile, allocation, c6=c6, maximize_alpha_below=b + 1)
    if ps is None:
        return Verdict(axiom, VIOLATED, None, params, note="the price-system constraints are infeasible")
    if ps.alpha <= b:
        return Verdict(axiom, VIOLATED, None, params, note=f"the largest feasible entitlement is {ps.alpha} <= b")
    return Verdict(axiom, SATISFIED, None, params, certificate=ps)
