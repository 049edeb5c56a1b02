"""
Audit every feasible allocation of a four-voter, three-project election.

Each of three voters approves one project and a fourth approves all three;
two projects can be funded. Strong EJR is out of reach for every
allocation while EJR is not, and the core audit reports how far each
allocation is from the core.
"""

from pbengine.cohesion import audit_core_entitlement, check_jr
from pbengine.generators import feasible_allocations
from pbengine.model import Instance, Profile
from pbengine.rules import get_rule
from pbengine.satisfaction import CARD


def main():
    inst = Instance.unit_cost(3, 2)
    prof = Profile.approval([["p1"], ["p2"], ["p3"], ["p1", "p2", "p3"]])
    print("allocation     strong-ejr  ejr    core threshold")
    for alloc in feasible_allocations(inst):
        strong = check_jr(inst, prof, alloc, "strong-ejr", CARD).satisfied
        ejr = check_jr(inst, prof, alloc, "ejr", CARD).satisfied
        audit = audit_core_entitlement(inst, prof, alloc, sat=CARD)
        print(f"  {str(sorted(alloc.selected)):<14} {strong!s:<10} {ejr!s:<6} {audit}")
    for rid in ("phragmen", "maximin_support", "greedy_card"):
        print(f"{rid}: {sorted(get_rule(rid)(inst, prof).selected)}")
    print(f"mes: {sorted(get_rule('mes', CARD)(inst, prof).selected)}")


if __name__ == "__main__":
    main()
