"""
Priceable rules can leave money on the table, and sometimes every
exhaustive allocation is unpriceable.

The first part runs equal shares on a two-voter election where only half the
voters support the single project, then repairs the outcome with each
completion method. The second part lists every feasible allocation of a
small election together with its priceability and exhaustiveness.
"""

from pbengine.errors import MethodInapplicable
from pbengine.generators import feasible_allocations
from pbengine.market import BudgetVariation, GreedyCompletion, Perturbation, complete
from pbengine.model import Instance, Profile, is_exhaustive
from pbengine.priceability import check_priceable
from pbengine.rules import get_rule
from pbengine.satisfaction import CARD


def completion():
    inst = Instance.from_costs({"p1": 2}, 2)
    approval = Profile.approval([["p1"], []])
    cardinal = Profile.cardinal([{"p1": 1}, {"p1": 0}])
    for label, prof, rule in (("approval", approval, get_rule("mes", CARD)), ("cardinal", cardinal, get_rule("mes"))):
        print(f"equal shares alone ({label}):", sorted(rule(inst, prof).selected))
        for method in (GreedyCompletion("score"), BudgetVariation(1), Perturbation()):
            try:
                out = sorted(complete(rule, method, inst, prof).selected)
            except MethodInapplicable as exc:
                out = f"inapplicable ({exc})"
            print(f"  completed by {type(method).__name__}: {out}")


def incompatibility():
    inst = Instance.from_costs({"p1": 1, "p2": 1, "p3": 2, "p4": 3}, 3)
    prof = Profile.approval([["p1", "p2", "p3"], ["p4"], ["p4"], []])
    print("\nallocation        priceable  exhaustive")
    for alloc in feasible_allocations(inst):
        priced = check_priceable(inst, prof, alloc).satisfied
        print(f"  {str(sorted(alloc.selected)):<16} {priced!s:<10} {is_exhaustive(inst, alloc)}")


if __name__ == "__main__":
    completion()
    incompatibility()
