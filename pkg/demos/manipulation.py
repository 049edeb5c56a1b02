"""
A voter can gain by misreporting under welfare maximisation.

Budget 6; p1 costs 6, p2 costs 3, p3..p5 cost 1 each. Voter 3 approves
p3, p4, p5 and gets nothing under the cost-welfare optimum {p1}. Reporting
p2 as well tips the optimum to {p2, p3, p4, p5}.
"""

from pbengine.dynamics import find_manipulation
from pbengine.model import Instance, Profile, TieBreakOrder
from pbengine.rules import get_rule
from pbengine.satisfaction import by_name


def main():
    inst = Instance.from_costs({"p1": 6, "p2": 3, "p3": 1, "p4": 1, "p5": 1}, 6)
    prof = Profile.approval([["p1"], ["p2"], ["p3", "p4", "p5"]])
    rule = get_rule("maxwel_cost")
    lex = TieBreakOrder.lexicographic(inst)
    print("truthful outcome:", sorted(rule(inst, prof, lex).selected))
    for name in ("card", "cost", "share", "log", "sqrt"):
        sat = by_name(name, prof)
        man = find_manipulation(rule, inst, prof, 2, sat, approximate=True)
        truth = prof.ballots[2].approved
        before = sat.real_value(man.before.selected & truth, inst)
        after = sat.real_value(man.after.selected & truth, inst)
        print(f"{name:>5}: report {sorted(man.ballot.approved)} -> {sorted(man.after.selected)}, satisfaction {before:.3f} -> {after:.3f}")


if __name__ == "__main__":
    main()
