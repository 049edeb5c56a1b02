import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import Plain, best_welfare, greedy, sat
from oracles import mes as mes_oracle
from pbengine.dynamics import (
    Discount,
    LimitRaise,
    Merge,
    Split,
    apply_transform,
    check_monotonicity,
    check_weak_proportionality,
    find_manipulation,
    impossibility_probe,
    is_party_list,
)
from pbengine.errors import InvalidTransform, WrongProfileVariant
from pbengine.generators import party_list_profile, random_approval_profile, random_instance
from pbengine.model import Instance, Profile
from pbengine.rules import get_rule
from pbengine.satisfaction import CARD, COST, LOG, SQRT, by_name, share
from strategies import approval_profiles, cardinal_profiles, instances

MES_LIMIT_INSTANCE = Instance.unit_cost(6, 5)
MES_LIMIT_PROFILE = Profile.approval(
    [
        ["p1", "p2", "p5"],
        ["p1", "p2", "p3", "p6"],
        ["p3", "p5"],
        ["p1", "p2", "p3", "p6"],
        ["p3", "p4", "p6"],
        ["p2", "p4", "p5"],
        ["p3", "p4", "p5"],
    ]
)


def _order(inst):
    return sorted(inst.projects)


# Transforms ------------------------------------------------------------------------


def test_split_example(E1):
    inst, prof = E1
    inst2, prof2 = apply_transform(Split("p1", [("a", 3), ("b", 3)]), inst, prof)
    assert inst2.m == 6
    assert set(prof2.ballots[0].approved) == {"a", "b"}
    assert sum(inst2.costs.values()) == sum(inst.costs.values())


def test_merge_example(E1):
    inst, prof = E1
    inst2, prof2 = apply_transform(Merge(frozenset({"p3", "p4", "p5"}), "q"), inst, prof)
    assert inst2.costs["q"] == 3 and inst2.m == 3
    assert set(prof2.ballots[2].approved) == {"q"}
    assert [set(b.approved) for b in prof2.ballots[:2]] == [{"p1"}, {"p2"}]


def test_invalid_transforms(E1):
    inst, prof = E1
    bad = [
        LimitRaise(inst.budget_limit),
        Discount("p2", 3),
        Discount("p2", 4),
    ]
    for t in bad:
        with pytest.raises(InvalidTransform):
            apply_transform(t, inst, prof)
    with pytest.raises(InvalidTransform):
        apply_transform(Split("p1", [("a", 3), ("b", 2)]), inst, prof)
    with pytest.raises(InvalidTransform):
        apply_transform(Split("p1", [("p2", 3), ("b", 3)]), inst, prof)
    with pytest.raises(InvalidTransform):
        apply_transform(Merge(frozenset(), "q"), inst, prof)
    with pytest.raises(InvalidTransform):
        apply_transform(Merge(frozenset({"p1", "p2"}), "q"), inst, prof)


def test_split_needs_approvals():
    inst = Instance.unit_cost(1, 1)
    with pytest.raises(WrongProfileVariant):
        apply_transform(Split("p1", [("a", Fraction(1, 2)), ("b", Fraction(1, 2))]), inst, Profile.cardinal([{"p1": 1}]))


@given(st.data())
def test_split_then_merge_restores_election(data):
    inst = data.draw(instances())
    prof = data.draw(approval_profiles(inst))
    p = data.draw(st.sampled_from(inst.projects))
    cut = inst.costs[p] * data.draw(st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)]))
    split = Split(p, [("part_a", cut), ("part_b", inst.costs[p] - cut)])
    inst2, prof2 = apply_transform(split, inst, prof)
    assert sum(inst2.costs.values()) == sum(inst.costs.values())
    assert inst2.budget_limit == inst.budget_limit
    inst3, prof3 = apply_transform(Merge(frozenset({"part_a", "part_b"}), p), inst2, prof2)
    assert inst3 == inst
    assert prof3 == prof


# Monotonicity ------------------------------------------------------------------------


@given(st.data())
def test_maxwel_card_discount_monotonic(data):
    inst = data.draw(instances())
    prof = data.draw(approval_profiles(inst))
    p = data.draw(st.sampled_from(inst.projects))
    new = inst.costs[p] * data.draw(st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)]))
    v = check_monotonicity(get_rule("maxwel_card"), "discount", inst, prof, Discount(p, new))
    assert v.status in ("satisfied", "inapplicable")


def test_mes_limit_violation_witness():
    rule = get_rule("mes", CARD)
    v = check_monotonicity(rule, "limit", MES_LIMIT_INSTANCE, MES_LIMIT_PROFILE, LimitRaise(6))
    assert v.violated
    assert v.witness.before == {"p2", "p3", "p5", "p6"}
    assert v.witness.after == {"p1", "p2", "p3", "p4", "p5"}
    plain = Plain(MES_LIMIT_INSTANCE, MES_LIMIT_PROFILE)
    assert mes_oracle(plain, _order(MES_LIMIT_INSTANCE), sat("card", plain)) == v.witness.before
    raised = Plain(MES_LIMIT_INSTANCE.with_budget(6), MES_LIMIT_PROFILE)
    assert mes_oracle(raised, _order(MES_LIMIT_INSTANCE), sat("card", raised)) == v.witness.after


def _search(rule, kind, tries, unit, seed=0):
    """First violating ``(instance, profile, transform)`` among seeded random draws."""
    rng = random.Random(seed)
    for _ in range(tries):
        m, n = rng.randint(2, 6), rng.randint(2, 8)
        inst = random_instance(rng, m, unit_cost=unit)
        prof = random_approval_profile(rng, inst, n, rng.choice([0.3, 0.5, 0.7]))
        if kind == "limit":
            t = LimitRaise(inst.budget_limit + rng.randint(1, 3))
        else:
            p = rng.choice(inst.projects)
            t = Discount(p, inst.costs[p] * Fraction(rng.randint(1, 3), 4))
        v = check_monotonicity(rule, kind, inst, prof, t)
        if v.violated:
            return inst, prof, t, v
    return None


def test_mes_limit_search_finds_violation():
    assert _search(get_rule("mes", CARD), "limit", 2000, unit=True) is not None


def test_greedy_cost_discount_search_finds_violation():
    """Literal search for a discount violation of the greedy cost rule."""
    assert _search(get_rule("greedy_cost"), "discount", 3000, unit=False) is not None


@given(st.data())
def test_greedy_cost_never_drops_a_discounted_project(data):
    # The rule orders projects by approval score alone, which a discount does
    # not change; everything before the project is unchanged and it gets cheaper.
    inst = data.draw(instances(max_m=6))
    prof = data.draw(approval_profiles(inst))
    p = data.draw(st.sampled_from(inst.projects))
    new = inst.costs[p] * data.draw(st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(2, 3)]))
    v = check_monotonicity(get_rule("greedy_cost"), "discount", inst, prof, Discount(p, new))
    assert v.status in ("satisfied", "inapplicable")


@given(st.data())
def test_monotonicity_verdicts_reproducible(data):
    inst = data.draw(instances())
    prof = data.draw(approval_profiles(inst))
    t = LimitRaise(inst.budget_limit + 1)
    for rule_id in ("phragmen", "greedy_card", "maxwel_cost"):
        rule = get_rule(rule_id)
        assert check_monotonicity(rule, "limit", inst, prof, t) == check_monotonicity(rule, "limit", inst, prof, t)


def test_inapplicable_when_project_unselected(E1):
    inst, prof = E1
    v = check_monotonicity(get_rule("maxwel_cost"), "discount", inst, prof, Discount("p2", 2))
    assert v.status == "inapplicable"


# Strategy-proofness ------------------------------------------------------------------


@pytest.mark.parametrize("name", ["card", "cost", "share", "log", "sqrt"])
def test_e1_manipulation(E1, name):
    inst, prof = E1
    rule = get_rule("maxwel_cost")
    assert rule(inst, prof).selected == {"p1"}
    for approximate in (False, True):
        man = find_manipulation(rule, inst, prof, 2, by_name(name, prof), approximate)
        assert man is not None
        assert man.ballot.approved == {"p2", "p3", "p4", "p5"}
        assert man.before.selected == {"p1"}
        assert man.after.selected == {"p2", "p3", "p4", "p5"}


def test_single_voter_cannot_gain():
    inst = Instance.from_costs({"p1": 2, "p2": 1, "p3": 1}, 2)
    prof = Profile.cardinal([{"p1": 3, "p2": 2, "p3": 2}])
    assert find_manipulation(get_rule("maxwel_util"), inst, prof, 0) is None
    approvals = Profile.approval([["p1", "p3"]])
    assert find_manipulation(get_rule("maxwel_card"), inst, approvals, 0, CARD) is None


@given(st.data())
def test_greedy_cost_approximately_strategyproof_for_cost(data):
    inst = data.draw(instances(max_m=4))
    prof = data.draw(approval_profiles(inst, max_n=4))
    rule = get_rule("greedy_cost")
    for i in range(prof.n):
        assert find_manipulation(rule, inst, prof, i, COST, approximate=True) is None


@given(st.data())
def test_manipulation_gain_reverified(data):
    inst = data.draw(instances(max_m=4))
    prof = data.draw(approval_profiles(inst, max_n=4))
    voter = data.draw(st.integers(0, prof.n - 1))
    name = data.draw(st.sampled_from(["card", "cost"]))
    approximate = data.draw(st.booleans())
    rule_id = data.draw(st.sampled_from(["greedy_card", "maxwel_card", "maxwel_cost"]))
    man = find_manipulation(get_rule(rule_id), inst, prof, voter, by_name(name, prof), approximate)
    if man is None:
        return
    plain = Plain(inst, prof)
    truth = plain.approved[voter]
    s = sat(name, plain)
    lied = Profile(tuple(man.ballot if k == voter else b for k, b in enumerate(prof.ballots)))
    before, after = _reference_outcome(rule_id, plain), _reference_outcome(rule_id, Plain(inst, lied))
    assert before == man.before.selected and after == man.after.selected
    assert s(after & truth) > s(before & truth)
    if approximate:
        assert all(s(after & truth) > s((before | {p}) & truth) for p in truth)


def _reference_outcome(rule_id, plain):
    score = {p: len(plain.supporters(p)) for p in plain.projects}
    if rule_id == "greedy_card":
        return greedy(plain, sorted(plain.projects, key=lambda p: -score[p] / plain.cost[p]))
    s = sat("card" if rule_id == "maxwel_card" else "cost", plain)
    best = best_welfare(plain, "util", s)
    optimal = [S for S in plain.feasible() if sum((s(S & a) for a in plain.approved), Fraction(0)) == best]
    # the library breaks welfare ties towards the lexicographically largest indicator vector
    return max(optimal, key=lambda S: [p in S for p in sorted(plain.projects)])


@given(st.data())
def test_cardinal_manipulation_reverified(data):
    inst = data.draw(instances(max_m=3))
    prof = data.draw(cardinal_profiles(inst, max_n=3))
    man = find_manipulation(get_rule("greedy_card"), inst, prof, 0)
    if man is not None:
        plain = Plain(inst, prof)
        assert plain.u(0, man.after.selected) > plain.u(0, man.before.selected)
        assert man.manipulated_value == plain.u(0, man.after.selected)


# Weak proportionality and the impossibility probe --------------------------------------


def test_weak_proportionality_examples():
    inst = Instance.unit_cost(3, 2)
    prof = Profile.approval([["p1", "p2"]] * 3 + [["p3"]])
    assert is_party_list(prof)
    for rule_id in ("phragmen", "maxwel_card"):
        assert check_weak_proportionality(get_rule(rule_id), inst, prof).satisfied
    # MES funds p1 and cannot afford p2 with the 1/6 each supporter has left
    v = check_weak_proportionality(get_rule("mes", CARD), inst, prof)
    assert v.violated and v.witness.project == "p2"
    off_domain = Instance.from_costs({"p1": 2}, 2), Profile.approval([["p1"]])
    assert check_weak_proportionality(get_rule("phragmen"), *off_domain).status == "inapplicable"
    assert not is_party_list(Profile.approval([["p1", "p2"], ["p2"]]))


def test_weak_proportionality_can_be_unsatisfiable():
    # n / b = 1, so all five singly-supported projects are owed but only four fit
    inst = Instance.unit_cost(5, 4)
    prof = Profile.approval([["p1", "p2", "p3", "p4"]] * 3 + [["p5"]])
    for rule_id in ("phragmen", "maxwel_card"):
        v = check_weak_proportionality(get_rule(rule_id), inst, prof)
        assert v.violated
        assert v.witness.project not in get_rule(rule_id)(inst, prof).selected


def test_impossibility_probe_flags_clean_samples():
    trivial = [(Instance.unit_cost(1, 1), Profile.approval([["p1"]]))]
    report = impossibility_probe(get_rule("phragmen"), trivial, CARD)
    assert report["needs_review"]
    cases = []
    for seed in range(6):
        inst = Instance.unit_cost(4, 2)
        cases.append((inst, party_list_profile(seed, inst, 4, 2)))
    report = impossibility_probe(get_rule("maxwel_card"), cases, CARD)
    assert report["cases"] == 6
    assert report["needs_review"] == (report["weak_proportionality_violations"] == 0 and report["manipulable_cases"] == 0)


def test_satisfaction_parameters_accepted(E1):
    inst, prof = E1
    for s in (LOG, SQRT, share(prof)):
        assert find_manipulation(get_rule("maxwel_cost"), inst, prof, 2, s) is not None
