import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import Plain, knapsack, sat
from pbengine.errors import EmptyApprovalSet, MissingContext
from pbengine.model import ApprovalBallot, Instance, OrdinalBallot, WeakOrdinalBallot
from pbengine.satisfaction import (
    CARD,
    CC,
    COST,
    LOG,
    SQRT,
    ScoringVector,
    additive,
    by_name,
    evaluate,
    is_dns,
    positional_cardinal,
    relative_satisfaction,
    share,
)
from strategies import approval_profiles, instances

V3 = ApprovalBallot({"p3", "p4", "p5"})


def test_card_and_cost_on_e1(E1):
    inst, _ = E1
    assert evaluate(CARD, V3, {"p2", "p3", "p4", "p5"}, inst) == 3
    assert evaluate(COST, V3, {"p2", "p3", "p4", "p5"}, inst) == 3


def test_cc_indicator(E1):
    inst, _ = E1
    ballot = ApprovalBallot({"p1"})
    assert evaluate(CC, ballot, {"p2"}, inst) == 0
    assert evaluate(CC, ApprovalBallot({"p2"}), {"p2", "p3"}, inst) == 1


def test_share_on_e3(E3):
    inst, prof = E3
    assert evaluate(share(prof), prof.ballots[0], {"p1", "p2"}, inst) == 1
    with pytest.raises(MissingContext):
        evaluate(by_name("share"), prof.ballots[0], {"p1"}, inst)


def test_log_and_sqrt_values(E1):
    inst, _ = E1
    assert LOG.real_value(["p3", "p4"], inst) == pytest.approx(math.log(3))
    assert SQRT.real_value(["p2", "p3"], inst) == pytest.approx(2.0)


def test_relative_satisfaction_examples(E1):
    inst, _ = E1
    assert relative_satisfaction(COST, V3, {"p3"}, inst) == Fraction(1, 3)
    assert relative_satisfaction(COST, V3, {"p3", "p4", "p5"}, inst) == 1
    assert relative_satisfaction(COST, ApprovalBallot({"p1"}), set(), inst) == 0
    with pytest.raises(EmptyApprovalSet):
        relative_satisfaction(COST, ApprovalBallot(set()), set(), inst)


def test_positional_scoring():
    ranked = positional_cardinal(OrdinalBallot(("p2", "p1", "p3")), (2, 1, 0))
    assert (ranked.score("p2"), ranked.score("p1"), ranked.score("p3")) == (2, 1, 0)
    tied = positional_cardinal(WeakOrdinalBallot((frozenset({"p1", "p2"}),)), (2, 0))
    assert (tied.score("p1"), tied.score("p2")) == (1, 1)
    zero = positional_cardinal(OrdinalBallot(("p1", "p2")), (0, 0))
    assert zero.score("p1") == zero.score("p2") == 0


def test_scoring_vector_must_be_nonincreasing():
    with pytest.raises(ValueError):
        ScoringVector((0, 1))


def test_dns_examples():
    inst = Instance.from_costs({"cheap": 1, "dear": 2}, 2)
    assert is_dns(COST, inst)
    assert is_dns(CARD, inst)
    assert not is_dns(additive({"cheap": 1, "dear": 100}), inst)


@given(st.data())
def test_monotone_and_zero_only_on_empty(data):
    inst = data.draw(instances())
    prof = data.draw(approval_profiles(inst))
    for name in ("card", "cost", "cc", "share", "log", "sqrt"):
        fn = by_name(name, prof)
        chain = data.draw(st.permutations(inst.projects))
        prev = fn.real_value([], inst)
        assert prev == 0
        for k in range(1, len(chain) + 1):
            cur = fn.real_value(chain[:k], inst)
            assert cur > 0
            assert cur >= prev
            prev = cur


@given(st.data())
def test_additive_functions(data):
    inst = data.draw(instances())
    subset = data.draw(st.sets(st.sampled_from(inst.projects)))
    for fn in (CARD, COST):
        assert fn.value(subset, inst) == sum((fn.value([p], inst) for p in subset), Fraction(0))


@given(instances(min_m=2))
def test_log_and_sqrt_subadditive(inst):
    pair = inst.projects[:2]
    for fn in (LOG, SQRT):
        assert fn.real_value(pair, inst) < sum(fn.real_value([p], inst) for p in pair)


@given(instances())
def test_builtins_are_dns(inst):
    for fn in (CARD, COST, LOG, SQRT):
        assert is_dns(fn, inst)


@given(st.data())
def test_relative_satisfaction_bounds(data):
    inst = data.draw(instances())
    prof = data.draw(approval_profiles(inst))
    plain = Plain(inst, prof)
    for i, ballot in enumerate(prof.ballots):
        if not ballot.approved:
            continue
        approved = sorted(ballot.approved)
        best = knapsack([plain.cost[p] for p in approved], [plain.cost[p] for p in approved], plain.b)
        chosen = data.draw(st.sets(st.sampled_from(approved)))
        if plain.c(chosen) > plain.b:
            continue
        r = relative_satisfaction(COST, ballot, chosen, inst)
        assert 0 <= r <= 1
        assert r == sat("cost", plain)(chosen) / best
        if plain.c(chosen) == best:
            assert r == 1
