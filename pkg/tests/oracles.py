"""
Independent brute-force oracles written straight from the definitions.

Nothing here imports the checkers or rules under test: every oracle
unpacks the instance and profile into plain dictionaries and enumerates
coalitions and bundles with itertools. Satisfaction of LOG and SQRT is
compared in floating point (equal costs give bit-identical floats, so the
strict and weak comparisons used by the definitions stay exact on the
small denominators the tests draw from).
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import chain, combinations

F0 = Fraction(0)


# Plain data -----------------------------------------------------------------


def subsets(items):
    items = list(items)
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def nonempty_subsets(items):
    items = list(items)
    return chain.from_iterable(combinations(items, r) for r in range(1, len(items) + 1))


class Plain:
    """Instance and profile unpacked into builtin containers."""

    def __init__(self, instance, profile, allocation=()):
        self.projects = list(instance.projects)
        self.cost = {p: Fraction(instance.costs[p]) for p in self.projects}
        self.b = Fraction(instance.budget_limit)
        self.n = profile.n
        self.voters = list(range(self.n))
        self.kind = profile.kind
        if self.kind == "approval":
            self.approved = [set(bal.approved) for bal in profile.ballots]
            self.score = [{p: Fraction(int(p in a)) for p in self.projects} for a in self.approved]
        elif self.kind in ("cardinal", "cumulative"):
            self.score = [{p: Fraction(profile.score(i, p)) for p in self.projects} for i in self.voters]
            self.approved = [{p for p in self.projects if s[p] > 0} for s in self.score]
        else:
            self.score = None
            self.approved = None
        self.pi = set(getattr(allocation, "selected", allocation))

    def c(self, P) -> Fraction:
        return sum((self.cost[p] for p in P), F0)

    def supporters(self, p) -> list:
        return [i for i in self.voters if p in self.approved[i]]

    def affordable(self, N, P, budget=None) -> bool:
        b = self.b if budget is None else budget
        return Fraction(len(N)) * b >= self.n * self.c(P)

    def common(self, N) -> set:
        out = set(self.projects)
        for i in N:
            out &= self.approved[i]
        return out

    def u(self, i, P) -> Fraction:
        return sum((self.score[i][p] for p in P), F0)

    def feasible(self):
        return [set(S) for S in subsets(self.projects) if self.c(S) <= self.b]


def sat(name, plain: Plain):
    """The satisfaction function ``name`` as a callable on project sets."""
    if name == "card":
        return lambda S: Fraction(len(set(S)))
    if name == "cost":
        return lambda S: plain.c(set(S))
    if name == "cc":
        return lambda S: Fraction(1 if S else 0)
    if name == "share":
        return lambda S: sum((plain.cost[p] / max(len(plain.supporters(p)), 1) for p in set(S)), F0)
    if name == "log":
        return lambda S: math.log1p(float(plain.c(set(S))))
    if name == "sqrt":
        return lambda S: math.sqrt(float(plain.c(set(S))))
    raise ValueError(name)


# Approval justified representation ----------------------------------------------


def cohesive_pairs(plain: Plain, budget=None):
    """Every ``(N, P)`` with ``N`` nonempty and ``P``-cohesive."""
    for N in nonempty_subsets(plain.voters):
        T = plain.common(N)
        for P in subsets(sorted(T)):
            if plain.affordable(N, P, budget):
                yield set(N), set(P)


def approval_pair_ok(plain: Plain, axiom: str, s, N, P) -> bool:
    """Whether the ``P``-cohesive group ``N`` is served as ``axiom`` demands."""
    pi = plain.pi
    sP = s(P)
    own = {i: pi & plain.approved[i] for i in N}
    U = set().union(*own.values())
    missing = P - pi
    if axiom == "strong-ejr":
        return all(s(own[i]) >= sP for i in N)
    if axiom == "ejr":
        return any(s(own[i]) >= sP for i in N)
    if axiom == "ejr1":
        return any(s(own[i]) >= sP or any(s(own[i] | {q}) > sP for q in missing) for i in N)
    if axiom == "ejrx":
        return any(all(s(own[i] | {q}) > sP for q in missing) for i in N)
    if axiom == "pjr":
        return s(U) >= sP
    if axiom == "pjr1":
        return s(U) >= sP or any(s(U | {q}) > sP for q in missing)
    if axiom == "pjrx":
        return all(s(U | {q}) > sP for q in missing)
    if axiom == "local-bpjr-l":
        return _local_bpjr_ok(plain, s, N, P, U)
    raise ValueError(axiom)


def approval_jr(plain: Plain, axiom: str, s, budget=None) -> bool:
    """True iff the allocation satisfies ``axiom`` for satisfaction ``s``."""
    return all(approval_pair_ok(plain, axiom, s, N, P) for N, P in cohesive_pairs(plain, budget))


def _local_bpjr_ok(plain, s, N, P, U) -> bool:
    T = plain.common(N)
    cap = plain.c(P)
    options = [set(Q) for Q in subsets(sorted(T)) if plain.c(Q) <= cap]
    best = max(s(Q) for Q in options)
    for Pstar in subsets(sorted(P)):
        Pstar = set(Pstar)
        if U < Pstar and s(Pstar) == best:
            return False
    return True


def strong_bpjr_l(plain: Plain, budget=None) -> bool:
    """
    For every ``l`` in ``[1, b]`` and group with ``|N| b / n >= l`` whose
    unanimously approved projects cost at least ``l``, the selected projects
    approved by some member cost at least ``l``. The largest admissible
    ``l`` for a group is ``min(|N| b / n, c(T))``, so the group fails iff
    that amount is at least 1 and above ``c(U)``.
    """
    b = plain.b if budget is None else budget
    for N in nonempty_subsets(plain.voters):
        T = plain.common(N)
        U = set().union(*(plain.pi & plain.approved[i] for i in N))
        top = min(Fraction(len(N)) * b / plain.n, plain.c(T))
        if top >= 1 and plain.c(U) < top:
            return False
    return True


def approval_fjr(plain: Plain, s) -> bool:
    """FJR[s]: every affordable ``(N, P)`` has a member with ``s_i(pi) >= s_i(P)``."""
    for N in nonempty_subsets(plain.voters):
        for P in subsets(plain.projects):
            if not plain.affordable(N, P):
                continue
            if not any(s(plain.pi & plain.approved[i]) >= s(set(P) & plain.approved[i]) for i in N):
                return False
    return True


# Cardinal justified representation ----------------------------------------------


def cardinal_pair_ok(plain: Plain, axiom: str, N, P) -> bool:
    """Whether group ``N`` with bundle ``P`` is served as the cardinal ``axiom`` demands."""
    pi = plain.pi
    rhs = sum((min(plain.score[i][p] for i in N) for p in P), F0)
    missing = P - pi
    got = {i: plain.u(i, pi) for i in N}
    if axiom == "strong-ejr":
        return all(got[i] >= rhs for i in N)
    if axiom == "ejr":
        return any(got[i] >= rhs for i in N)
    if axiom == "ejr1":
        return any(got[i] >= rhs or any(plain.score[i][q] + got[i] > rhs for q in missing) for i in N)
    if axiom in ("pjr", "pjr1"):
        lhs = sum((max(plain.score[i][p] for i in N) for p in pi), F0)
        if lhs >= rhs:
            return True
        return axiom == "pjr1" and any(max(plain.score[i][q] for i in N) + lhs > rhs for q in missing)
    if axiom == "fjr":
        beta = min(plain.u(i, P) for i in N)
        return any(got[i] >= beta for i in N)
    raise ValueError(axiom)


def cardinal_jr(plain: Plain, axiom: str, budget=None) -> bool:
    for N in nonempty_subsets(plain.voters):
        for P in subsets(plain.projects):
            if plain.affordable(N, P, budget) and not cardinal_pair_ok(plain, axiom, set(N), set(P)):
                return False
    return True


# Core ---------------------------------------------------------------------------


def _utility(plain: Plain, s=None):
    if s is None:
        return lambda i, S: plain.u(i, S)
    return lambda i, S: s(set(S) & plain.approved[i])


def core(plain: Plain, s=None, entitlement=1) -> bool:
    """Exact core (``entitlement`` 1) or the entitlement-approximate core."""
    util = _utility(plain, s)
    for N in nonempty_subsets(plain.voters):
        for P in subsets(plain.projects):
            if Fraction(len(N)) * plain.b < Fraction(entitlement) * plain.n * plain.c(P):
                continue
            if all(util(i, P) > util(i, plain.pi) for i in N):
                return False
    return True


def sat_approx_core(plain: Plain, alpha, s=None) -> bool:
    """Some member and some single project ``p*`` give ``u(pi + p*) >= u(P) / alpha``."""
    util = _utility(plain, s)
    alpha = Fraction(alpha)
    for N in nonempty_subsets(plain.voters):
        for P in subsets(plain.projects):
            if not plain.affordable(N, P):
                continue
            target = {i: util(i, P) for i in N}
            if not any(alpha * util(i, plain.pi | {q}) >= target[i] for i in N for q in plain.projects):
                return False
    return True


def audit_threshold(plain: Plain, s=None) -> Fraction:
    """Largest ``|N| b / (n c(P))`` over deviations that all members strictly prefer."""
    util = _utility(plain, s)
    best = F0
    for N in nonempty_subsets(plain.voters):
        for P in nonempty_subsets(plain.projects):
            if all(util(i, P) > util(i, plain.pi) for i in N):
                best = max(best, Fraction(len(N)) * plain.b / (plain.n * plain.c(P)))
    return best


# Other fairness notions --------------------------------------------------------


def fair_share(plain: Plain) -> bool:
    for i in plain.voters:
        share = {p: plain.cost[p] / len(plain.supporters(p)) for p in plain.approved[i]}
        got = sum((share[p] for p in plain.approved[i] & plain.pi), F0)
        if got < min(plain.b / plain.n, sum(share.values(), F0)):
            return False
    return True


def exhaustive(plain: Plain) -> bool:
    left = plain.b - plain.c(plain.pi)
    return all(plain.cost[p] > left for p in plain.projects if p not in plain.pi)


def classes_of(instance, ballot) -> list:
    """Indifference classes of an ordinal ballot, unranked projects last."""
    if hasattr(ballot, "ranking"):
        classes = [{p} for p in ballot.ranking]
    else:
        classes = [set(c) for c in ballot.classes]
    seen = set().union(*classes) if classes else set()
    rest = set(instance.projects) - seen
    if rest:
        classes.append(rest)
    return classes


def top_k(classes, k) -> set:
    """``P_1 .. P_{j*+1}`` with ``j*`` largest such that the first ``j*`` classes hold fewer than ``k``."""
    count = 0
    j_star = 0
    for j in range(len(classes) + 1):
        if count < k:
            j_star = j
        if j < len(classes):
            count += len(classes[j])
    return set().union(*classes[: j_star + 1])


def ordinal_psc(instance, profile, allocation, variant) -> bool:
    plain = Plain(instance, profile, allocation)
    classes = [classes_of(instance, bal) for bal in profile.ballots]
    level = [{p: r for r, c in enumerate(cl) for p in c} for cl in classes]
    for P in nonempty_subsets(plain.projects):
        P = set(P)
        rest = set(plain.projects) - P
        for N in nonempty_subsets(plain.voters):
            if not all(level[i][p] <= level[i][q] for i in N for p in P for q in rest):
                continue
            X = {p for p in plain.pi if any(p in top_k(classes[i], len(P)) for i in N)}
            share = Fraction(len(N)) * plain.b / plain.n
            if variant == "cpsc":
                if any(plain.c(X) < plain.c(Q) <= share for Q in subsets(sorted(P))):
                    return False
            elif any(plain.c(X) + plain.cost[q] <= share for q in P - X):
                return False
    return True


def approval_psc(instance, profile, allocation, variant) -> bool:
    plain = Plain(instance, profile, allocation)
    if variant == "cpsc":
        best = max(plain.c(S) for S in plain.feasible())
        return approval_jr(plain, "pjr", sat("cost", plain)) and plain.c(plain.pi) == best
    for N in nonempty_subsets(plain.voters):
        share = Fraction(len(N)) * plain.b / plain.n
        U = set().union(*(plain.pi & plain.approved[i] for i in N))
        if not plain.c(U) < share:
            continue
        for p in plain.common(N) - plain.pi:
            if not plain.cost[p] + plain.c(U) > share:
                return False
    return exhaustive(plain)


def cumulative_pr(plain: Plain) -> bool:
    b = int(plain.b)
    for ell in range(1, b + 1):
        for N in nonempty_subsets(plain.voters):
            if Fraction(len(N)) * plain.b < ell * plain.n:
                continue
            outside = [i for i in plain.voters if i not in N]
            for P in subsets(plain.projects):
                if plain.c(P) > ell:
                    continue
                P = set(P)
                inside_ok = all(plain.score[i][p] > 0 for i in N for p in P)
                outside_ok = all(plain.score[i][q] == 0 for i in outside for q in plain.projects if q not in P)
                if inside_ok and outside_ok and not P <= plain.pi:
                    return False
    return True


# Rules ------------------------------------------------------------------------


def welfare(plain: Plain, S, objective: str, s=None):
    util = _utility(plain, s)
    vals = [util(i, S) for i in plain.voters]
    if objective == "util":
        return sum(vals, F0) if not isinstance(vals[0], float) else sum(vals)
    if objective == "egal":
        return min(vals)
    if objective == "nash":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if objective == "cc":
        return sum((max((plain.score[i][p] for p in S), default=F0) for i in plain.voters), F0)
    raise ValueError(objective)


def best_welfare(plain: Plain, objective: str, s=None):
    return max(welfare(plain, S, objective, s) for S in plain.feasible())


def greedy(plain: Plain, order) -> set:
    chosen, left = set(), plain.b
    for p in order:
        if plain.cost[p] <= left:
            chosen.add(p)
            left -= plain.cost[p]
    return chosen


def knapsack(costs, values, budget) -> Fraction:
    best = F0
    for S in subsets(range(len(costs))):
        if sum((costs[j] for j in S), F0) <= budget:
            best = max(best, sum((values[j] for j in S), F0))
    return best


def phragmen(plain: Plain, order) -> tuple:
    """
    Phragmén as a continuous money process: every voter earns one unit of
    money per unit of time and a project is bought at the first moment its
    supporters together hold ``c(p)``; buying empties their accounts. Voter
    ``i`` holds ``t - paid_i`` at time ``t``, so project ``p`` becomes
    affordable at ``t = (c(p) + sum of paid_i) / #supporters``. The process
    halts when some project due at the earliest moment no longer fits.
    Returns the chosen set and the final amounts paid.
    """
    paid = [F0] * plain.n
    chosen: list = []
    while True:
        due = {}
        for p in plain.projects:
            supp = plain.supporters(p)
            if p in chosen or not supp:
                continue
            due[p] = (plain.cost[p] + sum((paid[i] for i in supp), F0)) / len(supp)
        if not due:
            return set(chosen), paid
        t = min(due.values())
        if any(plain.c(chosen) + plain.cost[p] > plain.b for p in due if due[p] == t):
            return set(chosen), paid
        p = next(q for q in order if q in due and due[q] == t)
        for i in plain.supporters(p):
            paid[i] = t
        chosen.append(p)


def min_max_load(plain: Plain, projects) -> Fraction:
    """
    Optimal value of the load-balancing program: by the max-flow/min-cut
    (Hall-type) duality it equals the densest bundle, ``max c(Q) / |N(Q)|``
    over nonempty ``Q``, where ``N(Q)`` is every voter approving some project of ``Q``.
    """
    best = F0
    for Q in nonempty_subsets(projects):
        supp = {i for p in Q for i in plain.supporters(p)}
        best = max(best, plain.c(Q) / len(supp))
    return best


def min_rho(cost, money, utils):
    """
    Smallest ``rho`` with ``sum min(money_i, rho * u_i) >= cost``.

    Tries every set ``S`` of voters as the capped ones, solving the linear
    equation ``sum_S money + rho * sum_rest u = cost``, and keeps the
    candidates that really reach the cost.
    """
    idx = [j for j, u in enumerate(utils) if u > 0]
    if sum((money[j] for j in idx), F0) < cost:
        return None
    best = None
    for S in subsets(idx):
        rest = [j for j in idx if j not in S]
        denom = sum((utils[j] for j in rest), F0)
        if denom == 0:
            continue
        rho = (cost - sum((money[j] for j in S), F0)) / denom
        if rho < 0:
            continue
        if sum((min(money[j], rho * utils[j]) for j in idx), F0) == cost:
            best = rho if best is None or rho < best else best
    return best


def mes(plain: Plain, order, s=None) -> set:
    """Method of equal shares with per-project utilities ``score`` or ``s({p})``."""
    if s is None:
        util = {(i, p): plain.score[i][p] for i in plain.voters for p in plain.projects}
    else:
        util = {(i, p): (s({p}) if p in plain.approved[i] else F0) for i in plain.voters for p in plain.projects}
    money = [plain.b / plain.n] * plain.n
    chosen: set = set()
    while True:
        best = None
        for p in order:
            if p in chosen:
                continue
            rho = min_rho(plain.cost[p], money, [util[(i, p)] for i in plain.voters])
            if rho is not None and (best is None or rho < best[0]):
                best = (rho, p)
        if best is None:
            return chosen
        rho, p = best
        for i in plain.voters:
            money[i] -= min(money[i], rho * util[(i, p)])
        chosen.add(p)


# Priceability (floating-point cross-check) ------------------------------------------


def priceable_lp(plain: Plain, c6=False, alpha_above=None) -> bool:
    """
    Feasibility of C1-C5 (and C6) as a floating-point linear program solved
    by scipy. With ``alpha_above`` the entitlement must strictly exceed it,
    decided by maximising the entitlement.
    """
    import numpy as np
    from scipy.optimize import linprog

    pairs = [(i, p) for p in sorted(plain.pi) for i in plain.supporters(p)]
    if any(not plain.supporters(p) for p in plain.pi):
        return False
    nv = 1 + len(pairs)
    col = {pair: 1 + k for k, pair in enumerate(pairs)}
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i in plain.voters:  # C3: spent_i - alpha <= 0
        row = np.zeros(nv)
        row[0] = -1
        for (j, p), k in col.items():
            if j == i:
                row[k] = 1
        A_ub.append(row)
        b_ub.append(0)
    for p in plain.pi:  # C4
        row = np.zeros(nv)
        for (j, q), k in col.items():
            if q == p:
                row[k] = 1
        A_eq.append(row)
        b_eq.append(float(plain.cost[p]))
    for p in plain.projects:
        if p in plain.pi:
            continue
        supp = plain.supporters(p)
        row = np.zeros(nv)  # C5: sum_supp (alpha - spent_i) <= c(p)
        row[0] = len(supp)
        for (j, q), k in col.items():
            if j in supp:
                row[k] -= 1
        A_ub.append(row)
        b_ub.append(float(plain.cost[p]))
        if c6:
            for q in plain.pi:
                row = np.zeros(nv)
                for (j, r), k in col.items():
                    if r == q and j in supp:
                        row[k] = 1
                A_ub.append(row)
                b_ub.append(float(plain.cost[p]))
    obj = np.zeros(nv)
    if alpha_above is not None:
        obj[0] = -1
    res = linprog(
        obj,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=[(0, None)] * nv,
        method="highs",
    )
    if res.status == 3:  # unbounded entitlement
        return True
    if res.status != 0:
        return False
    if alpha_above is None:
        return True
    return -res.fun > float(alpha_above) + 1e-9
