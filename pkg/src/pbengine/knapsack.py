"""
Exact 0/1 knapsack over rational costs and values.

The solver keeps, for every suffix of the item list, the Pareto front of
``(cost, value)`` pairs reachable with items of that suffix. Costs are first
rescaled to integers by the least common multiple of their denominators, so
the fronts are lists of Python integers and exact fractions.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from math import lcm

from pbengine.errors import ScaleOverflow


def scale_to_integers(costs, budget) -> tuple:
    """
    Rescale rational costs and budget by the LCM of their denominators.

    Returns
    -------
        tuple
            ``(integer costs, integer budget, factor)``.

    Examples
    --------
    >>> scale_to_integers([Fraction(1, 2), Fraction(1, 3)], Fraction(1))
    ([3, 2], 6, 6)
    """
    factor = 1
    for x in list(costs) + [budget]:
        factor = lcm(factor, Fraction(x).denominator)
    ints = [int(Fraction(c) * factor) for c in costs]
    return ints, int(Fraction(budget) * factor), factor


def _front_merge(front, cost, value, cap):
    """Pareto front of ``front`` united with ``front`` shifted by ``(cost, value)``."""
    shifted = [(c + cost, v + value) for c, v in front if c + cost <= cap]
    merged = sorted(front + shifted, key=lambda cv: (cv[0], -cv[1]))
    out = []
    best = None
    for c, v in merged:
        if best is None or v > best:
            out.append((c, v))
            best = v
    return out


def knapsack(costs, values, budget, order=None, max_scaled_budget: int | None = 10**7) -> tuple:
    """
    Maximise total value subject to total cost at most ``budget``.

    Ties between optimal sets are broken towards the set that, scanning items
    in ``order``, contains the first item on which the two sets differ.
    With nonnegative values the chosen optimum is therefore maximal: no
    further item fits.

    Parameters
    ----------
        costs : list of Fraction
            Positive item costs.
        values : list of Fraction
            Nonnegative item values.
        budget : Fraction
            Capacity.
        order : list of int, optional
            Item priority for tie-breaking; defaults to index order.
        max_scaled_budget : int or None
            Raise :py:class:`ScaleOverflow` if the integer-rescaled budget is
            larger. ``None`` disables the check.

    Returns
    -------
        tuple
            ``(chosen item indices in priority order, optimal value)``.

    Examples
    --------
    >>> knapsack([2, 3, 4], [3, 4, 5], 5)
    ([0, 1], Fraction(7, 1))
    """
    n = len(costs)
    order = list(range(n)) if order is None else list(order)
    icosts, cap, _ = scale_to_integers(costs, budget)
    if max_scaled_budget is not None and cap > max_scaled_budget:
        raise ScaleOverflow(f"rescaled budget {cap} exceeds cap {max_scaled_budget}")
    vals = [Fraction(v) for v in values]
    # fronts[k] covers items order[k:]
    fronts = [None] * (n + 1)
    fronts[n] = [(0, Fraction(0))]
    for k in range(n - 1, -1, -1):
        j = order[k]
        fronts[k] = _front_merge(fronts[k + 1], icosts[j], vals[j], cap)

    def best(k, room):
        front = fronts[k]
        pos = bisect_right(front, (room, float("inf"))) - 1
        return front[pos][1]

    room = cap
    chosen = []
    target = best(0, room)
    total = Fraction(0)
    for k in range(n):
        j = order[k]
        c = icosts[j]
        if c <= room and total + vals[j] + best(k + 1, room - c) == target:
            chosen.append(j)
            total += vals[j]
            room -= c
    return chosen, target
