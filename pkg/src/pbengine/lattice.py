"""
Vectorised arithmetic over the subset lattice of a small ground set.

Subsets of ``{0, ..., k-1}`` are bitmasks ``0 .. 2**k - 1``; an array indexed
by mask holds one value per subset. Values are exact integers (``int64``
when the magnitudes allow it, Python integers otherwise), so callers scale
rationals to a common denominator first with :py:func:`scale`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import lcm

import numpy as np

_SAFE = 1 << 60


def scale(values) -> tuple:
    """
    Integers ``v * d`` for the least common denominator ``d`` of ``values``.

    Examples
    --------
    >>> scale([Fraction(1, 2), Fraction(2, 3), 1])
    ([3, 4, 6], 6)
    """
    values = [Fraction(v) for v in values]
    d = lcm(*(v.denominator for v in values)) if values else 1
    return [int(v * d) for v in values], d


def int_array(values, bound: int) -> np.ndarray:
    """An exact integer array; ``int64`` if every value and ``bound`` stay below 2**60."""
    values = list(values)
    big = max([abs(int(v)) for v in values] + [abs(int(bound))])
    if big < _SAFE:
        return np.array(values, dtype=np.int64)
    return np.array([int(v) for v in values], dtype=object)


class Lattice:
    """
    The subset lattice of ``k`` items.

    Attributes
    ----------
        k : int
        size : int
            ``2**k``.
        masks : numpy.ndarray
        popcount : numpy.ndarray
        order : numpy.ndarray
            Masks in enumeration order: by size, then lexicographically by
            sorted member indices.
        rank : numpy.ndarray
            Position of every mask in ``order``.
    """

    def __init__(self, k: int):
        self.k = k
        self.size = 1 << k
        self.masks = np.arange(self.size, dtype=np.int64)
        self.popcount = np.zeros(self.size, dtype=np.int64)
        for j in range(k):
            self.popcount += (self.masks >> j) & 1
        order = [sum(1 << j for j in c) for r in range(k + 1) for c in combinations(range(k), r)]
        self.order = np.array(order, dtype=np.int64)
        self.rank = np.empty(self.size, dtype=np.int64)
        self.rank[self.order] = np.arange(self.size)

    def sums(self, values, dtype=None) -> np.ndarray:
        """``out[S] = sum of values[j] for j in S``."""
        out = np.zeros(1, dtype=dtype if dtype is not None else np.asarray(values).dtype)
        for v in values:
            out = np.concatenate([out, out + v])
        return out

    def maxes(self, values, empty) -> np.ndarray:
        """``out[S] = max of values[j] for j in S``, ``empty`` for the empty set."""
        values = np.asarray(values)
        out = np.array([empty], dtype=values.dtype)
        for v in values:
            out = np.concatenate([out, np.maximum(out, v)])
        return out

    def mins(self, values, empty) -> np.ndarray:
        """``out[S] = min of values[j] for j in S``, ``empty`` for the empty set."""
        values = np.asarray(values)
        out = np.array([empty], dtype=values.dtype)
        for v in values:
            out = np.concatenate([out, np.minimum(out, v)])
        return out

    def subset_max(self, f: np.ndarray) -> np.ndarray:
        """``out[S] = max of f[S'] over S' subset of S``."""
        out = f.copy()
        for j in range(self.k):
            view = out.reshape(-1, 2, 1 << j)
            np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
        return out

    def subsets_of(self, mask: int) -> np.ndarray:
        """Boolean array marking the subsets of ``mask``."""
        return (self.masks & ~mask) == 0

    def supersets_of(self, mask: int) -> np.ndarray:
        return (self.masks & mask) == mask

    def first(self, flags: np.ndarray):
        """The flagged mask earliest in enumeration order, or None."""
        if not flags.any():
            return None
        idx = np.flatnonzero(flags)
        return int(idx[np.argmin(self.rank[idx])])

    def iter_nonempty(self):
        """Nonempty masks in enumeration order."""
        for s in self.order[1:]:
            yield int(s)


@lru_cache(maxsize=32)
def lattice(k: int) -> Lattice:
    return Lattice(k)


def members(mask: int) -> list:
    """
    Indices of the set bits of ``mask``.

    Examples
    --------
    >>> members(0b1011)
    [0, 1, 3]
    """
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out
