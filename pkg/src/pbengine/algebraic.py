"""
Exact comparison of sums of square roots of nonnegative rationals.

A sum ``sum_k q_k * sqrt(r_k)`` is normalised to ``sum_s a_s * sqrt(s)`` over
distinct squarefree integers ``s`` with rational coefficients ``a_s``. Square
roots of distinct squarefree integers are linearly independent over the
rationals, so two sums are equal iff their coefficient maps agree; otherwise
the sign of the difference is found by evaluating it with increasing decimal
precision until the value clears the rounding error.
"""

from __future__ import annotations

from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from math import isqrt


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> tuple:
    """
    Write a positive integer as ``k * k * s`` with ``s`` squarefree.

    Examples
    --------
    >>> squarefree_split(72)
    (6, 2)
    >>> squarefree_split(1)
    (1, 1)
    """
    if n <= 0:
        raise ValueError("n must be positive")
    k, s = 1, 1
    d = 2
    while d * d * d <= n:
        while n % (d * d) == 0:
            n //= d * d
            k *= d
        if n % d == 0:
            n //= d
            s *= d
        d += 1 if d == 2 else 2
    # the rest is 1, a prime, a product of two distinct primes, or a prime squared
    r = isqrt(n)
    if r * r == n:
        k *= r
    else:
        s *= n
    return k, s


class RootSum:
    """
    An exact value ``sum_s a_s * sqrt(s)``.

    Examples
    --------
    >>> RootSum.sqrt(Fraction(8)) == 2 * RootSum.sqrt(Fraction(2))
    True
    >>> RootSum.sqrt(Fraction(2)) + RootSum.sqrt(Fraction(3)) > RootSum.sqrt(Fraction(10))
    False
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {s: a for s, a in (terms or {}).items() if a != 0}

    @classmethod
    def sqrt(cls, q) -> "RootSum":
        q = Fraction(q)
        if q < 0:
            raise ValueError("square root of a negative number")
        if q == 0:
            return cls()
        # sqrt(p/d) = sqrt(p*d)/d
        k, s = squarefree_split(q.numerator * q.denominator)
        return cls({s: Fraction(k, q.denominator)})

    def __add__(self, other):
        if not isinstance(other, RootSum):
            return NotImplemented
        out = dict(self.terms)
        for s, a in other.terms.items():
            out[s] = out.get(s, Fraction(0)) + a
        return RootSum(out)

    def __neg__(self):
        return RootSum({s: -a for s, a in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        k = Fraction(k)
        return RootSum({s: k * a for s, a in self.terms.items()})

    def sign(self) -> int:
        if not self.terms:
            return 0
        prec = 40
        while True:
            with localcontext() as ctx:
                ctx.prec = prec
                total = Decimal(0)
                err = Decimal(0)
                for s, a in self.terms.items():
                    term = Decimal(a.numerator) / Decimal(a.denominator) * Decimal(s).sqrt()
                    total += term
                    err += abs(term)
                bound = err * Decimal(10) ** (-(prec - 5))
                if abs(total) > bound:
                    return 1 if total > 0 else -1
            prec *= 2

    def __eq__(self, other):
        if isinstance(other, RootSum):
            return (self - other).terms == {}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(sum(float(a) * float(s) ** 0.5 for s, a in self.terms.items()))

    def __repr__(self):
        inner = " + ".join(f"{a}*sqrt({s})" for s, a in sorted(self.terms.items()))
        return f"RootSum({inner or '0'})"
