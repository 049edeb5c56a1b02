"""
Exact rational linear programming for small systems.

A two-phase simplex method on a sparse tableau of :py:class:`fractions.Fraction`
entries. Bland's rule (lowest eligible index enters, lowest basic index
leaves among ratio ties) guarantees termination, so no tolerance appears
anywhere.

All variables are nonnegative. Constraints are given as sparse rows
``{variable index: coefficient}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LPResult:
    """
    Outcome of :py:func:`solve_lp`.

    Attributes
    ----------
        status : str
            ``optimal``, ``infeasible`` or ``unbounded``.
        x : tuple of Fraction or None
            An optimal vertex when ``status`` is ``optimal``.
        value : Fraction or None
            The optimal objective value.
    """

    status: str
    x: tuple | None = None
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.d: dict = {}
        self.const = _ZERO

    def pivot(self, r: int, q: int) -> None:
        row = self.rows[r]
        piv = row[q]
        if piv != 1:
            inv = 1 / piv
            for k in row:
                row[k] *= inv
            self.rhs[r] *= inv
        rr = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(q)
            if f is None:
                continue
            for k, v in row.items():
                nv = other.get(k, _ZERO) - f * v
                if nv:
                    other[k] = nv
                else:
                    other.pop(k, None)
            self.rhs[i] -= f * rr
        f = self.d.get(q)
        if f:
            for k, v in row.items():
                nv = self.d.get(k, _ZERO) - f * v
                if nv:
                    self.d[k] = nv
                else:
                    self.d.pop(k, None)
            self.const += f * rr
        self.basis[r] = q

    def run(self, eligible) -> str:
        """Minimise ``const + d . x`` over the current basis; Bland's rule."""
        while True:
            q = None
            for k in sorted(self.d):
                if self.d[k] < 0 and eligible(k):
                    q = k
                    break
            if q is None:
                return OPTIMAL
            best = None
            r = None
            for i, row in enumerate(self.rows):
                a = row.get(q)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if r is None:
                return UNBOUNDED
            self.pivot(r, q)


def solve_lp(nvars: int, objective: dict, ub=(), eq=(), maximize: bool = False) -> LPResult:
    """
    Solve ``min (or max) objective . x`` subject to sparse linear constraints, ``x >= 0``.

    Parameters
    ----------
        nvars : int
            Number of variables.
        objective : dict
            ``{index: coefficient}``.
        ub : iterable of (dict, rhs)
            Rows ``a . x <= rhs``.
        eq : iterable of (dict, rhs)
            Rows ``a . x == rhs``.
        maximize : bool
            Maximise instead of minimise.

    Returns
    -------
        LPResult

    Examples
    --------
    >>> r = solve_lp(2, {0: 1, 1: 1}, ub=[({0: 1, 1: 2}, 4), ({0: 3, 1: 1}, 6)], maximize=True)
    >>> r.status, r.value, r.x
    ('optimal', Fraction(14, 5), (Fraction(8, 5), Fraction(6, 5)))
    """
    rows: list = []
    rhs: list = []
    basis: list = []
    artificial_rows = []
    ncols = nvars
    pending = []
    for a, b in ub:
        pending.append((a, Fraction(b), "ub"))
    for a, b in eq:
        pending.append((a, Fraction(b), "eq"))
    # slack / surplus columns first, artificials after them
    aux = []
    for a, b, kind in pending:
        row = {k: Fraction(v) for k, v in a.items() if v}
        if b < 0:
            row = {k: -v for k, v in row.items()}
            b = -b
            flipped = True
        else:
            flipped = False
        if kind == "ub":
            row[ncols] = Fraction(-1) if flipped else Fraction(1)
            slack = ncols
            ncols += 1
            aux.append((row, b, None if flipped else slack))
        else:
            aux.append((row, b, None))
    first_art = ncols
    for row, b, basic in aux:
        if basic is None:
            row[ncols] = Fraction(1)
            basic = ncols
            artificial_rows.append(len(rows))
            ncols += 1
        rows.append(row)
        rhs.append(b)
        basis.append(basic)
    t = _Tableau(rows, rhs, basis)

    if artificial_rows:
        for i in artificial_rows:
            for k, v in rows[i].items():
                if k < first_art:
                    t.d[k] = t.d.get(k, _ZERO) - v
            t.const += rhs[i]
        t.d = {k: v for k, v in t.d.items() if v}
        t.run(lambda k: True)
        if t.const > 0:
            return LPResult(INFEASIBLE)
        # drive artificials out of the basis
        i = 0
        while i < len(t.rows):
            if t.basis[i] >= first_art:
                q = next((k for k in sorted(t.rows[i]) if k < first_art), None)
                if q is None:
                    del t.rows[i], t.rhs[i], t.basis[i]
                    continue
                t.pivot(i, q)
            i += 1
        for row in t.rows:
            for k in [k for k in row if k >= first_art]:
                del row[k]

    sign = -1 if maximize else 1
    t.d = {}
    for k, v in objective.items():
        if v:
            t.d[k] = sign * Fraction(v)
    t.const = _ZERO
    for i, row in enumerate(t.rows):
        f = t.d.get(t.basis[i])
        if f:
            for k, v in row.items():
                nv = t.d.get(k, _ZERO) - f * v
                if nv:
                    t.d[k] = nv
                else:
                    t.d.pop(k, None)
            t.const += f * t.rhs[i]
    status = t.run(lambda k: k < first_art)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [_ZERO] * nvars
    for i, j in enumerate(t.basis):
        if j < nvars:
            x[j] = t.rhs[i]
    value = sum((Fraction(objective.get(k, 0)) * x[k] for k in range(nvars)), _ZERO)
    return LPResult(OPTIMAL, tuple(x), value)
