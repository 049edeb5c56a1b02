"""
Exact rational helpers: parsing, canonical rendering and conversion.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from numbers import Rational


_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")


def to_fraction(value) -> Fraction:
    """
    Convert a number to an exact :py:class:`fractions.Fraction`.

    Floats are rejected: they carry binary rounding that would leak into every
    downstream comparison.

    Parameters
    ----------
        value : int or Fraction or str
            The value to convert. Strings follow :py:func:`parse_rational`.

    Returns
    -------
        Fraction
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} exactly; use int, Fraction or str")


def parse_rational(text: str, decimal_comma: bool = False) -> Fraction:
    """
    Parse a decimal or ``a/b`` string into an exact fraction.

    Parameters
    ----------
        text : str
            Decimal literal (``"12"``, ``"0.25"``, ``"1e3"``) or fraction ``"a/b"``.
        decimal_comma : bool, optional
            Accept a single ``,`` as the decimal separator.

    Returns
    -------
        Fraction

    Raises
    ------
        ValueError
            If the text is not an exact rational literal.

    Examples
    --------
    >>> parse_rational("0.1")
    Fraction(1, 10)
    >>> parse_rational("7/21")
    Fraction(1, 3)
    >>> parse_rational("2,5", decimal_comma=True)
    Fraction(5, 2)
    """
    s = text.strip()
    if decimal_comma and s.count(",") == 1 and "." not in s:
        s = s.replace(",", ".")
    m = _FRACTION_RE.match(s)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite number: {text!r}")
    return Fraction(d)


def format_rational(value: Fraction) -> str:
    """
    Render a fraction canonically.

    Integers render without a decimal point, terminating fractions as their
    shortest decimal expansion, anything else as ``a/b``.

    Examples
    --------
    >>> format_rational(Fraction(1))
    '1'
    >>> format_rational(Fraction(5, 4))
    '1.25'
    >>> format_rational(Fraction(2, 3))
    '2/3'
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = abs(value.numerator) * (10**digits // value.denominator)
    sign = "-" if value < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    frac_str = str(frac).rjust(digits, "0").rstrip("0")
    return f"{sign}{whole}.{frac_str}"


def format_fraction(value: Fraction) -> str:
    """Render a fraction as ``a/b`` (or ``a`` when integral), the JSON convention."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
