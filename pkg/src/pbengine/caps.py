"""
Enumeration caps shared by the exponential checkers and solvers.

Defaults can be overridden process-wide through the ``PB_ENGINE_CAPS``
environment variable, a comma separated list such as
``max_n=14,max_m=10,max_subset_m=20``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from pbengine.errors import CapExceeded

ENV_VAR = "PB_ENGINE_CAPS"


@dataclass(frozen=True)
class Caps:
    """
    Size limits for brute-force work.

    Parameters
    ----------
        max_n : int
            Largest voter count accepted by group-enumerating checkers.
        max_m : int
            Largest project count accepted by bundle-enumerating checkers.
        max_subset_m : int
            Largest project count for subset-search welfare maximisation.
        max_scaled_budget : int
            Largest integer budget after rescaling costs for the knapsack program.
        max_ballots : int
            Largest number of candidate ballots tried by the manipulation search.
    """

    max_n: int = 12
    max_m: int = 12
    max_subset_m: int = 24
    max_scaled_budget: int = 10**7
    max_ballots: int = 1 << 16

    def check(self, n: int | None = None, m: int | None = None, what: str = "enumeration") -> None:
        """Raise :py:class:`CapExceeded` when ``n`` or ``m`` is above the caps."""
        if n is not None and n > self.max_n:
            raise CapExceeded(f"{what}: n = {n} exceeds cap max_n = {self.max_n}")
        if m is not None and m > self.max_m:
            raise CapExceeded(f"{what}: m = {m} exceeds cap max_m = {self.max_m}")

    def with_overrides(self, **kwargs) -> "Caps":
        """Copy with the non-None keyword arguments replaced."""
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def parse_caps(text: str, base: Caps | None = None) -> Caps:
    """
    Parse a ``key=value`` list into :py:class:`Caps`.

    Examples
    --------
    >>> parse_caps("max_n=3, max_m=4").max_m
    4
    """
    base = base or Caps()
    names = {f.name for f in fields(Caps)}
    values = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in names:
            raise ValueError(f"bad cap setting {item!r}; known keys: {sorted(names)}")
        values[key] = int(val)
    return replace(base, **values)


def default_caps() -> Caps:
    """Caps from ``PB_ENGINE_CAPS`` if set, else the built-in defaults."""
    text = os.environ.get(ENV_VAR)
    if text:
        return parse_caps(text)
    return Caps()


def resolve(caps: Caps | None) -> Caps:
    return caps if caps is not None else default_caps()
