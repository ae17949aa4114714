"""Censoring schemes and alternatives of the three power tables (n = 10, 20, 30)."""

from __future__ import annotations

from dataclasses import dataclass

from .censoring import CensoringScheme
from .distributions import Beta, Distribution, Gamma, LogNormal, Weibull

__all__ = ["ALTERNATIVES", "HAZARD_CLASS", "TABLES", "PowerTableSpec", "all_table_schemes"]

# Column order of the published tables
ALTERNATIVES: tuple[Distribution, ...] = (
    Gamma(2.0),
    Weibull(2.0),
    Gamma(0.5),
    Weibull(0.5),
    Beta(0.5, 0.5),
    LogNormal(1.0),
)

HAZARD_CLASS = {
    "gamma:2": "increasing",
    "weibull:2": "increasing",
    "gamma:0.5": "decreasing",
    "weibull:0.5": "decreasing",
    "beta:0.5": "nonmonotone",
    "lognormal:1": "nonmonotone",
}


def _patterns(n: int, m: int) -> list[tuple[int, ...]]:
    k = n - m
    first = (k,) + (0,) * (m - 1)
    second = (0, k) + (0,) * (m - 2)
    penultimate = (0,) * (m - 2) + (k, 0)
    last = (0,) * (m - 1) + (k,)
    spread = (k // m,) * m
    return [first, second, spread, penultimate, last]


def _table_schemes(n: int, m: int) -> list[CensoringScheme]:
    return [CensoringScheme(n, m, R) for R in _patterns(n, m)]


@dataclass(frozen=True)
class PowerTableSpec:
    number: int
    n: int
    schemes: tuple[CensoringScheme, ...]


def _n10_large_m() -> list[CensoringScheme]:
    # n = 10, m = 8 does not follow the even-spread pattern
    rows = [
        (2, 0, 0, 0, 0, 0, 0, 0),
        (0, 2, 0, 0, 0, 0, 0, 0),
        (1, 0, 0, 0, 0, 0, 0, 1),
        (0, 0, 0, 0, 0, 0, 2, 0),
        (0, 0, 0, 0, 0, 0, 0, 2),
    ]
    return [CensoringScheme(10, 8, R) for R in rows]


TABLES: dict[int, PowerTableSpec] = {
    1: PowerTableSpec(1, 10, tuple(_table_schemes(10, 5) + _n10_large_m())),
    2: PowerTableSpec(2, 20, tuple(_table_schemes(20, 5) + _table_schemes(20, 10))),
    3: PowerTableSpec(3, 30, tuple(_table_schemes(30, 5) + _table_schemes(30, 15))),
}


def all_table_schemes() -> list[CensoringScheme]:
    return [s for spec in TABLES.values() for s in spec.schemes]
