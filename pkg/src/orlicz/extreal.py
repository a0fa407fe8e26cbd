"""Extended nonnegative-real arithmetic with the measure-theoretic 0*inf = 0 convention."""

from __future__ import annotations

import math
from typing import Iterable

INF = math.inf


def xmul(a: float, b: float) -> float:
    """Product with 0*inf = 0, the convention used for integrals against densities."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def xsum(terms: Iterable[float]) -> float:
    """Sum of extended nonnegative reals; any +inf term makes the result +inf."""
    total = 0.0
    for t in terms:
        if t == INF:
            return INF
        total += t
    return total


def is_finite(x: float) -> bool:
    return math.isfinite(x)


def fmt(x: float) -> str:
    """Render a number for reports: 17 significant digits, inf spelled out."""
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")
