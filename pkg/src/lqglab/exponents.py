"""Euclidean/quantum scaling exponent calculators.

x = (gamma^2/4) * Delta^2 + (1 - gamma^2/4) * Delta, with
hat_gamma = gamma * (1 - Delta) and Q = gamma/2 + 2/gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class ExponentTriple:
    x: float
    delta: float
    hat_gamma: float
    q_constant: float


def _x_of_delta(delta: float, gamma: float) -> float:
    a = gamma * gamma / 4.0
    return a * delta * delta + (1.0 - a) * delta


def kpz_exponents(
    gamma: float, *, x: float | None = None, delta: float | None = None
) -> ExponentTriple:
    """Consistent (x, Delta, hat_gamma, Q) triple from either exponent.

    When solving for Delta, the nonnegative root that is increasing in x
    is taken (the branch with Delta in [0, 1] for x in [0, 1]).
    """
    if not (0.0 < gamma < 2.0):
        raise ParameterError(f"gamma must be in (0, 2), got {gamma}")
    if (x is None) == (delta is None):
        raise ParameterError("provide exactly one of x or delta")
    a = gamma * gamma / 4.0
    if delta is None:
        b = 1.0 - a
        disc = b * b + 4.0 * a * x
        if x < 0 or disc < 0:
            lo = -b * b / (4.0 * a)
            raise DomainError(
                f"x={x} outside the attainable range [0, inf) (quadratic floor {lo:.6g})"
            )
        delta = (-b + math.sqrt(disc)) / (2.0 * a)
    else:
        x = _x_of_delta(delta, gamma)
    return ExponentTriple(
        x=float(x),
        delta=float(delta),
        hat_gamma=gamma * (1.0 - delta),
        q_constant=gamma / 2.0 + 2.0 / gamma,
    )
