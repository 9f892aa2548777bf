"""Driftless lognormal expectations used by the closed-form pricers.

A driftless lognormal forward X with mean x and total standard deviation v
(over the life of the option) has

    E[(k - X)^+] = k N(-d2) - x N(-d1),      put
    E[(X - k)^+] = x N(d1) - k N(d2),        call
    E[X^2]       = x^2 exp(v^2),             second moment

with d1 = (ln(x/k) + v^2/2) / v and d2 = d1 - v.  At v == 0 the option
values degenerate to their intrinsic values.
"""

from __future__ import annotations

import math

from scipy.special import ndtr

from .errors import DomainError

_VOL_FLOOR = 1e-14


def norm_cdf(x: float) -> float:
    return float(ndtr(x))


def _d12(x: float, k: float, v: float) -> tuple[float, float]:
    d1 = (math.log(x / k) + 0.5 * v * v) / v
    return d1, d1 - v


def lognormal_put(x: float, k: float, v: float) -> float:
    """E[(k - X)^+] for X lognormal with mean x > 0, stdev parameter v >= 0."""
    if x <= 0.0 or k <= 0.0:
        raise DomainError(f"lognormal_put needs positive forward and strike, got x={x}, k={k}")
    if v < 0.0:
        raise DomainError(f"negative total volatility {v}")
    if v <= _VOL_FLOOR:
        return max(k - x, 0.0)
    d1, d2 = _d12(x, k, v)
    return k * norm_cdf(-d2) - x * norm_cdf(-d1)


def lognormal_call(x: float, k: float, v: float) -> float:
    """E[(X - k)^+]; related to the put by call - put = x - k."""
    if x <= 0.0 or k <= 0.0:
        raise DomainError(f"lognormal_call needs positive forward and strike, got x={x}, k={k}")
    if v < 0.0:
        raise DomainError(f"negative total volatility {v}")
    if v <= _VOL_FLOOR:
        return max(x - k, 0.0)
    d1, d2 = _d12(x, k, v)
    return x * norm_cdf(d1) - k * norm_cdf(d2)


def lognormal_second_moment(x: float, v: float) -> float:
    """E[X^2] = x^2 exp(v^2) for a driftless lognormal with mean x."""
    if x <= 0.0:
        raise DomainError(f"lognormal_second_moment needs a positive forward, got {x}")
    return x * x * math.exp(v * v)


def lognormal_reciprocal_mean(x: float, v: float) -> float:
    """E[1/X] = exp(v^2) / x for a driftless lognormal with mean x."""
    if x <= 0.0:
        raise DomainError(f"lognormal_reciprocal_mean needs a positive forward, got {x}")
    return math.exp(v * v) / x
