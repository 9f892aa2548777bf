"""Robust bounds for caps, floors, in-arrears swaps, and swaptions.

Each contract reduces to a sum of expectations of forward bond prices under
their natural forward measures.  With a deterministic diffusion the forward
prices are driftless lognormals, so the bound at each band extreme is a
classical closed form:

  * caplet i   : (1/K_i) E[(K_i - X)^+]      put on X = P(T_i)/P(T_{i-1}),
                 K_i = 1/(1 + delta_i K), discounted by P(T_{i-1});
  * floorlet i : the matching call, via put-call parity against the swap;
  * in-arrears : E[X (X - 1/K_i)] = x^2 e^V - x/K_i on the reversed forward
                 price X = P(T_{i-1})/P(T_i), discounted by P(T_i);
  * swaption   : E[(1 - X^N - K sum_i delta_i X^i)^+] on the family
                 X^i = P(T_i)/P(T_0), discounted by P(T_0).

The upper bound evaluates at the band's upper extreme, the lower bound at
the lower extreme (the payoffs are convex in the forward prices).  For the
swaption the one-factor case is evaluated exactly by locating the exercise
boundary of the comonotone payoff and summing Gaussian tail integrals;
the multi-factor case falls back to Monte Carlo on the joint terminal law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .curve import DiscountCurve
from .errors import DomainError, UnsupportedMethodError
from .linear_pricing import TenorSchedule
from .lognormal import lognormal_call, lognormal_put, lognormal_second_moment
from .mc import MCConfig, mean_and_se, normals
from .uncertainty import PriceBounds, UncertaintyBand
from .vol_structure import VolStructure

OPTION_KINDS = ("cap", "floor", "swaption-payer", "in-arrears-payer-swap")

_W_FLOOR = 1e-14


@dataclass(frozen=True)
class OptionContract:
    """An asymmetric tenor-structured contract with a positive strike rate."""

    kind: str
    schedule: TenorSchedule
    strike_rate: float
    notional: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in OPTION_KINDS:
            raise DomainError(f"kind must be one of {OPTION_KINDS}, got {self.kind!r}")
        if not self.strike_rate > 0.0:
            raise DomainError(f"strike rate must be positive, got {self.strike_rate}")


def transformed_strike(accrual: float, strike_rate: float) -> float:
    """K_i = 1 / (1 + delta_i K), the bond-price strike of a rate option."""
    if accrual <= 0.0 or strike_rate <= 0.0:
        raise DomainError(
            f"transformed strike needs positive accrual and rate, got {accrual}, {strike_rate}"
        )
    return 1.0 / (1.0 + accrual * strike_rate)


def _check_band(vs: VolStructure, band: UncertaintyBand) -> None:
    if vs.dim != band.dim:
        raise DomainError(
            f"volatility structure has {vs.dim} factors but band has {band.dim}"
        )


def _period(schedule: TenorSchedule, i: int) -> tuple[float, float, float]:
    """(T_{i-1}, T_i, delta_i) for 0-based period index i."""
    if not 0 <= i < schedule.periods:
        raise DomainError(f"period index {i} out of range for {schedule.periods} periods")
    t0, t1 = schedule.dates[i], schedule.dates[i + 1]
    return t0, t1, t1 - t0


def price_caplet_sigma(
    curve: DiscountCurve,
    vs: VolStructure,
    sigma,
    i: int,
    schedule: TenorSchedule,
    strike_rate: float,
) -> float:
    """Classical caplet value for period i at a fixed per-factor scaling sigma.

    P(T_{i-1}) / K_i * E[(K_i - X)^+] with X the lognormal forward bond
    price started at P(T_i)/P(T_{i-1}) and total variance accumulated over
    [0, T_{i-1}].
    """
    schedule.check_within(curve)
    t_reset, t_pay, delta = _period(schedule, i)
    ki = transformed_strike(delta, strike_rate)
    x = curve.forward_price(t_reset, t_pay)
    v2 = vs.integrated_variance(sigma, 0.0, t_reset, t_reset, t_pay)
    return curve.bond_price(t_reset) / ki * lognormal_put(x, ki, math.sqrt(v2))


def price_floorlet_sigma(
    curve: DiscountCurve,
    vs: VolStructure,
    sigma,
    i: int,
    schedule: TenorSchedule,
    strike_rate: float,
) -> float:
    """Classical floorlet value for period i: the call counterpart."""
    schedule.check_within(curve)
    t_reset, t_pay, delta = _period(schedule, i)
    ki = transformed_strike(delta, strike_rate)
    x = curve.forward_price(t_reset, t_pay)
    v2 = vs.integrated_variance(sigma, 0.0, t_reset, t_reset, t_pay)
    return curve.bond_price(t_reset) / ki * lognormal_call(x, ki, math.sqrt(v2))


def _inarrears_period_sigma(
    curve: DiscountCurve,
    vs: VolStructure,
    sigma,
    i: int,
    schedule: TenorSchedule,
    strike_rate: float,
) -> float:
    """P(T_i) * (x^2 e^V - x / K_i) with x = P(T_{i-1})/P(T_i) > 1 on
    positive curves; V is the variance of the reversed forward price."""
    t_reset, t_pay, delta = _period(schedule, i)
    ki = transformed_strike(delta, strike_rate)
    x = curve.forward_price(t_pay, t_reset)
    v2 = vs.integrated_variance(sigma, 0.0, t_reset, t_pay, t_reset)
    return curve.bond_price(t_pay) * (
        lognormal_second_moment(x, math.sqrt(v2)) - x / ki
    )


def _summed_bounds(per_period_fn, curve, vs, band, contract, label: str) -> PriceBounds:
    contract.schedule.check_within(curve)
    _check_band(vs, band)
    n = contract.schedule.periods
    upper = sum(
        per_period_fn(curve, vs, band.upper, i, contract.schedule, contract.strike_rate)
        for i in range(n)
    )
    lower = sum(
        per_period_fn(curve, vs, band.lower, i, contract.schedule, contract.strike_rate)
        for i in range(n)
    )
    diag = {"method": label, "periods": n}
    return PriceBounds(
        lower=lower, upper=upper, symmetric=band.is_degenerate, diagnostics=diag
    ).scaled(contract.notional)


def price_cap(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    contract: OptionContract,
) -> PriceBounds:
    """Sum of caplet closed forms at the band extremes."""
    if contract.kind != "cap":
        raise DomainError(f"expected cap, got {contract.kind}")
    return _summed_bounds(price_caplet_sigma, curve, vs, band, contract, "caplet-closed-form")


def price_floor(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    contract: OptionContract,
) -> PriceBounds:
    """Sum of floorlet closed forms; satisfies cap - floor = swap at each bound."""
    if contract.kind != "floor":
        raise DomainError(f"expected floor, got {contract.kind}")
    return _summed_bounds(price_floorlet_sigma, curve, vs, band, contract, "floorlet-closed-form")


def price_in_arrears_swap(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    contract: OptionContract,
) -> PriceBounds:
    """Payer swap with the floating rate fixed and paid at the same date.

    The convexity of x(x - 1/K_i) makes the bounds sit at the band extremes;
    the e^V term is the lognormal second moment, so the spread is strictly
    positive whenever the band is nondegenerate and some variance accrues.
    """
    if contract.kind != "in-arrears-payer-swap":
        raise DomainError(f"expected in-arrears-payer-swap, got {contract.kind}")
    return _summed_bounds(
        _inarrears_period_sigma, curve, vs, band, contract, "inarrears-second-moment"
    )


# -- swaptions ---------------------------------------------------------------


def _swaption_inputs(curve, vs, sigma, contract):
    """Forward prices x_i = P(T_i)/P(T_0) and their total stdevs w_i at a
    constant per-factor scaling sigma, plus the coefficient of each term in
    the exercise value 1 - x_N e^{.} - K sum delta_i x_i e^{.}."""
    s = contract.schedule
    t0 = s.start
    xs = np.array([curve.forward_price(t0, t) for t in s.dates[1:]])
    w2 = np.array(
        [vs.integrated_variance(sigma, 0.0, t0, t0, t) for t in s.dates[1:]]
    )
    coefs = np.array(contract.schedule.accruals) * contract.strike_rate
    coefs[-1] += 1.0
    return xs, np.sqrt(np.maximum(w2, 0.0)), coefs


def _swaption_value_comonotone(xs, ws, coefs) -> float:
    """E[(1 - sum_i a_i x_i e^{-w_i Z - w_i^2/2})^+] for one common Z.

    The exercise region is {Z >= z*} because every w_i >= 0, so the value
    splits into exact Gaussian tail integrals:
        N(-z*) - sum_i a_i x_i N(-z* - w_i).
    """
    if np.max(ws) <= _W_FLOOR:
        return max(1.0 - float(np.dot(coefs, xs)), 0.0)

    def gap(z):
        return 1.0 - float(np.dot(coefs * xs, np.exp(-ws * z - 0.5 * ws**2)))

    zmax = 40.0
    if gap(zmax) <= 0.0:
        return 0.0  # never exercised within machine-precision tail mass
    if gap(-zmax) >= 0.0:
        return 1.0 - float(np.dot(coefs, xs))  # always exercised
    z_star = brentq(gap, -zmax, zmax, xtol=1e-15, rtol=8.9e-16)
    return float(ndtr(-z_star) - np.dot(coefs * xs, ndtr(-z_star - ws)))


def _swaption_value_mc(curve, vs, sigma, contract, mc: MCConfig) -> tuple[float, float]:
    """Monte Carlo on the joint lognormal terminal vector (mean, standard error).

    Separable factors (Ho-Lee, Hull-White) admit an exact one-normal-per-
    factor representation; otherwise the exact per-pair covariance matrix is
    factorized and the joint Gaussian drawn from it.
    """
    s = contract.schedule
    t0 = s.start
    xs, ws, coefs = _swaption_inputs(curve, vs, sigma, contract)
    n = len(xs)
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if vs.is_separable():
        # log X^i = -sum_j load[j, i] Z_j - w_i^2/2 with one Z per factor.
        loads = np.zeros((vs.dim, n))
        for j, f in enumerate(vs.factors):
            cov_jj = [
                sig[j] ** 2 * f.fp_cov_integral(0.0, t0, (t0, t), (t0, t))
                for t in s.dates[1:]
            ]
            loads[j] = np.sqrt(np.maximum(cov_jj, 0.0))
            # Separability makes within-factor correlation exactly 1; signs
            # are all positive because T_i > T_0.
        z = normals(mc.seed, mc.paths, vs.dim, antithetic=mc.antithetic)
        log_x = -z @ loads - 0.5 * ws**2
    else:
        cov = np.zeros((n, n))
        pairs = [(t0, t) for t in s.dates[1:]]
        for a in range(n):
            for b in range(a, n):
                cov[a, b] = cov[b, a] = vs.integrated_covariance(
                    sigma, 0.0, t0, pairs[a], pairs[b]
                )
        # Symmetric PSD factorization tolerant of rank deficiency.
        evals, evecs = np.linalg.eigh(cov)
        root = evecs @ np.diag(np.sqrt(np.maximum(evals, 0.0)))
        z = normals(mc.seed, mc.paths, n, antithetic=mc.antithetic)
        log_x = -(z @ root.T) - 0.5 * ws**2
    terminal = xs * np.exp(log_x)
    payoff = np.maximum(1.0 - terminal @ coefs, 0.0)
    return mean_and_se(payoff)


def price_swaption(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    contract: OptionContract,
    method: str = "quadrature-1f",
    mc: MCConfig | None = None,
) -> PriceBounds:
    """Payer swaption: P(T_0) E[(1 - X^N - K sum delta_i X^i)^+] at both extremes.

    method "quadrature-1f" (d == 1 only) is deterministic and exact up to
    root-finding tolerance; "monte-carlo" works for any d and reports the
    standard error of each bound in the diagnostics.
    """
    if contract.kind != "swaption-payer":
        raise DomainError(f"expected swaption-payer, got {contract.kind}")
    contract.schedule.check_within(curve)
    _check_band(vs, band)
    p0 = curve.bond_price(contract.schedule.start)
    diag: dict[str, Any] = {"method": method}
    if method == "quadrature-1f":
        if vs.dim != 1:
            raise UnsupportedMethodError(
                f"quadrature-1f requires a one-factor volatility structure, got d={vs.dim}"
            )
        values = []
        for scale in (band.lower, band.upper):
            xs, ws, coefs = _swaption_inputs(curve, vs, scale, contract)
            values.append(p0 * _swaption_value_comonotone(xs, ws, coefs))
        lower, upper = values
    elif method == "monte-carlo":
        mc = mc or MCConfig()
        lo_mean, lo_se = _swaption_value_mc(curve, vs, band.lower, contract, mc)
        hi_mean, hi_se = _swaption_value_mc(curve, vs, band.upper, contract, mc)
        lower, upper = p0 * lo_mean, p0 * hi_mean
        if band.is_degenerate:
            upper = lower  # one belief: both bounds are the same estimate
        diag.update(
            paths=mc.paths,
            seed=mc.seed,
            antithetic=mc.antithetic,
            se_lower=p0 * lo_se,
            se_upper=p0 * hi_se,
        )
    else:
        raise UnsupportedMethodError(
            f"unknown swaption method {method!r}; use 'quadrature-1f' or 'monte-carlo'"
        )
    return PriceBounds(
        lower=lower, upper=upper, symmetric=band.is_degenerate, diagnostics=diag
    ).scaled(contract.notional)


def price_option(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    contract: OptionContract,
    method: str = "quadrature-1f",
    mc: MCConfig | None = None,
) -> PriceBounds:
    """Dispatch on the contract kind."""
    if contract.kind == "cap":
        return price_cap(curve, vs, band, contract)
    if contract.kind == "floor":
        return price_floor(curve, vs, band, contract)
    if contract.kind == "in-arrears-payer-swap":
        return price_in_arrears_swap(curve, vs, band, contract)
    return price_swaption(curve, vs, band, contract, method=method, mc=mc)
