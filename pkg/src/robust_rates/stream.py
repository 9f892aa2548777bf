"""Backward-induction pricing of cashflow streams.

A stream attaches one leg to each accrual period [T_{i-1}, T_i]:

  * ConstantLeg(amount)            -- fixed cash at T_i,
  * FloatingLinearLeg(a, b)        -- a * L_{T_{i-1}}(T_i) + b at T_i,
  * OptionLeg(g, tag)              -- cash g(P_{T_{i-1}}(T_i)) at T_{i-1},
                                      i.e. a function of the period bond
                                      price, settled in advance.

Constant and floating-linear legs are symmetric, so they separate exactly
from the rest of the stream and price in closed form.  Option legs sharing
one convexity tag decouple into a sum of single-option prices evaluated at
the band extremes.  Mixed or general tags force the literal backward
recursion: the last option leg is a one-dimensional nonlinear PDE solve,
and the coupling of two adjacent option legs lives on a two-dimensional
tensor grid whose single driver makes the diffusion rank one (the grid
aspect ratio absorbs the perfect correlation into a diagonal stencil).
Because pricing is sublinear, the recursion result is sandwiched between
the per-leg lower-bound sum and the per-leg upper-bound sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Union

import numpy as np

from .curve import DiscountCurve
from .errors import DomainError, UnsupportedMethodError
from .linear_pricing import TenorSchedule
from .lognormal import lognormal_call, lognormal_put, lognormal_reciprocal_mean
from .option_pricing import transformed_strike
from .pde import (
    _GL5_NODES,
    _GL5_WEIGHTS,
    _cell_averaged_terminal,
    _implicit_sweep,
    PayoffSpec,
    PDEGrid,
    default_grid,
    solve_lower,
    solve_single_option,
)
from .uncertainty import PriceBounds, UncertaintyBand, degenerate_band
from .vol_structure import VolStructure

CONVEXITY_TAGS = ("convex", "concave", "general")
CHORD_TRIPLES = 3
MAX_CONTROL_DIM = 2  # live forward prices carried on the tensor grid


@dataclass(frozen=True)
class ConstantLeg:
    """Fixed cash amount paid at the period end."""

    amount: float


@dataclass(frozen=True)
class FloatingLinearLeg:
    """slope * L + intercept paid at the period end, L the simple spot rate
    fixed at the period start."""

    slope: float
    intercept: float = 0.0


@dataclass(frozen=True)
class OptionLeg:
    """g(p) settled at the period start, p the period-end bond price there.

    convexity is caller-asserted ('convex' | 'concave' | 'general') and spot
    checked by a random chord test; a contradiction downgrades the tag to
    'general' with a warning in the diagnostics.  expected_value(x, v), when
    provided, is the closed-form lognormal expectation E[g(X)] used on the
    decoupled path.
    """

    payoff: Callable[[np.ndarray], np.ndarray]
    convexity: str
    growth: tuple[float, int] = (1.0, 1)
    expected_value: Callable[[float, float], float] | None = None
    label: str = "option"

    def __post_init__(self) -> None:
        if self.convexity not in CONVEXITY_TAGS:
            raise DomainError(f"convexity must be one of {CONVEXITY_TAGS}, got {self.convexity!r}")

    def __call__(self, p):
        return np.asarray(self.payoff(np.asarray(p, dtype=float)), dtype=float)


Leg = Union[ConstantLeg, FloatingLinearLeg, OptionLeg]


@dataclass(frozen=True)
class CashflowStream:
    """One leg per accrual period of the schedule."""

    schedule: TenorSchedule
    legs: tuple[Leg, ...]
    notional: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "legs", tuple(self.legs))
        if len(self.legs) != self.schedule.periods:
            raise DomainError(
                f"stream needs one leg per period: {self.schedule.periods} periods, "
                f"{len(self.legs)} legs"
            )


# -- standard leg constructors -----------------------------------------------


def caplet_leg(accrual: float, strike_rate: float) -> OptionLeg:
    """(1/K_i) (K_i - p)^+ : the advance-settled caplet, convex."""
    ki = transformed_strike(accrual, strike_rate)
    return OptionLeg(
        payoff=lambda p: np.maximum(ki - p, 0.0) / ki,
        convexity="convex",
        growth=(1.0 / ki, 1),
        expected_value=lambda x, v: lognormal_put(x, ki, v) / ki,
        label=f"caplet(K={strike_rate})",
    )


def floorlet_leg(accrual: float, strike_rate: float) -> OptionLeg:
    """(1/K_i) (p - K_i)^+ : the advance-settled floorlet, convex."""
    ki = transformed_strike(accrual, strike_rate)
    return OptionLeg(
        payoff=lambda p: np.maximum(p - ki, 0.0) / ki,
        convexity="convex",
        growth=(1.0 / ki, 1),
        expected_value=lambda x, v: lognormal_call(x, ki, v) / ki,
        label=f"floorlet(K={strike_rate})",
    )


def in_arrears_leg(accrual: float, strike_rate: float) -> OptionLeg:
    """1/p - 1/K_i : the in-arrears payer exchange, convex in p."""
    ki = transformed_strike(accrual, strike_rate)
    return OptionLeg(
        payoff=lambda p: 1.0 / p - 1.0 / ki,
        convexity="convex",
        growth=(400.0, 2),  # Lipschitz on the truncated positive domain
        expected_value=lambda x, v: lognormal_reciprocal_mean(x, v) - 1.0 / ki,
        label=f"in-arrears(K={strike_rate})",
    )


def capped_call_spread_leg(strike: float, cap: float) -> OptionLeg:
    """min((p - strike)^+, cap): convex then concave, tagged general."""
    if cap <= 0.0:
        raise DomainError(f"cap must be positive, got {cap}")
    return OptionLeg(
        payoff=lambda p: np.minimum(np.maximum(p - strike, 0.0), cap),
        convexity="general",
        growth=(1.0, 1),
        label=f"capped-spread({strike},{cap})",
    )


def capped_forward_leg(cap: float) -> OptionLeg:
    """min(p, cap): concave."""
    if cap <= 0.0:
        raise DomainError(f"cap must be positive, got {cap}")
    return OptionLeg(
        payoff=lambda p: np.minimum(p, cap),
        convexity="concave",
        growth=(1.0, 1),
        label=f"capped-forward({cap})",
    )


# -- dispatch helpers ----------------------------------------------------------


def _symmetric_leg_value(curve: DiscountCurve, stream: CashflowStream, i: int) -> float:
    leg = stream.legs[i]
    t_reset, t_pay = stream.schedule.dates[i], stream.schedule.dates[i + 1]
    delta = t_pay - t_reset
    if isinstance(leg, ConstantLeg):
        return leg.amount * curve.bond_price(t_pay)
    # a L + b at T_i: the floating part replicates to (a/delta)(P(T_{i-1}) - P(T_i)).
    return (
        leg.slope / delta * (curve.bond_price(t_reset) - curve.bond_price(t_pay))
        + leg.intercept * curve.bond_price(t_pay)
    )


def _chord_check(leg: OptionLeg, lo: float, hi: float, seed: int) -> bool:
    """Spot check the declared curvature on 3 random chords; True if consistent."""
    if leg.convexity == "general":
        return True
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(CHORD_TRIPLES):
        a, b = np.sort(rng.uniform(lo, hi, size=2))
        if b - a < 1e-12:
            continue
        lam = rng.uniform(0.1, 0.9)
        mid = lam * a + (1 - lam) * b
        chord = lam * float(leg(np.array([a]))[0]) + (1 - lam) * float(leg(np.array([b]))[0])
        val = float(leg(np.array([mid]))[0])
        scale = 1e-9 * (1.0 + abs(chord))
        if leg.convexity == "convex" and val > chord + scale:
            return False
        if leg.convexity == "concave" and val < chord - scale:
            return False
    return True


def _leg_domain(curve, vs, band, schedule, i) -> tuple[float, float, float]:
    """Spot forward price and a 6-sigma bracket for period i's underlying."""
    t_reset, t_pay = schedule.dates[i], schedule.dates[i + 1]
    x0 = curve.forward_price(t_reset, t_pay)
    v = math.sqrt(vs.integrated_variance(band.upper, 0.0, t_reset, t_reset, t_pay))
    v = max(v, 1e-6)
    return x0, x0 * math.exp(-6.0 * v), x0 * math.exp(6.0 * v)


def _leg_classical_value(
    curve, vs, scale, stream, i, nx: int, nt: int
) -> float:
    """Classical (single-sigma) value of option leg i at a constant scaling."""
    leg = stream.legs[i]
    t_reset, t_pay = stream.schedule.dates[i], stream.schedule.dates[i + 1]
    x0 = curve.forward_price(t_reset, t_pay)
    v2 = vs.integrated_variance(scale, 0.0, t_reset, t_reset, t_pay)
    if leg.expected_value is not None:
        return curve.bond_price(t_reset) * leg.expected_value(x0, math.sqrt(v2))
    payoff = PayoffSpec(evaluator=leg.payoff, growth=leg.growth)
    grid = default_grid(x0, math.sqrt(v2), nx=nx, nt=nt)
    sol = solve_single_option(
        curve, vs, degenerate_band(scale), t_reset, t_reset, t_pay, payoff, grid
    )
    return sol.cash_price


def price_leg_bounds(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    stream: CashflowStream,
    i: int,
    nx: int = 241,
    nt: int = 240,
) -> PriceBounds:
    """Robust bounds for leg i priced on its own (unit stream notional)."""
    leg = stream.legs[i]
    if not isinstance(leg, OptionLeg):
        v = _symmetric_leg_value(curve, stream, i)
        return PriceBounds(lower=v, upper=v, symmetric=True, diagnostics={"method": "closed-form"})
    if leg.convexity == "convex":
        upper = _leg_classical_value(curve, vs, band.upper, stream, i, nx, nt)
        lower = _leg_classical_value(curve, vs, band.lower, stream, i, nx, nt)
        method = "convex-decoupled"
    elif leg.convexity == "concave":
        upper = _leg_classical_value(curve, vs, band.lower, stream, i, nx, nt)
        lower = _leg_classical_value(curve, vs, band.upper, stream, i, nx, nt)
        method = "concave-decoupled"
    else:
        t_reset, t_pay = stream.schedule.dates[i], stream.schedule.dates[i + 1]
        x0, lo, hi = _leg_domain(curve, vs, band, stream.schedule, i)
        payoff = PayoffSpec(evaluator=leg.payoff, growth=leg.growth)
        grid = PDEGrid(x_min=lo, x_max=hi, nx=nx, nt=nt)
        upper = solve_single_option(curve, vs, band, t_reset, t_reset, t_pay, payoff, grid).cash_price
        lower = solve_lower(curve, vs, band, t_reset, t_reset, t_pay, payoff, grid).cash_price
        method = "single-option-pde"
    return PriceBounds(
        lower=lower, upper=upper,
        symmetric=band.is_degenerate, diagnostics={"method": method},
    )


# -- the coupled two-leg recursion ---------------------------------------------


def _pair_recursion_upper(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    schedule: TenorSchedule,
    i: int,
    g1: Callable[[np.ndarray], np.ndarray],
    g1_growth: tuple[float, int],
    g2: Callable[[np.ndarray], np.ndarray],
    g2_growth: tuple[float, int],
    nx: int,
    nt: int,
) -> float:
    """Upper expectation of g1 settled at T_{i-1} plus g2 settled at T_i,
    for adjacent periods i and i+1 (0-based), via the backward recursion.

    Step 1 solves the one-dimensional problem for g2 over [T_{i-1}, T_i]
    under its own forward measure; step 2 couples it into the terminal
    condition g1(x1) + x1 * h(x2) of a two-state solve over [0, T_{i-1}].
    """
    if vs.dim != 1:
        raise UnsupportedMethodError(
            "the coupled stream recursion supports one-factor volatility structures only"
        )
    if not vs.is_separable():
        raise UnsupportedMethodError(
            "the coupled stream recursion needs a time-separable factor "
            "(ho-lee or hull-white), not a tabulated surface"
        )
    t_start, t_mid, t_end = schedule.dates[i], schedule.dates[i + 1], schedule.dates[i + 2]
    pair1 = (t_start, t_mid)
    pair2 = (t_mid, t_end)
    x1_0 = curve.forward_price(*pair1)
    x2_0 = curve.forward_price(*pair2)

    # Inner solve: h(x2) = upper value of g2 at t = T_{i-1}, on a domain wide
    # enough to cover the outer grid plus the diffusion left until T_i.
    v2_outer = math.sqrt(vs.integrated_variance(band.upper, 0.0, t_start, *pair2))
    v2_inner = math.sqrt(vs.integrated_variance(band.upper, t_start, t_mid, *pair2))
    half_width = 6.0 * max(v2_outer, 1e-6) + 6.0 * max(v2_inner, 1e-6)
    inner_grid = PDEGrid(
        x_min=x2_0 * math.exp(-half_width),
        x_max=x2_0 * math.exp(half_width),
        nx=nx,
        nt=max(nt // 2, 40),
    )
    h_grid_x = inner_grid.xs
    h_values = _window_value(
        curve, vs, band, pair2, t_start, t_mid, PayoffSpec(evaluator=g2, growth=g2_growth), inner_grid
    )

    def h_interp(x2: np.ndarray) -> np.ndarray:
        return np.interp(x2, h_grid_x, h_values)

    # Outer two-state solve on log coordinates with aspect locked to the
    # constant vol ratio rho = sigma2 / sigma1.
    ref_t = 0.5 * t_start
    s1 = vs.forward_price_vol(0, ref_t, *pair1)
    s2 = vs.forward_price_vol(0, ref_t, *pair2)
    if s1 <= 0.0 or s2 <= 0.0:
        raise DomainError("coupled recursion requires positive forward-price vols")
    rho = s2 / s1

    v1_up = vs.integrated_variance(band.upper, 0.0, t_start, *pair1)
    half1 = 6.0 * max(math.sqrt(v1_up), 1e-6)
    n = nx if nx % 2 == 1 else nx + 1
    y1 = np.linspace(math.log(x1_0) - half1, math.log(x1_0) + half1, n)
    h1 = y1[1] - y1[0]
    h2 = rho * h1
    y2 = math.log(x2_0) + (np.arange(n) - n // 2) * h2
    x1g = np.exp(y1)[:, None]
    x2g = np.exp(y2)[None, :]

    # Cell-average the (possibly kinked) own payoff along y1; the coupling
    # factor x1 * h(x2) is smooth, so pointwise sampling suffices there.
    g1_avg = np.zeros(n)
    for node, weight in zip(_GL5_NODES, _GL5_WEIGHTS):
        g1_avg += weight * np.asarray(g1(np.exp(y1 + 0.5 * h1 * node)), dtype=float)
    g1_avg *= 0.5
    g1_avg[0] = float(np.asarray(g1(np.array([x1g[0, 0]])), dtype=float)[0])
    g1_avg[-1] = float(np.asarray(g1(np.array([x1g[-1, 0]])), dtype=float)[0])
    terminal = g1_avg[:, None] + x1g * h_interp(np.broadcast_to(x2g, (n, n)))

    # Per-step variances of the driver integrated against sigma1^2.  The
    # stability bound must hold at the *peak* local variance (hull-white
    # vols grow with t), not just on average.
    drift2 = rho * (rho + 2.0)
    weight = 2.0 / h1**2 + 1.0 / h1 + drift2 / h2
    sample = np.linspace(0.0, t_start, 65)
    peak_rate = max(
        vs.integrated_variance(band.upper, max(t - 1e-6, 0.0), t, *pair1) / 1e-6
        for t in sample[1:]
    )
    nt_eff = max(nt, int(math.ceil(0.5 * peak_rate * t_start * weight * 1.05)), 1)
    ts = np.linspace(0.0, t_start, nt_eff + 1)
    vu = np.array([vs.integrated_variance(band.upper, ts[k], ts[k + 1], *pair1) for k in range(nt_eff)])
    vd = np.array([vs.integrated_variance(band.lower, ts[k], ts[k + 1], *pair1) for k in range(nt_eff)])

    u = terminal.copy()
    for k in range(nt_eff - 1, -1, -1):
        c = u[1:-1, 1:-1]
        diag = (u[2:, 2:] - 2.0 * c + u[:-2, :-2]) / h1**2
        up1 = (c - u[:-2, 1:-1]) / h1
        up2 = (c - u[1:-1, :-2]) / h2
        hh = diag - up1 - drift2 * up2
        gen = np.maximum(0.5 * vu[k] * hh, 0.5 * vd[k] * hh)
        u = u.copy()
        u[1:-1, 1:-1] = c + gen
    value = float(u[n // 2, n // 2])
    return curve.bond_price(t_start) * value


def _window_value(
    curve, vs, band, pair, t_from, t_to, payoff: PayoffSpec, grid: PDEGrid
) -> np.ndarray:
    """Upper value function at t_from of payoff(X_{t_to}) for the forward
    price X over the window [t_from, t_to], returned on grid.xs."""
    xs = grid.xs
    dx = grid.dx
    u = _cell_averaged_terminal(payoff, xs, dx)
    ts = np.linspace(t_from, t_to, grid.nt + 1)
    a_up = np.array(
        [vs.integrated_variance(band.upper, ts[k], ts[k + 1], *pair) for k in range(grid.nt)]
    )
    a_dn = np.array(
        [vs.integrated_variance(band.lower, ts[k], ts[k + 1], *pair) for k in range(grid.nt)]
    )
    u, _ = _implicit_sweep(u, xs, dx, a_up, a_dn, None)
    return u


# -- public pricer ---------------------------------------------------------------


def price_stream(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    stream: CashflowStream,
    nx: int = 241,
    nt: int = 240,
) -> PriceBounds:
    """Robust bounds for the whole stream.

    Dispatch: symmetric legs always separate exactly; option legs sharing a
    convexity tag decouple into per-leg closed forms at the band extremes;
    mixed or general tags trigger the backward PDE recursion, supported for
    at most two option legs on adjacent periods.
    """
    stream.schedule.check_within(curve)
    if vs.dim != band.dim:
        raise DomainError(f"volatility structure has {vs.dim} factors but band has {band.dim}")

    diag: dict[str, Any] = {}
    warnings: list[str] = []
    sym_value = sum(
        _symmetric_leg_value(curve, stream, i)
        for i, leg in enumerate(stream.legs)
        if not isinstance(leg, OptionLeg)
    )
    option_idx = [i for i, leg in enumerate(stream.legs) if isinstance(leg, OptionLeg)]

    # Advisory chord test; a contradiction downgrades the tag (not silently:
    # the warning lands in the diagnostics).
    tags: dict[int, str] = {}
    for i in option_idx:
        leg = stream.legs[i]
        _, lo, hi = _leg_domain(curve, vs, band, stream.schedule, i)
        if _chord_check(leg, lo, hi, seed=1000 + i):
            tags[i] = leg.convexity
        else:
            tags[i] = "general"
            warnings.append(
                f"leg {i} ({leg.label}): declared {leg.convexity} failed the chord "
                "spot-check; treated as general"
            )

    if not option_idx:
        diag.update(method="symmetric-closed-form")
        return PriceBounds(
            lower=sym_value, upper=sym_value, symmetric=True, diagnostics=diag
        ).scaled(stream.notional)

    tag_set = {tags[i] for i in option_idx}
    if tag_set == {"convex"} or tag_set == {"concave"}:
        tag = tag_set.pop()
        hi_scale, lo_scale = (band.upper, band.lower) if tag == "convex" else (band.lower, band.upper)
        upper = sym_value + sum(
            _leg_classical_value(curve, vs, hi_scale, stream, i, nx, nt) for i in option_idx
        )
        lower = sym_value + sum(
            _leg_classical_value(curve, vs, lo_scale, stream, i, nx, nt) for i in option_idx
        )
        diag.update(method=f"{tag}-decoupled", option_legs=len(option_idx))
    else:
        if len(option_idx) > MAX_CONTROL_DIM:
            raise UnsupportedMethodError(
                f"mixed-curvature streams support at most {MAX_CONTROL_DIM} option legs "
                f"(got {len(option_idx)}): larger instances exceed the tensor-grid "
                "state dimension this engine carries"
            )
        if len(option_idx) == 1:
            i = option_idx[0]
            leg_bounds = price_leg_bounds(curve, vs, band, stream, i, nx=nx, nt=nt)
            upper = sym_value + leg_bounds.upper
            lower = sym_value + leg_bounds.lower
            diag.update(method="single-option-pde", option_legs=1)
        else:
            i, j = option_idx
            if j != i + 1:
                raise UnsupportedMethodError(
                    "two general-tag option legs must sit on adjacent periods; "
                    "non-adjacent pairs add a third coupling state beyond the "
                    "tensor grid carried here"
                )
            leg1: OptionLeg = stream.legs[i]
            leg2: OptionLeg = stream.legs[j]
            upper = sym_value + _pair_recursion_upper(
                curve, vs, band, stream.schedule, i,
                leg1.payoff, leg1.growth, leg2.payoff, leg2.growth, nx, nt,
            )
            neg1 = lambda p: -leg1(p)
            neg2 = lambda p: -leg2(p)
            lower = sym_value - _pair_recursion_upper(
                curve, vs, band, stream.schedule, i,
                neg1, leg1.growth, neg2, leg2.growth, nx, nt,
            )
            diag.update(method="coupled-pair-pde", option_legs=2, nx=nx, nt=nt)
    if warnings:
        diag["warnings"] = warnings
    symmetric = band.is_degenerate and not warnings
    # Guard against tiny reversed bounds from independent numerical paths.
    if band.is_degenerate:
        lo_, hi_ = min(lower, upper), max(lower, upper)
        lower, upper = lo_, hi_
        symmetric = abs(hi_ - lo_) <= 1e-9
    return PriceBounds(
        lower=lower, upper=upper, symmetric=symmetric, diagnostics=diag
    ).scaled(stream.notional)
