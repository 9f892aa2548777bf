"""Finite-difference solver for single options on one forward bond price.

The value u(t, x) of the upper expectation of phi(X_{t1}) solves the
uncertain-volatility PDE

    du/dt + 1/2 x^2 [ a_up(t) (u_xx)^+  -  a_dn(t) (u_xx)^- ] = 0,
    u(t1, x) = phi(x),

where a_up(t) = sum_j upper_j^2 s_j(t)^2 and a_dn(t) uses the lower band,
with s_j(t) the forward-price vol of X = P(T_i)/P(T) on factor j.  The
diffusion coefficient switches between the band extremes on the sign of the
second derivative, which is the scalar form of the band's generator.  Both
discretizations (explicit, implicit with Howard policy iteration) are
monotone, the standard sufficient condition for convergence to the unique
viscosity solution.

The lower expectation is the negated solve of -phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .curve import DiscountCurve
from .errors import ConvergenceError, DomainError, StabilityError
from .uncertainty import UncertaintyBand
from .vol_structure import VolStructure

SCHEMES = ("explicit", "implicit-policy-iteration")
POLICY_ITERATION_CAP = 50
POLICY_VALUE_TOL = 1e-12

# Gauss-Legendre 5 on [-1, 1]: used to average the terminal payoff over each
# grid cell, which removes the strike-placement noise of pointwise sampling.
_GL5_NODES = np.array([-0.9061798459386640, -0.5384693101056831, 0.0,
                       0.5384693101056831, 0.9061798459386640])
_GL5_WEIGHTS = np.array([0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                         0.4786286704993665, 0.2369268850561891])


@dataclass(frozen=True)
class PDEGrid:
    """Spatial/temporal resolution and scheme choice for one solve."""

    x_min: float
    x_max: float
    nx: int
    nt: int
    scheme: str = "implicit-policy-iteration"

    def __post_init__(self) -> None:
        if not self.x_min > 0.0:
            raise DomainError(f"x_min must be positive, got {self.x_min}")
        if not self.x_max > self.x_min:
            raise DomainError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if self.nx < 3:
            raise DomainError(f"nx must be at least 3, got {self.nx}")
        if self.nt < 1:
            raise DomainError(f"nt must be at least 1, got {self.nt}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)


def default_grid(
    x0: float,
    v_total: float,
    nx: int = 400,
    nt: int = 400,
    scheme: str = "implicit-policy-iteration",
) -> PDEGrid:
    """Six-standard-deviation truncation around the spot forward price:
    x in [x0 e^{-6v}, x0 e^{6v}] bounds the truncation error far below the
    grid error."""
    v = max(v_total, 1e-6)
    return PDEGrid(
        x_min=x0 * math.exp(-6.0 * v),
        x_max=x0 * math.exp(6.0 * v),
        nx=nx,
        nt=nt,
        scheme=scheme,
    )


@dataclass(frozen=True)
class PayoffSpec:
    """Terminal payoff with its polynomial-Lipschitz growth certificate.

    The evaluator maps an array of forward prices to payoff values.  The
    certificate (C, m) asserts |phi(x) - phi(y)| <= C (1 + |x|^m + |y|^m)
    |x - y|, which is what guarantees a unique viscosity solution; it is
    declared by the caller, not verified pointwise.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    growth: tuple[float, int]

    def __post_init__(self) -> None:
        if self.growth is None:
            raise DomainError("payoff requires a (C, m) growth certificate")
        C, m = self.growth
        if not (C > 0.0 and int(m) == m and m >= 0):
            raise DomainError(f"growth certificate needs C > 0 and integer m >= 0, got {self.growth}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class PDESolution:
    """Value at the spot forward price plus the full t=0 grid slice."""

    value: float
    x0: float
    cash_price: float
    xs: np.ndarray
    u0: np.ndarray
    times: np.ndarray
    surface: np.ndarray | None = None

    def save_surface_csv(self, path: str) -> None:
        """Dump ``t,x,u`` rows for plotting; requires keep_surface=True."""
        if self.surface is None:
            raise DomainError("solve was run without keep_surface=True")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,x,u\n")
            for k, t in enumerate(self.times):
                for i, x in enumerate(self.xs):
                    fh.write(f"{t!r},{x!r},{self.surface[k, i]!r}\n")


def _cell_averaged_terminal(payoff: PayoffSpec, xs: np.ndarray, dx: float) -> np.ndarray:
    u = np.array(payoff(xs), dtype=float)
    if len(xs) < 3:
        return u
    interior = xs[1:-1]
    acc = np.zeros_like(interior)
    for node, weight in zip(_GL5_NODES, _GL5_WEIGHTS):
        acc += weight * payoff(interior + 0.5 * dx * node)
    u[1:-1] = 0.5 * acc
    return u


def _step_variances(
    vs: VolStructure, band: UncertaintyBand, t1: float, nt: int, T: float, T_i: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step integrated variances at the band extremes (exact in time)."""
    ts = np.linspace(0.0, t1, nt + 1)
    a_up = np.array(
        [vs.integrated_variance(band.upper, ts[k], ts[k + 1], T, T_i) for k in range(nt)]
    )
    a_dn = np.array(
        [vs.integrated_variance(band.lower, ts[k], ts[k + 1], T, T_i) for k in range(nt)]
    )
    return a_up, a_dn


def _explicit_sweep(u, xs, dx, a_up, a_dn, keep):
    nt = len(a_up)
    x2 = xs[1:-1] ** 2
    stability = np.max(a_up) * xs[-1] ** 2 / dx**2
    if stability > 1.0 + 1e-12:
        suggested = math.ceil(nt * stability * 1.01)
        raise StabilityError(
            f"explicit step violates the stability bound by factor {stability:.3g}; "
            f"use nt >= {suggested} or the implicit-policy-iteration scheme"
        )
    frames = [u.copy()] if keep is not None else None
    for k in range(nt - 1, -1, -1):
        d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
        gen = 0.5 * x2 * (a_up[k] * np.maximum(d2, 0.0) - a_dn[k] * np.maximum(-d2, 0.0))
        u = u.copy()
        u[1:-1] += gen
        if frames is not None:
            frames.append(u.copy())
    return u, frames


def _implicit_sweep(u, xs, dx, a_up, a_dn, keep):
    nt = len(a_up)
    nx = len(xs)
    x2 = xs[1:-1] ** 2
    frames = [u.copy()] if keep is not None else None
    lo_bc, hi_bc = u[0], u[-1]
    for k in range(nt - 1, -1, -1):
        rhs_full = u
        d2 = (rhs_full[2:] - 2.0 * rhs_full[1:-1] + rhs_full[:-2]) / dx**2
        policy = d2 >= 0.0
        prev = rhs_full[1:-1]
        solved = None
        for _ in range(POLICY_ITERATION_CAP):
            a = np.where(policy, a_up[k], a_dn[k])
            alpha = 0.5 * a * x2 / dx**2
            band_mat = np.zeros((3, nx - 2))
            band_mat[0, 1:] = -alpha[:-1]          # superdiagonal
            band_mat[1, :] = 1.0 + 2.0 * alpha     # diagonal
            band_mat[2, :-1] = -alpha[1:]          # subdiagonal
            rhs = rhs_full[1:-1].copy()
            rhs[0] += alpha[0] * lo_bc
            rhs[-1] += alpha[-1] * hi_bc
            solved = solve_banded((1, 1), band_mat, rhs)
            full = np.concatenate(([lo_bc], solved, [hi_bc]))
            d2 = (full[2:] - 2.0 * full[1:-1] + full[:-2]) / dx**2
            new_policy = d2 >= 0.0
            value_change = float(np.max(np.abs(solved - prev)))
            if np.array_equal(new_policy, policy) or value_change < POLICY_VALUE_TOL:
                policy = new_policy
                break
            policy = new_policy
            prev = solved
        else:
            raise ConvergenceError(
                f"policy iteration did not converge within {POLICY_ITERATION_CAP} "
                f"iterations at time step {k}"
            )
        u = np.concatenate(([lo_bc], solved, [hi_bc]))
        if frames is not None:
            frames.append(u.copy())
    return u, frames


def solve_single_option(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    T: float,
    t1: float,
    T_i: float,
    payoff: PayoffSpec,
    grid: PDEGrid,
    keep_surface: bool = False,
    cell_average: bool = True,
) -> PDESolution:
    """Upper expectation of phi(X_{t1}) for X = P(T_i)/P(T), plus the cash
    price P(T) * u(0, x0).

    T is the maturity of the pricing measure (X is a driftless martingale
    under it), t1 <= min(T, T_i) the option expiry.  cell_average smooths
    the terminal condition over grid cells (monotone and consistent), which
    removes the O(dx) noise a kink otherwise injects.
    """
    if vs.dim != band.dim:
        raise DomainError(f"volatility structure has {vs.dim} factors but band has {band.dim}")
    if t1 > min(T, T_i):
        raise DomainError(f"expiry t1={t1} must not exceed min(T, T_i)=({T}, {T_i})")
    if t1 < 0.0:
        raise DomainError(f"expiry must be nonnegative, got {t1}")
    if max(T, T_i) > curve.horizon:
        raise DomainError(f"maturities ({T}, {T_i}) exceed curve horizon {curve.horizon}")

    x0 = curve.forward_price(T, T_i)
    xs = grid.xs
    dx = grid.dx
    if not (grid.x_min <= x0 <= grid.x_max):
        raise DomainError(f"spot forward price {x0} lies outside the grid [{grid.x_min}, {grid.x_max}]")

    if t1 == 0.0:
        u = payoff(xs)
        value = float(np.interp(x0, xs, u))
        return PDESolution(
            value=value, x0=x0, cash_price=curve.bond_price(T) * value,
            xs=xs, u0=u, times=np.array([0.0]),
            surface=u[None, :] if keep_surface else None,
        )

    u = _cell_averaged_terminal(payoff, xs, dx) if cell_average else payoff(xs)
    a_up, a_dn = _step_variances(vs, band, t1, grid.nt, T, T_i)
    sweep = _explicit_sweep if grid.scheme == "explicit" else _implicit_sweep
    u, frames = sweep(u, xs, dx, a_up, a_dn, keep_surface or None)

    value = float(np.interp(x0, xs, u))
    surface = None
    if keep_surface and frames is not None:
        # frames were appended backward in time; reorder to increasing t.
        surface = np.array(frames[::-1])
    return PDESolution(
        value=value,
        x0=x0,
        cash_price=curve.bond_price(T) * value,
        xs=xs,
        u0=u,
        times=np.linspace(0.0, t1, grid.nt + 1),
        surface=surface,
    )


def solve_lower(
    curve: DiscountCurve,
    vs: VolStructure,
    band: UncertaintyBand,
    T: float,
    t1: float,
    T_i: float,
    payoff: PayoffSpec,
    grid: PDEGrid,
    keep_surface: bool = False,
    cell_average: bool = True,
) -> PDESolution:
    """Lower expectation: the negated upper solve of -phi (equivalently the
    band extremes swap roles on the Hessian sign)."""
    neg = PayoffSpec(evaluator=lambda x: -payoff(x), growth=payoff.growth)
    sol = solve_single_option(
        curve, vs, band, T, t1, T_i, neg, grid,
        keep_surface=keep_surface, cell_average=cell_average,
    )
    return PDESolution(
        value=-sol.value,
        x0=sol.x0,
        cash_price=-sol.cash_price,
        xs=sol.xs,
        u0=-sol.u0,
        times=sol.times,
        surface=None if sol.surface is None else -sol.surface,
    )
