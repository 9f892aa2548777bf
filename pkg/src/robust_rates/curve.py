"""Initial term structure: instantaneous forward curve and time-0 bond prices.

The curve is a piecewise description of the instantaneous forward rate
f(T) on [0, horizon].  Zero-coupon bond prices follow by exact integration,

    P(T) = exp(-integral_0^T f(s) ds),

and forward bond prices are ratios P(T_tilde)/P(T).  Both supported
interpolation modes (flat-left and linear) admit closed-form antiderivatives,
so no quadrature error enters at this layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ParseError

INTERPOLATIONS = ("flat-left", "linear")


@dataclass(frozen=True)
class DiscountCurve:
    """Immutable forward curve with exact bond-price integration.

    knots: ordered (maturity, instantaneous forward rate) pairs, maturities
        strictly increasing within [0, horizon], rates per annum as decimals.
    horizon: last usable maturity (years).  Defaults to the last knot.
    interpolation: "flat-left" holds each rate until the next knot;
        "linear" interpolates between knots.  Outside the knot range the
        curve extrapolates flat at the nearest knot's rate.
    """

    knots: tuple[tuple[float, float], ...]
    horizon: float | None = None
    interpolation: str = "linear"

    def __post_init__(self) -> None:
        if not self.knots:
            raise DomainError("curve requires at least one knot")
        knots = tuple((float(m), float(r)) for m, r in self.knots)
        object.__setattr__(self, "knots", knots)
        mats = [m for m, _ in knots]
        if any(not math.isfinite(m) or not math.isfinite(r) for m, r in knots):
            raise DomainError("curve knots must be finite")
        if any(m2 <= m1 for m1, m2 in zip(mats, mats[1:])):
            raise DomainError("curve maturities must be strictly increasing")
        if mats[0] < 0.0:
            raise DomainError("curve maturities must be nonnegative")
        horizon = float(self.horizon) if self.horizon is not None else mats[-1]
        if horizon <= 0.0:
            raise DomainError(f"curve horizon must be positive, got {horizon}")
        if mats[-1] > horizon:
            raise DomainError(
                f"last knot maturity {mats[-1]} exceeds horizon {horizon}"
            )
        object.__setattr__(self, "horizon", horizon)
        if self.interpolation not in INTERPOLATIONS:
            raise DomainError(
                f"interpolation must be one of {INTERPOLATIONS}, "
                f"got {self.interpolation!r}"
            )

    # -- cached knot arrays ------------------------------------------------

    @cached_property
    def _mats(self) -> np.ndarray:
        return np.array([m for m, _ in self.knots])

    @cached_property
    def _rates(self) -> np.ndarray:
        return np.array([r for _, r in self.knots])

    @cached_property
    def _cum_integral(self) -> np.ndarray:
        """integral_0^{m_k} f(s) ds at each knot maturity m_k (exact)."""
        mats, rates = self._mats, self._rates
        out = np.zeros(len(mats))
        # Segment before the first knot: flat at the first rate.
        head = mats[0] * rates[0]
        out[0] = head
        for k in range(1, len(mats)):
            dt = mats[k] - mats[k - 1]
            if self.interpolation == "flat-left":
                seg = rates[k - 1] * dt
            else:
                seg = 0.5 * (rates[k - 1] + rates[k]) * dt
            out[k] = out[k - 1] + seg
        return out

    # -- operations ---------------------------------------------------------

    def _check_maturity(self, T: float) -> float:
        T = float(T)
        if not 0.0 <= T <= self.horizon + 1e-12:
            raise DomainError(
                f"maturity {T} outside curve horizon [0, {self.horizon}]"
            )
        return min(T, self.horizon)

    def forward_rate(self, T: float) -> float:
        """Instantaneous forward rate f(T), exact at knots."""
        T = self._check_maturity(T)
        mats, rates = self._mats, self._rates
        if T <= mats[0]:
            return float(rates[0])
        if T >= mats[-1]:
            return float(rates[-1])
        k = int(np.searchsorted(mats, T, side="right")) - 1
        if self.interpolation == "flat-left":
            return float(rates[k])
        w = (T - mats[k]) / (mats[k + 1] - mats[k])
        return float(rates[k] + w * (rates[k + 1] - rates[k]))

    def forward_integral(self, T: float) -> float:
        """integral_0^T f(s) ds, evaluated with closed-form antiderivatives."""
        T = self._check_maturity(T)
        mats, rates = self._mats, self._rates
        if T <= mats[0]:
            return float(T * rates[0])
        if T >= mats[-1]:
            return float(self._cum_integral[-1] + (T - mats[-1]) * rates[-1])
        k = int(np.searchsorted(mats, T, side="right")) - 1
        dt = T - mats[k]
        if self.interpolation == "flat-left":
            seg = rates[k] * dt
        else:
            seg = 0.5 * (rates[k] + self.forward_rate(T)) * dt
        return float(self._cum_integral[k] + seg)

    def bond_price(self, T: float) -> float:
        """Time-0 zero-coupon bond price P(T) = exp(-integral_0^T f)."""
        return math.exp(-self.forward_integral(T))

    def forward_price(self, T: float, T_tilde: float) -> float:
        """Time-0 forward bond price P(T_tilde)/P(T).

        Satisfies forward_price(T, S) * forward_price(S, T) == 1 up to
        floating round-off.
        """
        return math.exp(self.forward_integral(T) - self.forward_integral(T_tilde))


def flat_curve(rate: float, horizon: float = 30.0) -> DiscountCurve:
    """Constant forward curve at the given per-annum rate."""
    return DiscountCurve(knots=((0.0, rate),), horizon=horizon)


def load_curve(
    path: str,
    interpolation: str = "linear",
    horizon: float | None = None,
) -> DiscountCurve:
    """Read a curve from a header-free CSV of ``maturity,rate`` lines.

    Maturities are year fractions, rates per-annum decimals with a ``.``
    separator.  Blank lines are ignored.  Raises ParseError with the
    offending line number on malformed input, DomainError on invariant
    violations (unsorted or duplicate maturities).
    """
    knots: list[tuple[float, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(
                    f"{path}: line {lineno}: expected 'maturity,rate', got {line!r}"
                )
            try:
                m, r = float(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: non-numeric field in {line!r}"
                ) from None
            knots.append((m, r))
    if not knots:
        raise ParseError(f"{path}: no curve rows found")
    mats = [m for m, _ in knots]
    if any(m2 <= m1 for m1, m2 in zip(mats, mats[1:])):
        raise DomainError(f"{path}: maturities must be strictly increasing")
    return DiscountCurve(knots=tuple(knots), horizon=horizon, interpolation=interpolation)


def save_curve(curve: DiscountCurve, path: str) -> None:
    """Write the knots back out in the same ``maturity,rate`` CSV format."""
    with open(path, "w", encoding="utf-8") as fh:
        for m, r in curve.knots:
            fh.write(f"{m!r},{r!r}\n")
