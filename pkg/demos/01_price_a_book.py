"""Price a small book of interest rate contracts under volatility uncertainty.

Walks through the core workflow: build a discount curve, pick a factor
volatility, wrap it in an uncertainty band, and price linear and optional
contracts.  Linear contracts come back with a single price (upper == lower);
optional ones come back with a bounds pair whose width is the price of the
volatility uncertainty itself.
"""

import robust_rates as rr

# A flat 2% forward curve out to 30y, a Ho-Lee style factor with level 1%,
# and a generous band: the realized volatility may sit anywhere between
# half and one-and-a-half times the factor level.
curve = rr.flat_curve(0.02, horizon=30.0)
vol = rr.ho_lee(0.01)
band = rr.UncertaintyBand(lower=(0.5,), upper=(1.5,))

schedule = rr.TenorSchedule(dates=(1.0, 1.5, 2.0))

print("=== symmetric contracts: one price, no volatility exposure ===")
fcb = rr.price_fixed_coupon_bond(
    curve, rr.LinearContract(kind="fixed-coupon-bond", schedule=schedule, fixed_rate=0.05)
)
frn = rr.price_floating_rate_note(
    curve, rr.LinearContract(kind="floating-rate-note", schedule=schedule)
)
swap = rr.price_swap(
    curve, rr.LinearContract(kind="payer-swap", schedule=schedule, fixed_rate=0.04)
)
par = rr.swap_rate(curve, schedule)
print(f"fixed coupon bond (5%):   {fcb.upper:.10f}")
print(f"floating rate note:       {frn.upper:.10f}")
print(f"payer swap (4%):          {swap.upper:.10f}")
print(f"par swap rate:            {par:.6%}")

print()
print("=== asymmetric contracts: a bounds pair per contract ===")
for kind in ("cap", "floor", "in-arrears-payer-swap"):
    c = rr.OptionContract(kind=kind, schedule=schedule, strike_rate=0.04)
    b = rr.price_option(curve, vol, band, c)
    print(f"{kind:24s} [{b.lower:.8f}, {b.upper:.8f}]  width {b.spread:.2e}")

swn = rr.OptionContract(kind="swaption-payer", schedule=schedule, strike_rate=0.04)
b = rr.price_swaption(curve, vol, band, swn, method="quadrature-1f")
print(f"{'payer swaption':24s} [{b.lower:.8f}, {b.upper:.8f}]  width {b.spread:.2e}")

print()
print("The cap/floor bounds tie back to the swap through put-call parity,")
print("which survives volatility uncertainty because swaps are symmetric:")
cap = rr.price_cap(curve, vol, band, rr.OptionContract(kind="cap", schedule=schedule, strike_rate=0.04))
flo = rr.price_floor(curve, vol, band, rr.OptionContract(kind="floor", schedule=schedule, strike_rate=0.04))
print(f"cap_upper - floor_upper - swap = {cap.upper - flo.upper - swap.upper:+.2e}")
print(f"cap_lower - floor_lower - swap = {cap.lower - flo.lower - swap.lower:+.2e}")
