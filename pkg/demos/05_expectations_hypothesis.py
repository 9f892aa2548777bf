"""The expectations hypothesis holds scenario by scenario.

Under the forward-maturity pricing measure the drift of the forward rate
vanishes, so today's forward rate is the expectation of the future short
rate in EVERY admissible volatility scenario, not just on average across
them.  Simulate the terminal short rate at several constant scalings and
compare the sample means against the forward curve.
"""

import robust_rates as rr

curve = rr.flat_curve(0.02)
vol = rr.ho_lee(0.01)
T = 2.0

print(f"forward rate f(0, {T}) = {curve.forward_rate(T):.6f}")
print()
print(f"{'scaling':>8s} {'sim mean':>12s} {'gap':>12s} {'std err':>12s} {'gap/se':>8s}")
for s in (0.5, 0.75, 1.0, 1.25, 1.5):
    res = rr.expectations_hypothesis_check(
        curve, vol, (s,), T, rr.MCConfig(paths=200_000, seed=11, antithetic=False)
    )
    print(f"{s:8.2f} {res.simulated_mean:12.6f} {res.gap:12.2e} {res.se:12.2e} "
          f"{res.gap / res.se:8.2f}")

print()
print("Every gap sits within sampling error of zero: the forward curve prices")
print("future short rates robustly, with no volatility-dependent correction.")
