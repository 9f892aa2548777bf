"""Lattice, scenario Monte Carlo, and expectations-hypothesis oracles."""

import math

import numpy as np
import pytest

from robust_rates.curve import flat_curve
from robust_rates.errors import DomainError, StabilityError, UnsupportedMethodError
from robust_rates.linear_pricing import LinearContract, TenorSchedule
from robust_rates.lognormal import lognormal_put
from robust_rates.mc import MCConfig
from robust_rates.option_pricing import OptionContract, price_cap, price_floor, transformed_strike
from robust_rates.oracle import (
    ConstantControls,
    PiecewiseControls,
    _branch_probabilities,
    expectations_hypothesis_check,
    lattice_price,
    scenario_sup,
)
from robust_rates.uncertainty import UncertaintyBand, degenerate_band
from robust_rates.vol_structure import HoLeeFactor, HullWhiteFactor, VolStructure, ho_lee

CURVE = flat_curve(0.02)
VS = ho_lee(0.01)
BAND = UncertaintyBand((0.5,), (1.5,))
SCHED = TenorSchedule(dates=(1.0, 1.5, 2.0))
KI = transformed_strike(0.5, 0.04)


class TestLatticeBasics:
    def test_constant_payoff_is_exact(self):
        got = lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, lambda x: np.full_like(x, 3.25), 50)
        assert got == pytest.approx(3.25, abs=1e-12)

    def test_martingale_preservation(self):
        x0 = CURVE.forward_price(1.0, 1.5)
        got = lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, lambda x: x, 400)
        assert got == pytest.approx(x0, abs=1e-10)

    def test_degenerate_put_matches_black(self):
        x0 = CURVE.forward_price(1.0, 1.5)
        v = math.sqrt(VS.integrated_variance((1.5,), 0.0, 1.0, 1.0, 1.5))
        got = lattice_price(
            CURVE, VS, degenerate_band((1.5,)), 1.0, 1.0, 1.5,
            lambda x: np.maximum(KI - x, 0.0), 2000,
        )
        assert abs(got / lognormal_put(x0, KI, v) - 1.0) <= 5e-4

    def test_upper_dominates_lower_via_negation(self):
        for payoff in (
            lambda x: np.maximum(KI - x, 0.0),
            lambda x: np.minimum(np.maximum(x - 0.97, 0.0), 0.02),
            lambda x: np.abs(x - 0.99),
        ):
            up = lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, payoff, 300)
            lo = -lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, lambda x: -payoff(x), 300)
            assert up >= lo - 1e-12

    def test_affine_payoff_bounds_coincide(self):
        payoff = lambda x: 2.0 * x - 0.5
        up = lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, payoff, 300)
        lo = -lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, lambda x: -payoff(x), 300)
        assert up == pytest.approx(lo, abs=1e-9)

    def test_degenerate_band_equals_classical_singleton_tree(self):
        # Rebuild the single-sigma tree independently; results must agree to
        # the bit since the max over identical candidates is a no-op.
        band = degenerate_band((1.2,))
        steps = 120
        payoff = lambda x: np.maximum(KI - x, 0.0)
        got = lattice_price(CURVE, VS, band, 1.0, 1.0, 1.5, payoff, steps)

        x0 = CURVE.forward_price(1.0, 1.5)
        ts = np.linspace(0.0, 1.0, steps + 1)
        vs_step = [
            VS.integrated_variance((1.2,), ts[k], ts[k + 1], 1.0, 1.5) for k in range(steps)
        ]
        h = 1.2 * math.sqrt(max(vs_step))
        values = payoff(x0 * np.exp(h * np.arange(-steps, steps + 1)))
        for k in range(steps - 1, -1, -1):
            pu, pm, pd = _branch_probabilities(vs_step[k], h)
            values = pu * values[2:] + pm * values[1:-1] + pd * values[:-2]
        assert got == values[0]


class TestLatticeValidation:
    def test_needs_ten_steps(self):
        with pytest.raises(DomainError):
            lattice_price(CURVE, VS, BAND, 1.0, 1.0, 1.5, lambda x: x, 5)

    def test_one_factor_only(self):
        vs2 = VolStructure(factors=(HoLeeFactor(c=0.01), HullWhiteFactor(c=0.01, kappa=0.1)))
        band2 = UncertaintyBand((0.5, 0.5), (1.5, 1.5))
        with pytest.raises(UnsupportedMethodError):
            lattice_price(CURVE, vs2, band2, 1.0, 1.0, 1.5, lambda x: x, 100)

    def test_oversized_step_variance_suggests_steps(self):
        vs_big = ho_lee(3.0)
        with pytest.raises(StabilityError, match="at least"):
            lattice_price(flat_curve(0.02), vs_big, BAND, 1.0, 1.0, 3.0, lambda x: x, 10)


class TestScenarioSup:
    def test_symmetric_contract_is_control_independent(self):
        frn = LinearContract(kind="floating-rate-note", schedule=SCHED)
        res = scenario_sup(CURVE, VS, BAND, frn, ConstantControls(3), MCConfig(paths=50_000, seed=3))
        vals = [v for _, v, _ in res.table]
        ses = [s for _, _, s in res.table]
        target = CURVE.bond_price(1.0)
        for v, s in zip(vals, ses):
            assert abs(v - target) <= 4.0 * max(s, 1e-12)

    def test_cap_sup_attained_at_upper_extreme(self):
        c = OptionContract(kind="cap", schedule=SCHED, strike_rate=0.04)
        engine = price_cap(CURVE, VS, BAND, c)
        res = scenario_sup(CURVE, VS, BAND, c, ConstantControls(2), MCConfig(paths=100_000, seed=5))
        assert res.value <= engine.upper + 3.0 * res.se
        assert abs(res.value - engine.upper) <= 3.0 * res.se  # sigma-bar scenario is the sup

    def test_floor_sup_soundness(self):
        c = OptionContract(kind="floor", schedule=SCHED, strike_rate=0.04)
        engine = price_floor(CURVE, VS, BAND, c)
        res = scenario_sup(CURVE, VS, BAND, c, ConstantControls(3), MCConfig(paths=100_000, seed=6))
        assert res.value <= engine.upper + 3.0 * res.se

    def test_fcb_deterministic_across_controls(self):
        fcb = LinearContract(kind="fixed-coupon-bond", schedule=SCHED, fixed_rate=0.05)
        res = scenario_sup(CURVE, VS, BAND, fcb, ConstantControls(3), MCConfig(paths=2_000, seed=1))
        vals = {round(v, 15) for _, v, _ in res.table}
        assert len(vals) == 1

    def test_piecewise_family_size_capped(self):
        with pytest.raises(DomainError, match="cap"):
            scenario_sup(
                CURVE, VS, BAND,
                OptionContract(kind="cap", schedule=SCHED, strike_rate=0.04),
                PiecewiseControls(k=5, switch_dates=(0.5, 1.0, 1.5), max_family=100),
                MCConfig(paths=1_000, seed=1),
            )

    def test_piecewise_labels_and_ordering(self):
        from robust_rates.stream import CashflowStream, capped_forward_leg, caplet_leg

        st = CashflowStream(
            schedule=SCHED, legs=(capped_forward_leg(0.99), caplet_leg(0.5, 0.04))
        )
        mc = MCConfig(paths=100_000, seed=5)
        const = scenario_sup(CURVE, ho_lee(0.02), BAND, st, ConstantControls(3), mc)
        pw = scenario_sup(
            CURVE, ho_lee(0.02), BAND, st, PiecewiseControls(k=3, switch_dates=(1.0,)), mc
        )
        # The piecewise family strictly improves on constants for this
        # mixed-curvature stream (low vol early, high vol late).
        assert pw.value > const.value + 3.0 * max(pw.se, const.se)


class TestExpectationsHypothesis:
    def test_near_zero_vol_pins_forward_rate(self):
        res = expectations_hypothesis_check(
            CURVE, ho_lee(1e-12), (1.0,), 2.0, MCConfig(paths=1_000, seed=2, antithetic=False)
        )
        assert res.gap <= 1e-10

    def test_statistical_gap_within_three_se(self):
        for s in (0.5, 1.0, 1.5):
            res = expectations_hypothesis_check(
                CURVE, VS, (s,), 2.0, MCConfig(paths=100_000, seed=11, antithetic=False)
            )
            assert res.gap <= 3.0 * res.se
            assert res.forward_rate == pytest.approx(0.02)

    def test_antithetic_cancels_linear_statistic_exactly(self):
        res = expectations_hypothesis_check(
            CURVE, VS, (1.5,), 2.0, MCConfig(paths=10_000, seed=4, antithetic=True)
        )
        assert res.gap <= 1e-15
