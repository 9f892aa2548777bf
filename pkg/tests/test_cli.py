"""Config parsing and the command-line front end."""

import json
import math

import pytest

from robust_rates.cli import main
from robust_rates.config import load_config, price_configured
from robust_rates.errors import ConfigError


BOOK = {
    "curve": {"knots": [[0.0, 0.02], [30.0, 0.02]], "interpolation": "linear"},
    "vol_structure": {"factors": [{"kind": "ho-lee", "c": 0.01}]},
    "band": {"sigma_lower": [0.5], "sigma_upper": [1.5]},
    "contracts": [
        {"name": "frn", "kind": "floating-rate-note", "schedule": [1.0, 1.5, 2.0]},
        {"name": "cap", "kind": "cap", "schedule": [1.0, 1.5, 2.0], "strike_rate": 0.04},
        {"name": "swaption", "kind": "swaption-payer", "schedule": [1.0, 1.5, 2.0],
         "strike_rate": 0.04, "method": "quadrature-1f"},
    ],
}


def write_config(tmp_path, payload, name="book.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        setup = load_config(write_config(tmp_path, BOOK))
        assert setup.curve.horizon == 30.0
        assert setup.vol.dim == 1
        assert len(setup.contracts) == 3

    def test_csv_curve_reference(self, tmp_path):
        (tmp_path / "c.csv").write_text("0,0.02\n30,0.02\n")
        cfg = dict(BOOK, curve={"csv": "c.csv"})
        setup = load_config(write_config(tmp_path, cfg))
        assert setup.curve.bond_price(1.0) == pytest.approx(math.exp(-0.02))

    def test_missing_field_named(self, tmp_path):
        cfg = {k: v for k, v in BOOK.items() if k != "band"}
        with pytest.raises(ConfigError, match="band"):
            load_config(write_config(tmp_path, cfg))

    def test_unsorted_schedule_cites_invariant(self, tmp_path):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"][0]["schedule"] = [2.0, 1.0]
        with pytest.raises(ConfigError, match="strictly increasing"):
            load_config(write_config(tmp_path, cfg))

    def test_band_dimension_mismatch(self, tmp_path):
        cfg = json.loads(json.dumps(BOOK))
        cfg["band"] = {"sigma_lower": [0.5, 0.5], "sigma_upper": [1.5, 1.5]}
        with pytest.raises(ConfigError, match="dimension"):
            load_config(write_config(tmp_path, cfg))

    def test_stream_leg_count_checked(self, tmp_path):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"].append({
            "name": "st", "kind": "stream", "schedule": [1.0, 1.5, 2.0],
            "legs": [{"type": "caplet", "strike_rate": 0.04}],
        })
        with pytest.raises(ConfigError, match="legs"):
            load_config(write_config(tmp_path, cfg))

    def test_unknown_contract_kind(self, tmp_path):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"][0] = {"name": "x", "kind": "quanto", "schedule": [1.0, 2.0]}
        with pytest.raises(ConfigError, match="quanto"):
            load_config(write_config(tmp_path, cfg))

    def test_hull_white_and_tabulated_factors(self, tmp_path):
        (tmp_path / "beta.csv").write_text("0,0,0.01\n0,30,0.01\n15,0,0.01\n15,30,0.01\n")
        cfg = json.loads(json.dumps(BOOK))
        cfg["vol_structure"] = {"factors": [
            {"kind": "hull-white", "c": 0.01, "kappa": 0.2},
            {"kind": "tabulated", "csv": "beta.csv"},
        ]}
        cfg["band"] = {"sigma_lower": [0.5, 0.5], "sigma_upper": [1.5, 1.5]}
        cfg["contracts"] = [c for c in cfg["contracts"] if c["kind"] != "swaption-payer"]
        setup = load_config(write_config(tmp_path, cfg))
        assert setup.vol.dim == 2
        cap = price_configured(setup, setup.contracts[1])
        assert cap.upper > cap.lower > 0.0

    def test_unknown_factor_kind(self, tmp_path):
        cfg = json.loads(json.dumps(BOOK))
        cfg["vol_structure"] = {"factors": [{"kind": "sabr", "c": 0.01}]}
        with pytest.raises(ConfigError, match="sabr"):
            load_config(write_config(tmp_path, cfg))

    def test_band_independence_of_linear_contracts(self, tmp_path):
        setup = load_config(write_config(tmp_path, BOOK))
        frn = setup.contracts[0]
        from robust_rates.uncertainty import UncertaintyBand

        wide = price_configured(setup, frn, band=UncertaintyBand((0.5,), (1.5,)))
        unit = price_configured(setup, frn, band=UncertaintyBand((1.0,), (1.0,)))
        assert wide.upper == unit.upper  # bit identical: band never read


class TestPriceCommand:
    def test_table_output_and_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BOOK)
        assert main(["price", cfg]) == 0
        out = capsys.readouterr().out
        assert "frn" in out and "cap" in out
        assert f"{math.exp(-0.02):.12g}" in out  # FRN single price

    def test_json_round_trips_exactly(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BOOK)
        assert main(["--format", "json", "price", cfg]) == 0
        payload = json.loads(capsys.readouterr().out)
        setup = load_config(cfg)
        for i, row in enumerate(payload["contracts"]):
            direct = price_configured(setup, setup.contracts[i], default_seed=0, index=i)
            assert row["lower"] == direct.lower / setup.contracts[i].contract.notional
            assert row["upper"] == direct.upper / setup.contracts[i].contract.notional

    def test_csv_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BOOK)
        assert main(["--format", "csv", "price", cfg]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("name,kind,notional,lower,upper,symmetric")
        assert len(lines) == 1 + len(BOOK["contracts"])

    def test_config_error_exit_2(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"][0]["schedule"] = [2.0, 1.0]
        assert main(["price", write_config(tmp_path, cfg)]) == 2
        assert "strictly increasing" in capsys.readouterr().err

    def test_pricing_error_exit_3(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(BOOK))
        # quadrature with two factors fails at pricing time
        cfg["vol_structure"]["factors"].append({"kind": "ho-lee", "c": 0.01})
        cfg["band"] = {"sigma_lower": [0.5, 0.5], "sigma_upper": [1.5, 1.5]}
        assert main(["price", write_config(tmp_path, cfg)]) == 3
        assert "quadrature-1f" in capsys.readouterr().err

    def test_determinism_across_threads(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"][2]["method"] = "monte-carlo"
        path = write_config(tmp_path, cfg)
        outputs = []
        for threads in ("1", "4"):
            assert main(["--format", "json", "--seed", "42", "--threads", threads,
                         "price", path]) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]

    def test_seed_changes_mc_results(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(BOOK))
        cfg["contracts"] = [dict(cfg["contracts"][2], method="monte-carlo")]
        path = write_config(tmp_path, cfg)
        assert main(["--format", "json", "--seed", "1", "price", path]) == 0
        a = capsys.readouterr().out
        assert main(["--format", "json", "--seed", "2", "price", path]) == 0
        b = capsys.readouterr().out
        assert a != b


class TestStressCommand:
    def test_linear_contracts_have_zero_half_spread(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BOOK)
        assert main(["--format", "json", "stress", cfg, "--epsilon", "0.5"]) == 0
        rows = json.loads(capsys.readouterr().out)["contracts"]
        by_name = {r["name"]: r for r in rows}
        assert by_name["frn"]["rel_half_spread"] == 0.0
        assert by_name["cap"]["rel_half_spread"] > 0.0

    def test_small_epsilon_shrinks_spread(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BOOK)
        spreads = []
        for eps in ("0.5", "0.01"):
            assert main(["--format", "json", "stress", cfg, "--epsilon", eps]) == 0
            rows = json.loads(capsys.readouterr().out)["contracts"]
            spreads.append({r["name"]: r["rel_half_spread"] for r in rows})
        assert spreads[1]["cap"] < spreads[0]["cap"] / 10
        assert spreads[1]["swaption"] < spreads[0]["swaption"] / 10

    def test_epsilon_out_of_range_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, BOOK)
        assert main(["stress", cfg, "--epsilon", "1.5"]) == 2
        assert main(["stress", cfg, "--epsilon", "-0.1"]) == 2


class TestVerifyCommand:
    def test_unknown_suite_exit_2(self, capsys):
        assert main(["verify", "nonsense"]) == 2
        assert "unknown suite" in capsys.readouterr().err

    def test_parity_suite_passes(self, capsys):
        assert main(["verify", "parity"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out
