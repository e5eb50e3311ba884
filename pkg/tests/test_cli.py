import csv
import io
import json
from pathlib import Path

import pytest

from aeromacs.cli import SCHEMA, main, parse_quantity

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def quantities(text):
    return {r["quantity"]: r["value"] for r in csv_rows(text)}


class TestQuantities:
    @pytest.mark.parametrize(
        "text, kind, expected",
        [
            ("100kmh", "speed", 100 / 3.6),
            ("100 km/h", "speed", 100 / 3.6),
            ("27.5", "speed", 27.5),
            ("12m/s", "speed", 12.0),
            ("5.1GHz", "frequency", 5.1e9),
            ("10kHz", "frequency", 1e4),
            ("2.5km", "length", 2500.0),
            ("10000ft", "length", 3048.0),
            ("1e3", "length", 1000.0),
        ],
    )
    def test_parse(self, text, kind, expected):
        assert parse_quantity(text, kind) == pytest.approx(expected)

    @pytest.mark.parametrize("text", ["fast", "10 furlongs", "1.2.3km"])
    def test_reject(self, text):
        with pytest.raises(ValueError):
            parse_quantity(text, "length")


class TestParams:
    def test_default_report(self, capsys):
        code, out, _ = run(capsys, "params", "--profile", "aeromacs-default")
        assert code == 0
        assert out.splitlines()[0] == "quantity,value,unit"
        q = quantities(out)
        assert q["symbol_time"] == "0.0001024"
        assert q["cp_length"] == "1.28e-05"
        assert 9700 <= float(q["subcarrier_spacing"]) <= 10000
        assert q["guard_ratio"] == "1/8"
        assert q["throughput_DL_QPSK-1/2"] == "864000"

    def test_json_matches_csv(self, capsys):
        _, out_csv, _ = run(capsys, "params")
        _, out_json, _ = run(capsys, "params", "--format", "json")
        doc = json.loads(out_json)
        q = quantities(out_csv)
        assert doc["schema"] == SCHEMA
        assert doc["command"] == "params"
        assert f"{doc['symbol_time_s']:.6g}" == q["symbol_time"]
        assert f"{doc['cp_length_s']:.6g}" == q["cp_length"]
        assert f"{doc['snr_loss_db']:.6g}" == q["snr_loss"]
        dl = [t for t in doc["frame_throughput"] if t["mcs"] == "QPSK-1/2" and t["direction"] == "DL"]
        assert dl[0]["rate_bps"] == 864000.0 and dl[0]["reference_kbps"] == 983.3

    def test_bandwidth_override(self, capsys):
        _, out, _ = run(capsys, "params", "--bandwidth", "10MHz")
        assert quantities(out)["symbol_time"] == "5.12e-05"

    def test_inline_profile_from_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"profile": {"cp_ratio_log2": 2}}))
        _, out, _ = run(capsys, "params", "--config", str(cfg))
        assert quantities(out)["cp_length"] == "2.56e-05"

    def test_flag_beats_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"bandwidth": "10MHz", "format": "json"}))
        _, out, _ = run(capsys, "params", "--config", str(cfg), "--bandwidth", "5MHz", "--format", "csv")
        assert quantities(out)["symbol_time"] == "0.0001024"

    def test_invalid_profile_field(self, capsys):
        code, _, err = run(capsys, "params", "--n-subcarriers", "500")
        assert code == 1
        assert "n_subcarriers" in err

    def test_unknown_profile(self, capsys):
        code, _, err = run(capsys, "params", "--profile", "nope")
        assert code == 1 and "profile" in err

    def test_bad_symbol_split(self, capsys):
        code, _, err = run(capsys, "params", "--dl-symbols", "24")
        assert code == 1 and "dl_symbols" in err

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "p.csv"
        code, out, _ = run(capsys, "params", "-o", str(target))
        assert code == 0 and out == ""
        assert target.read_text().startswith("quantity,value,unit\n")


class TestCoverage:
    def test_default(self, capsys):
        _, out, _ = run(capsys, "coverage")
        q = quantities(out)
        assert float(q["max_los_coverage"]) == pytest.approx(11750.4, abs=0.1)
        assert float(q["effective_cell_range"]) == pytest.approx(2032.22, abs=0.01)
        assert q["gs_antenna_gain"] == "15"

    def test_zero_alpha(self, capsys):
        _, out, _ = run(capsys, "coverage", "--alpha", "0", "--allow-alpha-override")
        q = quantities(out)
        assert q["max_los_coverage"] == q["effective_cell_range"]

    def test_alpha_outside_envelope(self, capsys):
        code, _, err = run(capsys, "coverage", "--alpha", "20")
        assert code == 1 and "alpha" in err

    def test_nonpositive(self, capsys):
        assert run(capsys, "coverage", "--max-path-loss", "-3")[0] == 1
        assert run(capsys, "coverage", "--carrier-freq", "0")[0] == 1


class TestDopplerSweep:
    ARGS = ("doppler-sweep", "--v-min", "0", "--v-max", "150kmh", "--step", "5kmh")

    def test_golden(self, capsys):
        _, out, _ = run(capsys, *self.ARGS)
        assert out == (GOLDEN / "doppler_sweep_0_150kmh.csv").read_text()

    def test_stable(self, capsys):
        _, a, _ = run(capsys, *self.ARGS)
        _, b, _ = run(capsys, *self.ARGS)
        assert a == b

    def test_format(self, capsys):
        _, out, _ = run(capsys, *self.ARGS)
        lines = out.splitlines()
        assert lines[0] == "speed_mps,speed_kmh,doppler_hz,ici_dbm,signal_to_ici_db,coherence_ms"
        assert all(not line.endswith(",") or line.count(",") == 5 for line in lines)
        assert len(lines) == 32
        assert lines[1] == "0,0,0,,inf,inf"

    def test_linear_doppler(self, capsys):
        _, out, _ = run(capsys, *self.ARGS)
        rows = csv_rows(out)[1:]
        slopes = [float(r["doppler_hz"]) / float(r["speed_mps"]) for r in rows]
        assert max(slopes) - min(slopes) < 1e-3
        assert slopes[0] == pytest.approx(17.0, abs=0.02)

    def test_published_speed_row(self, capsys):
        _, out, _ = run(capsys, "doppler-sweep", "--v-min", "129.25kmh", "--v-max", "130kmh", "--step", "1kmh")
        row = csv_rows(out)[0]
        assert float(row["doppler_hz"]) == pytest.approx(610.754, abs=1e-3)
        assert float(row["coherence_ms"]) == pytest.approx(0.69282, abs=1e-5)

    def test_json_sentinels(self, capsys):
        _, out, _ = run(capsys, "doppler-sweep", "--v-max", "10", "--step", "5", "--format", "json")
        doc = json.loads(out)
        first = doc["rows"][0]
        assert first["ici_dbm"] is None
        assert first["signal_to_ici_db"] == "inf"
        assert first["coherence_ms"] == "inf"

    def test_literal_mode(self, capsys):
        _, out, _ = run(capsys, "doppler-sweep", "--v-min", "10", "--v-max", "30", "--step", "10", "--ici-mode", "literal")
        ici = [float(r["ici_dbm"]) for r in csv_rows(out)]
        assert all(23.0 < v <= 24.0 for v in ici)

    def test_inverted_range(self, capsys):
        assert run(capsys, "doppler-sweep", "--v-min", "10", "--v-max", "5")[0] == 1
        assert run(capsys, "doppler-sweep", "--step", "0")[0] == 1
        assert run(capsys, "doppler-sweep", "--v-max", "fast")[0] == 1

    def test_figures(self, capsys, tmp_path):
        code, out, err = run(capsys, *self.ARGS, "--figure-dir", str(tmp_path))
        assert code == 0
        assert out == (GOLDEN / "doppler_sweep_0_150kmh.csv").read_text()
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["coherence_time.png", "doppler_shift.png", "ici_power.png", "signal_to_ici.png"]
        assert all((tmp_path / n).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n" for n in names)


class TestMaxSpeed:
    def test_defaults(self, capsys):
        _, out, _ = run(capsys, "max-speed")
        q = quantities(out)
        assert q["doppler_spread_limit"] == "2000"
        assert q["min_coherence_time"] == "0.0005"
        assert float(q["max_speed"]) == pytest.approx(49.8, abs=0.1)
        assert q["paper_stated_max_speed (inconsistent with chain)"] == "35.9"

    def test_halved_spacing(self, capsys):
        _, a, _ = run(capsys, "max-speed", "--format", "json")
        _, b, _ = run(capsys, "max-speed", "--spacing", "5kHz", "--format", "json")
        va = json.loads(a)["max_speed_mps"]
        vb = json.loads(b)["max_speed_mps"]
        assert vb == pytest.approx(va / 2)
        assert json.loads(a)["published_max_speed_note"] == "paper-stated (inconsistent with chain)"

    def test_profile_spacing(self, capsys):
        _, out, _ = run(capsys, "max-speed", "--spacing-from-profile")
        assert float(quantities(out)["doppler_spread_limit"]) == pytest.approx(1949.32, abs=0.01)


class TestSimulate:
    def test_seed_required(self, capsys):
        code, _, err = run(capsys, "simulate", "ici")
        assert code == 1 and "--seed" in err

    def test_zero_doppler(self, capsys):
        _, out, _ = run(capsys, "simulate", "ici", "--seed", "1", "--fd-ts", "0", "--trials", "50")
        doc = json.loads(out)
        assert doc["result"]["empirical_ici_norm"] == 0.0
        assert doc["schema"] == SCHEMA

    def test_byte_identical(self, capsys):
        args = ("simulate", "ici", "--seed", "123", "--trials", "600")
        _, a, _ = run(capsys, *args)
        _, b, _ = run(capsys, *args, "--workers", "3")
        _, c, _ = run(capsys, *args)
        assert a == b == c

    def test_invalid_spec(self, capsys):
        assert run(capsys, "simulate", "ici", "--seed", "1", "--n-subcarriers", "48")[0] == 1
        assert run(capsys, "simulate", "ici", "--seed", "-4")[0] == 1

    def test_cp(self, capsys):
        _, out, _ = run(capsys, "simulate", "cp", "--seed", "1")
        doc = json.loads(out)
        assert doc["symbol_error_rate"] == 0.0 and doc["echo_within_cp"] is True
        _, out, _ = run(capsys, "simulate", "cp", "--seed", "1", "--cp-samples", "32", "--echo-gain", "1.0")
        assert json.loads(out)["symbol_error_rate"] > 0

    def test_cp_invalid(self, capsys):
        assert run(capsys, "simulate", "cp", "--seed", "1", "--cp-samples", "600")[0] == 1

    def test_cp_csv(self, capsys):
        _, out, _ = run(capsys, "simulate", "cp", "--seed", "1", "--format", "csv")
        assert quantities(out)["symbol_error_rate"] == "0"


class TestPlan:
    def test_runway(self, capsys):
        code, out, err = run(capsys, "plan", "--length", "10km", "--radius", "2.5km", "--redundancy", "2")
        assert code == 0
        rows = csv_rows(out)
        assert [float(r["position_m"]) for r in rows] == [0, 2500, 5000, 7500, 10000]
        assert "at least 2 times" in err

    def test_json(self, capsys):
        _, out, _ = run(capsys, "plan", "--length", "10km", "--radius", "2.5km", "--redundancy", "1", "--format", "json")
        doc = json.loads(out)
        assert doc["n_stations"] == 3 and doc["min_coverage"] >= 1

    def test_infeasible(self, capsys):
        code, _, err = run(capsys, "plan", "--length", "1km", "--radius", "1m", "--redundancy", "4")
        assert code == 1 and "InfeasibleCorridor" in err


class TestExitCodes:
    def test_no_command(self, capsys):
        assert run(capsys)[0] == 1

    def test_help(self, capsys):
        assert run(capsys, "--help")[0] == 0

    def test_bad_config(self, capsys, tmp_path):
        assert run(capsys, "coverage", "--config", str(tmp_path / "missing.json"))[0] == 1
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2]")
        assert run(capsys, "coverage", "--config", str(bad))[0] == 1
        bad.write_text('{"bogus": 1}')
        code, _, err = run(capsys, "coverage", "--config", str(bad))
        assert code == 1 and "bogus" in err

    def test_internal_error(self, capsys, monkeypatch):
        import aeromacs.cli as cli

        def boom(*a, **k):
            raise RuntimeError("kaput")

        monkeypatch.setattr(cli.prop, "max_los_coverage_m", boom)
        code, _, err = run(capsys, "coverage")
        assert code == 2 and "kaput" in err
