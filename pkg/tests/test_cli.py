import csv
import json
import math

import pytest

from wiener_prelog import cli
from wiener_prelog.cli import CSV_COLUMNS, ConfigError, RunConfig, main, parse_config

FAST = ["--n-symbols", "60", "--replicates", "2"]


class TestParse:
    def test_defaults_filled(self):
        cmd, cfg = parse_config(["sweep", "--beta", "1", "--snr-db", "40,50,60,70,80", "--seed", "7"])
        assert cmd == "sweep"
        assert cfg.snr_db_list == (40.0, 50.0, 60.0, 70.0, 80.0)
        assert (cfg.n_symbols, cfg.replicates, cfg.seed) == (2000, 8, 7)
        assert cfg.alpha_policy == "auto" and cfg.oversampling == "schedule"

    def test_beta_zero(self):
        with pytest.raises(ConfigError, match="beta"):
            parse_config(["sweep", "--beta", "0"])

    def test_fixed_alpha(self):
        _, cfg = parse_config(["sweep", "--alpha", "fixed:12.5"])
        pol = cfg.sweep_config().alpha_policy
        assert pol.mode == "fixed" and pol.value == 12.5

    def test_fixed_oversampling(self):
        _, cfg = parse_config(["sweep", "--oversampling", "fixed:2"])
        assert cfg.sweep_config().oversampling == 2

    @pytest.mark.parametrize("argv,match", [
        (["sweep", "--n-symbols", "1"], "n_symbols"),
        (["sweep", "--replicates", "0"], "replicates"),
        (["sweep", "--seed", "-1"], "seed"),
        (["sweep", "--alpha", "fixed:-2"], "alpha_policy"),
        (["sweep", "--oversampling", "fixed:0"], "oversampling"),
        (["sweep", "--oversampling", "sometimes"], "oversampling"),
        (["sweep", "--snr-db", "40,abc"], "snr_db_list"),
        (["point", "--snr-db", "40,50"], "point"),
    ])
    def test_range_errors(self, argv, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(argv)

    def test_file_and_override(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"beta": 2.0, "snr_db_list": [30, 40], "replicates": 3}))
        _, cfg = parse_config(["sweep", "--config", str(f), "--replicates", "5"])
        assert cfg.beta == 2.0 and cfg.snr_db_list == (30.0, 40.0) and cfg.replicates == 5

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"beta": 1.0, "colour": "red"}))
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_config(["sweep", "--config", str(f)])

    def test_malformed_file(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text("{beta: 1")
        with pytest.raises(ConfigError, match="malformed"):
            parse_config(["sweep", "--config", str(f)])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(["sweep", "--config", str(tmp_path / "nope.json")])

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
        _, cfg = parse_config(["sweep"])
        assert cfg.output_path == str(tmp_path / "sweep.csv")


def _run(tmp_path, name, extra=()):
    out = tmp_path / name
    argv = ["sweep", "--snr-db", "30,40,50", "--seed", "3", *FAST, "-o", str(out), *extra]
    assert main(argv) == 0
    return out


class TestEmit:
    def test_csv_layout(self, tmp_path, capsys):
        out = _run(tmp_path, "a.csv")
        rows = list(csv.reader(out.open()))
        assert rows[0] == list(CSV_COLUMNS)
        assert len(rows) == 4
        assert rows[1][2] == "32"  # L = ceil(sqrt(1000))
        side = json.loads(out.with_suffix(".json").read_text())
        assert set(side["fits"]) == {"amp", "phase", "total"}
        assert side["config"]["seed"] == 3
        assert "pre-log slope" in capsys.readouterr().out

    def test_twelve_significant_digits(self, tmp_path):
        out = _run(tmp_path, "a.csv")
        row = next(iter(csv.DictReader(out.open())))
        digits = row["amp_rate"].lstrip("-").replace(".", "").lstrip("0")
        assert len(digits) <= 12
        assert row["delta"] == format(1 / 32, ".12g")

    def test_byte_identical_rerun(self, tmp_path):
        a = _run(tmp_path, "a.csv").read_bytes()
        b = _run(tmp_path, "b.csv", ["--workers", "2"]).read_bytes()
        assert a == b

    def test_bits(self, tmp_path):
        nats = list(csv.DictReader(_run(tmp_path, "n.csv").open()))
        bits = list(csv.DictReader(_run(tmp_path, "b.csv", ["--units", "bits"]).open()))
        assert "amp_rate_bits" in bits[0] and "amp_rate" not in bits[0]
        assert "snr_db" in bits[0] and "ecos" in bits[0]
        for n, b in zip(nats, bits):
            assert float(b["total_rate_bits"]) == pytest.approx(float(n["total_rate"]) / math.log(2), rel=1e-11)
            assert b["ecos"] == n["ecos"]

    def test_json_format(self, tmp_path):
        out = _run(tmp_path, "r.json", ["--format", "json"])
        doc = json.loads(out.read_text())
        assert len(doc["rows"]) == 3 and list(doc["rows"][0]) == list(CSV_COLUMNS)

    def test_roundtrip(self, tmp_path):
        out = _run(tmp_path, "a.csv", ["--alpha", "fixed:3.5", "--oversampling", "fixed:4"])
        _, original = parse_config(["sweep", "--snr-db", "30,40,50", "--seed", "3", *FAST, "-o", str(out),
                                    "--alpha", "fixed:3.5", "--oversampling", "fixed:4"])
        _, again = parse_config(["sweep", "--config", str(out.with_suffix(".json"))])
        assert again == original

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        argv = ["sweep", "--snr-db", "30", *FAST, "-o", str(blocker / "sub" / "a.csv")]
        assert main(argv) == 1

    def test_point_failure_exit_code(self, tmp_path, capsys, monkeypatch):
        real = cli.run_point

        def flaky(cfg, snr_db, seed, index):
            if snr_db == 40.0:
                raise RuntimeError("boom")
            return real(cfg, snr_db, seed, index)

        monkeypatch.setattr(cli, "run_point", flaky)
        argv = ["sweep", "--snr-db", "30,40,50", *FAST, "-o", str(tmp_path / "a.csv")]
        assert main(argv) == 1
        err = capsys.readouterr().err
        assert "40" in err and "boom" in err
        assert len((tmp_path / "a.csv").read_text().splitlines()) == 3

    def test_bad_args_exit_2(self, capsys):
        assert main(["sweep", "--beta", "-1"]) == 2
        assert "beta" in capsys.readouterr().err


def test_point_command(tmp_path, capsys):
    assert main(["point", "--snr-db", "40", *FAST, "-o", str(tmp_path / "p.csv")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("snr_db,")


def test_selfcheck_command(capsys):
    assert main(["selfcheck"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 7 and all(l.startswith("PASS") for l in lines)


def test_runconfig_dict_keys():
    assert list(RunConfig().to_dict()) == list(cli.CONFIG_KEYS)
