"""Command-line front end, run in-process through ``main(argv)``."""

import csv
import json

import numpy as np
import pytest

from kslab.cli import CSV_COLUMNS, EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, format_value, main

SMALL = ["--L", "8", "--n", "128"]


def run(cmd, out, *extra):
    return main([cmd, "--out", str(out), *extra])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def read_json(path):
    return json.loads(path.read_text())


class TestFormatting:
    def test_values(self):
        assert format_value(None) == ""
        assert format_value(True) == "true"
        assert format_value(np.int64(3)) == "3"
        assert float(format_value(0.1)) == 0.1
        assert format_value(1 / 3) == "0.33333333333333331"


class TestHeadersAndManifest:
    @pytest.mark.parametrize("cmd, files, extra", [
        ("simulate", {"norms": "norms.csv", "spectrum": "spectrum.csv"}, ["--T", "0.1", "--nt", "17"]),
        ("illposed", {"illposed": "illposed.csv"}, ["--N-list", "32", "64", "128", "--quad-points", "16"]),
        ("mu-limit", {"mulimit": "mulimit.csv"}, ["--T", "0.1", "--nt", "17"]),
        ("smoothing", {"smoothing": "smoothing.csv"}, ["--T", "0.1", "--nt", "33"]),
        ("energy", {"energy": "energy.csv"}, ["--T", "0.1", "--nt", "17", "--levels", "2"]),
        ("contraction", {"contraction": "contraction.csv"}, ["--T", "0.05", "--nt", "17"]),
    ])
    def test_golden_headers(self, tmp_path, cmd, files, extra):
        assert run(cmd, tmp_path, *SMALL, *extra) == EXIT_OK
        for key, name in files.items():
            header, rows = read_csv(tmp_path / name)
            assert tuple(header) == CSV_COLUMNS[key]
            assert rows
        manifests = list(tmp_path.rglob("manifest.json"))
        assert manifests == [tmp_path / "manifest.json"]
        man = read_json(manifests[0])
        assert man["command"] == cmd and man["exit_code"] == 0
        assert {"grid", "time", "seeds", "version", "stage_seconds", "command_line"} <= set(man)

    def test_json_entries_carry_report_keys(self, tmp_path):
        assert run("contraction", tmp_path, *SMALL, "--T", "0.05", "--nt", "17") == EXIT_OK
        entry = read_json(tmp_path / "contraction.json")
        assert set(entry) == {"inputs", "measured", "bound", "slope", "residual", "pass"}
        assert entry["pass"] is True


class TestDeterminism:
    @pytest.mark.parametrize("cmd, extra", [
        ("simulate", ["--ic", "random-sobolev", "--s", "0.8", "--seed", "3", "--T", "0.1", "--nt", "17"]),
        ("illposed", ["--N-list", "32", "64", "128", "--quad-points", "16"]),
        ("mu-limit", ["--T", "0.1", "--nt", "17"]),
    ])
    def test_byte_identical(self, tmp_path, cmd, extra):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(cmd, a, *SMALL, *extra) == EXIT_OK
        assert run(cmd, b, *SMALL, *extra) == EXIT_OK
        names = sorted(p.name for p in a.glob("*.csv"))
        assert names
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestExitCodes:
    @pytest.mark.parametrize("argv", [[], ["bogus"], ["simulate", "--n", "many"],
                                      ["simulate", "--ic", "triangle"], ["energy", "--unknown"]])
    def test_usage(self, argv, capsys):
        assert main(argv) == EXIT_USAGE
        assert capsys.readouterr().err

    def test_smoothing_hypothesis_violation(self, tmp_path):
        assert run("smoothing", tmp_path, *SMALL, "--lambda", "0.4") == EXIT_USAGE

    def test_non_contraction(self, tmp_path, capsys):
        code = run("contraction", tmp_path, *SMALL, "--amplitude", "20", "--T", "1", "--nt", "33")
        assert code == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err
        assert read_json(tmp_path / "manifest.json")["exit_code"] == EXIT_NUMERIC

    def test_global_failure_names_window(self, tmp_path, capsys):
        code = run("simulate", tmp_path, *SMALL, "--amplitude", "20", "--T", "2", "--max-iter", "3")
        assert code == EXIT_NUMERIC
        assert "window" in capsys.readouterr().err

    def test_out_under_regular_file(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert run("simulate", blocker / "sub", *SMALL, "--T", "0.1", "--nt", "9") == EXIT_IO

    def test_missing_config(self, tmp_path):
        assert run("simulate", tmp_path, "--config", str(tmp_path / "nope.cfg")) == EXIT_IO


class TestConfig:
    def test_file_values_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small run\nL = 8\nn = 128\nnt = 9\nT = 0.3\nscheme = etdrk2\n")
        out = tmp_path / "o"
        assert main(["simulate", "--config", str(cfg), "--T", "0.1", "--out", str(out)]) == EXIT_OK
        conf = read_json(out / "manifest.json")["config"]
        assert conf["n"] == 128 and conf["nt"] == 9 and conf["scheme"] == "etdrk2"
        assert conf["T"] == 0.1
        _, rows = read_csv(out / "norms.csv")
        assert len(rows) == 9 and float(rows[-1][0]) == pytest.approx(0.1)

    def test_bad_line(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just words\n")
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE


class TestSimulate:
    def test_zero_data_rows_vanish(self, tmp_path):
        assert run("simulate", tmp_path, *SMALL, "--ic", "zero", "--T", "0.2", "--nt", "9") == EXIT_OK
        header, rows = read_csv(tmp_path / "norms.csv")
        for row in rows:
            assert all(float(v) == 0.0 for v in row[1:])

    @pytest.mark.parametrize("extra", [["--T", "0.2", "--nt", "33"],
                                       ["--T", "2", "--mu", "0.5"],
                                       ["--scheme", "etdrk2", "--T", "1.5", "--nt", "65"]])
    def test_gronwall_column(self, tmp_path, extra):
        assert run("simulate", tmp_path, *SMALL, *extra) == EXIT_OK
        header, rows = read_csv(tmp_path / "norms.csv")
        data = np.array(rows, dtype=float)
        dx = data[:, header.index("dx_l2")]
        env = data[:, header.index("gronwall_envelope")]
        assert np.all(env >= dx**2 - 1e-12)
        assert read_json(tmp_path / "simulate.json")["measured"]["gronwall_holds"]

    def test_global_run_reports_windows(self, tmp_path):
        assert run("simulate", tmp_path, *SMALL, "--T", "2") == EXIT_OK
        assert read_json(tmp_path / "simulate.json")["measured"]["n_windows"] >= 2

    def test_box_pair_data(self, tmp_path):
        code = run("simulate", tmp_path, "--L", str(16 * np.pi), "--n", "1024", "--ic", "box-pair",
                   "--s", "0.25", "--N-list", "8", "--T", "0.01", "--nt", "17", "--scheme", "etdrk2")
        assert code == EXIT_OK


class TestVerifyLemmas:
    def test_find_M_value(self, tmp_path):
        assert run("verify-lemmas", tmp_path, *SMALL, "--mu", "1", "--ic", "zero") == EXIT_OK
        checks = read_json(tmp_path / "lemmas.json")["checks"]
        (m,) = [c for c in checks if c["check"] == "find_M"]
        assert 1.25 <= m["measured"]["M"] <= 1.32

    def test_equality_case_flagged(self, tmp_path):
        code = run("verify-lemmas", tmp_path, *SMALL, "--lambdas", "1", "--mu", "0", "--t", "1",
                   "--ic", "zero")
        assert code == EXIT_OK
        doc = read_json(tmp_path / "lemmas.json")
        (sup,) = [c for c in doc["checks"] if c["check"] == "lemma21_sup"]
        assert sup["measured"]["equality"] is True
        assert doc["pass"] is True

    def test_time_outside_horizon(self, tmp_path):
        assert run("verify-lemmas", tmp_path, *SMALL, "--t", "2", "--ic", "zero") == EXIT_USAGE


class TestEnergyCommand:
    def test_zero_data(self, tmp_path):
        assert run("energy", tmp_path, *SMALL, "--ic", "zero", "--T", "0.1", "--nt", "9") == EXIT_OK
        _, rows = read_csv(tmp_path / "energy.csv")
        assert all(float(r[1]) == 0 and float(r[2]) == 0 for r in rows)

    def test_order_gate(self, tmp_path):
        assert run("energy", tmp_path, *SMALL, "--T", "0.2", "--nt", "33", "--scheme", "etdrk2") == EXIT_OK
        doc = read_json(tmp_path / "energy.json")
        assert min(doc["measured"]["order_w"]) >= 1.8
