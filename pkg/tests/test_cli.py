import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from quadzeta.cli import SCHEMAS, build_parser, main


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return meta, rows[0], rows[1:]


def test_zeros_example(tmp_path):
    out = tmp_path / "zeros.csv"
    assert run(["zeros", "--c", "-2.001", "--radius", "1000", "--out", str(out)]) == 0
    meta, header, rows = read_csv(out)
    assert header == SCHEMAS["zeros"]
    assert meta["subcommand"] == "zeros" and "version" in meta
    assert rows and all(float(r[4]) <= 1e-10 for r in rows)


def test_corr_example(tmp_path):
    from quadzeta.numcore import SignedLog
    from quadzeta.correlations import CorrelationSeries, fit_double_exponential

    out = tmp_path / "corr.csv"
    assert run(["corr", "--mode", "tent", "--z", "3", "--m-max", "8", "--out", str(out)]) == 0
    _, header, rows = read_csv(out)
    assert header == SCHEMAS["corr"]
    series = CorrelationSeries([SignedLog(int(r[1]), float(r[2])) for r in rows], "csv", "tent")
    ln_a, _ = fit_double_exponential(series, 3, 8)
    assert ln_a == pytest.approx(0.96242, abs=0.01)


def test_sweep_example(tmp_path):
    stats = tmp_path / "stats.json"
    assert run(["sweep", "--j-from", "5", "--j-to", "9", "--stats", str(stats), "--no-timestamp"]) == 0
    doc = json.loads(stats.read_text())
    rows = doc["data"]["rows"]
    assert [r["j"] for r in rows] == [5, 6, 7, 8, 9]
    assert set(rows[0]) == set(SCHEMAS["sweep"])
    assert 0 <= doc["data"]["pooled_ks"] <= 1


def test_sweep_gibbs(tmp_path):
    out = tmp_path / "g.csv"
    argv = ["sweep", "--j-from", "2", "--j-to", "4", "--base", "10", "--gibbs",
            "--samples", "20000", "--seed", "1", "--out", str(out)]
    assert run(argv) == 0
    meta, header, rows = read_csv(out)
    assert header == SCHEMAS["sweep-gibbs"] and len(rows) == 3 and meta["seed"] == 1


@pytest.mark.parametrize("argv", [
    ["sweep", "--j-from", "9", "--j-to", "5"],
    ["sweep", "--j-from", "5", "--j-to", "13"],
    ["sweep", "--j-from", "5"],
    ["gibbs", "--c", "-2.5"],
    ["zeros", "--c", "abc"],
    ["nosuch"],
    ["zeros", "--c", "-3", "--radius", "-1"],
])
def test_parse_errors_exit_2(argv):
    assert run(argv) == 2


@pytest.mark.parametrize("argv", [
    ["zeros", "--c", "-1.5"],
    ["spectrum", "--c", "-2.001"],
    ["corr", "--mode", "tent", "--z", "1.5"],
    ["hardy", "--a", "0.5"],
    ["orbit"],
])
def test_module_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("zeta: error:")


ALL_COMMANDS = [
    (["orbit", "--c", "-3"], "orbit"),
    (["det", "--c", "-3", "--radius", "100"], "det"),
    (["zeros", "--t-exp", "6"], "zeros"),
    (["hardy", "--a", "1.1"], "hardy"),
    (["zerodist", "--t-exp", "6"], "zerodist"),
    (["spectrum", "--c", "-3", "--degree", "24"], "spectrum"),
    (["tent", "--degree", "8"], "tent"),
    (["gibbs", "--c", "-2.5", "--samples", "1000", "--seed", "3"], "gibbs"),
    (["corr", "--mode", "polynomial", "--coeffs-a", "0,1", "--coeffs-b", "0,1", "--m-max", "4"], "corr"),
    (["corr", "--mode", "gap", "--t-exp", "6"], "corr"),
    (["sweep", "--j-from", "5", "--j-to", "6"], "sweep"),
]


@pytest.mark.parametrize("argv, schema", ALL_COMMANDS)
def test_headers_match_schema_and_reproducible(tmp_path, argv, schema):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(argv + ["--no-timestamp", "--out", str(a)]) == 0
    assert run(argv + ["--no-timestamp", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    meta, header, rows = read_csv(a)
    assert header == SCHEMAS[schema]
    assert "timestamp" not in meta and rows


@pytest.mark.parametrize("argv, schema", ALL_COMMANDS[:4])
def test_json_format(tmp_path, argv, schema):
    out = tmp_path / "o.json"
    assert run(argv + ["--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert "timestamp" in doc["meta"]
    assert set(doc["data"][0]) == set(SCHEMAS[schema])


def test_orbit_values(tmp_path):
    out = tmp_path / "o.csv"
    assert run(["orbit", "--c", "-3", "--n-terms", "5", "--out", str(out)]) == 0
    _, _, rows = read_csv(out)
    assert [float(r[3]) for r in rows] == [-3, 6, 33, 1086, 1179393]


def test_zerodist_stats_file(tmp_path):
    stats = tmp_path / "s.json"
    assert run(["zerodist", "--t-exp", "8", "--stats", str(stats), "--out", str(tmp_path / "z.csv")]) == 0
    doc = json.loads(stats.read_text())
    assert set(doc["data"]) == set(SCHEMAS["zerodist"])


def test_json_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 3, "m-max": 4, "no_timestamp": True}))
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["corr", "--json-config", str(cfg), "--out", str(out1)]) == 0
    assert run(["corr", "--z", "3", "--m-max", "4", "--no-timestamp", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(out1.read_text().splitlines()) == 7


def test_json_config_explicit_flag_wins(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"z": 3, "m_max": 4}))
    out = tmp_path / "a.csv"
    assert run(["corr", "--json-config", str(cfg), "--m-max", "2", "--out", str(out)]) == 0
    assert len(read_csv(out)[2]) == 3


def test_json_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["corr", "--json-config", str(cfg)]) == 2


def test_help_lists_schemas(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--help"])
    text = capsys.readouterr().out
    for name, cols in SCHEMAS.items():
        assert f"{name:12s} {', '.join(cols)}" in text


def test_help_flag_names():
    flags = set()
    parser = build_parser()
    for action in parser._subparsers._group_actions[0].choices.values():
        for a in action._actions:
            flags.update(a.option_strings)
    required = {"--c", "--t-exp", "--radius", "--eps", "--degree", "--z", "--m-max", "--samples",
                "--burn", "--seed", "--out", "--format", "--no-timestamp", "--j-from", "--j-to", "--base"}
    assert required <= flags


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "quadzeta.cli", "tent", "--degree", "4", "--no-timestamp"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[1] == "m,eigenvalue,coeffs"
