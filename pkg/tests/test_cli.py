import csv
import io
import json
import subprocess
import sys

import pytest

from extremal.cli import main, parse_config_text
from extremal.errors import ConfigError
from extremal.report import ExperimentReport, atomic_write, read_config_echo


def data_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spacing_example(capsys):
    code, out, _ = run_cli(capsys, "spacing", "--family", "pareto", "--alpha", "2",
                           "--sizes", "100,1000,10000,100000", "--seed", "42")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("\n".join(data_lines(out)))))
    assert [int(r["N"]) for r in rows] == [100, 1000, 10_000, 100_000]
    _, config = read_config_echo(out)
    assert config["seed"] == "42"
    slope = float(next(line for line in out.splitlines() if line.startswith("# summary slope=")).split("=")[1])
    assert slope == pytest.approx(0.5, abs=0.05)


def test_csv_is_rfc4180_and_json_valid(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "timing", "--replicates", "300", "--generations", "8")
    assert code == 0
    parsed = list(csv.reader(io.StringIO("\n".join(data_lines(out))), strict=True))
    assert len({len(r) for r in parsed}) == 1 and len(parsed) == 4
    code, out, _ = run_cli(capsys, "timing", "--replicates", "300", "--generations", "8", "--format", "json")
    doc = json.loads(out)
    assert doc["experiment"] == "timing" and len(doc["rows"]) == 3


def test_fragments_with_spaces_survive_csv(capsys):
    code, out, _ = run_cli(capsys, "tree-contrast", "--generations", "3..4", "--replicates", "5")
    assert code == 0
    _, config = read_config_echo(out)
    assert config["leaf"] == "family=pareto alpha=1.0"


def test_amplitude_verdict(capsys):
    code, out, _ = run_cli(capsys, "amplitude", "--rate", "300", "--lifetime-years", "100", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    measured, tunnel = (r["log2:value"] for r in doc["rows"])
    assert measured == pytest.approx(-9.4608e11, rel=1e-12)
    assert tunnel == pytest.approx(-1e34 / 0.6931471805599453, rel=1e-12)
    assert doc["summary"]["measurement_exceeds_tunnel"] is True
    assert doc["summary"]["log10_exponent_ratio"] == pytest.approx(22.18, abs=0.01)


def test_unknown_flag_exit_2_no_output(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, err = run_cli(capsys, "spacing", "--bogus", "1", "--out", str(out))
    assert code == 2
    assert not out.exists()
    assert "bogus" in err


def test_domain_errors_exit_2(capsys):
    assert run_cli(capsys, "spacing", "--alpha", "0")[0] == 2
    assert run_cli(capsys, "spacing", "--sizes", "100,10")[0] == 2
    assert run_cli(capsys, "spacing", "--seed", "-4")[0] == 2
    assert run_cli(capsys, "mechanism", "--kind", "gw", "--offspring-mean", "2")[0] == 2


def test_resource_guard_exit_3(capsys):
    code, _, err = run_cli(capsys, "tree-contrast", "--generations", "30", "--replicates", "1")
    assert code == 3 and "guard" in err


def test_insufficient_data_exit_4(capsys):
    code, _, err = run_cli(capsys, "bigjump", "--replicates", "5000")
    assert code == 4
    assert "5" in err and "30" in err


def test_config_file_errors_report_position(tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config_text("experiment=spacing\n  alpha 2\n")
    assert (info.value.line, info.value.column) == (2, 3)
    assert str(info.value).startswith("line 2, column 3:")
    with pytest.raises(ConfigError) as info:
        parse_config_text("{\n  \"experiment\": \n}")
    assert info.value.line == 3


def test_config_file_parse_error_exit_2(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("experiment=spacing\nalpha\n")
    code, _, err = run_cli(capsys, "run", str(cfg))
    assert code == 2 and "line 2, column 1" in err


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("# a comment\nexperiment=spacing\nalpha=1.0\nsizes=10,100\nreplicates=50\n")
    code, out, _ = run_cli(capsys, "spacing", "--config", str(cfg), "--alpha", "3")
    assert code == 0
    _, config = read_config_echo(out)
    assert config["alpha"] == "3.0" and config["sizes"] == "10,100"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_config_echo_round_trip(capsys, tmp_path, fmt):
    first = tmp_path / f"a.{fmt}"
    second = tmp_path / f"b.{fmt}"
    code, _, _ = run_cli(capsys, "mechanism", "--kind", "gw", "--replicates", "3000", "--seed", "9",
                         "--format", fmt, "--out", str(first))
    assert code == 0
    code, _, _ = run_cli(capsys, "run", str(first), "--out", str(second))
    assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_timing_flag_only_adds_duration(capsys):
    _, plain, _ = run_cli(capsys, "amplitude")
    _, timed, _ = run_cli(capsys, "amplitude", "--timing")
    assert timed.startswith(plain)
    assert timed[len(plain):].startswith("# duration_s ")


def test_threads_do_not_change_output(capsys):
    args = ["bigjump", "--replicates", "200000", "--summands", "5", "--quantile", "0.99"]
    _, one, _ = run_cli(capsys, *args, "--threads", "1")
    _, four, _ = run_cli(capsys, *args, "--threads", "4")
    assert one == four


def test_exports(capsys):
    code, out, _ = run_cli(capsys, "mechanism", "--kind", "chain", "--replicates", "100", "--export", "true")
    assert code == 0
    lines = data_lines(out)
    assert lines[0] == "k" and len(lines) == 101
    code, out, _ = run_cli(capsys, "tree-contrast", "--generations", "3..4", "--replicates", "4",
                           "--per-replicate", "yes")
    assert code == 0
    assert len(data_lines(out)) == 1 + 2 * 2 * 4


def test_reproduce_only_rejects_unknown(capsys):
    assert run_cli(capsys, "reproduce-all", "--only", "99")[0] == 2


def test_reproduce_subset_exit_code(capsys):
    code, out, err = run_cli(capsys, "reproduce-all", "--only", "5,10")
    assert code == 0
    assert "[PASS]  5." in err and "[PASS] 10." in err
    assert "# summary passed=2" in out


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "x.txt"
    atomic_write(target, "hello\n")
    atomic_write(target, "again\n")
    assert target.read_text() == "again\n"
    assert [p.name for p in target.parent.iterdir()] == ["x.txt"]


def test_report_rejects_missing_columns():
    with pytest.raises(ValueError):
        ExperimentReport("x", {}, ["a", "b"], [{"a": 1}])


def test_module_entry_point(tmp_path):
    out = tmp_path / "amp.csv"
    proc = subprocess.run([sys.executable, "-m", "extremal", "amplitude", "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_text().startswith("# extremal report\n# experiment amplitude\n")
