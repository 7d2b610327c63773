"""Command line tests: formats, determinism, exit codes, calibration."""

from __future__ import annotations

import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from sidebarsim.cli import load_config, main


def run_cli(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_run_text_deterministic():
    code, first = run_cli("run", "--scenario", "sidebar", "--activation", "relu")
    assert code == 0
    assert "latency_cycles" in first and "945694" in first
    assert "digest" in first and "79f338261359bdcf" in first
    code, second = run_cli("run", "--scenario", "sidebar", "--activation", "relu")
    assert code == 0 and first == second


def test_run_json():
    code, text = run_cli(
        "run", "--scenario", "monolithic", "--activation", "softplus",
        "--format", "json",
    )
    assert code == 0
    record = json.loads(text)
    assert record["latency_cycles"] == 958621
    assert record["bus_bytes"] == 260352
    assert record["digest"] == "94b1b10c8cba56ee"
    assert len(record["logits"]) == 10


def test_run_csv():
    code, text = run_cli(
        "run", "--scenario", "flexible", "--activation", "relu",
        "--format", "csv",
    )
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == 2
    record = dict(zip(rows[0], rows[1]))
    assert record["latency_cycles"] == "1015814"
    assert "logits" not in record


def test_compare_csv_and_json():
    code, text = run_cli("compare", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == 1 + 6  # header + 2 activations x 3 scenarios
    header = rows[0]
    ratio_col = header.index("latency_ratio")
    mono_rows = [r for r in rows[1:] if r[1] == "monolithic"]
    assert all(float(r[ratio_col]) == 1.0 for r in mono_rows)

    code, text = run_cli("compare", "--format", "json", "--activations", "relu")
    records = json.loads(text)
    assert [r["scenario"] for r in records] == ["monolithic", "flexible", "sidebar"]
    assert records[1]["latency_ratio"] == pytest.approx(1.088989, abs=1e-6)


def test_trace_limit():
    code, text = run_cli(
        "trace", "--scenario", "sidebar", "--activation", "relu", "--limit", "3",
    )
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("config ")
    assert lines[1].startswith("DmaLoad 0 ")
    assert "more events" in lines[-2]
    assert lines[-1].startswith("totals ")


def test_trace_full_is_replayable():
    code, text = run_cli("trace", "--scenario", "monolithic", "--activation", "relu")
    assert code == 0
    lines = text.splitlines()
    assert len(lines) == 2 + 3
    assert "latency=932805" in lines[-1]


def test_config_command():
    code, text = run_cli("config")
    assert code == 0
    assert f"fingerprint={load_config(None).fingerprint()}" in text
    assert "transfer.dma_setup_cycles=2500" in text


def test_exit_code_usage():
    assert run_cli("run", "--scenario", "warp", "--activation", "relu")[0] == 2
    assert run_cli("run", "--scenario", "sidebar", "--activation", "swish")[0] == 2
    assert main([]) == 2


def test_exit_code_config_error(capsys):
    code, _ = run_cli(
        "run", "--scenario", "sidebar", "--activation", "relu",
        "--config", "/nonexistent.cfg",
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_custom_config_changes_digest(tmp_path):
    config = load_config(None)
    path = tmp_path / "hot.cfg"
    config.with_transfer(dram_energy_pj_per_byte=21.0).to_file(path)
    code, base = run_cli(
        "run", "--scenario", "monolithic", "--activation", "relu",
        "--format", "json",
    )
    code2, hot = run_cli(
        "run", "--scenario", "monolithic", "--activation", "relu",
        "--format", "json", "--config", str(path),
    )
    assert code == 0 and code2 == 0
    base_rec, hot_rec = json.loads(base), json.loads(hot)
    assert hot_rec["digest"] != base_rec["digest"]
    assert hot_rec["latency_cycles"] == base_rec["latency_cycles"]
    assert hot_rec["dram_energy_pj"] > base_rec["dram_energy_pj"]


def test_calibrate_deterministic(tmp_path):
    grid = tmp_path / "grid.cfg"
    grid.write_text(
        "[grid]\n"
        "sidebar_latency_cycles = 4, 8\n"
        "[activation_grid]\n"
        "relu = 0.125, 0.25\n"
    )
    out_a = tmp_path / "a.cfg"
    out_b = tmp_path / "b.cfg"
    code_a, text_a = run_cli("calibrate", "--grid", str(grid), "--out", str(out_a))
    code_b, text_b = run_cli("calibrate", "--grid", str(grid), "--out", str(out_b))
    assert code_a == code_b == 0
    assert text_a.replace(str(out_a), "X") == text_b.replace(str(out_b), "X")
    assert out_a.read_bytes() == out_b.read_bytes()
    assert "feasible point after 1" in text_a


def test_calibrate_no_feasible_point(tmp_path, capsys):
    grid = tmp_path / "grid.cfg"
    grid.write_text("[grid]\ndram_energy_pj_per_byte = 3.5, 4.0\n")
    code, _ = run_cli(
        "calibrate", "--grid", str(grid), "--out", str(tmp_path / "o.cfg")
    )
    assert code == 1
    err = capsys.readouterr().err
    assert "no feasible point among 2 candidates" in err


def test_calibrate_rejects_bad_grid(tmp_path, capsys):
    grid = tmp_path / "grid.cfg"
    grid.write_text("[grid]\nwarp_factor = 9\n")
    code, _ = run_cli(
        "calibrate", "--grid", str(grid), "--out", str(tmp_path / "o.cfg")
    )
    assert code == 1
    assert "unknown grid key" in capsys.readouterr().err


def test_console_script_installed():
    exe = shutil.which("sidebarsim")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run(
        [exe, "run", "--scenario", "monolithic", "--activation", "relu",
         "--format", "json"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["digest"] == "08c32acedf2e6281"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sidebarsim.cli", "--help"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "run" in proc.stdout and "calibrate" in proc.stdout
