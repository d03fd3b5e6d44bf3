import csv
import subprocess
import sys

import numpy as np
import pytest

from beecup.cli import main
from beecup.config import AbcConfig, ConfigError, ScenarioConfig
from beecup.engine import run_scenario
from beecup.experiments import ChnumRow, node_range
from beecup.output import PER_ROUND, emit_csv, fmt, write_chnum

FAST = ["--abc.mcn", "40", "--abc.chnum_mcn", "200"]


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def leach_result():
    return run_scenario(ScenarioConfig(protocol="leach", node_count=30, replicates=3))


def test_per_round_files(leach_result, tmp_path):
    emit_csv(leach_result, tmp_path)
    for name in PER_ROUND:
        rows = _read(tmp_path / f"{name}.csv")
        assert len(rows) == 13
        assert rows[0] == ["round_index", "rep0", "rep1", "rep2", "mean"]
        for row in rows[1:]:
            vals = [float(v) for v in row[1:4]]
            assert float(row[4]) == pytest.approx(np.mean(vals), abs=1e-9)


def test_ledger_and_lifetime_files(leach_result, tmp_path):
    emit_csv(leach_result, tmp_path, prefix="x_")
    ledger = _read(tmp_path / "x_ledger.csv")
    assert len(ledger) == 1 + 3 * 30
    head = ledger[0]
    for row in ledger[1:]:
        rec = dict(zip(head, row))
        parts = sum(float(rec[k]) for k in head if k.endswith("_j") and k not in
                    ("total_j", "initial_j", "residual_j"))
        assert parts == pytest.approx(float(rec["total_j"]), abs=1e-9)
        assert float(rec["initial_j"]) - float(rec["residual_j"]) == \
            pytest.approx(float(rec["total_j"]), abs=1e-6)
    life = _read(tmp_path / "x_lifetime.csv")
    assert life[0] == ["replicate", "seed", "first_death_s", "survived"] and len(life) == 4


def test_byte_identical_rerun(tmp_path):
    cfg = ScenarioConfig(protocol="beecup", node_count=30, replicates=2, sim_duration=1200,
                         abc=AbcConfig(mcn=40, chnum_mcn=200))
    a, b = tmp_path / "a", tmp_path / "b"
    emit_csv(run_scenario(cfg), a)
    emit_csv(run_scenario(cfg), b)
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_fmt():
    assert fmt(None) == "" and fmt(float("nan")) == ""
    assert fmt(3) == "3" and fmt(0.1) == "0.1" and fmt(np.int64(2)) == "2"


def test_chnum_table(tmp_path):
    rows = [ChnumRow("rect80", 30, [5, 7], [2, 3], [2.5, 3.0])]
    out = _read(write_chnum(rows, tmp_path / "t.csv"))
    assert out[0][:5] == ["region", "nodes", "non_single", "single", "avg_cluster_size"]
    assert float(out[1][4]) == 2.75


@pytest.mark.parametrize("text, want", [("30..90:30", [30, 60, 90]), ("3..5", [3, 4, 5]),
                                        ("20,40", [20, 40])])
def test_node_range(text, want):
    assert node_range(text) == want


@pytest.mark.parametrize("text", ["90..30", "a,b", "", "0,5"])
def test_node_range_rejects(text):
    with pytest.raises(ConfigError):
        node_range(text)


def test_cli_chnum(tmp_path, capsys):
    assert main(["chnum", "--nodes", "30..90:30", "--replicates", "2", "--out", str(tmp_path)]
                + FAST) == 0
    rows = _read(tmp_path / "chnum_rect80.csv")
    assert [r[1] for r in rows[1:]] == ["30", "60", "90"]
    assert "avg size" in capsys.readouterr().out


def test_cli_run_sep(tmp_path, capsys):
    code = main(["run", "--protocol", "sep", "--sep.alpha", "3", "--nodes", "20", "--replicates",
                 "1", "--sim_duration", "1200", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "sep_rect80_20_alive.csv").exists()


def test_cli_compare_classroom(tmp_path, monkeypatch):
    monkeypatch.setenv("BEECUP_OUTPUT_DIR", str(tmp_path))
    code = main(["compare", "--region", "classroom", "--nodes", "20,40", "--protocols",
                 "leach,sep", "--replicates", "2", "--lifetime-cap", "1200"])
    assert code == 0
    rows = _read(tmp_path / "compare_classroom.csv")
    assert rows[0][:4] == ["protocol", "nodes", "energy_per_node_j", "lifetime_s"]
    assert len(rows) == 5


def test_cli_sweep(tmp_path):
    code = main(["sweep", "--axis", "leach.p=0.1,0.2", "--protocol", "leach", "--node_count", "20",
                 "--replicates", "1", "--sim_duration", "600", "--out", str(tmp_path)])
    assert code == 0
    assert len(_read(tmp_path / "sweep.csv")) == 3


@pytest.mark.parametrize("argv", [
    ["run", "--protocol", "pso"],
    ["run", "--weights.ch_select", "0.3,0.3,0.2,0.1"],
    ["run", "--tiny_period", "70"],
    ["run", "--bogus", "1"],
    ["compare", "--protocols", "beecup,pso"],
])
def test_cli_config_errors(argv, capsys, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    argv = ["run", "--protocol", "leach", "--nodes", "10", "--replicates", "1",
            "--sim_duration", "600", "--out", str(blocker / "sub")]
    assert main(argv) == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "beecup", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "chnum" in out.stdout
