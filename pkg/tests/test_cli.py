import csv
import io
import json
from contextlib import redirect_stdout

import pytest

from kldpf.cli import EXIT_ALL_FAILED, EXIT_CONFIG, EXIT_IO, EXIT_OK, main


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"scenario": {"num_steps": 6}, "n_init": 200, "trials": 2}))
    return p


def test_run_writes_outputs(tmp_path, small_config):
    out = tmp_path / "out"
    assert main(["run", "--config", str(small_config), "--out", str(out), "--trace", "1"]) == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {"aggregate.csv", "config.json", "mean_error_and_size.png", "trial_1.png"} <= names
    assert "trial_kld-resampling_1.csv" in names
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["trials"] == 2 and cfg["scenario"]["num_steps"] == 6


def test_run_overrides(tmp_path, small_config):
    out = tmp_path / "o"
    assert main(["run", "--config", str(small_config), "--trials", "1", "--seed", "44",
                 "--out", str(out), "--no-plots"]) == EXIT_OK
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["trials"] == 1 and cfg["master_seed"] == 44
    assert not list(out.glob("*.png"))


def test_trial(tmp_path, small_config):
    out = tmp_path / "t"
    rc = main(["trial", "--method", "kld-sampling", "--trial-index", "3",
               "--config", str(small_config), "--out", str(out)])
    assert rc == EXIT_OK
    with open(out / "trial_kld-sampling_3.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) == 7
    assert (out / "trial_kld-sampling_3.png").exists()


def test_size_table_stdout():
    buf = io.StringIO()
    with redirect_stdout(buf):
        assert main(["size-table", "--epsilon", "0.15", "--delta", "0.01", "--k-max", "5"]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0][:3] == ["k", "n_wilson_hilferty", "n_exact_chi_square"]
    assert [r[0] for r in rows[1:]] == ["2", "3", "4", "5"]
    assert float(rows[1][1]) == pytest.approx(21.95, abs=0.005)


def test_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"unknown": 1}))
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["size-table", "--epsilon", "-1"]) == EXIT_CONFIG


def test_io_error(tmp_path, small_config):
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["run", "--config", str(small_config), "--out", str(blocker / "x"), "--no-plots"]) == EXIT_IO
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_IO


def test_all_failed_exit(tmp_path, small_config, monkeypatch):
    import numpy as np

    import kldpf.filters as filters

    monkeypatch.setattr(filters, "bearing_log_likelihood", lambda z, s, sc: np.full(len(s), np.nan))
    out = tmp_path / "f"
    assert main(["run", "--config", str(small_config), "--out", str(out), "--no-plots"]) == EXIT_ALL_FAILED
    rows = list(csv.reader(open(out / "aggregate.csv", newline="")))
    assert all(r[6] == "2" for r in rows[1:])
