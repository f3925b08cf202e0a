import csv
import io
import json
import math

import pytest

from natrans import ConvergenceError, __version__
from natrans import sweep as sweep_mod
from natrans.cli import main
from natrans.sweep import parse_grid, worker_count


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spin_flip_three_estimators(tmp_path):
    out = tmp_path / "rz.csv"
    code = main(["spin-flip", "--model", "rosen-zener", "--beta0", "1", "--beta1", "0.5",
                 "--estimators", "exact,oracle,adiabatic", "-o", str(out)])
    assert code == 0
    (row,) = read_csv(out)
    exact = float(row["exact_probability"])
    assert exact == pytest.approx(7.44195e-3, rel=1e-5)
    assert float(row["oracle_probability"]) == pytest.approx(exact, rel=1e-5)
    assert float(row["adiabatic_probability"]) == pytest.approx(exact, rel=0.10)
    assert row["adiabatic_valid"] == "1"


def test_csv_layout_and_validity_columns(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--model", "logistic", "--alpha", "2", "--beta", "0.1,0.2",
                 "--estimators", "born,exact,adiabatic", "-o", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header = raw.decode().splitlines()[0].split(",")
    assert header[:3] == ["alpha", "beta", "k"]
    # estimators follow declaration order whatever order was requested
    tags = [h.rsplit("_", 1)[0] for h in header[3:]]
    assert list(dict.fromkeys(tags)) == ["exact", "adiabatic", "born"]
    for tag in ("exact", "adiabatic", "born"):
        assert f"{tag}_probability" in header and f"{tag}_valid" in header
    rows = read_csv(out)
    assert len(rows) == 2
    assert rows[0]["adiabatic_probability"] == "%.17g" % float(rows[0]["adiabatic_probability"])


def test_rerun_is_byte_identical_and_thread_independent(tmp_path, monkeypatch):
    args = ["sweep", "--model", "rosen-zener", "--beta0", "2", "--beta1", "0.5:1.5:0.25",
            "--estimators", "exact,adiabatic,transformed"]
    paths = []
    for i, threads in enumerate(("1", "3", "3")):
        monkeypatch.setenv("NATRANS_THREADS", threads)
        p = tmp_path / f"run{i}.csv"
        assert main(args + ["-o", str(p)]) == 0
        paths.append(p)
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]


def test_manifest_schema(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["reflect", "--alpha", "2", "--beta", "0.5", "-o", str(out)]) == 0
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["version"] == __version__
    assert isinstance(doc["config"], dict) and doc["config"]["alpha"] == "2"
    assert isinstance(doc["wall_seconds"], float) and doc["wall_seconds"] >= 0


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "rosen-zener", "beta0": 1, "beta1": 0.25, "estimators": "exact"}))
    out = tmp_path / "c.csv"
    assert main(["sweep", "--config", str(cfg), "--beta1", "0.5", "-o", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["beta1"]) == 0.5
    assert float(row["exact_probability"]) == pytest.approx(1 / math.cosh(math.pi) ** 2)


@pytest.mark.parametrize("argv", [
    ["sweep", "--beta0", "1", "--beta1", "0.5"],
    ["spin-flip", "--beta1", "0.5"],
    ["spin-flip", "--beta0", "1", "--beta1", "0.5", "--estimators", "nonsense"],
    ["spin-flip", "--beta0", "1", "--beta1", "0.5", "--estimators", ","],
    ["spin-flip", "--beta0", "1", "--beta1", "0.5", "--estimators", "born"],
    ["spin-flip", "--beta0", "1", "--beta1", "1:0:0.1"],
    ["spin-flip", "--beta0", "-1", "--beta1", "0.5"],
    ["spin-flip", "--beta0", "1", "--beta1", "0.5", "--rel-tol", "0"],
    ["reflect", "--alpha", "2", "--beta", "1.5"],
    ["sweep", "--model", "logistic", "--alpha", "1", "--beta", "0.5", "--beta0", "2"],
    ["oscillator", "--alpha", "1"],
    ["oscillator", "--alpha", "1", "--beta", "0.5", "--n-max", "99"],
    ["no-such-command"],
    ["spin-flip", "--config", "/nonexistent/cfg.json"],
])
def test_invalid_configuration_exits_2(argv, tmp_path):
    out = tmp_path / "never.csv"
    assert main(argv + ["-o", str(out)]) == 2
    assert not out.exists()


def test_bad_json_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["spin-flip", "--config", str(cfg)]) == 2


def test_unwritable_output_exits_4(tmp_path):
    assert main(["spin-flip", "--beta0", "1", "--beta1", "0.5", "--estimators", "exact",
                 "-o", str(tmp_path / "missing" / "x.csv")]) == 4


def test_non_convergence_writes_partial_results(tmp_path, monkeypatch):
    monkeypatch.setenv("NATRANS_THREADS", "1")
    real = sweep_mod.evaluate_point

    def flaky(model, point, estimator, **kw):
        if point["beta1"] == 1.0:
            raise ConvergenceError("forced")
        return real(model, point, estimator, **kw)

    monkeypatch.setattr(sweep_mod, "evaluate_point", flaky)
    out = tmp_path / "p.csv"
    assert main(["sweep", "--model", "rosen-zener", "--beta0", "2", "--beta1", "0.5,1.0,1.5",
                 "--estimators", "exact", "-o", str(out)]) == 3
    rows = read_csv(out)
    assert [r["exact_valid"] for r in rows] == ["1", "0", "1"]
    assert rows[1]["exact_probability"] == "nan"
    assert json.loads((tmp_path / "p.json").read_text())["failures"]


def test_stdout_when_no_output(capsys):
    assert main(["spin-flip", "--beta0", "1", "--beta1", "0.5", "--estimators", "exact"]) == 0
    text = capsys.readouterr().out
    assert list(csv.DictReader(io.StringIO(text)))[0]["beta0"] == "1"


def test_oscillator_command(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert main(["oscillator", "--alpha", "2", "--beta", "0.3", "--n-max", "4", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 25 and set(rows[0]) == {"m", "n", "probability", "valid"}
    doc = json.loads((tmp_path / "o.json").read_text())
    assert 0 < doc["theta"] < 1e-4
    assert "theta" in capsys.readouterr().err


def test_validate_command(capsys):
    assert main(["validate"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.05:0.9:0.05")[-1] == 0.9
    assert len(parse_grid("0.05:3:0.05")) == 60
    assert parse_grid("1, 2,3") == [1.0, 2.0, 3.0]
    assert parse_grid(2) == [2.0]
    for bad in ("", "1:2", "1:0:1", "0:1:0", "nan", "1,inf"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_worker_count_env_wins(monkeypatch):
    monkeypatch.setenv("NATRANS_THREADS", "3")
    assert worker_count(7) == 3
    monkeypatch.delenv("NATRANS_THREADS")
    assert worker_count(2) == 2
    assert 1 <= worker_count() <= 4
