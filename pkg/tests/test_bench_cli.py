import csv
import io
import json

import pytest

from ssts import bench, reference
from ssts.cli import main
from ssts.problems import load_system


def test_parse_params():
    assert bench.parse_params("table1-exp") == "table1-exp"
    assert bench.parse_params("a=1.02,w=0.66") == {"a": 1.02, "w": 0.66}
    for bad in ("alpha=1", "w=0.5", "a=", "nonsense"):
        with pytest.raises(ValueError):
            bench.parse_params(bad)


def test_resolve_params_from_reference():
    assert bench.resolve_params(1, 16, "ssts", "table1-opt") == (1.019, 0.657, "ssts-opt")
    assert bench.resolve_params(2, 64, "ssts", "table1-exp") == (1.38, 1.33, "ssts-exp")
    assert bench.resolve_params(1, 32, "mhss", "table1-opt") == (0.75, None, "table1")
    assert bench.resolve_params(2, 16, "psbts", "table1-opt") == (0.689, 1.308, "table1")
    assert bench.resolve_params(1, 16, "gmres", "table1-opt") == (None, None, "none")
    with pytest.raises(ValueError):
        bench.resolve_params(1, 16, "ssts", "a=1.0")


def test_reference_lookup():
    assert reference.published_iterations(2, 256, "ssts-exp") == 6
    assert reference.published_gmres(128, "gmres") == (20, 4)
    with pytest.raises(KeyError):
        reference.table1(1, 20, "sbts")


def test_plan_validation():
    with pytest.raises(ValueError):
        bench.ExperimentPlan(example=3, grids=[4], methods=["ssts"])
    with pytest.raises(ValueError):
        bench.ExperimentPlan(example=1, grids=[4], methods=["sor"])
    with pytest.raises(ValueError):
        bench.ExperimentPlan(example=1, grids=[1], methods=["ssts"])


def test_run_table_order_and_published_column():
    plan = bench.ExperimentPlan(example=1, grids=[16], methods=["psbts", "ssts"])
    cells = bench.run_table(plan)
    assert [(c.method, c.m) for c in cells] == [("psbts", 16), ("ssts", 16)]
    assert all(c.converged for c in cells)
    assert cells[1].iterations == 4 and cells[1].published == "4"


def test_run_table_jobs_same_result():
    plan = bench.ExperimentPlan(example=2, grids=[4, 8], methods=["ssts", "sbts"], params="a=24,w=1.3")
    a = bench.run_table(plan)
    b = bench.run_table(plan, jobs=3)
    assert [(c.method, c.m, c.iterations) for c in a] == [(c.method, c.m, c.iterations) for c in b]


def test_divergence_marked_not_raised():
    plan = bench.ExperimentPlan(example=1, grids=[8], methods=["ssts"], params="a=0.2,w=0.7", max_iters=200)
    (cell,) = bench.run_table(plan)
    assert not cell.converged and cell.label == "DIVERGED"


def test_missing_reference_is_error_row():
    plan = bench.ExperimentPlan(example=1, grids=[10], methods=["sbts"])
    (cell,) = bench.run_table(plan)
    assert cell.label == "ERROR" and cell.error


def test_formats():
    plan = bench.ExperimentPlan(example="identity", grids=[3], methods=["ssts", "gmres"], params="a=1,w=1")
    cells = bench.run_table(plan)
    rows = list(csv.DictReader(io.StringIO(bench.format_table(cells, "csv"))))
    assert rows[0]["IT"] == "1" and rows[0]["converged"] == "True"
    assert rows[1]["IT"] == "1(1)"
    md = bench.format_table(cells, "md").splitlines()
    assert md[0].startswith("| method | m |") and len(md) == 4
    assert json.loads(bench.format_table(cells, "json"))[0]["method"] == "ssts"


def test_cell_json_round_trip_byte_identical():
    (cell,) = bench.run_table(bench.ExperimentPlan(example=1, grids=[16], methods=["ssts"]))
    text = cell.to_json()
    again = bench.CellResult(**json.loads(text)).to_json()
    assert again == text


def test_verify_rejects_large_grid():
    with pytest.raises(ValueError):
        bench.verify(1, 32)


# -- CLI ----------------------------------------------------------------------

def test_cli_table_writes_cells(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code = main(["table", "--example", "1", "--grids", "16", "--methods", "ssts,psbts",
                 "--format", "csv", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("method,m,")
    files = sorted(p.name for p in (tmp_path / "t_cells").iterdir())
    assert files == ["psbts_m16.json", "ssts_m16.json"]


def test_cli_table_divergence_exit_code(capsys):
    code = main(["table", "--example", "1", "--grids", "8", "--methods", "ssts",
                 "--params", "a=0.2,w=0.7", "--max-iters", "50"])
    assert code == 1
    assert "DIVERGED" in capsys.readouterr().out


def test_cli_bad_value_exit_code(capsys):
    assert main(["table", "--example", "1", "--grids", "1", "--methods", "ssts"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_argparse_error():
    with pytest.raises(SystemExit) as err:
        main(["table"])
    assert err.value.code == 2


def test_cli_analyze(capsys):
    assert main(["analyze", "--example", "1", "--m", "16"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["omega_opt"] == pytest.approx(0.6576853080358274, rel=1e-10)
    assert d["table1_alpha"] == 1.019


def test_cli_verify(capsys):
    assert main(["verify", "--example", "2", "--m", "2"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 7 and "verify: passed" in out


def test_cli_gmres(capsys):
    assert main(["gmres", "--example", "1", "--m", "16", "--format", "json"]) == 0
    (cell,) = json.loads(capsys.readouterr().out)
    assert cell["label"] == "5(4)" and cell["published"] == "5(4)"
    assert main(["gmres", "--example", "1", "--m", "16", "--precond", "ssts", "--params", "1.019,0.657",
                 "--format", "json"]) == 0
    (cell,) = json.loads(capsys.readouterr().out)
    assert cell["converged"] and cell["param_source"] == "explicit"


def test_cli_generate(tmp_path, capsys):
    assert main(["generate", "--example", "2", "--m", "3", "--out", str(tmp_path / "ex2")]) == 0
    sys = load_system(tmp_path / "ex2.json")
    assert sys.n == 9


def test_cli_thread_limit(monkeypatch, capsys):
    monkeypatch.setenv("SSTS_NUM_THREADS", "1")
    assert main(["table", "--example", "identity", "--grids", "2", "--methods", "ssts", "--params", "a=1,w=1"]) == 0
