import csv
import json
from pathlib import Path

import pytest

from degenrelax.cli import main
from degenrelax.errors import PlotIOError
from degenrelax.svg import emit_plot, render_svg

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden" / "figure1.svg"


def run(*argv):
    return main([str(a) for a in argv])


def test_analyze_quartic(tmp_path, capsys):
    assert run("analyze", "--weight", DATA / "quartic.json", "--out", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "intervals.csv").open()))
    assert rows[0] == ["index", "a_i", "b_i"]
    assert [tuple(map(float, r[1:])) for r in rows[1:]] == [(-2, -1), (-1, 1), (1, 2)]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert list(summary)[:2] == ["n_w", "truncated"]
    assert summary["n_w"] == 3 and summary["truncated"] is False
    assert json.loads(capsys.readouterr().out) == summary


def test_analyze_truncated(tmp_path):
    assert run("analyze", "--weight", DATA / "sin_inv.json", "--max-intervals", 20, "--out", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["truncated"] is True and len(summary["intervals"]) == 20


def test_hat_outputs_and_verdict(tmp_path):
    assert run("hat", "--weight", DATA / "quartic.json", "--out", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "hat.csv").open()))
    assert rows[0] == ["x", "w", "w_hat"] and len(rows) == 802
    assert all(len(r[0]) <= 24 for r in rows[1:])
    report = json.loads((tmp_path / "hat.json").read_text())
    assert report["verdict"] is True
    assert (tmp_path / "hat.svg").read_text().startswith("<svg")


def test_plot_matches_golden(tmp_path):
    assert run("plot", "--weight", DATA / "quartic.json", "--out", tmp_path) == 0
    assert (tmp_path / "figure.svg").read_bytes() == GOLDEN.read_bytes()


def test_run_config_resolves_relative_paths(tmp_path):
    cfg = {"command": "plot", "weight": str(DATA / "quartic.json"), "out": str(tmp_path / "p")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run("run", "--config", path) == 0
    assert (tmp_path / "p" / "figure.svg").read_bytes() == GOLDEN.read_bytes()


def test_pair_report(tmp_path):
    code = run("pair", "--weight", DATA / "quartic.json", "--function", DATA / "identity.json",
               "--test-function", DATA / "bump.json", "--out", tmp_path)
    assert code == 0
    rep = json.loads((tmp_path / "pairing.json").read_text())
    assert list(rep) == ["test_value", "tv", "quadrature_error", "jump_in_support"]


def test_poincare_exit_code_agrees_with_verdict(tmp_path):
    code = run("poincare", "--weight", DATA / "quartic.json", "--count", 5, "--seed", 3, "--out", tmp_path)
    verdict = json.loads((tmp_path / "summary.json").read_text())["verdict"]
    assert code == (0 if verdict else 1) and verdict
    assert len(list(csv.reader((tmp_path / "poincare.csv").open()))) == 6


def test_relax_verdict(tmp_path):
    code = run("relax", "--weight", DATA / "quartic.json", "--function", DATA / "identity.json",
               "--out", tmp_path)
    v = json.loads((tmp_path / "verdict.json").read_text())
    assert code == 0 and v["verdict"] is True
    assert v["relaxed_value"] == pytest.approx(92 / 15, abs=1e-12)
    rows = list(csv.reader((tmp_path / "relax.csv").open()))
    assert rows[0] == ["h", "l1_hat_error", "energy", "energy_gap"] and [r[0] for r in rows[1:]] == \
        ["8", "16", "32", "64"]


def test_counterexample_table(tmp_path):
    assert run("counterexample", "--beta", 2, "--gamma", 0.5, "--blocks", 50, "--out", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "counterexample.csv").open()))
    assert [r[0] for r in rows[1:]] == ["10", "20", "50"]


def test_a1_command(tmp_path):
    assert run("a1", "--weight", DATA / "constant.json", "--q-exponent", 2, "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "a1.json").read_text())
    assert rep["best_c"] == 1.0 and rep["violating_ball"] is None


@pytest.mark.parametrize("argv", [
    ("run", "--config", "missing.json"),
    ("analyze", "--weight", "missing.json"),
    ("analyze",),
    ("counterexample", "--beta", "0.5"),
    ("a1", "--weight", str(DATA / "quartic.json")),
    ("nonsense",),
])
def test_input_errors_exit_two(argv, tmp_path, capsys):
    assert run(*argv, *(["--out", tmp_path] if argv[0] not in ("run", "nonsense") else [])) == 2
    assert capsys.readouterr().err


def test_malformed_spec_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("analyze", "--weight", bad, "--out", tmp_path) == 2
    assert "error" in capsys.readouterr().err


def test_determinism(tmp_path):
    for k in (1, 2):
        assert run("poincare", "--weight", DATA / "quartic.json", "--count", 8, "--seed", 7,
                   "--out", tmp_path / str(k)) == 0
        assert run("hat", "--weight", DATA / "quartic.json", "--out", tmp_path / str(k)) == 0
    for name in ("poincare.csv", "summary.json", "hat.csv", "hat.svg", "hat.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()


def test_svg_single_constant_series():
    text = render_svg([("c", [0, 1, 2], [1, 1, 1])])
    assert text.count("<polyline") == 1
    assert "http" not in text.replace('xmlns="http://www.w3.org/2000/svg"', "")


def test_svg_refuses_empty_and_unsorted(tmp_path):
    with pytest.raises(PlotIOError):
        render_svg([])
    with pytest.raises(PlotIOError):
        render_svg([("a", [], [])])
    with pytest.raises(ValueError):
        render_svg([("a", [1, 0], [0, 1])])
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(PlotIOError):
        emit_plot([("a", [0, 1], [0, 1])], blocker / "y.svg")
