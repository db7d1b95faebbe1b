import csv
import os

import pytest

from swipt_plots.figures import FigureSpec, main, render

DATA = os.path.join(os.path.dirname(__file__), "data")


def ref(name):
    return os.path.join(DATA, name)


def load_summary(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_renders_all_three_kinds(tmp_path):
    for kind, src in [("gamma", "reference_gamma.csv"),
                      ("power", "reference_power.csv"),
                      ("convergence", "reference_convergence.csv")]:
        out = tmp_path / f"{kind}.png"
        data = render(FigureSpec(csv_path=ref(src), kind=kind, out_path=str(out)))
        assert out.exists() and out.stat().st_size > 0
        assert (tmp_path / f"{kind}.svg").exists()   # vector sibling
        assert data


@pytest.mark.parametrize("src,kind", [("reference_gamma.csv", "gamma"),
                                      ("reference_power.csv", "power")])
def test_plotted_points_equal_summary_exactly(tmp_path, src, kind):
    data = render(FigureSpec(csv_path=ref(src), kind=kind,
                             out_path=str(tmp_path / "f.png")))
    summary = load_summary(ref(src.replace(".csv", ".summary.csv")))
    for s in summary:
        scheme = s["scheme"]
        value = float(s["sweep_value"])
        series = data["series"][scheme]
        idx = series["x"].index(value)
        assert series["y"][idx] == float(s["mean_objective_watts"])
        assert series["stderr"][idx] == float(s["stderr_objective_watts"])


def test_gamma_curves_monotone_non_increasing(tmp_path):
    data = render(FigureSpec(csv_path=ref("reference_gamma.csv"), kind="gamma",
                             out_path=str(tmp_path / "g.png")))
    for scheme, series in data["series"].items():
        ys = series["y"]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(ys, ys[1:])), scheme


def test_convergence_trace_plotted(tmp_path):
    data = render(FigureSpec(csv_path=ref("reference_convergence.csv"),
                             kind="convergence", out_path=str(tmp_path / "c.svg")))
    assert not data["error"]
    assert data["x"] == list(range(len(data["trace"])))
    assert all(b >= a for a, b in zip(data["trace"], data["trace"][1:]))


def test_single_point_single_scheme(tmp_path):
    src = tmp_path / "one.csv"
    with open(ref("reference_gamma.csv")) as f:
        lines = f.read().splitlines()
    keep = [lines[0]] + [l for l in lines[1:] if ",Proposed," in l and l.startswith("gamma,15.0,0,")]
    src.write_text("\n".join(keep) + "\n")
    data = render(FigureSpec(csv_path=str(src), kind="gamma", out_path=str(tmp_path / "o.png")))
    assert data["series"]["Proposed"]["x"] == [15.0]


def test_missing_columns_rejected(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("sweep_kind,sweep_value,trial\ngamma,5.0,0\n")
    with pytest.raises(ValueError, match="header mismatch"):
        render(FigureSpec(csv_path=str(src), kind="gamma", out_path=str(tmp_path / "b.png")))


def test_error_row_gives_annotated_empty_plot(tmp_path):
    src = tmp_path / "err.csv"
    src.write_text("iteration,objective_watts\nerror,infeasible\n")
    out = tmp_path / "e.png"
    data = render(FigureSpec(csv_path=str(src), kind="convergence", out_path=str(out)))
    assert data["error"] and out.exists()


def test_empty_feasible_set_annotated(tmp_path):
    src = tmp_path / "infeas.csv"
    with open(ref("reference_gamma.csv")) as f:
        lines = f.read().splitlines()
    doctored = [lines[0]] + [l.replace(",true,", ",false,", 1).replace(",true,", ",false,")
                             for l in lines[1:]]
    # mark every row infeasible (feasible is the 9th column)
    rows = []
    for l in lines[1:]:
        cells = l.split(",")
        cells[8] = "false"
        rows.append(",".join(cells))
    src.write_text("\n".join([lines[0]] + rows) + "\n")
    out = tmp_path / "i.png"
    data = render(FigureSpec(csv_path=str(src), kind="gamma", out_path=str(out)))
    assert out.exists()
    assert all(not s["x"] for s in data["series"].values())


def test_deterministic_output_bytes(tmp_path):
    out1, out2 = tmp_path / "a.svg", tmp_path / "b.svg"
    render(FigureSpec(csv_path=ref("reference_gamma.csv"), kind="gamma", out_path=str(out1)))
    render(FigureSpec(csv_path=ref("reference_gamma.csv"), kind="gamma", out_path=str(out2)))
    assert out1.read_bytes() == out2.read_bytes()


def test_dbm_scale(tmp_path):
    data = render(FigureSpec(csv_path=ref("reference_gamma.csv"), kind="gamma",
                             out_path=str(tmp_path / "d.png"), scale="dbm"))
    # returned data stays in watts; only the axis is scaled
    assert all(all(y > 0 for y in s["y"]) for s in data["series"].values() if s["y"])


def test_cli(tmp_path):
    out = tmp_path / "cli.png"
    rc = main(["render", "--csv", ref("reference_power.csv"), "--kind", "power",
               "--out", str(out)])
    assert rc == 0 and out.exists()
    rc = main(["render", "--csv", str(tmp_path / "missing.csv"), "--kind", "power",
               "--out", str(out)])
    assert rc != 0
