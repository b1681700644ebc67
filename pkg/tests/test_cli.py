import json
from pathlib import Path

import numpy as np
import pytest

from minact import Curve, SingleRod, geometric_action
from minact.cli import main

ROD_SCENARIO = """
[model]
kind = "single_rod"
mu = [1.0, 2.0, 3.0]
shear_12 = 1.0

[[route]]
name = "via_sa-"
waypoints = ["si+", "sa-", "si-"]

[[route]]
name = "via_so"
waypoints = ["si+", "so-", "si-"]

[solver]
images = 80

[output]
directory = "{out}"
"""

TWO_ROD_SCENARIO = """
[model]
kind = "two_rod"

[[route]]
name = "A"
waypoints = ["si2", "sa5", "si3"]

[solver]
images = 60

[output]
directory = "{out}"
"""


def write_config(tmp_path, text, name="scenario.toml", **fmt):
    cfg = tmp_path / name
    cfg.write_text(text.format(**fmt), encoding="utf-8")
    return str(cfg)


def read_actions(out_dir):
    lines = (Path(out_dir) / "actions.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    return rows


def read_path_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data


def test_solve_writes_consistent_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, ROD_SCENARIO, out=out)
    assert main(["solve", cfg]) == 0
    rows = read_actions(out)
    assert [r["route"] for r in rows] == ["via_sa-", "via_so"]
    model = SingleRod(shear_12=1.0)
    man = model.manifold()
    for row in rows:
        header, data = read_path_csv(out / "paths" / f"{row['route']}.csv")
        assert header[:5] == ["alpha", "x1", "x2", "x3", "lambda"]
        assert data.shape[0] == 81
        curve = Curve(data[:, 1:4])
        recomputed = geometric_action(curve, model, man)
        assert abs(recomputed - float(row["action"])) <= 1e-9
    summary = json.loads((out / "summary.json").read_text())
    assert summary["command"] == "solve"
    assert summary["global"][0]["route"] == "via_sa-"
    assert len(summary["fixed_points"]) == 6


def test_solve_reruns_byte_identical(tmp_path):
    cfg = write_config(tmp_path, ROD_SCENARIO, out=tmp_path / "a")
    assert main(["solve", cfg]) == 0
    assert main(["solve", cfg, "--out", str(tmp_path / "b")]) == 0
    for rel in ["actions.csv", "paths/via_sa-.csv", "paths/via_so.csv"]:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_solve_images_flag_overrides(tmp_path):
    cfg = write_config(tmp_path, ROD_SCENARIO, out=tmp_path / "o")
    assert main(["solve", cfg, "--images", "40"]) == 0
    _, data = read_path_csv(tmp_path / "o" / "paths" / "via_sa-.csv")
    assert data.shape[0] == 41


def test_two_rod_paths_include_angle_columns(tmp_path):
    cfg = write_config(tmp_path, TWO_ROD_SCENARIO, out=tmp_path / "o")
    assert main(["solve", cfg]) == 0
    header, data = read_path_csv(tmp_path / "o" / "paths" / "A.csv")
    assert header[-2:] == ["theta1", "theta2"]
    th1, th2 = data[:, -2], data[:, -1]
    assert abs(th1[0]) < 1e-9 and th2[0] == pytest.approx(np.pi, abs=1e-9)


SWEEP_SCENARIO = """
[model]
kind = "single_rod"

[[route]]
name = "via_sa-"
waypoints = ["si+", "sa-", "si-"]

[[route]]
name = "via_so"
waypoints = ["si+", "so-", "si-"]

[solver]
images = 60

[sweep]
parameter = "shear_12"
start = 0.0
stop = 0.5
count = 3

[output]
directory = "{out}"
"""


def test_sweep_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, SWEEP_SCENARIO, out=out)
    assert main(["sweep", cfg]) == 0
    rows = read_actions(out)
    assert len(rows) == 6  # 3 grid values x 2 routes
    summary = json.loads((out / "summary.json").read_text())
    assert summary["command"] == "sweep"
    assert len(summary["global"]) == 3
    assert summary["bifurcation_crossing"] is None
    assert summary["sweep"]["mode"] == "sequential-warm"
    # shear lowers the global action along the grid
    actions = [g["action"] for g in summary["global"]]
    assert actions[0] > actions[1] > actions[2]
    # every actions.csv row can be recomputed from its path file
    for k, value in enumerate(summary["sweep"]["values"]):
        model = SingleRod(shear_12=value)
        man = model.manifold()
        for row in rows:
            if float(row["sweep_value"]) != value:
                continue
            _, data = read_path_csv(out / "paths" / f"{row['route']}__{k}.csv")
            assert abs(geometric_action(Curve(data[:, 1:4]), model, man) - float(row["action"])) <= 1e-9


SIGMA_SWEEP = """
[model]
kind = "two_rod"

[[route]]
name = "A"
waypoints = ["si2", "sa5", "si3"]

[[route]]
name = "B"
waypoints = ["si2", "sa2", "sa5", "si3"]

[solver]
images = 60

[sweep]
parameter = "sigma2_squared"
values = [1.0, 1.44]

[output]
directory = "{out}"
"""


def test_sigma_squared_sweep_parameter(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, SIGMA_SWEEP, out=out)
    assert main(["sweep", cfg]) == 0
    summary = json.loads((out / "summary.json").read_text())
    # at sigma2^2 = 1.44 the asymmetric staircase route wins
    assert summary["global"][0]["route"] == "A"
    assert summary["global"][1]["route"] == "B"


def test_fixed_points_command(tmp_path, capsys):
    cfg = write_config(tmp_path, ROD_SCENARIO, out=tmp_path / "o")
    assert main(["fixed-points", cfg]) == 0
    printed = capsys.readouterr().out
    assert "total: 6" in printed
    lines = (tmp_path / "o" / "fixed_points.csv").read_text().strip().splitlines()
    assert len(lines) == 7
    assert lines[0].split(",")[:3] == ["x1", "x2", "x3"]
    kinds = [ln.split(",")[4] for ln in lines[1:]]
    assert sorted(kinds) == ["saddle", "saddle", "sink", "sink", "source", "source"]


def test_fixed_points_marginal_rows_flagged(tmp_path):
    scenario = """
[model]
kind = "single_rod"
mu = [1.0, 1.0000001, 3.0]

[[route]]
name = "r"
waypoints = ["si+", "sa-", "si-"]

[output]
directory = "{out}"
"""
    cfg = write_config(tmp_path, scenario, out=tmp_path / "o")
    assert main(["fixed-points", cfg]) == 0
    text = (tmp_path / "o" / "fixed_points.csv").read_text()
    assert "marginal" in text


@pytest.mark.parametrize(
    "mutation, message",
    [
        ("missing_routes", "route"),
        ("bad_kind", "model.kind"),
        ("bad_param", "unknown model parameter"),
        ("bad_manifold", "manifold.kind"),
        ("bad_route_name", "route name"),
    ],
)
def test_invalid_configs_exit_2(tmp_path, capsys, mutation, message):
    base = {
        "missing_routes": """
[model]
kind = "single_rod"
""",
        "bad_kind": """
[model]
kind = "triple_rod"

[[route]]
name = "r"
waypoints = ["si+", "si-"]
""",
        "bad_param": """
[model]
kind = "single_rod"
viscosity = 2.0

[[route]]
name = "r"
waypoints = ["si+", "sa-", "si-"]
""",
        "bad_manifold": """
[model]
kind = "single_rod"

[manifold]
kind = "sphere_product"

[[route]]
name = "r"
waypoints = ["si+", "sa-", "si-"]
""",
        "bad_route_name": """
[model]
kind = "single_rod"

[[route]]
name = "has,comma"
waypoints = ["si+", "sa-", "si-"]
""",
    }[mutation]
    cfg = write_config(tmp_path, base + '\n[output]\ndirectory = "{out}"\n', out=tmp_path / "o")
    assert main(["solve", cfg]) == 2
    assert message in capsys.readouterr().err


def test_sweep_decreasing_grid_exits_2(tmp_path, capsys):
    text = SWEEP_SCENARIO.replace("start = 0.0", "start = 0.5").replace("stop = 0.5", "stop = 0.0")
    cfg = write_config(tmp_path, text, out=tmp_path / "o")
    assert main(["sweep", cfg]) == 2
    assert "strictly increasing" in capsys.readouterr().err


def test_sweep_without_table_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, ROD_SCENARIO, out=tmp_path / "o")
    assert main(["sweep", cfg]) == 2
    assert "sweep" in capsys.readouterr().err


def test_missing_config_file_exits_2(capsys):
    assert main(["solve", "/nonexistent/conf.toml"]) == 2
    assert "no such file" in capsys.readouterr().err


def test_toml_syntax_error_reported_with_position(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[model\nkind=", encoding="utf-8")
    assert main(["solve", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "line" in err
