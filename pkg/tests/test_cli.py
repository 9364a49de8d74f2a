"""Scenario loading, report emission, CLI exit codes, figures."""

import csv
import json

import pytest
from click.testing import CliRunner

from qsheaf import runner
from qsheaf.cli import main
from qsheaf.errors import PayloadError, ScenarioError
from qsheaf.scenario import load_scenario


def test_load_triangle_fixture(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    assert scenario.name == "triangle"
    assert len(scenario.sheaf.graph.vertex_ids) == 3
    assert len(scenario.sheaf.graph.edge_ids) == 3
    assert scenario.two_cells is not None
    assert scenario.entanglement[0].schmidt_rank == 2


def test_load_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.json")


def test_invalid_channel_names_edge(tmp_path):
    doc = {
        "schema_version": 1,
        "name": "broken",
        "graph": {
            "vertices": [{"id": "u", "dim": 2}, {"id": "v", "dim": 2}],
            "edges": [
                {
                    "id": "uv",
                    "source": "u",
                    "target": "v",
                    "channel": {
                        "kind": "kraus",
                        "kraus": [[[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]],
                    },
                }
            ],
        },
    }
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert "uv" in str(excinfo.value)


def test_unknown_field_rejected(tmp_path, fixtures_dir):
    doc = json.loads((fixtures_dir / "edge.json").read_text())
    doc["surprise"] = 1
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert "surprise" in str(excinfo.value)


def test_complex_entries_round_trip_bit_exact(tmp_path):
    values = [0.1, -1.0 / 3.0, 2**-45, 7.123456789123456e-5]
    doc = {
        "schema_version": 1,
        "name": "roundtrip",
        "graph": {
            "vertices": [{"id": "u", "dim": 2}, {"id": "v", "dim": 2}],
            "edges": [
                {
                    "id": "uv",
                    "source": "u",
                    "target": "v",
                    "channel": {
                        "kind": "unitary",
                        "matrix": [
                            [[0.0, 1.0], [0.0, 0.0]],
                            [[0.0, 0.0], [0.0, -1.0]],
                        ],
                    },
                }
            ],
        },
        "states": {
            "u": [
                [[0.5, 0.0], [values[0], values[1]]],
                [[values[0], -values[1]], [0.5, 0.0]],
            ]
        },
    }
    path = tmp_path / "roundtrip.json"
    path.write_text(json.dumps(doc))
    scenario = load_scenario(path)
    matrix = scenario.sheaf.states["u"].matrix
    assert matrix[0, 1] == complex(values[0], values[1])  # exact float equality
    assert matrix[1, 0] == complex(values[0], -values[1])


def test_run_cohomology_on_triangle(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "cohomology")
    result = report["commands"]["cohomology"]["result"]
    assert result["graph_mode"]["dim_H0"] == 1
    assert result["graph_mode"]["dim_H1"] == 1
    assert result["cell_mode"]["dim_H1"] == 0
    assert result["graph_mode"]["spectral_gap"] == pytest.approx(3.0, abs=1e-9)


def test_run_ea_on_triangle_clamps_to_zero(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "ea")
    result = report["commands"]["ea"]["result"]
    assert result["dim_H1_unassisted"] == 1
    assert result["ebit_budget"] == pytest.approx(1.0, abs=1e-12)
    assert result["dim_H1_ea"] == 0.0


def test_run_cf_on_chsh(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "chsh.json")
    report = runner.run_command(scenario, "cf")
    result = report["commands"]["cf"]["result"]
    assert result["pr_box"]["cf"] == pytest.approx(1.0, abs=1e-7)
    assert result["uniform"]["cf"] <= 1e-7
    assert "nearest_nc" in result["pr_box"]


def test_missing_payload_raises(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "edge.json")
    with pytest.raises(PayloadError):
        runner.run_command(scenario, "cf")


def test_json_report_round_trip(fixtures_dir, tmp_path):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "cohomology")
    out = tmp_path / "report.json"
    runner.emit_report(report, "json", out, figures=False)
    reloaded = json.loads(out.read_text())
    assert reloaded == json.loads(runner.report_json(report))


def test_csv_report_rows(fixtures_dir, tmp_path):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "cohomology")
    out = tmp_path / "report.csv"
    runner.emit_report(report, "csv", out, figures=False)
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    metrics = {row["metric"] for row in rows}
    for expected in (
        "graph_mode.dim_H0",
        "graph_mode.dim_H1",
        "graph_mode.rank_delta0",
        "graph_mode.spectral_gap",
    ):
        assert expected in metrics


def test_csv_diffusion_series_file(fixtures_dir, tmp_path):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "spectrum")
    out = tmp_path / "run.csv"
    written = runner.emit_report(report, "csv", out, figures=False)
    series = tmp_path / "run.diffusion.csv"
    assert series in written
    with series.open() as fh:
        rows = list(csv.reader(fh))
    trajectory = report["commands"]["spectrum"]["result"]["diffusion"]["trajectory"]
    assert len(rows) == len(trajectory) + 1  # header plus one row per step


def test_figures_rendered_next_to_output(fixtures_dir, tmp_path):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    report = runner.run_command(scenario, "all")
    out = tmp_path / "full.csv"
    written = runner.emit_report(report, "csv", out, figures=True)
    pngs = [p for p in written if p.suffix == ".png"]
    assert pngs, "figure files should be rendered alongside the csv"
    for png in pngs:
        assert png.exists() and png.stat().st_size > 0


def test_determinism_of_reports(fixtures_dir):
    for name in ("triangle", "edge", "four_cycle", "theta", "chsh", "states"):
        first = runner.run_command(load_scenario(fixtures_dir / f"{name}.json"), "all")
        second = runner.run_command(load_scenario(fixtures_dir / f"{name}.json"), "all")
        assert runner.report_json(runner.strip_timings(first)) == runner.report_json(
            runner.strip_timings(second)
        )


def test_cli_exit_codes(fixtures_dir, tmp_path):
    cli = CliRunner()
    ok = cli.invoke(main, ["cohomology", str(fixtures_dir / "triangle.json")])
    assert ok.exit_code == 0
    payload = cli.invoke(main, ["cf", str(fixtures_dir / "edge.json")])
    assert payload.exit_code == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    invalid = cli.invoke(main, ["cohomology", str(bad)])
    assert invalid.exit_code == 2
    diverging = cli.invoke(
        main,
        ["spectrum", str(fixtures_dir / "triangle.json"), "--step", "1.0"],
    )
    assert diverging.exit_code == 4


def test_cli_multiple_scenarios_write_directory(fixtures_dir, tmp_path):
    cli = CliRunner()
    out_dir = tmp_path / "reports"
    result = cli.invoke(
        main,
        [
            "cohomology",
            str(fixtures_dir / "triangle.json"),
            str(fixtures_dir / "edge.json"),
            "--out",
            str(out_dir),
            "--no-figures",
        ],
    )
    assert result.exit_code == 0
    assert (out_dir / "triangle.json").exists()
    assert (out_dir / "edge.json").exists()


def test_cli_stdout_json_when_no_out(fixtures_dir):
    cli = CliRunner()
    result = cli.invoke(main, ["cohomology", str(fixtures_dir / "four_cycle.json")])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["scenario"] == "four_cycle"
    assert payload["commands"]["cohomology"]["result"]["graph_mode"]["dim_H1"] == 1


def test_options_echoed_in_report(fixtures_dir):
    scenario = load_scenario(fixtures_dir / "triangle.json")
    scenario.options.seed = 99
    report = runner.run_command(scenario, "cohomology")
    assert report["options"]["seed"] == 99
    assert report["options"]["tol_rank"] == pytest.approx(1e-9)
    assert report["scenario_hash"].startswith("sha256:")
