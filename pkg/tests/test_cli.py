"""CLI behavior: synth generation, headless analysis, SVG summaries."""

import json

from click.testing import CliRunner

from irengine.cli import main


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def test_synth_writes_csv(tmp_path):
    spec = write_json(tmp_path / "spec.json",
                      {"kind": "binary_population", "p": 0.5, "size": 40, "seed": 1})
    out = tmp_path / "data.csv"
    result = CliRunner().invoke(main, ["synth", "--spec", spec, "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "positive"
    assert len(lines) == 41


def test_analyze_json_output(tmp_path):
    spec = write_json(tmp_path / "spec.json",
                      {"kind": "binary_population", "p": 0.4, "size": 100, "seed": 2})
    csv_path = tmp_path / "data.csv"
    CliRunner().invoke(main, ["synth", "--spec", spec, "--out", str(csv_path)])
    config = write_json(tmp_path / "req.json", {
        "metric": {"kind": "proportion", "column": "positive", "value": True},
        "partition": {"n": 5, "min_fold_size": 1, "seed": 0},
        "chart_kind": "bar",
    })
    out = tmp_path / "result.json"
    result = CliRunner().invoke(main, ["analyze", "--config", config,
                                       "--csv", str(csv_path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    body = json.loads(out.read_text())
    assert body["chart"]["chart_kind"] == "bar"
    assert len(body["measures"][0]["folds"]) == 5


def test_analyze_stdout_is_canonical_json(tmp_path):
    spec = write_json(tmp_path / "spec.json",
                      {"kind": "binary_population", "size": 50, "seed": 3})
    csv_path = tmp_path / "d.csv"
    CliRunner().invoke(main, ["synth", "--spec", spec, "--out", str(csv_path)])
    config = write_json(tmp_path / "req.json", {
        "metric": {"kind": "count"},
        "partition": {"n": 2, "min_fold_size": 1, "seed": 0},
        "chart_kind": "bar",
    })
    r1 = CliRunner().invoke(main, ["analyze", "--config", config, "--csv", str(csv_path)])
    r2 = CliRunner().invoke(main, ["analyze", "--config", config, "--csv", str(csv_path)])
    assert r1.exit_code == 0
    assert r1.output == r2.output
    assert json.loads(r1.output)["measures"][0]["aggregates"]["count"] == 50


def test_analyze_svg_output(tmp_path):
    spec = write_json(tmp_path / "spec.json",
                      {"kind": "noisy_linear", "slope": 2.0, "intercept": 1.0,
                       "noise_sd": 0.5, "size": 200, "seed": 4})
    csv_path = tmp_path / "d.csv"
    CliRunner().invoke(main, ["synth", "--spec", spec, "--out", str(csv_path)])
    config = write_json(tmp_path / "req.json", {
        "metric": {"kind": "linear_regression", "x": "x", "y": "y"},
        "partition": {"n": 5, "min_fold_size": 1, "seed": 0},
        "chart_kind": "scatter_regression",
    })
    out = tmp_path / "chart.svg"
    result = CliRunner().invoke(main, ["analyze", "--config", config,
                                       "--csv", str(csv_path), "--out", str(out)])
    assert result.exit_code == 0, result.output
    svg = out.read_text()
    assert svg.startswith("<svg")
    assert svg.count("<line") >= 6  # five fold lines plus the aggregate


def test_validation_error_is_clean(tmp_path):
    spec = write_json(tmp_path / "spec.json",
                      {"kind": "binary_population", "size": 10, "seed": 0})
    csv_path = tmp_path / "d.csv"
    CliRunner().invoke(main, ["synth", "--spec", spec, "--out", str(csv_path)])
    config = write_json(tmp_path / "req.json", {
        "metric": {"kind": "mean", "column": "absent"},
        "partition": {"n": 2, "min_fold_size": 1, "seed": 0},
        "chart_kind": "bar",
    })
    result = CliRunner().invoke(main, ["analyze", "--config", config, "--csv", str(csv_path)])
    assert result.exit_code != 0
    assert "absent" in result.output
