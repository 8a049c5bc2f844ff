import csv
import io
import json

import pytest

from radonosc.cli import EXIT_BUDGET, EXIT_OK, EXIT_USAGE, main
from radonosc.experiments import (CSV_COLUMNS, ConfigError, ExperimentConfig, Report, emit_tables, parse_config,
                                  run_experiment)

FAST = {
    "verify-kernel": ["--set", "kernel.samples=2000", "--set", "kernel.annuli=10"],
    "probe-oscillation": ["--set", "input.half_widths=16,32", "--set", "grid.count=16",
                          "--set", "seminorm.restarts=10", "--set", "seminorm.N=3", "--set", "input.trials=1",
                          "--set", "probe.spread_tolerance=10", "--set", "probe.slope_tolerance=10"],
    "gauss-table": ["--set", "gauss.q_max=31", "--set", "gauss.delta_tolerance=0.2"],
    "multiplier-scan": ["--set", "multiplier.t_values=10", "--set", "multiplier.pairs=5"],
    "martingale-probe": ["--set", "martingale.nodes=16", "--set", "martingale.trials=1",
                         "--set", "martingale.drift_tolerance=10"],
    "split-check": ["--set", "split.families=20"],
}


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(FAST))
def test_each_experiment_runs(capsys, name):
    code, out, _ = run(capsys, [name, "--seed", "1"] + FAST[name])
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) > 1
    assert code == EXIT_OK, out


def test_deterministic_csv(capsys):
    argv = ["probe-oscillation", "--seed", "7"] + FAST["probe-oscillation"]
    _, a, _ = run(capsys, argv)
    _, b, _ = run(capsys, argv + ["--threads", "3"])
    assert a == b


def test_zero_preset(capsys):
    code, out, _ = run(capsys, ["probe-oscillation", "--preset", "zero"] + FAST["probe-oscillation"])
    assert code == EXIT_OK
    ratios = [float(r["value"]) for r in csv.DictReader(io.StringIO(out)) if r["statistic"] == "ratio"]
    assert ratios == [0.0, 0.0]


def test_cubic_preset(capsys):
    code, out, _ = run(capsys, ["multiplier-scan", "--preset", "cubic-hilbert"] + FAST["multiplier-scan"])
    assert code == EXIT_OK
    stats = {r["statistic"] for r in csv.DictReader(io.StringIO(out))}
    assert any("integer" in s for s in stats) and any("psi" in s for s in stats)


def test_json_output(tmp_path, capsys):
    code, _, _ = run(capsys, ["gauss-table", "--format", "json", "--out", str(tmp_path)] + FAST["gauss-table"])
    assert code == EXIT_OK
    text = (tmp_path / "gauss-table.json").read_text()
    rep = Report.from_json(text)
    assert rep.schema_version == "1" and rep.rows
    assert json.loads(rep.to_json())["rows"] == json.loads(text)["rows"]


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, ["gauss-table", "--set", "nonsense.key=1"])[0] == EXIT_USAGE
    code, _, err = run(capsys, ["gauss-table", "--set", "gauss.q_max=abc"])
    assert code == EXIT_USAGE and "gauss.q_max" in err
    assert run(capsys, ["gauss-table", "--config", str(tmp_path / "missing.cfg")])[0] == EXIT_USAGE
    code, _, err = run(capsys, ["probe-oscillation", "--set", "kernel.name=cauchy"])
    assert code == EXIT_USAGE and "kernel.name" in err
    with pytest.raises(SystemExit) as exc:
        main(["no-such-experiment"])
    assert exc.value.code == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\ngauss.q_max = 31\ngauss.delta_tolerance = 0.2\n")
    code, out, _ = run(capsys, ["gauss-table", "--config", str(cfg)])
    assert code == EXIT_OK and "gauss-table" in out


def test_budget_exit(capsys):
    code, out, err = run(capsys, ["probe-oscillation", "--budget-cells", "10"] + FAST["probe-oscillation"])
    assert code == EXIT_BUDGET and "incomplete" in err
    assert out.startswith(",".join(CSV_COLUMNS))


def test_empty_report_header_only():
    rep = Report("gauss-table", {}, 0)
    assert emit_tables(rep, "csv") == ",".join(CSV_COLUMNS) + "\n"


def test_parse_config():
    assert parse_config("seed = 3\n\n# c\ninput.zero = yes") == {"seed": 3, "input.zero": True}
    with pytest.raises(ConfigError):
        parse_config("seed 3")
    with pytest.raises(ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(ConfigError):
        ExperimentConfig("gauss-table", {"budget.cells": 0})


def test_run_experiment_seed_override():
    cfg = ExperimentConfig("split-check", {"split.families": 5})
    assert run_experiment(cfg, seed=4).seed == 4
