import hybridsr.cli
from hybridsr.simulator import CAPACITY_COLUMNS, GAMMA_COLUMNS


def test_capacity(runner, scenario_file, tmp_path, read_csv):
    result = runner.invoke(
        hybridsr.cli.main,
        ["sweep", "--scenario", scenario_file, "--capacity", "1,0.5", "--out", tmp_path],
        catch_exceptions=False,
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(tmp_path / "sweep_capacity.csv")
    assert list(rows[0]) == list(CAPACITY_COLUMNS)
    assert [(r["ratio"], r["policy"]) for r in rows] == [
        (ratio, policy)
        for ratio in ("1", "0.5")
        for policy in ("sa", "random", "nosr", "onetype")
    ]


def test_gamma(runner, scenario_file, tmp_path, read_csv):
    result = runner.invoke(
        hybridsr.cli.main,
        ["sweep", "--scenario", scenario_file, "--gamma", "0,0.25,1", "--out", tmp_path],
        catch_exceptions=False,
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(tmp_path / "sweep_gamma.csv")
    assert list(rows[0]) == list(GAMMA_COLUMNS)
    assert [r["gamma"] for r in rows] == ["0", "0.25", "1"]
    assert float(rows[0]["mean_t_sr_edge"]) == 0
    qualities = [float(r["mean_quality"]) for r in rows]
    assert qualities == sorted(qualities)


def test_grid_required(runner, tmp_path):
    result = runner.invoke(hybridsr.cli.main, ["sweep", "--out", tmp_path])
    assert result.exit_code == 2
    assert "Usage:" in result.output


def test_grids_exclusive(runner, tmp_path):
    result = runner.invoke(
        hybridsr.cli.main, ["sweep", "--capacity", "1", "--gamma", "0", "--out", tmp_path]
    )
    assert result.exit_code == 2
    assert "Usage:" in result.output


def test_invalid_ratio(runner, scenario_file, tmp_path):
    result = runner.invoke(
        hybridsr.cli.main,
        ["sweep", "--scenario", scenario_file, "--capacity", "1.5", "--out", tmp_path],
    )
    assert result.exit_code == 2, result.output
    assert "ERROR 2: Capacity scale must be in (0, 1]" in result.output
