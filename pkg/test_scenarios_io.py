#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
シナリオ設定・CSV 出力・コマンドラインのテスト
"""

import io
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pytest

import conftest
import scenarios_io
from errors import ConfigError, NonPhysicalState
from gasdynamics_core import Geometry
from reconstruction import LimiterKind
from runtime_settings import RuntimeSettings, load_runtime_settings
from scenarios_io import (
    DiaphragmSpec,
    build_parser,
    apply_overrides,
    cli_main,
    default_snapshot_times,
    diaphragm_config,
    load_config_file,
    parse_config,
    read_snapshot_csv,
    scenario_config,
    serialize_config,
    snapshot_filename,
    summary_lines,
    write_snapshot_csv,
)
from solver import Snapshot, SplittingMode, run_simulation

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"

SMALL_CONFIG = """\
# テスト用の小さな隔膜問題
ratio = 4
cells = 40
t_end = 0.1
snapshots = 0.05, 0.1
"""


def small_snapshot():
    return Snapshot(
        time=0.25,
        r=np.array([0.25, 0.75]),
        rho=np.array([1.0, 0.125]),
        u=np.array([0.0, 0.1]),
        p=np.array([1.0, 0.1]),
        temperature=np.array([1.4, 1.12]),
        mach=np.array([0.0, 0.1 / np.sqrt(1.12)]),
    )


def settings_for(tmp_path):
    return RuntimeSettings(log_level="WARNING", output_directory=str(tmp_path / "default_out"))


# --- 設定ファイル ---


def test_minimal_config_uses_defaults():
    config = parse_config("ratio = 4\ncells = 400\nr_max = 2.0\n")
    assert config.grid.dr == pytest.approx(0.005)
    assert config.geometry is Geometry.CYLINDRICAL
    assert config.limiter is LimiterKind.SUPERBEE
    assert config.splitting is SplittingMode.STRANG
    assert config.cfl == 0.5
    assert config.t_end == 0.7
    assert config.snapshot_times == default_snapshot_times(0.7)
    assert config.initial_condition == DiaphragmSpec(ratio=4.0, r0=1.0)


def test_config_accepts_comments_and_case():
    config = parse_config("# コメント\n\nGeometry = Spherical  # 球\nratio = 10\nlimiter = MinMod\n")
    assert config.geometry is Geometry.SPHERICAL
    assert config.limiter is LimiterKind.MINMOD


def test_cfl_out_of_range_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config("ratio = 4\ncfl = 1.5\n")
    assert info.value.line == 2
    assert str(info.value).startswith("2行目")


def test_misspelt_limiter_suggests_name():
    with pytest.raises(ConfigError) as info:
        parse_config("ratio = 4\nlimiter = superb\n")
    assert "superbee" in str(info.value)
    assert info.value.line == 2


def test_unknown_key_suggests_name():
    with pytest.raises(ConfigError) as info:
        parse_config("ratio = 4\ncell = 200\n")
    assert "cells" in str(info.value)


@pytest.mark.parametrize("text", [
    "cells = 100\n",
    "ratio = 4\nratio = 5\n",
    "ratio = 0.5\n",
    "ratio = 4\nr0 = 3.0\n",
    "ratio = 4\ncells = many\n",
    "ratio = 4\nt_end = 0.3\nsnapshots = 0.2, 0.1\n",
    "ratio = 4\nt_end = 0.3\nsnapshots = 0.5\n",
    "ratio = 4\nsource_subcycling = maybe\n",
    "ratio 4\n",
])
def test_invalid_config_is_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_serialized_config_parses_back():
    config = parse_config("geometry = spherical\nratio = 10\ncells = 300\ncfl = 0.45\n"
                          "splitting = godunov\nsource_subcycling = true\n")
    text = serialize_config(config)
    again = parse_config(text)
    assert again == config
    assert serialize_config(again) == text


def test_shock_tube_cannot_be_serialized():
    with pytest.raises(ConfigError):
        serialize_config(scenario_config("sod"))


def test_bundled_scenario_files(tmp_path):
    config = load_config_file(SCENARIO_DIR / "ratio4.cfg")
    assert config.initial_condition.ratio == 4.0
    assert config.grid.dr == pytest.approx(0.005)
    assert config.snapshot_times == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    assert load_config_file(SCENARIO_DIR / "spherical_ratio10.cfg").source_subcycling


def test_missing_config_file_names_path(tmp_path):
    missing = tmp_path / "nothing.cfg"
    with pytest.raises(ConfigError) as info:
        load_config_file(missing)
    assert str(missing) in str(info.value)


def test_config_file_errors_carry_path_and_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("ratio = 4\n\nlimiter = superb\n", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_config_file(path)
    assert f"{path}:3" in str(info.value)


def test_unknown_scenario_suggests_name():
    with pytest.raises(ConfigError) as info:
        scenario_config("ratio5")
    assert "ratio" in str(info.value)


def test_overrides_take_precedence():
    args = build_parser().parse_args(["--scenario", "ratio10", "--cells", "200", "--t-end", "0.35",
                                      "--limiter", "minmod"])
    config = apply_overrides(scenario_config("ratio10"), args)
    assert config.n_cells == 200
    assert config.t_end == 0.35
    assert config.snapshot_times == (0.1, 0.2, 0.3)
    assert config.limiter is LimiterKind.MINMOD


def test_ratio_override_needs_diaphragm():
    args = build_parser().parse_args(["--scenario", "sod", "--ratio", "10"])
    with pytest.raises(ConfigError):
        apply_overrides(scenario_config("sod"), args)


# --- CSV / summary ---


def test_snapshot_filenames():
    assert snapshot_filename(0.1) == "snapshot_t0.1000.csv"
    assert snapshot_filename(0.2, "exact") == "exact_t0.2000.csv"


def test_two_cell_csv_layout():
    buffer = io.StringIO()
    write_snapshot_csv(small_snapshot(), buffer)
    lines = buffer.getvalue().split("\n")
    assert lines[-1] == ""
    assert len(lines[:-1]) == 4
    assert lines[0] == "# t=0.25"
    assert lines[1] == "r,rho,u,p,T,mach"
    assert lines[1] == ",".join(Snapshot.COLUMNS)
    assert lines[2] == "0.25,1.0,0.0,1.0,1.4,0.0"


def test_csv_values_read_back_exactly(tmp_path):
    rng = np.random.default_rng(40)
    values = rng.uniform(0.0, 3.0, (6, 50))
    values[0] = np.sort(values[0])
    snapshot = Snapshot(1.0 / 3.0, *values)
    path = tmp_path / snapshot_filename(snapshot.time)
    write_snapshot_csv(snapshot, path)
    loaded = read_snapshot_csv(path)
    assert loaded.time == snapshot.time
    for name in ("r", "rho", "u", "p", "temperature", "mach"):
        npt.assert_array_equal(getattr(loaded, name), getattr(snapshot, name))
    assert b"\r\n" not in path.read_bytes()


def test_summary_without_convergence():
    result = run_simulation(diaphragm_config(4.0, n_cells=40, t_end=0.05, snapshot_times=()))
    lines = summary_lines(result, 1.23456)
    assert lines[0] == "t_c = none"
    assert lines[1] == "detected = false"
    assert lines[2] == f"steps = {result.final_state.step_count}"
    assert lines[-1] == "wall_seconds = 1.235"
    assert [line.split(" = ")[0] for line in lines] == [
        "t_c", "detected", "steps", "mass_drift", "momentum_drift", "energy_drift", "wall_seconds"]


# --- コマンドライン ---


def test_cli_writes_snapshots_and_summary(tmp_path):
    config_path = tmp_path / "small.cfg"
    config_path.write_text(SMALL_CONFIG, encoding="utf-8")
    out = tmp_path / "out"
    code = cli_main(["--config", str(config_path), "--output-dir", str(out)], settings_for(tmp_path))
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["snapshot_t0.0500.csv", "snapshot_t0.1000.csv", "summary.txt"]
    snapshot = read_snapshot_csv(out / "snapshot_t0.1000.csv")
    assert snapshot.time == 0.1
    assert len(snapshot) == 40


def test_cli_uses_settings_output_directory(tmp_path):
    config_path = tmp_path / "small.cfg"
    config_path.write_text(SMALL_CONFIG, encoding="utf-8")
    assert cli_main(["--config", str(config_path)], settings_for(tmp_path)) == 0
    assert (tmp_path / "default_out" / "summary.txt").exists()


def test_cli_writes_exact_solution_for_shock_tube(tmp_path):
    out = tmp_path / "sod"
    assert cli_main(["--scenario", "sod", "--cells", "100", "--output-dir", str(out)], settings_for(tmp_path)) == 0
    assert (out / "snapshot_t0.2000.csv").exists()
    exact = read_snapshot_csv(out / "exact_t0.2000.csv")
    assert exact.rho[0] == 1.0 and exact.rho[-1] == 0.125


def test_cli_exit_codes_for_bad_input(tmp_path):
    settings = settings_for(tmp_path)
    assert cli_main(["--config", str(tmp_path / "missing.cfg")], settings) == 1
    assert cli_main([], settings) == 1
    assert cli_main(["--scenario", "ratio4", "--cfl", "2.0"], settings) == 1
    assert cli_main(["--scenario", "nothing"], settings) == 1


def test_cli_reports_non_physical_state(tmp_path, monkeypatch):
    def failing(config, on_snapshot=None, progress_every=200):
        initial = config.initial_condition.build(config.grid, config.gas)
        raise NonPhysicalState("テスト用の失敗", cells=[3]).with_context(0.0, 1, initial)

    monkeypatch.setattr(scenarios_io, "run_simulation", failing)
    out = tmp_path / "crash"
    code = cli_main(["--scenario", "ratio4", "--cells", "40", "--output-dir", str(out)], settings_for(tmp_path))
    assert code == 2
    crash = read_snapshot_csv(out / "crash.csv")
    assert crash.time == 0.0
    assert len(crash) == 40
    assert not (out / "summary.txt").exists()


def _run_into(tmp_path, name, argv):
    out = tmp_path / name
    assert cli_main(argv + ["--output-dir", str(out)], settings_for(tmp_path)) == 0
    return out


def _same_outputs(first, second):
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        a, b = (first / name).read_bytes(), (second / name).read_bytes()
        if name == "summary.txt":
            a = b"\n".join(line for line in a.split(b"\n") if not line.startswith(b"wall_seconds"))
            b = b"\n".join(line for line in b.split(b"\n") if not line.startswith(b"wall_seconds"))
        assert a == b, name


def test_repeated_runs_are_byte_identical(tmp_path):
    config_path = tmp_path / "small.cfg"
    config_path.write_text(SMALL_CONFIG, encoding="utf-8")
    argv = ["--config", str(config_path)]
    _same_outputs(_run_into(tmp_path, "first", argv), _run_into(tmp_path, "second", argv))


@pytest.mark.slow
def test_full_ratio10_runs_are_byte_identical(tmp_path):
    argv = ["--scenario", "ratio10"]
    _same_outputs(_run_into(tmp_path, "first", argv), _run_into(tmp_path, "second", argv))


@pytest.mark.slow
def test_ratio4_snapshot_regression(golden):
    captured = {}
    config = scenario_config("ratio4")
    run_simulation(config, on_snapshot=lambda snapshot: captured.setdefault(snapshot.time, snapshot))
    buffer = io.StringIO()
    write_snapshot_csv(captured[0.3], buffer)
    golden("ratio4_t0.3000.csv", buffer.getvalue())


def test_missing_golden_file_fails(tmp_path, monkeypatch):
    monkeypatch.setattr(conftest, "GOLDEN_DIR", tmp_path)
    monkeypatch.setattr(conftest, "UPDATE_GOLDEN", False)
    with pytest.raises(pytest.fail.Exception):
        conftest.check_golden("absent.csv", "r,rho\n")
    assert not (tmp_path / "absent.csv").exists()


def test_golden_file_is_compared_exactly(tmp_path, monkeypatch):
    monkeypatch.setattr(conftest, "GOLDEN_DIR", tmp_path)
    monkeypatch.setattr(conftest, "UPDATE_GOLDEN", False)
    (tmp_path / "present.csv").write_bytes(b"r,rho\n1.0,2.0\n")
    conftest.check_golden("present.csv", "r,rho\n1.0,2.0\n")
    with pytest.raises(AssertionError):
        conftest.check_golden("present.csv", "r,rho\n1.0,2.5\n")


# --- 実行時設定 ---


def test_runtime_settings_from_yaml_and_environment(tmp_path, monkeypatch):
    monkeypatch.delenv("SHOCK_LOG_LEVEL", raising=False)
    monkeypatch.delenv("SHOCK_OUTPUT_DIR", raising=False)
    path = tmp_path / "config.yml"
    path.write_text("output:\n  directory: ./results\n  progress_every: 50\nlogging:\n  level: debug\n",
                    encoding="utf-8")
    settings = load_runtime_settings(str(path))
    assert settings.output_directory == "./results"
    assert settings.progress_every == 50
    assert settings.log_level == "DEBUG"

    monkeypatch.setenv("SHOCK_OUTPUT_DIR", str(tmp_path / "env_out"))
    assert load_runtime_settings(str(path)).output_directory == str(tmp_path / "env_out")


def test_runtime_settings_default_when_file_missing(tmp_path, monkeypatch):
    monkeypatch.delenv("SHOCK_LOG_LEVEL", raising=False)
    monkeypatch.delenv("SHOCK_OUTPUT_DIR", raising=False)
    settings = load_runtime_settings(str(tmp_path / "missing.yml"))
    assert settings == RuntimeSettings()
