"""Scenario parsing and command-line entry points."""

import pathlib

import pytest

from mmray import cli
from mmray.cli import (
    DEFAULT_FREQUENCIES, ScenarioError, build_environment, build_systems,
    emit_plot_script, main, parse_scenario, run_pdp_command,
    run_sweep_command, run_table_command, serialize_scenario,
)


# ---------------------------------------------------------------------------
# Scenario parsing
# ---------------------------------------------------------------------------

def test_empty_scenario_uses_defaults():
    cfg = parse_scenario("")
    assert cfg.environment.name == "straight_tunnel"
    assert [s.label for s in cfg.systems] == ["system1", "system2", "system3"]
    assert cfg.frequencies == DEFAULT_FREQUENCIES
    assert cfg.sweep.n_samples == 1024
    assert cfg.physics.polarization == "te"
    assert cfg.physics.max_order == 2


def test_quoted_scientific_notation_frequencies():
    cfg = parse_scenario("frequencies: ['60e9', '70e9']\n")
    assert cfg.frequencies == (60e9, 70e9)


def test_unknown_top_level_key_rejected():
    with pytest.raises(ScenarioError, match="unknown"):
        parse_scenario("environmnt: {name: straight_tunnel}\n")


def test_unknown_override_names_the_key():
    text = """
environment:
  name: straight_tunnel
  overrides: {epsilon_typo: 5.0}
"""
    with pytest.raises(ScenarioError, match="epsilon_typo"):
        parse_scenario(text)


def test_bad_permittivity_rejected():
    text = """
environment:
  name: straight_tunnel
  overrides: {eps_r: 0.2}
"""
    with pytest.raises(ScenarioError):
        parse_scenario(text)


def test_system_shorthand_and_mapping():
    text = """
systems:
  - system2
  - {kind: horn, tx_power_dbm: 12.0, peak_gain_dbi: 15.0, label: narrow}
"""
    cfg = parse_scenario(text)
    assert cfg.systems[0].kind == "omni"
    assert cfg.systems[1].label == "narrow"
    systems = build_systems(cfg)
    assert systems[1].peak_gain_dbi == 15.0


def test_unknown_system_preset_rejected():
    with pytest.raises(ScenarioError):
        parse_scenario("systems: [system9]\n")


def test_roundtrip_through_serializer():
    text = """
environment:
  name: bent_tunnel
  overrides: {bend_angle_deg: 30.0}
systems: [system1, system3]
frequencies: [60e9]
sweep: {n_samples: 64, rx_start: 2.0}
physics: {polarization: tm, max_order: 1}
output: {csv_dir: results}
"""
    once = parse_scenario(text)
    again = parse_scenario(serialize_scenario(once))
    assert once == again


def test_environment_with_obstacles_builds():
    text = """
environment:
  name: obstacle_corridor
  obstacles:
    - {name: screen, position: 12.0, thickness: 0.05, eps_r: 2.5}
    - {name: plate, position: 18.0, thickness: 0.02, metal: true}
"""
    cfg = parse_scenario(text)
    env = build_environment(cfg.environment)
    assert [o.name for o in env.obstacles] == ["screen", "plate"]
    assert env.obstacles[1].material.is_conductor


def test_builder_override_passthrough():
    cfg = parse_scenario(
        "environment: {name: straight_tunnel, overrides: {width: 3.0}}\n")
    env = build_environment(cfg.environment)
    assert env.width == 3.0


SHIPPED = sorted(
    (pathlib.Path(__file__).resolve().parent.parent / "scenarios").glob("*.yaml"))


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
def test_shipped_scenarios_parse_and_build(path):
    cfg = parse_scenario(path.read_text())
    env = build_environment(cfg.environment)
    systems = build_systems(cfg)
    assert env.surfaces and len(systems) == len(cfg.systems)


def test_shipped_obstacle_scenario_matches_stock_set():
    path = next(p for p in SHIPPED if p.stem == "obstacle_corridor")
    cfg = parse_scenario(path.read_text())
    from mmray import build_obstacle_corridor
    built = build_environment(cfg.environment)
    stock = build_obstacle_corridor()
    assert built.surfaces == stock.surfaces

    def physics(env):
        return [(o.name, o.position, o.thickness,
                 o.material.eps_r, o.material.is_conductor)
                for o in env.obstacles]

    assert physics(built) == physics(stock)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

SMALL = """
environment: {name: straight_tunnel}
systems: [system1]
frequencies: [60e9]
sweep: {n_samples: 16}
"""


def test_sweep_command_writes_csv(tmp_path):
    cfg = parse_scenario(SMALL)
    paths = run_sweep_command(cfg, out_dir=tmp_path)
    assert len(paths) == 1
    assert paths[0].name == "sweep_straight_tunnel_60GHz.csv"
    lines = paths[0].read_text().splitlines()
    assert lines[0] == "distance_m,power_dBm_system1"
    assert len(lines) == 17
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(1.0)
    float(first[1])  # parses as a number


def test_sweep_csv_marks_blocked_samples(tmp_path):
    text = """
environment: {name: obstacle_corridor}
systems: [system1]
frequencies: [60e9]
sweep: {n_samples: 40}
"""
    paths = run_sweep_command(parse_scenario(text), out_dir=tmp_path)
    body = paths[0].read_text()
    assert "NOCOV" in body


def test_pdp_command_footers(tmp_path):
    cfg = parse_scenario(SMALL)
    paths = run_pdp_command(cfg, rx_distance=10.0, out_dir=tmp_path)
    assert len(paths) == 1
    text = paths[0].read_text()
    lines = text.splitlines()
    assert lines[0] == "delay_s,excess_delay_s,normalized_power"
    assert any(line.startswith("mean_excess_delay_ns=") for line in lines)
    assert any(line.startswith("rms_delay_spread_ns=") for line in lines)
    # normalized peak of exactly one
    peaks = [float(l.split(",")[2]) for l in lines[1:] if "," in l]
    assert max(peaks) == pytest.approx(1.0)


def test_pdp_command_rejects_out_of_range(tmp_path):
    cfg = parse_scenario(SMALL)
    with pytest.raises(cli.CommandError):
        run_pdp_command(cfg, rx_distance=99.0, out_dir=tmp_path)


def test_table_command_output(tmp_path):
    text = """
environment: {name: straight_tunnel}
systems: [system1, system3]
frequencies: [60e9]
sweep: {n_samples: 32}
"""
    rendered, path = run_table_command(parse_scenario(text), out_dir=tmp_path)
    assert "isotropic" in rendered and "horn" in rendered
    lines = path.read_text().splitlines()
    assert lines[0] == "antenna,rms_ns_60GHz"
    assert len(lines) == 3


def test_plot_script_for_sweep_csv(tmp_path):
    cfg = parse_scenario(SMALL)
    csvs = run_sweep_command(cfg, out_dir=tmp_path)
    script = emit_plot_script(csvs)
    text = script.read_text()
    assert "set datafile separator" in text
    assert 'missing "NOCOV"' in text
    assert csvs[0].name in text


def test_plot_script_missing_input_fails():
    with pytest.raises(cli.CommandError):
        emit_plot_script(["/nonexistent/sweep_foo_60GHz.csv"])


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _write_scenario(tmp_path, body=SMALL):
    p = tmp_path / "scenario.yaml"
    p.write_text(body)
    return p


def test_main_sweep_roundtrip(tmp_path, capsys):
    scn = _write_scenario(tmp_path)
    rc = main(["sweep", "--scenario", str(scn), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert (tmp_path / "o" / "sweep_straight_tunnel_60GHz.csv").exists()


def test_main_pdp(tmp_path):
    scn = _write_scenario(tmp_path)
    rc = main(["pdp", "--scenario", str(scn), "--rx", "10.0",
               "--out", str(tmp_path / "o")])
    assert rc == 0
    files = list((tmp_path / "o").glob("pdp_*.csv"))
    assert len(files) == 1


def test_main_table(tmp_path, capsys):
    scn = _write_scenario(tmp_path)
    rc = main(["table", "--scenario", str(scn), "--out", str(tmp_path / "o")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "isotropic" in out


def test_main_validate(tmp_path, capsys):
    scn = _write_scenario(tmp_path)
    assert main(["validate", "--scenario", str(scn)]) == 0
    out = capsys.readouterr().out
    assert "ok" in out.lower()


def test_main_flag_overrides(tmp_path):
    scn = _write_scenario(tmp_path)
    rc = main(["sweep", "--scenario", str(scn), "--env", "free_space",
               "--out", str(tmp_path / "o")])
    assert rc == 0
    assert (tmp_path / "o" / "sweep_free_space_60GHz.csv").exists()


def test_main_missing_scenario_fails(tmp_path, capsys):
    rc = main(["sweep", "--scenario", str(tmp_path / "nope.yaml")])
    assert rc == 1
    assert "error" in capsys.readouterr().err.lower()


def test_main_bad_scenario_fails(tmp_path, capsys):
    scn = tmp_path / "bad.yaml"
    scn.write_text("environment: {name: hyperloop}\n")
    rc = main(["sweep", "--scenario", str(scn)])
    assert rc == 1
    assert "hyperloop" in capsys.readouterr().err


def test_main_plot(tmp_path):
    scn = _write_scenario(tmp_path)
    main(["sweep", "--scenario", str(scn), "--out", str(tmp_path / "o")])
    csv = tmp_path / "o" / "sweep_straight_tunnel_60GHz.csv"
    rc = main(["plot", str(csv), "--out", str(tmp_path / "o" / "p.gp")])
    assert rc == 0
    assert (tmp_path / "o" / "p.gp").exists()
