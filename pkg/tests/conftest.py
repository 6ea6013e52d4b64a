import sys

import numpy as np
import pytest

import mmray


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def _presets():
    return [mmray.system_preset(k) for k in ("system1", "system2", "system3")]


@pytest.fixture(scope="session")
def all_systems():
    return _presets()


@pytest.fixture(scope="session")
def straight_grid(all_systems):
    """Full-resolution sweep of the straight tunnel, shared across tests."""
    env = mmray.build_straight_tunnel()
    return mmray.run_sweep_grid(env, all_systems, [60e9, 70e9, 80e9],
                                n_samples=1024)


@pytest.fixture(scope="session")
def bent_grid(all_systems):
    env = mmray.build_bent_tunnel(45.0)
    return mmray.run_sweep_grid(env, all_systems, [60e9, 70e9, 80e9],
                                n_samples=1024)


@pytest.fixture(scope="session")
def corridor_grid(all_systems):
    env = mmray.build_plain_corridor()
    return mmray.run_sweep_grid(env, all_systems, [60e9, 70e9, 80e9],
                                n_samples=1024)


def sliding_median_dbm(grid, distance, system_index, freq_index, window=0.5):
    mask = np.abs(grid.distances - distance) <= window
    vals = grid.power_dbm[mask, system_index, freq_index]
    vals = vals[np.isfinite(vals)]
    return float(np.median(vals))
