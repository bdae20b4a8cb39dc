import numpy as np
import pytest

import qtlab as qt

_ACCEPTANCE_LINES = []


def record_criterion(number: int, description: str, passed: bool, detail: str):
    """Collect one acceptance line; printed in the terminal summary."""
    status = "PASS" if passed else "FAIL"
    _ACCEPTANCE_LINES.append(
        (number, f"{status}  criterion {number:2d}  {description}: {detail}"))
    assert passed, f"criterion {number} ({description}): {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def two_slit_run():
    """Shared acceptance-scale two-slit run: series plus 2000-path bundle."""
    grid = qt.Grid1D(n=1024, x_min=-40.0, dx=80.0 / 1024)
    scenario = qt.TwoSlitScenario(separation=8.0, slit_width=1.0,
                                  propagation_time=6.0, n_paths=2000)
    cfg = qt.EvolutionConfig(dt=5e-4, steps=12000, mass=1.0,
                             potential=qt.Potential.free(), snapshot_stride=20)
    series, bundle = qt.run_two_slit(scenario, grid, cfg)
    return grid, scenario, cfg, series, bundle


@pytest.fixture(scope="session")
def coherent_run():
    """Oscillator coherent-state run at the reference resolution."""
    grid = qt.Grid1D(n=256, x_min=-20.0, dx=40.0 / 256)
    psi0 = qt.make_gaussian(grid, 2.0, 0.0, 1.0 / np.sqrt(2.0))
    cfg = qt.EvolutionConfig(dt=1e-3, steps=1000, mass=1.0,
                             potential=qt.Potential.harmonic(1.0),
                             snapshot_stride=10)
    series = qt.evolve(psi0, cfg)
    return grid, psi0, cfg, series
