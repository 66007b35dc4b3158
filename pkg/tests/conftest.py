import pytest

from vortex_tunnel.config import config_from_mapping

# Fast, strongly non-adiabatic setup: N_x = 8 and a short window.
SMALL = {
    "pulse": {"C": 0.2, "t0": 2.0, "t_i": -10.0, "t_f": 10.0, "M0": 2.0},
    "grid": {"N_x": 8},
    "integrator": {"dt": 1e-3, "sample_stride": 100},
    "sweep": {"M0": [1.0, 1.5, 2.0]},
    "calibration": {"uv_coeff": 0.0},
}

SMALL_TOML = """\
[pulse]
C = 0.2
t0 = 2.0
t_i = -10.0
t_f = 10.0
M0 = 2.0

[grid]
N_x = 8

[integrator]
dt = 1e-3
sample_stride = 100

[sweep]
M0 = [1.0, 1.5, 2.0]

[calibration]
uv_coeff = 0.0
"""


@pytest.fixture
def small_config():
    return config_from_mapping(SMALL)


@pytest.fixture
def small_toml(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_TOML)
    return path


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
