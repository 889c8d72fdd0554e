import numpy as np
import pytest

from savcd.backend import SyntheticScript
from savcd.backend.stub_server import StubServer
from savcd.harness import asset_path

DEMO_QUERY = "Is the red square above the blue line?"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def image(rng):
    return rng.integers(0, 256, size=(24, 40, 3), dtype=np.uint8)


@pytest.fixture
def demo_script_path():
    return str(asset_path("demo_script.json"))


@pytest.fixture
def demo_image_path():
    return str(asset_path("demo_image.png"))


@pytest.fixture
def stub():
    script = SyntheticScript.from_rows(
        [[-1.5e30, 3.25, 0.0, 7.5e30], [1e-300, -0.0001, 123456789.125, 2.0]],
        [[0.5, 0.5, 0.5, 0.5], [1.0, 2.0, 3.0, 4.0]],
        clean_image=np.zeros((4, 4, 3), np.uint8),
        completions={"mirror": "Reason: up/down.\nChoice: vertical flip"},
    )
    with StubServer(script) as server:
        yield server


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
