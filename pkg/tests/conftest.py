import pytest

from owcrelay.channel import ChannelConfig, ChannelEngine
from owcrelay.geometry import RoomModel
from owcrelay.radiometry import Detector, Emitter

TX_POS = (2.0, 4.0, 3.0)
DOWN = (0.0, 0.0, -1.0)
UP = (0.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def room():
    return RoomModel()


@pytest.fixture(scope="session")
def tx():
    return Emitter(TX_POS, DOWN, 1.0, 1.0)


@pytest.fixture(scope="session")
def floor_detector():
    return Detector((2.0, 4.0, 1.0), UP, 1e-4, 90.0)


@pytest.fixture(scope="session")
def coarse_engine(room):
    # element side 0.5 m for both bounce orders; small enough for loop oracles
    return ChannelEngine(room, ChannelConfig(2, 0.5, 0.5))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
