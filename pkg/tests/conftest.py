import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO_ROOT = Path(__file__).parent.parent
DATA_DIR = REPO_ROOT / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def profile():
    from plantavatar.plant import default_profile

    return default_profile()


@pytest.fixture(scope="session")
def twelve_events(data_dir):
    from plantavatar.sim import load_scenario

    return load_scenario(data_dir / "twelve_events.scenario")


@pytest.fixture
def cluster():
    """A started device cluster on ephemeral ports, torn down after the test."""
    from plantavatar.devices import DeviceCluster

    c = DeviceCluster(tick=0.05)
    c.start()
    yield c
    c.stop()
