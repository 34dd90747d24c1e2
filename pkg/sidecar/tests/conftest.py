from pathlib import Path

import pytest

from dashcoach_sidecar.server import SidecarServer
from dashcoach_sidecar.stub import StubBackend, StubConfig

SIDECAR_ROOT = Path(__file__).resolve().parent.parent
PRIMARY_ROOT = SIDECAR_ROOT.parent
PRIMARY_DATA = PRIMARY_ROOT / "tests" / "data"


@pytest.fixture(scope="session")
def server():
    with SidecarServer(StubBackend(StubConfig(seed=42)), port=0) as s:
        yield s


@pytest.fixture(scope="session")
def primary_data() -> Path:
    return PRIMARY_DATA
