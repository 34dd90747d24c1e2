import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
DATA_DIR = TESTS_DIR / "data"
FIXTURE_DIR = DATA_DIR / "fixture"

sys.path.insert(0, str(TESTS_DIR))

from stubproto import StubServer  # noqa: E402


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def stub_server():
    """Ephemeral-port stub endpoint shared across the session (seed 42)."""
    with StubServer(seed=42) as server:
        yield server


@pytest.fixture()
def catalog():
    from dashcoach.catalog import default_catalog

    return default_catalog()


@pytest.fixture()
def rules():
    from dashcoach.parsing import default_rules

    return default_rules()
