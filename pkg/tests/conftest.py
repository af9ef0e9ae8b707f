import io
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ezero.session import Session, build_state


@pytest.fixture
def state():
    """A base state with the default expanders but no prelude and no
    closure transforms."""
    return build_state(closure_transforms=False)


@pytest.fixture
def session():
    """A full session with the prelude loaded; output captured."""
    return Session(output=io.StringIO(), input=io.StringIO())


@pytest.fixture(scope="module")
def shared_session():
    """Module-wide prelude session for read-mostly tests."""
    return Session(output=io.StringIO(), input=io.StringIO())


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")
