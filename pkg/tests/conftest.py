"""pytest configuration file."""

import sys
from collections.abc import Callable
from pathlib import Path

import pytest

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from quiverforge.config import ForgeConfig  # noqa: E402
from quiverforge.corpus import load_fixture  # noqa: E402
from quiverforge.quiver import FullQuiver  # noqa: E402


@pytest.fixture
def config() -> ForgeConfig:
    """Default configuration, independent of the environment."""
    return ForgeConfig()


@pytest.fixture
def fixture_quiver(config: ForgeConfig) -> Callable[[str], FullQuiver]:
    """Load a bundled fixture's quiver by name."""

    def _load(name: str) -> FullQuiver:
        return load_fixture(name, config).quiver

    return _load
