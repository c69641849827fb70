import sys
from pathlib import Path

import pytest

from surfacemmp.document import load_model

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def load(name):
    return load_model(FIXTURES / f"{name}.toml")


def valid_fixtures():
    return sorted(FIXTURES.glob("*.toml"))


def invalid_fixtures():
    return sorted((FIXTURES / "invalid").glob("*.toml"))


def model_fixtures():
    """Valid fixtures carrying a surface block."""
    return [p for p in valid_fixtures() if load_model(p).model is not None]


@pytest.fixture
def blowup():
    return load("blowup-p2")


@pytest.fixture
def p2():
    return load("p2")
