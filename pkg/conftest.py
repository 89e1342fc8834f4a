"""Shared fixtures: paths of the checked-in DPA corpus and the parsed automata."""
from pathlib import Path

import pytest

from automata import parse_dpa

FIXTURES = Path(__file__).parent / "fixtures"


def _load(name):
    return parse_dpa((FIXTURES / f"{name}.dpa").read_text())


@pytest.fixture
def fixture_path():
    return lambda name: str(FIXTURES / f"{name}.dpa")


@pytest.fixture(scope="session")
def copy_dpa():
    return _load("copy")


@pytest.fixture(scope="session")
def ex33_dpa():
    return _load("ex33")


@pytest.fixture(scope="session")
def shift1_dpa():
    return _load("shift1")


@pytest.fixture(scope="session")
def shift3_dpa():
    return _load("shift3")


@pytest.fixture(scope="session")
def infones_dpa():
    return _load("infones")
