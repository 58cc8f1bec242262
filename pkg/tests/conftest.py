from pathlib import Path

import pytest

from dyncsp import parse_network, parse_script

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def circuit0():
    spec = parse_network((FIXTURES / "circuit0.net").read_text())
    script = parse_script((FIXTURES / "circuit0.script").read_text(), spec)
    return spec, script


@pytest.fixture
def circuit1():
    spec = parse_network((FIXTURES / "circuit1.net").read_text())
    script = parse_script((FIXTURES / "circuit1.script").read_text(), spec)
    return spec, script
