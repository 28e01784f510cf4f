import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfx.corpus import load_heap, load_program


@pytest.fixture(scope="session")
def trace_prog():
    return load_program("trace")


@pytest.fixture(scope="session")
def traverse_prog():
    return load_program("traverse")


@pytest.fixture(scope="session")
def occurs_prog():
    return load_program("occurs")


@pytest.fixture(scope="session")
def acyclic_heap():
    return load_heap("acyclic")


@pytest.fixture(scope="session")
def cyclic_heap():
    return load_heap("cyclic")


@pytest.fixture(scope="session")
def shared_heap():
    return load_heap("shared")


@pytest.fixture(scope="session")
def cyclic_term_heap():
    return load_heap("cyclic_term")
