import os

import numpy as np
import pytest

from src.core.grid import discretize, mark_rectangle

DOMAINS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src", "data", "domains")

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
SQUARE_MARKS = [(0, 0), (0, 1), (1, 1), (1, 0)]


def domain_path(name: str) -> str:
    return os.path.join(DOMAINS, name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square3():
    """Unit square at delta = 1/4: a 3 x 3 block of vertices."""
    return discretize(UNIT_SQUARE, "1/4", (0.5, 0.5))


@pytest.fixture
def square3_marking(square3):
    return mark_rectangle(square3, *SQUARE_MARKS)


@pytest.fixture
def square2():
    """Unit square at delta = 1/3: a 2 x 2 block of vertices."""
    return discretize(UNIT_SQUARE, "1/3", (0.5, 0.5))


@pytest.fixture
def square2_marking(square2):
    return mark_rectangle(square2, *SQUARE_MARKS)


@pytest.fixture
def isolated_output(tmp_path, monkeypatch):
    """Output directory for harness runs, also exported through the environment."""
    out = tmp_path / "runs"
    monkeypatch.setenv("ISING_LAB_OUTPUT", str(out))
    return out


@pytest.fixture
def square4():
    """Unit square at delta = 1/5: a 4 x 4 block of vertices."""
    return discretize(UNIT_SQUARE, "1/5", (0.5, 0.5))


@pytest.fixture
def square4_marking(square4):
    return mark_rectangle(square4, *SQUARE_MARKS)
