import random

import pytest

from lvpir.cli import bundled_matrix_path
from lvpir.model import load_matrix


@pytest.fixture
def h1():
    return load_matrix(bundled_matrix_path("example1.mat"))


@pytest.fixture
def h2():
    return load_matrix(bundled_matrix_path("example2.mat"))


@pytest.fixture
def h3():
    return load_matrix(bundled_matrix_path("example3.mat"))


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
