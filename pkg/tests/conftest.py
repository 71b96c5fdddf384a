import numpy as np
import pytest

from conjpiggy.code import make_params
from conjpiggy.galois import build_field


def clmul_mod(a: int, b: int, poly: int, m: int) -> int:
    """Schoolbook carry-less multiply, then reduce: the independent oracle."""
    prod = 0
    for bit in range(m):
        if (b >> bit) & 1:
            prod ^= a << bit
    for deg in range(2 * m - 2, m - 1, -1):
        if (prod >> deg) & 1:
            prod ^= poly << (deg - m)
    return prod


def dot_oracle(field, u, v) -> int:
    acc = 0
    for x, y in zip(u, v):
        acc ^= clmul_mod(int(x), int(y), field.reduction_poly, field.m)
    return acc


@pytest.fixture(scope="session")
def gf256():
    return build_field(8)


@pytest.fixture(scope="session")
def p14():
    return make_params(14, 10, 3, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
