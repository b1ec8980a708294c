import numpy as np
import pytest

from silencer import datasets
from silencer.graph import Graph, generate_er


@pytest.fixture(scope="session")
def karate():
    return datasets.load("karate")


@pytest.fixture
def small_er():
    return generate_er(40, 0.15, seed=7)


def random_graph(n, p, seed) -> Graph:
    return generate_er(n, p, seed)


def random_nonneg(rng, shape):
    return 1.0 - rng.random(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict = {}


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""

    def _report(num: int, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {detail}"
        _ACCEPTANCE[num] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[num])
