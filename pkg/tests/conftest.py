import numpy as np
import pytest

from dyadtree import Dataset

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def z1():
    return Dataset.from_samples([((0.1,), -1), ((0.3,), -1), ((0.6,), 1), ((0.9,), 1)])


@pytest.fixture
def record_criterion():
    def record(name: str, ok: bool, detail: str = "") -> None:
        _CRITERIA.append((name, bool(ok), detail))

    return record


def random_dataset(rng: np.random.Generator, n: int, d: int) -> Dataset:
    return Dataset(rng.random((n, d)), rng.choice([-1, 1], size=n))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
