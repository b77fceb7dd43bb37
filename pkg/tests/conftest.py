import numpy as np
import pytest

from specclass.raster import ClassInfo, LabelMask, Raster


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_raster(rng):
    return Raster(rng.random((3, 6, 5)).astype(np.float32), ("b1", "b2", "b3"), 2.44)


@pytest.fixture
def three_class_mask():
    labels = np.zeros((30, 10), dtype=np.uint32)
    labels[0:10] = 1
    labels[10:20] = 2
    labels[20:30] = 3
    table = {1: ClassInfo("Trees", (255, 0, 0)), 2: ClassInfo("Grass", (0, 255, 0)),
             3: ClassInfo("Roads", (255, 255, 0))}
    return LabelMask(labels, table)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
