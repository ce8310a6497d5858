import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from chfnet.lut import LutGrid, load_lut
from chfnet.sample import sample_lut_path

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []

# Optional path to a transcription of the real 2006 table (LUT CSV layout).
LUT2006_PATH = os.environ.get("CHFNET_LUT2006")


@pytest.fixture(scope="session")
def sample_grid():
    return load_lut(sample_lut_path())


@pytest.fixture
def tiny_grid():
    p = np.array([1.0, 2.0])
    g = np.array([0.0, 100.0])
    x = np.array([-0.5, 0.5])
    v = np.arange(8, dtype=float).reshape(2, 2, 2) * 100.0
    return LutGrid(p, g, x, v, require_full_span=False)


@pytest.fixture
def tiny_csv(tmp_path, tiny_grid):
    from chfnet.lut import write_lut
    path = tmp_path / "tiny.csv"
    write_lut(tiny_grid, path)
    return path


def record(criterion, status, detail):
    """Queue one acceptance line; ``status`` is a bool or a word such as PARTIAL."""
    if isinstance(status, (bool, np.bool_)):
        status = "PASS" if status else "FAIL"
    line = f"[{criterion}] {status:<11} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
