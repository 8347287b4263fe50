import numpy as np
import pytest

from latslice import Lattice


def random_lattice(rng, d, lo=-5, hi=5, unit_det=True, max_cond=1e4):
    """Random integer basis with entries in [lo, hi], optionally rescaled to det 1."""
    while True:
        b = rng.integers(lo, hi + 1, size=(d, d)).astype(float)
        det = abs(np.linalg.det(b))
        if det > 0.5 and np.linalg.cond(b) < max_cond:
            break
    if unit_det:
        b = b / det ** (1.0 / d)
    return Lattice(b)


def random_unimodular(rng, d, steps=6):
    u = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, size=2, replace=False) if d > 1 else (0, 0)
        if i != j:
            u[i] += int(rng.integers(-2, 3)) * u[j]
    return u


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
