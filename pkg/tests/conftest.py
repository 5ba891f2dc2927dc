import math

import numpy as np
import pytest

from streamph.types import Edge

# a..g of the worked example, as vertex ids 0..6
A, B, C, D, E, F, G = range(7)
PAPER_EDGES = [(A, B), (B, C), (A, C), (D, E), (A, G), (A, F), (B, F), (B, G),
               (C, G), (C, F), (D, F), (D, G), (E, G), (E, F)]


def letters(vertices):
    return "".join("abcdefg"[v] for v in vertices)


def circle(n=8):
    th = np.arange(n) * 2 * math.pi / n
    return np.c_[np.cos(th), np.sin(th)]


@pytest.fixture
def paper_edges():
    return [Edge(min(s, t), max(s, t), float(i + 1)) for i, (s, t) in enumerate(PAPER_EDGES)]


@pytest.fixture
def circle8():
    return circle(8)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, line = RESULTS[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {line}")
