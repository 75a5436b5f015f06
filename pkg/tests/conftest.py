import numpy as np
import pytest

CODES = {"#": -1, ".": 0, "=": 1, "E": 2, "X": 3}


def grid(text: str) -> np.ndarray:
    """Build a matrix from ASCII rows (``# . = E X``)."""
    rows = [line.strip() for line in text.strip().splitlines()]
    return np.array([[CODES[ch] for ch in row] for row in rows], dtype=np.int8)


def bfs_connected(mask: np.ndarray) -> bool:
    """Independent flood fill used as an oracle for connectivity checks."""
    cells = {(int(r), int(c)) for r, c in np.argwhere(mask)}
    if not cells:
        return False
    start = next(iter(cells))
    seen = {start}
    todo = [start]
    while todo:
        r, c = todo.pop()
        for n in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if n in cells and n not in seen:
                seen.add(n)
                todo.append(n)
    return seen == cells


# 7x9 full-rectangle garage used by the training protocol tests
GARAGE_7x9 = """
.E.......
.........
.........
.........
.........
.........
.......X.
"""

SERPENTINE_7x9 = """
.E.......
.=======.
.......=.
.......=.
.=======.
.=.......
.======X.
"""

PERIMETER_7x9 = """
=E=======
=.......=
=.......=
=.......=
=.......=
=.......=
=======X=
"""


@pytest.fixture
def garage79():
    return grid(GARAGE_7x9)


# acceptance results, printed after the run so they appear in captured logs
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
