"""Structure-matrix data model and neighbourhood queries.

A garage is an ``h x w`` integer grid. Every cell holds one of five codes
(see :class:`CellCode`). Reads outside the grid return ``OBSTACLE`` so that
border cells need no special casing.
"""

from __future__ import annotations

import hashlib
from enum import Enum, IntEnum
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage


class CellCode(IntEnum):
    OBSTACLE = -1  # obstacle, or outside the floor plan
    FREE = 0  # parking space or free space
    LANE = 1
    ENTRANCE = 2
    EXIT = 3


VALID_CODES = frozenset(int(c) for c in CellCode)
DRIVABLE_CODES = frozenset({CellCode.LANE, CellCode.ENTRANCE, CellCode.EXIT})
MAX_SIDE = 1024


class Coord(NamedTuple):
    row: int
    col: int


class Neighborhood(Enum):
    EIGHT = "eight"
    FOUR = "four"


class SquareClass(Enum):
    FRONTIER = "frontier"
    INNER = "inner"
    NEITHER = "neither"


# N, NE, E, SE, S, SW, W, NW
EIGHT_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)
# N, E, S, W
FOUR_OFFSETS: tuple[tuple[int, int], ...] = ((-1, 0), (0, 1), (1, 0), (0, -1))


class GridError(ValueError):
    """Raised for out-of-bounds coordinates and malformed matrices."""


def as_matrix(cells: Sequence[Sequence[int]] | np.ndarray) -> np.ndarray:
    """Validate ``cells`` and return a fresh ``int8`` structure matrix."""
    arr = np.array(cells, dtype=np.int64)
    if arr.ndim != 2:
        raise GridError(f"structure matrix must be 2-D, got shape {arr.shape}")
    h, w = arr.shape
    if not (1 <= h <= MAX_SIDE and 1 <= w <= MAX_SIDE):
        raise GridError(f"matrix dimensions {h}x{w} outside 1..{MAX_SIDE}")
    bad = ~np.isin(arr, sorted(VALID_CODES))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise GridError(f"invalid cell code {arr[r, c]} at ({r}, {c})")
    return arr.astype(np.int8)


def matrix_hash(S: np.ndarray) -> str:
    """Stable hex digest of a matrix (shape + row-major codes)."""
    S = np.ascontiguousarray(S, dtype=np.int8)
    h = hashlib.sha256()
    h.update(f"{S.shape[0]}x{S.shape[1]}:".encode())
    h.update(S.tobytes())
    return h.hexdigest()


def in_bounds(S: np.ndarray, c: tuple[int, int]) -> bool:
    return 0 <= c[0] < S.shape[0] and 0 <= c[1] < S.shape[1]


def _check(S: np.ndarray, c: tuple[int, int]) -> None:
    if not in_bounds(S, c):
        raise GridError(f"coordinate {tuple(c)} outside {S.shape[0]}x{S.shape[1]} grid")


def read(S: np.ndarray, r: int, c: int) -> int:
    """Cell code at ``(r, c)``; the virtual border reads -1."""
    if 0 <= r < S.shape[0] and 0 <= c < S.shape[1]:
        return int(S[r, c])
    return int(CellCode.OBSTACLE)


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def neighborhood(S: np.ndarray, c: tuple[int, int], kind: Neighborhood = Neighborhood.EIGHT) -> list[int]:
    """Codes of the 8 (N, NE, E, SE, S, SW, W, NW) or 4 (N, E, S, W) neighbours."""
    _check(S, c)
    offsets = EIGHT_OFFSETS if kind is Neighborhood.EIGHT else FOUR_OFFSETS
    return [read(S, c[0] + dr, c[1] + dc) for dr, dc in offsets]


def classify_square(S: np.ndarray, c: tuple[int, int]) -> SquareClass:
    _check(S, c)
    if S[c[0], c[1]] != CellCode.FREE:
        return SquareClass.NEITHER
    total = sum(neighborhood(S, c, Neighborhood.EIGHT))
    if total < 0:
        return SquareClass.FRONTIER
    if total == 0:
        return SquareClass.INNER
    return SquareClass.NEITHER


def drivable_degree(S: np.ndarray, c: tuple[int, int]) -> int:
    """Number of 4-neighbours that are lane, entrance or exit cells."""
    return sum(1 for v in neighborhood(S, c, Neighborhood.FOUR) if v in DRIVABLE_CODES)


_RING = np.ones((3, 3), dtype=np.int32)
_RING[1, 1] = 0


def neighbor_sums(S: np.ndarray) -> np.ndarray:
    """Vectorised 8-neighbourhood code sums for every cell (border reads -1)."""
    return ndimage.correlate(np.asarray(S, dtype=np.int32), _RING, mode="constant", cval=-1)


def classify_all(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (frontier, inner) masks for the whole matrix."""
    sums = neighbor_sums(S)
    free = S == CellCode.FREE
    return free & (sums < 0), free & (sums == 0)


def drivable_degrees(S: np.ndarray) -> np.ndarray:
    """Vectorised :func:`drivable_degree` over every cell."""
    h, w = S.shape
    drv = np.zeros((h + 2, w + 2), dtype=np.int8)
    drv[1:-1, 1:-1] = S >= CellCode.LANE
    return (
        drv[:-2, 1:-1] + drv[2:, 1:-1] + drv[1:-1, :-2] + drv[1:-1, 2:]
    ).astype(np.int8)


def is_four_connected(mask: np.ndarray) -> bool:
    """True when the ``True`` cells of ``mask`` form one 4-connected region.

    An empty mask counts as not connected.
    """
    _, n = ndimage.label(mask)  # default structure is the 4-neighbour cross
    return n == 1


def cells_with(S: np.ndarray, code: int) -> list[Coord]:
    """Row-major list of coordinates holding ``code``."""
    return [Coord(int(r), int(c)) for r, c in np.argwhere(S == code)]
