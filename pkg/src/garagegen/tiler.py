"""Per-cell tile classification used by the scene exporters.

Lane cells become crossroads, T-junctions or straight pieces by their
drivable degree; free cells become one of three parking tiles or ``FREE``
(an unused square). Entrances and exits count as drivable neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .evaluator import SpotType, drivable_pattern, spot_type
from .grid import CellCode, GridError, matrix_hash


class TileKind(Enum):
    CROSSROADS = "crossroads"
    TJUNCTION = "tjunction"
    STRAIGHT = "straight"
    PARK1 = "park1"
    PARK2 = "park2"
    PARK3 = "park3"
    FREE = "free"
    ENTRANCE = "entrance"
    EXIT = "exit"
    OBSTACLE = "obstacle"


DIRECTIONS = ("N", "E", "S", "W")
PARKING_KINDS = frozenset({TileKind.PARK1, TileKind.PARK2, TileKind.PARK3})
_PARK = {
    SpotType.TYPE1: TileKind.PARK1,
    SpotType.TYPE2: TileKind.PARK2,
    SpotType.TYPE3: TileKind.PARK3,
    SpotType.TYPE4: TileKind.FREE,
}
_DIRECT = {
    CellCode.OBSTACLE: TileKind.OBSTACLE,
    CellCode.ENTRANCE: TileKind.ENTRANCE,
    CellCode.EXIT: TileKind.EXIT,
}

Tile = tuple[TileKind, str]


def lane_tile(pattern: tuple[bool, bool, bool, bool]) -> Tile:
    """Lane tile for a drivable-neighbour pattern in N, E, S, W order.

    A T-junction faces away from its closed side. A straight piece is ``N``
    when vertical, ``E`` when horizontal; a bend takes its first open side and
    dead ends or isolated cells default to ``N``.
    """
    n = sum(pattern)
    if n == 4:
        return TileKind.CROSSROADS, "N"
    if n == 3:
        closed = pattern.index(False)
        return TileKind.TJUNCTION, DIRECTIONS[(closed + 2) % 4]
    if n == 2:
        if pattern[0] and pattern[2]:
            return TileKind.STRAIGHT, "N"
        if pattern[1] and pattern[3]:
            return TileKind.STRAIGHT, "E"
        return TileKind.STRAIGHT, DIRECTIONS[pattern.index(True)]
    return TileKind.STRAIGHT, "N"


def parking_tile(pattern: tuple[bool, bool, bool, bool]) -> Tile:
    kind = _PARK[spot_type(pattern)]
    if kind is TileKind.FREE:
        return kind, "N"
    return kind, DIRECTIONS[pattern.index(True)]


def classify_lane_tile(S: np.ndarray, c: tuple[int, int]) -> Tile:
    if S[c[0], c[1]] != CellCode.LANE:
        raise GridError(f"cell {tuple(c)} is not a lane cell")
    return lane_tile(drivable_pattern(S, c[0], c[1]))


def classify_parking_tile(S: np.ndarray, c: tuple[int, int]) -> Tile:
    if S[c[0], c[1]] != CellCode.FREE:
        raise GridError(f"cell {tuple(c)} is not a free cell")
    return parking_tile(drivable_pattern(S, c[0], c[1]))


@dataclass
class TileMap:
    tiles: list[list[Tile]]
    source_hash: str

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.tiles), len(self.tiles[0])

    def counts(self) -> dict[TileKind, int]:
        out = {k: 0 for k in TileKind}
        for row in self.tiles:
            for kind, _ in row:
                out[kind] += 1
        return out

    def to_rows(self) -> list[list[list[str]]]:
        return [[[k.value, o] for k, o in row] for row in self.tiles]

    @classmethod
    def from_rows(cls, rows, source_hash: str) -> TileMap:
        return cls([[(TileKind(k), o) for k, o in row] for row in rows], source_hash)


def tile_map(S: np.ndarray) -> TileMap:
    S = np.asarray(S)
    tiles = []
    for r in range(S.shape[0]):
        row = []
        for c in range(S.shape[1]):
            code = int(S[r, c])
            if code == CellCode.LANE:
                row.append(lane_tile(drivable_pattern(S, r, c)))
            elif code == CellCode.FREE:
                row.append(parking_tile(drivable_pattern(S, r, c)))
            else:
                row.append((_DIRECT[CellCode(code)], "N"))
        tiles.append(row)
    return TileMap(tiles, matrix_hash(S))
