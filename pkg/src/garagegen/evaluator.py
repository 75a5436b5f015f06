"""Layout metrics and the linear fitness score.

* ``N_S``: parking spots, i.e. free cells with at least one drivable 4-neighbour.
* ``T_S``: mean lane distance from the nearest entrance to each spot, plus one
  move to wheel into the stall.
* ``U_S``: free cells with no drivable 4-neighbour.

``score = k1 * N_S + k2 * T_S + k3 * U_S``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .grid import FOUR_OFFSETS, CellCode, Coord, GridError


class SpotType(Enum):
    TYPE1 = 1  # three or more drivable sides, or two opposite ones
    TYPE2 = 2  # two perpendicular drivable sides
    TYPE3 = 3  # one drivable side
    TYPE4 = 4  # no drivable side: unused square


def spot_type(pattern: tuple[bool, bool, bool, bool]) -> SpotType:
    """Parking type from drivable flags in N, E, S, W order."""
    n = sum(pattern)
    if n >= 3:
        return SpotType.TYPE1
    if n == 2:
        across = (pattern[0] and pattern[2]) or (pattern[1] and pattern[3])
        return SpotType.TYPE1 if across else SpotType.TYPE2
    if n == 1:
        return SpotType.TYPE3
    return SpotType.TYPE4


def drivable_pattern(S: np.ndarray, r: int, c: int) -> tuple[bool, bool, bool, bool]:
    h, w = S.shape
    return tuple(
        0 <= r + dr < h and 0 <= c + dc < w and S[r + dr, c + dc] >= CellCode.LANE
        for dr, dc in FOUR_OFFSETS
    )


@dataclass(frozen=True)
class EvalCoefficients:
    k1: float = 1.0
    k2: float = -5.0
    k3: float = -1.0

    @classmethod
    def parse(cls, text: str) -> EvalCoefficients:
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected k1,k2,k3, got {text!r}")
        return cls(*parts)

    def __add__(self, other: EvalCoefficients) -> EvalCoefficients:
        return EvalCoefficients(self.k1 + other.k1, self.k2 + other.k2, self.k3 + other.k3)


@dataclass
class Evaluation:
    n_spots: int
    avg_time: float
    unused: int
    score: float
    spots: list[tuple[Coord, SpotType]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_spots": self.n_spots,
            "avg_time": self.avg_time,
            "unused": self.unused,
            "score": self.score,
            "spots": [{"row": p.row, "col": p.col, "type": t.value} for p, t in self.spots],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Evaluation:
        spots = [(Coord(s["row"], s["col"]), SpotType(s["type"])) for s in d["spots"]]
        return cls(d["n_spots"], d["avg_time"], d["unused"], d["score"], spots)


def count_spots(S: np.ndarray) -> tuple[int, list[tuple[Coord, SpotType]]]:
    S = np.asarray(S)
    spots = []
    for r, c in np.argwhere(S == CellCode.FREE):
        t = spot_type(drivable_pattern(S, r, c))
        if t is not SpotType.TYPE4:
            spots.append((Coord(int(r), int(c)), t))
    return len(spots), spots


def unused_squares(S: np.ndarray) -> int:
    S = np.asarray(S)
    h, w = S.shape
    drv = np.zeros((h + 2, w + 2), dtype=bool)
    drv[1:-1, 1:-1] = S >= CellCode.LANE
    touching = drv[:-2, 1:-1] | drv[2:, 1:-1] | drv[1:-1, :-2] | drv[1:-1, 2:]
    return int(((S == CellCode.FREE) & ~touching).sum())


def lane_distances(S: np.ndarray, sources: Iterable[tuple[int, int]]) -> np.ndarray:
    """Multi-source BFS step counts over drivable cells; -1 where unreachable."""
    h, w = S.shape
    dist = np.full((h, w), -1, dtype=np.int64)
    q = deque()
    for r, c in sources:
        if S[r, c] >= CellCode.LANE and dist[r, c] < 0:
            dist[r, c] = 0
            q.append((r, c))
    while q:
        r, c = q.popleft()
        d = dist[r, c] + 1
        for dr, dc in FOUR_OFFSETS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] < 0 and S[nr, nc] >= CellCode.LANE:
                dist[nr, nc] = d
                q.append((nr, nc))
    return dist


def _entrances(S: np.ndarray) -> list[tuple[int, int]]:
    return [(int(r), int(c)) for r, c in np.argwhere(S == CellCode.ENTRANCE)]


def _exits(S: np.ndarray) -> list[tuple[int, int]]:
    return [(int(r), int(c)) for r, c in np.argwhere(S == CellCode.EXIT)]


def _adjacent_min(dist: np.ndarray, r: int, c: int) -> int:
    h, w = dist.shape
    best = -1
    for dr, dc in FOUR_OFFSETS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] >= 0:
            if best < 0 or dist[nr, nc] < best:
                best = int(dist[nr, nc])
    return best


def avg_parking_time(
    S: np.ndarray,
    *,
    sources: Iterable[tuple[int, int]] | None = None,
    require_exit: bool = True,
    unreachable_penalty: float | None = None,
) -> float:
    """Mean per-spot parking time in lane steps.

    A spot's time is the BFS distance from the nearest source (entrances by
    default) to the closest drivable cell beside it, plus 1. Spots with no
    route to a source, or, when ``require_exit`` is set, no route on to an
    exit, count as ``unreachable_penalty`` (default ``h * w``).
    """
    S = np.asarray(S)
    src = _entrances(S) if sources is None else [tuple(p) for p in sources]
    if not src:
        raise GridError("average parking time needs at least one entrance")
    n, spots = count_spots(S)
    if n == 0:
        return 0.0
    penalty = float(S.size if unreachable_penalty is None else unreachable_penalty)
    dist = lane_distances(S, src)
    out_dist = lane_distances(S, _exits(S)) if require_exit else None
    total = 0.0
    for p, _ in spots:
        d = _adjacent_min(dist, p.row, p.col)
        if d < 0 or (out_dist is not None and _adjacent_min(out_dist, p.row, p.col) < 0):
            total += penalty
        else:
            total += d + 1
    return total / n


def evaluate(
    S: np.ndarray,
    k: EvalCoefficients = EvalCoefficients(),
    *,
    require_exit: bool = True,
    unreachable_penalty: float | None = None,
) -> Evaluation:
    S = np.asarray(S)
    n, spots = count_spots(S)
    t = avg_parking_time(S, require_exit=require_exit, unreachable_penalty=unreachable_penalty)
    u = unused_squares(S)
    return Evaluation(n, t, u, k.k1 * n + k.k2 * t + k.k3 * u, spots)


@dataclass(frozen=True)
class InfeasibleSpot:
    coord: Coord
    reasons: tuple[str, ...]


def feasibility(S: np.ndarray) -> list[InfeasibleSpot]:
    """Spots lacking a drivable route to some entrance or to some exit."""
    S = np.asarray(S)
    to_entrance = lane_distances(S, _entrances(S))
    to_exit = lane_distances(S, _exits(S))
    bad = []
    for p, _ in count_spots(S)[1]:
        reasons = []
        if _adjacent_min(to_entrance, p.row, p.col) < 0:
            reasons.append("no-entrance-path")
        if _adjacent_min(to_exit, p.row, p.col) < 0:
            reasons.append("no-exit-path")
        if reasons:
            bad.append(InfeasibleSpot(p, tuple(reasons)))
    return bad
