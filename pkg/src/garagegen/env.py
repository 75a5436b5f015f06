"""Colouring MDP: an agent walks the garage and turns free squares into lane.

Rewards follow the net change in parking-spot count; four shaping penalties
(turn-back, interval, wheeling, per-step) discourage layouts that break
common parking-design rules. The episode succeeds when the agent returns to
its start cell and takes ``STAY``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, NamedTuple

import numpy as np

from .grid import CellCode, Coord, GridError

PAD = 2  # half-width of the 5x5 perception window


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4


ACTIONS = tuple(Action)
MOVES = {Action.UP: (-1, 0), Action.DOWN: (1, 0), Action.LEFT: (0, -1), Action.RIGHT: (0, 1)}
OPPOSITE = {Action.UP: Action.DOWN, Action.DOWN: Action.UP, Action.LEFT: Action.RIGHT, Action.RIGHT: Action.LEFT}
VERTICAL = frozenset({Action.UP, Action.DOWN})
# clearance index for each move, matching the N, E, S, W order of State.clearance
HEADING = {Action.UP: 0, Action.RIGHT: 1, Action.DOWN: 2, Action.LEFT: 3}


class Status(Enum):
    RUNNING = "running"
    SUCCESS = "success"
    FAIL = "fail"
    TIMEOUT = "timeout"


class StateError(RuntimeError):
    pass


class State(NamedTuple):
    clearance: tuple[int, int, int, int]  # N, E, S, W
    window: tuple[int, ...]  # 5x5 row-major, centred on the agent
    prev: Action

    def key(self) -> str:
        """Canonical text form used when dumping Q-tables."""
        d = ",".join(map(str, self.clearance))
        m = ",".join(map(str, self.window))
        return f"{d}|{m}|{int(self.prev)}"

    @classmethod
    def from_key(cls, text: str) -> State:
        d, m, a = text.split("|")
        return cls(
            tuple(int(x) for x in d.split(",")),
            tuple(int(x) for x in m.split(",")),
            Action(int(a)),
        )


@dataclass
class RewardConfig:
    w_park: float = 1.0
    p_turnback: float = 2.0
    p_interval: float = 1.0
    p_wheel: float = 1.0
    p_step: float = 0.05
    r_fail: float = -10.0
    g_min: int = 3
    clearance_min: int = 3
    t_max: int | None = None  # None: 4 * h * w

    def __post_init__(self):
        if self.r_fail >= 0:
            raise ValueError("r_fail must be negative")
        if self.t_max is not None and self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        for name in ("p_turnback", "p_interval", "p_wheel", "p_step"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class StepRecord:
    t: int
    position: Coord  # agent position after the step
    action: Action
    delta_spots: int
    penalties: dict[str, float]
    reward: float
    status: Status

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "row": self.position.row,
            "col": self.position.col,
            "action": self.action.name,
            "delta_spots": self.delta_spots,
            "penalties": self.penalties,
            "reward": self.reward,
            "status": self.status.value,
        }


@dataclass
class EpisodeTrace:
    transitions: list[tuple[State, Action, float]] = field(default_factory=list)
    status: Status = Status.RUNNING
    matrix: np.ndarray | None = None

    @property
    def rewards(self) -> list[float]:
        return [r for _, _, r in self.transitions]


def episode_return(trace: EpisodeTrace) -> float:
    """Sum of rewards excluding the terminal one."""
    if trace.status is Status.RUNNING:
        raise StateError("episode has not terminated")
    return sum(trace.rewards[:-1])


class LaneEnv:
    def __init__(self, garage: np.ndarray, cfg: RewardConfig | None = None):
        garage = np.asarray(garage)
        entrances = np.argwhere(garage == CellCode.ENTRANCE)
        if len(entrances) == 0:
            raise GridError("garage has no entrance")
        self.garage = garage
        self.cfg = cfg or RewardConfig()
        self.h, self.w = garage.shape
        self.cap = max(self.h, self.w)
        self.t_max = self.cfg.t_max if self.cfg.t_max is not None else 4 * self.h * self.w
        self.start = Coord(int(entrances[0][0]), int(entrances[0][1]))
        self.audit: Callable[[StepRecord], None] | None = None
        self.reset()

    def reset(self) -> State:
        p = PAD
        grid = [[-1] * (self.w + 2 * p) for _ in range(self.h + 2 * p)]
        for r, row in enumerate(self.garage.tolist()):
            grid[r + p][p:p + self.w] = row
        self._grid = grid
        self.pos = self.start
        self.prev = Action.STAY
        self.t = 0
        self.status = Status.RUNNING
        self._last_seen: dict[Action, int] = {}
        self.trace = EpisodeTrace()
        self._state = self._observe()
        return self._state

    @property
    def matrix(self) -> np.ndarray:
        """Current working matrix (unpadded copy)."""
        p = PAD
        return np.array([row[p:p + self.w] for row in self._grid[p:p + self.h]], dtype=np.int8)

    def _code(self, r: int, c: int) -> int:
        return self._grid[r + PAD][c + PAD]

    def _clearance(self, r: int, c: int, dr: int, dc: int) -> int:
        g = self._grid
        n = 0
        r, c = r + PAD + dr, c + PAD + dc
        while g[r][c] != -1 and n < self.cap:
            n += 1
            r += dr
            c += dc
        return n

    def _observe(self) -> State:
        r, c = self.pos
        d = tuple(self._clearance(r, c, dr, dc) for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)))
        window = tuple(x for row in self._grid[r:r + 5] for x in row[c:c + 5])
        return State(d, window, self.prev)

    def observe(self) -> State:
        if self.status is not Status.RUNNING:
            raise StateError("environment has terminated")
        return self._state

    def _is_spot(self, r: int, c: int) -> bool:
        g = self._grid
        R, C = r + PAD, c + PAD
        return g[R][C] == 0 and (g[R - 1][C] > 0 or g[R + 1][C] > 0 or g[R][C - 1] > 0 or g[R][C + 1] > 0)

    def _colour(self, r: int, c: int) -> int:
        """Turn free cell (r, c) into lane; return the change in spot count."""
        cells = ((r, c), (r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
        before = sum(self._is_spot(*x) for x in cells)
        self._grid[r + PAD][c + PAD] = int(CellCode.LANE)
        after = sum(self._is_spot(*x) for x in cells)
        return after - before

    def step(self, action: Action | int) -> tuple[State, float, Status]:
        if self.status is not Status.RUNNING:
            raise StateError("cannot step a terminated environment")
        a = Action(action)
        cfg = self.cfg
        state = self._state
        self.t += 1
        delta = 0
        penalties: dict[str, float] = {}

        if a is Action.STAY:
            if self.pos == self.start:
                status, reward = Status.SUCCESS, 0.0
            else:
                status, reward = Status.FAIL, cfg.r_fail
        else:
            dr, dc = MOVES[a]
            tr, tc = self.pos.row + dr, self.pos.col + dc
            if self._code(tr, tc) == CellCode.OBSTACLE:
                status, reward = Status.FAIL, cfg.r_fail
            elif self.t >= self.t_max:
                status, reward = Status.TIMEOUT, cfg.r_fail
            else:
                status = Status.RUNNING
                if self._code(tr, tc) == CellCode.FREE:
                    delta = self._colour(tr, tc)
                self.pos = Coord(tr, tc)

                prev = self.prev
                if prev is not Action.STAY and a is OPPOSITE[prev]:
                    penalties["turnback"] = cfg.p_turnback
                last = self._last_seen.get(a)
                if last is not None and 1 <= self.t - last - 1 < cfg.g_min:
                    penalties["interval"] = cfg.p_interval
                if prev is not Action.STAY and (prev in VERTICAL) != (a in VERTICAL):
                    if self._clearance(tr, tc, dr, dc) < cfg.clearance_min:
                        penalties["wheel"] = cfg.p_wheel
                penalties["step"] = cfg.p_step
                reward = cfg.w_park * delta - sum(penalties.values())

                self._last_seen[a] = self.t
                self.prev = a

        self.status = status
        self.trace.transitions.append((state, a, reward))
        if status is Status.RUNNING:
            self._state = self._observe()
        else:
            self.trace.status = status
            self.trace.matrix = self.matrix
        if self.audit is not None:
            self.audit(StepRecord(self.t, self.pos, a, delta, penalties, reward, status))
        return self._state, reward, status


def reset(garage: np.ndarray, cfg: RewardConfig | None = None) -> tuple[LaneEnv, State]:
    env = LaneEnv(garage, cfg)
    return env, env.observe()
