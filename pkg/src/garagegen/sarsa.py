"""Tabular Sarsa with epsilon-greedy behaviour and a top-K layout archive."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .env import ACTIONS, Action, LaneEnv, RewardConfig, State, Status, StepRecord, episode_return
from .evaluator import EvalCoefficients, evaluate
from .grid import matrix_hash

_ZEROS = (0.0,) * len(ACTIONS)


class QTable:
    """Action values keyed by state; absent entries read as 0."""

    def __init__(self):
        self._t: dict[State, list[float]] = {}

    def values(self, s: State) -> tuple[float, ...] | list[float]:
        return self._t.get(s, _ZEROS)

    def get(self, s: State, a: Action) -> float:
        return self.values(s)[a]

    def set(self, s: State, a: Action, value: float) -> None:
        row = self._t.get(s)
        if row is None:
            row = self._t[s] = list(_ZEROS)
        row[a] = value

    def greedy(self, s: State) -> Action:
        """Argmax action; ties go to the lowest action index."""
        vals = self.values(s)
        best = 0
        for i in range(1, len(vals)):
            if vals[i] > vals[best]:
                best = i
        return ACTIONS[best]

    @property
    def entry_count(self) -> int:
        return len(self._t) * len(ACTIONS)

    def __len__(self) -> int:
        return len(self._t)

    def dump(self, path: str | Path) -> None:
        """Write one ``key<TAB>values`` line per state, sorted by key."""
        rows = sorted((s.key(), v) for s, v in self._t.items())
        with open(path, "w") as f:
            for key, vals in rows:
                f.write(f"{key}\t{json.dumps(vals)}\n")

    @classmethod
    def load(cls, path: str | Path) -> QTable:
        q = cls()
        with open(path) as f:
            for line in f:
                key, vals = line.rstrip("\n").split("\t")
                q._t[State.from_key(key)] = [float(x) for x in json.loads(vals)]
        return q


@dataclass
class SarsaConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    eps0: float = 0.3
    eps_decay: float = 0.999
    eps_min: float = 0.01
    stagnation_window: int = 100
    episodes: int = 5000
    archive_k: int = 200
    seed: int = 0
    checkpoint_every: int = 0  # 0 disables periodic Q-table checkpoints

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")
        if not 0 <= self.eps0 <= 1 or not 0 <= self.eps_min <= 1:
            raise ValueError("eps0 and eps_min must be in [0, 1]")
        if not 0 < self.eps_decay <= 1:
            raise ValueError("eps_decay must be in (0, 1]")
        if self.episodes < 1 or self.archive_k < 1 or self.stagnation_window < 1:
            raise ValueError("episodes, archive_k and stagnation_window must be >= 1")


def select_action(q: QTable, s: State, eps: float, rng: random.Random) -> Action:
    if rng.random() < eps:
        return ACTIONS[rng.randrange(len(ACTIONS))]
    return q.greedy(s)


def sarsa_update(
    q: QTable,
    s: State,
    a: Action,
    r: float,
    s2: State | None,
    a2: Action | None,
    cfg: SarsaConfig,
) -> float:
    """One on-policy TD step; ``s2=None`` marks a terminal successor."""
    old = q.get(s, a)
    nxt = 0.0 if s2 is None else q.get(s2, a2)
    new = old + cfg.alpha * (r + cfg.gamma * nxt - old)
    q.set(s, a, new)
    return new


def epsilon_schedule(episode: int, best_hash_age: int, cfg: SarsaConfig) -> float:
    if best_hash_age >= cfg.stagnation_window:
        return cfg.eps0
    return max(cfg.eps_min, cfg.eps0 * cfg.eps_decay ** episode)


@dataclass
class ArchiveEntry:
    hash: str
    matrix: np.ndarray
    score: float
    episode: int


class Archive:
    """Top-K layouts by score, unique by matrix hash."""

    def __init__(self, k: int):
        self.k = k
        self.entries: list[ArchiveEntry] = []
        self._hashes: set[str] = set()

    def insert(self, matrix: np.ndarray, score: float, episode: int, digest: str | None = None) -> bool:
        digest = digest or matrix_hash(matrix)
        if digest in self._hashes:
            return False
        if len(self.entries) >= self.k and score <= self.entries[-1].score:
            return False
        # after any equal scores, so earlier discoveries keep their rank
        i = len(self.entries)
        while i > 0 and self.entries[i - 1].score < score:
            i -= 1
        self.entries.insert(i, ArchiveEntry(digest, matrix.copy(), score, episode))
        self._hashes.add(digest)
        if len(self.entries) > self.k:
            self._hashes.discard(self.entries.pop().hash)
        return True

    @property
    def best(self) -> ArchiveEntry | None:
        return self.entries[0] if self.entries else None

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class CurveRow:
    episode: int
    ret: float
    score: float
    epsilon: float


@dataclass
class RunArtifacts:
    curve: list[CurveRow]
    archive: list[ArchiveEntry]
    qtable: QTable
    config: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def best(self) -> ArchiveEntry:
        return self.archive[0]


def train(
    garage: np.ndarray,
    env_cfg: RewardConfig,
    cfg: SarsaConfig,
    k: EvalCoefficients = EvalCoefficients(),
    *,
    qtable: QTable | None = None,
    on_episode: Callable[[CurveRow], None] | None = None,
    audit: Callable[[int, StepRecord], None] | None = None,
    checkpoint: Callable[[int, QTable], None] | None = None,
) -> RunArtifacts:
    """Run ``cfg.episodes`` Sarsa episodes on ``garage``.

    Each episode's final (last unfailed) working matrix is scored and offered
    to the archive. Epsilon decays from the last refresh point and is reset to
    ``eps0`` once the archive head has stayed the same for
    ``stagnation_window`` episodes; the Q-table is kept across refreshes.
    """
    rng = random.Random(cfg.seed)
    q = qtable if qtable is not None else QTable()
    env = LaneEnv(garage, env_cfg)
    archive = Archive(cfg.archive_k)
    curve: list[CurveRow] = []
    scores: dict[str, float] = {}
    best_hash = None
    age = 0
    refreshed_at = 0

    for episode in range(cfg.episodes):
        eps = epsilon_schedule(episode - refreshed_at, age, cfg)
        if age >= cfg.stagnation_window:
            refreshed_at, age = episode, 0
        if audit is not None:
            env.audit = lambda rec, _ep=episode: audit(_ep, rec)

        s = env.reset()
        a = select_action(q, s, eps, rng)
        while True:
            s2, r, status = env.step(a)
            if status is not Status.RUNNING:
                sarsa_update(q, s, a, r, None, None, cfg)
                break
            a2 = select_action(q, s2, eps, rng)
            sarsa_update(q, s, a, r, s2, a2, cfg)
            s, a = s2, a2

        final = env.trace.matrix
        digest = matrix_hash(final)
        score = scores.get(digest)
        if score is None:
            score = scores[digest] = evaluate(final, k).score
        archive.insert(final, score, episode, digest)
        row = CurveRow(episode, episode_return(env.trace), score, eps)
        curve.append(row)
        if on_episode is not None:
            on_episode(row)

        head = archive.best.hash
        age = age + 1 if head == best_hash else 0
        best_hash = head
        if checkpoint is not None and cfg.checkpoint_every and (episode + 1) % cfg.checkpoint_every == 0:
            checkpoint(episode + 1, q)

    echo = {"reward": asdict(env_cfg), "sarsa": asdict(cfg), "coefficients": asdict(k)}
    return RunArtifacts(curve, list(archive.entries), q, echo, cfg.seed)
