"""Seeded generation of the static layer: contour, entrances/exits, obstacles.

The pipeline runs in a fixed order (contour, then entrances and exits, then
obstacles). Frontier/inner tests are always evaluated on the {-1, 0}
"contour view" of the matrix, before any entrance code can inflate a
neighbour sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .grid import (
    CellCode,
    Coord,
    classify_all,
    is_four_connected,
    manhattan,
    neighbor_sums,
)

ENTRANCE_NEIGHBOR_SUM = -3  # straight-wall midpoint; corners sum to -5


class GenerationError(RuntimeError):
    def __init__(self, message: str, retries_used: int = 0):
        super().__init__(message)
        self.retries_used = retries_used


class ConstraintInfeasible(GenerationError):
    def __init__(self, constraint: str, message: str, retries_used: int = 0):
        super().__init__(f"{constraint}: {message}", retries_used)
        self.constraint = constraint


@dataclass(frozen=True)
class Rect:
    """Inclusive cell rectangle."""

    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self):
        if self.top > self.bottom or self.left > self.right:
            raise ValueError(f"degenerate rectangle {self}")

    @classmethod
    def from_corners(cls, a: tuple[int, int], b: tuple[int, int]) -> Rect:
        return cls(min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1]))

    def touches(self, other: Rect) -> bool:
        """True when the two rectangles overlap or share an edge."""
        gap_r = max(self.top, other.top) - min(self.bottom, other.bottom)
        gap_c = max(self.left, other.left) - min(self.right, other.right)
        return (gap_r <= 0 and gap_c <= 1) or (gap_c <= 0 and gap_r <= 1)

    def mask(self, h: int, w: int) -> np.ndarray:
        m = np.zeros((h, w), dtype=bool)
        m[self.top:self.bottom + 1, self.left:self.right + 1] = True
        return m


@dataclass
class StaticGenConfig:
    h: int = 20
    w: int = 20
    n_rects: int = 3
    n_entrances: int = 1
    n_exits: int = 1
    sigma1: int = 10
    sigma2: int = 4
    n_obstacles: int = 0
    seed: int = 0
    max_retries: int = 1000
    full_rect: bool = False  # skip random rectangles, use the whole grid

    def __post_init__(self):
        if not (1 <= self.h <= 1024 and 1 <= self.w <= 1024):
            raise ValueError(f"grid {self.h}x{self.w} outside 1..1024")
        if self.n_rects < 1:
            raise ValueError("n_rects must be >= 1")
        if self.n_entrances < 1 or self.n_exits < 1:
            raise ValueError("need at least one entrance and one exit")
        if self.n_obstacles < 0:
            raise ValueError("n_obstacles must be >= 0")
        if self.sigma1 < 1 or self.sigma2 < 1:
            raise ValueError("sigma1 and sigma2 must be >= 1")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")


@dataclass(frozen=True)
class Violation:
    code: str
    coords: tuple[Coord, ...] = ()
    message: str = ""


@dataclass
class StaticReport:
    contour_cell_count: int
    entrance_coords: list[Coord]
    exit_coords: list[Coord]
    obstacle_coords: list[Coord]
    retries_used: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class Contour:
    matrix: np.ndarray
    rects: list[Rect]
    retries: int


def rasterize(rects: list[Rect], h: int, w: int) -> np.ndarray:
    """Union of ``rects`` as a matrix: 0 inside, -1 outside."""
    S = np.full((h, w), CellCode.OBSTACLE, dtype=np.int8)
    for r in rects:
        S[r.top:r.bottom + 1, r.left:r.right + 1] = CellCode.FREE
    return S


def rects_connected(rects: list[Rect]) -> bool:
    """4-connectivity of the union, decided on the rectangle touch graph."""
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(len(rects)):
            if j not in seen and rects[i].touches(rects[j]):
                seen.add(j)
                stack.append(j)
    return len(seen) == len(rects)


def has_pinhole(S: np.ndarray) -> bool:
    """A -1 cell whose eight neighbours all lie on the floor plan.

    Such a hole would be indistinguishable from a placed obstacle.
    """
    return bool(((S < 0) & (neighbor_sums(contour_view(S)) == 0)).any())


def sample_rects(cfg: StaticGenConfig, rng: np.random.Generator) -> list[Rect]:
    pts = rng.integers(0, [cfg.h, cfg.w], size=(cfg.n_rects, 2, 2))
    return [Rect.from_corners(tuple(p[0]), tuple(p[1])) for p in pts.tolist()]


def generate_contour(cfg: StaticGenConfig, rng: np.random.Generator) -> Contour:
    """Draw rectangle sets until their union is a single 4-connected region."""
    if cfg.full_rect:
        rects = [Rect(0, 0, cfg.h - 1, cfg.w - 1)]
        return Contour(rasterize(rects, cfg.h, cfg.w), rects, 0)
    for attempt in range(cfg.max_retries):
        rects = sample_rects(cfg, rng)
        if not rects_connected(rects):
            continue
        S = rasterize(rects, cfg.h, cfg.w)
        if has_pinhole(S):
            continue
        return Contour(S, rects, attempt)
    raise GenerationError(
        f"no connected contour after {cfg.max_retries} rectangle draws", cfg.max_retries
    )


def contour_view(S: np.ndarray) -> np.ndarray:
    """Map every floor cell to 0, keeping -1 elsewhere."""
    return -(np.asarray(S) < 0).astype(np.int8)


def _entrance_mask(S: np.ndarray) -> np.ndarray:
    sums = neighbor_sums(S)
    return (S == CellCode.FREE) & (sums == ENTRANCE_NEIGHBOR_SUM)


def entrance_candidates(S: np.ndarray) -> list[Coord]:
    """Frontier cells whose 8-neighbour sum is exactly -3 (no corners)."""
    return [Coord(int(r), int(c)) for r, c in np.argwhere(_entrance_mask(S))]


def _max_pair_distance(a: np.ndarray) -> int:
    if len(a) < 2:
        return 0
    s, d = a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]
    return int(max(s.max() - s.min(), d.max() - d.min()))


def _sequential_pick(
    candidates: np.ndarray,
    k: int,
    compatible,
    rng: np.random.Generator,
    max_retries: int,
    constraint: str,
) -> list[Coord]:
    """Draw ``k`` cells one at a time, uniformly among those still compatible.

    ``compatible(pool, pick)`` maps an ``(n, 2)`` array of cells to a keep
    mask. A dead end restarts the draw; ``max_retries`` restarts are allowed.
    """
    for _ in range(max_retries):
        chosen: list[Coord] = []
        pool = candidates
        while len(chosen) < k and len(pool):
            pick = pool[int(rng.integers(len(pool)))]
            chosen.append(Coord(int(pick[0]), int(pick[1])))
            pool = pool[compatible(pool, pick)]
        if len(chosen) == k:
            return chosen
    raise ConstraintInfeasible(
        constraint, f"could not place {k} cells after {max_retries} attempts", max_retries
    )


def _manhattan_to(pool: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.abs(pool - p).sum(axis=1)


def place_entrances(S: np.ndarray, cfg: StaticGenConfig, rng: np.random.Generator) -> np.ndarray:
    if not ((S >= CellCode.OBSTACLE) & (S <= CellCode.FREE)).all():
        raise ValueError("entrances must be placed on a {-1, 0} contour matrix")
    k = cfg.n_entrances + cfg.n_exits
    cands = np.argwhere(_entrance_mask(S))
    if len(cands) < k:
        raise ConstraintInfeasible(
            "entrance-count", f"{len(cands)} eligible wall cells for {k} entrances/exits"
        )
    if _max_pair_distance(cands) < cfg.sigma1:
        raise ConstraintInfeasible(
            "sigma1", f"largest eligible pair distance {_max_pair_distance(cands)} < {cfg.sigma1}"
        )
    chosen = _sequential_pick(
        cands, k, lambda pool, p: _manhattan_to(pool, p) >= cfg.sigma1, rng, cfg.max_retries, "sigma1"
    )
    out = S.copy()
    for i, (r, c) in enumerate(chosen):
        out[r, c] = CellCode.ENTRANCE if i < cfg.n_entrances else CellCode.EXIT
    return out


def place_obstacles(S: np.ndarray, cfg: StaticGenConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.n_obstacles == 0:
        return S.copy()
    if not (S == CellCode.ENTRANCE).any():
        raise ValueError("place entrances before obstacles")
    _, inner = classify_all(contour_view(S))
    inner &= S == CellCode.FREE
    cands = np.argwhere(inner)
    if len(cands) < cfg.n_obstacles:
        raise ConstraintInfeasible(
            "obstacle-count", f"{len(cands)} inner squares for {cfg.n_obstacles} obstacles"
        )
    if cfg.n_obstacles > 1 and _max_pair_distance(cands) < cfg.sigma2:
        raise ConstraintInfeasible("sigma2", f"no inner pair at distance >= {cfg.sigma2}")

    def compatible(pool: np.ndarray, placed: np.ndarray) -> np.ndarray:
        # a cell 8-adjacent to a placed obstacle is no longer inner
        chebyshev = np.abs(pool - placed).max(axis=1)
        return (chebyshev >= 2) & (_manhattan_to(pool, placed) >= cfg.sigma2)

    chosen = _sequential_pick(cands, cfg.n_obstacles, compatible, rng, cfg.max_retries, "sigma2")
    out = S.copy()
    for r, c in chosen:
        out[r, c] = CellCode.OBSTACLE
    return out


def generate_static(cfg: StaticGenConfig) -> tuple[np.ndarray, StaticReport]:
    """Full static pipeline for ``cfg.seed``.

    When entrance or obstacle placement is infeasible on a drawn contour the
    contour is redrawn; every redraw counts toward ``retries_used``.
    """
    rng = np.random.default_rng(cfg.seed)
    retries = 0
    last: GenerationError | None = None
    for _ in range(cfg.max_retries):
        contour = generate_contour(cfg, rng)
        retries += contour.retries
        try:
            S = place_entrances(contour.matrix, cfg, rng)
            S = place_obstacles(S, cfg, rng)
        except ConstraintInfeasible as exc:
            last = exc
            retries += 1
            if cfg.full_rect:
                break  # the contour is fixed, redrawing cannot help
            continue
        report = validate_static(S, cfg)
        report.retries_used = retries
        return S, report
    assert last is not None
    raise ConstraintInfeasible(last.constraint, str(last), retries)


def _obstacle_cells(S: np.ndarray) -> list[Coord]:
    # -1 cells whose eight neighbours are all on the floor plan
    isolated = (S == CellCode.OBSTACLE) & (neighbor_sums(contour_view(S)) == 0)
    return [Coord(int(r), int(c)) for r, c in np.argwhere(isolated)]


def validate_static(S: np.ndarray, cfg: StaticGenConfig | None = None) -> StaticReport:
    """Recompute every static placement constraint from scratch.

    Never raises on a bad layout; problems come back as ``violations``.
    """
    S = np.asarray(S)
    entrances = [Coord(int(r), int(c)) for r, c in np.argwhere(S == CellCode.ENTRANCE)]
    exits = [Coord(int(r), int(c)) for r, c in np.argwhere(S == CellCode.EXIT)]
    obstacles = _obstacle_cells(S)
    v: list[Violation] = []

    base = contour_view(S)
    for r, c in obstacles:
        base[r, c] = CellCode.FREE
    floor = base >= 0
    report = StaticReport(int(floor.sum()), entrances, exits, obstacles, violations=v)

    if not floor.any():
        v.append(Violation("contour-empty", (), "no floor cells"))
        return report
    if not is_four_connected(floor):
        v.append(Violation("contour-connected", (), "floor plan is not 4-connected"))

    sums = neighbor_sums(base)
    for name, cells in (("entrance", entrances), ("exit", exits)):
        for p in cells:
            s = int(sums[p])
            if s >= 0:
                v.append(Violation(f"{name}-frontier", (p,), f"neighbour sum {s} is not negative"))
            elif s != ENTRANCE_NEIGHBOR_SUM:
                v.append(Violation(f"{name}-corner", (p,), f"neighbour sum {s} != -3"))

    sigma1 = cfg.sigma1 if cfg else 1
    sigma2 = cfg.sigma2 if cfg else 1
    for a, b in combinations(entrances + exits, 2):
        if manhattan(a, b) < sigma1:
            v.append(Violation("sigma1", (a, b), f"distance {manhattan(a, b)} < {sigma1}"))
    for a, b in combinations(obstacles, 2):
        if manhattan(a, b) < sigma2:
            v.append(Violation("sigma2", (a, b), f"distance {manhattan(a, b)} < {sigma2}"))

    if cfg is not None:
        if len(entrances) != cfg.n_entrances:
            v.append(Violation("entrance-count", tuple(entrances), f"expected {cfg.n_entrances}"))
        if len(exits) != cfg.n_exits:
            v.append(Violation("exit-count", tuple(exits), f"expected {cfg.n_exits}"))
        if len(obstacles) != cfg.n_obstacles:
            v.append(Violation("obstacle-count", tuple(obstacles), f"expected {cfg.n_obstacles}"))
    elif not entrances:
        v.append(Violation("entrance-count", (), "no entrance"))
    return report
