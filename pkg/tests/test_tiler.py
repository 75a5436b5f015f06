from itertools import product

import numpy as np
import pytest

from garagegen.evaluator import evaluate
from garagegen.grid import GridError
from garagegen.tiler import (
    PARKING_KINDS,
    TileKind,
    classify_lane_tile,
    classify_parking_tile,
    lane_tile,
    parking_tile,
    tile_map,
)

from conftest import PERIMETER_7x9, SERPENTINE_7x9, grid

C, T, S_, P1, P2, P3, F = (TileKind.CROSSROADS, TileKind.TJUNCTION, TileKind.STRAIGHT,
                           TileKind.PARK1, TileKind.PARK2, TileKind.PARK3, TileKind.FREE)

# drivable sides "NESW" -> (lane tile, parking tile), written out by hand
TRUTH = {
    "....": ((S_, "N"), (F, "N")),
    "N...": ((S_, "N"), (P3, "N")),
    ".E..": ((S_, "N"), (P3, "E")),
    "..S.": ((S_, "N"), (P3, "S")),
    "...W": ((S_, "N"), (P3, "W")),
    "N.S.": ((S_, "N"), (P1, "N")),
    ".E.W": ((S_, "E"), (P1, "E")),
    "NE..": ((S_, "N"), (P2, "N")),
    ".ES.": ((S_, "E"), (P2, "E")),
    "..SW": ((S_, "S"), (P2, "S")),
    "N..W": ((S_, "N"), (P2, "N")),
    "NES.": ((T, "E"), (P1, "N")),
    ".ESW": ((T, "S"), (P1, "E")),
    "N.SW": ((T, "W"), (P1, "N")),
    "NE.W": ((T, "N"), (P1, "N")),
    "NESW": ((C, "N"), (P1, "N")),
}


def pattern_of(key):
    return tuple(ch != "." for ch in key)


def embed(key, centre):
    """3x3 matrix with ``centre`` code and lanes on the drivable sides."""
    S = np.zeros((3, 3), dtype=np.int8)
    S[1, 1] = centre
    for flag, (r, c) in zip(pattern_of(key), ((0, 1), (1, 2), (2, 1), (1, 0))):
        if flag:
            S[r, c] = 1
    return S


def test_truth_table_is_complete():
    assert set(map(pattern_of, TRUTH)) == set(product((False, True), repeat=4))


@pytest.mark.parametrize("key", sorted(TRUTH))
def test_truth_table(key):
    lane, park = TRUTH[key]
    assert lane_tile(pattern_of(key)) == lane
    assert parking_tile(pattern_of(key)) == park
    assert classify_lane_tile(embed(key, 1), (1, 1)) == lane
    assert classify_parking_tile(embed(key, 0), (1, 1)) == park


def test_entrance_and_exit_count_as_drivable():
    S = grid("""
    .E.
    .=.
    .X.
    """)
    assert classify_lane_tile(S, (1, 1)) == (S_, "N")
    assert classify_parking_tile(S, (0, 0)) == (P3, "E")


def test_wrong_code_raises():
    with pytest.raises(GridError):
        classify_lane_tile(np.zeros((1, 1), dtype=np.int8), (0, 0))
    with pytest.raises(GridError):
        classify_parking_tile(np.ones((1, 1), dtype=np.int8), (0, 0))


def test_all_obstacle():
    t = tile_map(np.full((2, 3), -1, dtype=np.int8))
    assert t.shape == (2, 3)
    assert t.counts()[TileKind.OBSTACLE] == 6


@pytest.mark.parametrize("layout", [SERPENTINE_7x9, PERIMETER_7x9])
def test_cover_and_consistency(layout):
    S = grid(layout)
    t = tile_map(S)
    counts = t.counts()
    assert sum(counts.values()) == S.size
    e = evaluate(S)
    assert sum(counts[k] for k in PARKING_KINDS) == e.n_spots
    assert counts[TileKind.FREE] == e.unused
    lane_kinds = {t.tiles[r][c][0] for r, c in np.argwhere(S == 1)}
    assert lane_kinds <= {C, T, S_}


def test_kind_multiset_invariant_under_transpose():
    rng = np.random.default_rng(0)
    for _ in range(100):
        S = rng.integers(-1, 4, size=(5, 7)).astype(np.int8)
        a = tile_map(S).counts()
        b = tile_map(S.T.copy()).counts()
        assert a == b


def test_rows_round_trip():
    from garagegen.tiler import TileMap
    t = tile_map(grid(SERPENTINE_7x9))
    assert TileMap.from_rows(t.to_rows(), t.source_hash) == t
