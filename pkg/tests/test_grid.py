import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from garagegen.grid import (
    Coord,
    GridError,
    Neighborhood,
    SquareClass,
    as_matrix,
    classify_all,
    classify_square,
    drivable_degree,
    drivable_degrees,
    is_four_connected,
    manhattan,
    matrix_hash,
    neighborhood,
)

from conftest import bfs_connected, grid

coords = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


@pytest.mark.parametrize("a, b, d", [((0, 0), (0, 0), 0), ((0, 0), (3, 4), 7), ((2, 5), (5, 2), 6)])
def test_manhattan_examples(a, b, d):
    assert manhattan(a, b) == d
    assert manhattan(b, a) == d


@given(coords, coords, coords)
def test_manhattan_triangle_inequality(a, b, c):
    assert manhattan(a, c) <= manhattan(a, b) + manhattan(b, c)
    assert (manhattan(a, b) == 0) == (a == b)


def test_neighborhood_examples():
    one = np.zeros((1, 1), dtype=np.int8)
    assert neighborhood(one, (0, 0), Neighborhood.EIGHT) == [-1] * 8
    z3 = np.zeros((3, 3), dtype=np.int8)
    assert neighborhood(z3, (1, 1), Neighborhood.FOUR) == [0, 0, 0, 0]
    corner = neighborhood(z3, (0, 0), Neighborhood.EIGHT)
    assert corner.count(-1) == 5 and corner.count(0) == 3
    # N, NE, E, SE, S, SW, W, NW
    assert corner == [-1, -1, 0, 0, 0, -1, -1, -1]


def test_neighborhood_out_of_bounds_raises():
    with pytest.raises(GridError):
        neighborhood(np.zeros((2, 2), dtype=np.int8), (2, 0))


def test_classify_examples():
    assert classify_square(np.zeros((3, 3), dtype=np.int8), (0, 0)) is SquareClass.FRONTIER
    assert classify_square(np.zeros((5, 5), dtype=np.int8), (2, 2)) is SquareClass.INNER
    S = np.zeros((3, 3), dtype=np.int8)
    S[1, 1] = 1
    assert classify_square(S, (1, 1)) is SquareClass.NEITHER


def brute_class(S, r, c):
    if S[r, c] != 0:
        return SquareClass.NEITHER
    total = 0
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == dc == 0:
                continue
            rr, cc = r + dr, c + dc
            total += S[rr, cc] if 0 <= rr < S.shape[0] and 0 <= cc < S.shape[1] else -1
    if total < 0:
        return SquareClass.FRONTIER
    return SquareClass.INNER if total == 0 else SquareClass.NEITHER


def test_classify_matches_brute_force_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        h, w = rng.integers(1, 9, size=2)
        S = rng.choice([-1, 0], size=(h, w), p=[0.3, 0.7]).astype(np.int8)
        frontier, inner = classify_all(S)
        for r in range(h):
            for c in range(w):
                expected = brute_class(S, r, c)
                assert classify_square(S, (r, c)) is expected
                assert frontier[r, c] == (expected is SquareClass.FRONTIER)
                assert inner[r, c] == (expected is SquareClass.INNER)


@settings(max_examples=200)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_frontier_touches_outside_and_inner_does_not(h, w, seed):
    S = np.random.default_rng(seed).choice([-1, 0], size=(h, w)).astype(np.int8)
    for r in range(h):
        for c in range(w):
            k = classify_square(S, (r, c))
            ring = neighborhood(S, (r, c))
            assert len(ring) == 8 and len(neighborhood(S, (r, c), Neighborhood.FOUR)) == 4
            if k is SquareClass.FRONTIER:
                assert -1 in ring
            elif k is SquareClass.INNER:
                assert -1 not in ring


def test_drivable_degree_examples():
    S = grid("""
    .=.
    =.=
    .=.
    """)
    assert drivable_degree(S, (1, 1)) == 4
    S = grid("""
    .=.
    E.#
    ...
    """)  # N lane, E obstacle, S free, W entrance
    assert neighborhood(S, (1, 1), Neighborhood.FOUR) == [1, -1, 0, 2]
    assert drivable_degree(S, (1, 1)) == 2
    assert drivable_degree(np.zeros((3, 3), dtype=np.int8), (1, 1)) == 0


def test_drivable_degrees_vectorised_agrees():
    rng = np.random.default_rng(3)
    S = rng.integers(-1, 4, size=(9, 11)).astype(np.int8)
    deg = drivable_degrees(S)
    for r in range(9):
        for c in range(11):
            assert deg[r, c] == drivable_degree(S, (r, c))


def test_four_connected_matches_flood_fill():
    rng = np.random.default_rng(11)
    for _ in range(500):
        mask = rng.random((6, 7)) < 0.6
        assert is_four_connected(mask) == bfs_connected(mask)
    diag = np.array([[1, 0], [0, 1]], dtype=bool)
    assert not is_four_connected(diag)


def test_as_matrix_rejects_bad_codes_and_shapes():
    with pytest.raises(GridError):
        as_matrix([[0, 4]])
    with pytest.raises(GridError):
        as_matrix([0, 1])
    with pytest.raises(GridError):
        as_matrix(np.zeros((1025, 1)))


def test_matrix_hash_depends_on_shape_and_content():
    a = np.zeros((2, 3), dtype=np.int8)
    assert matrix_hash(a) != matrix_hash(a.reshape(3, 2))
    b = a.copy()
    b[0, 0] = 1
    assert matrix_hash(a) != matrix_hash(b)
    assert matrix_hash(a) == matrix_hash(a.astype(np.int64))
    assert Coord(1, 2) == (1, 2)
