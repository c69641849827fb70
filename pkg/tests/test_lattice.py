from fractions import Fraction as F
import random

import pytest
from hypothesis import given, settings, strategies as st

from surfacemmp.errors import DimensionMismatch, NotNegativeDefinite
from surfacemmp.lattice import (
    PairingMatrix,
    bareiss_solve,
    induced_pairing,
    is_negative_definite,
    leading_minors,
    pair,
    solve_mumford,
)

from oracles import gauss_jordan_solve, induced_by_pullback, random_negative_definite_graph, sympy_minors

A1 = PairingMatrix.from_rows([[-2]])
A2 = PairingMatrix.from_rows([[-2, 1], [1, -2]])
A3 = PairingMatrix.from_rows([[-2, 1, 0], [1, -2, 1], [0, 1, -2]])
TRIANGLE = PairingMatrix.from_rows([[-2, 1, 1], [1, -2, 1], [1, 1, -2]])


def test_pair_examples():
    assert pair(A1, (1,), (1,)) == -2
    assert pair(A2, (0, 0), (1, 5)) == 0
    assert pair(A2, (1, 0), (0, 1)) == 1


def test_pair_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pair(A2, (1,), (1, 0))


def test_rejects_floats():
    with pytest.raises(TypeError):
        PairingMatrix.from_rows([[0.5]])


@pytest.mark.parametrize(
    "M, expected",
    [(A1, True), (A2, True), (A3, True), (TRIANGLE, False), (PairingMatrix.from_rows([[1]]), False)],
)
def test_negative_definite_examples(M, expected):
    assert is_negative_definite(M) is expected


def test_minors_match_hand_values():
    assert leading_minors(A2) == [-2, 3]
    assert leading_minors(A3) == [-2, 3, -4]
    # the triangle stops at its vanishing determinant
    assert leading_minors(TRIANGLE) == [-2, 3, 0]


def test_asymmetric_is_not_negative_definite():
    assert not is_negative_definite(PairingMatrix.from_rows([[-2, 1], [0, -2]]))


@pytest.mark.parametrize(
    "M, rhs, expected",
    [
        (A1, (1,), (F(1, 2),)),
        (A2, (0, 0), (0, 0)),
        (A2, (1, 0), (F(2, 3), F(1, 3))),
    ],
)
def test_solve_mumford_examples(M, rhs, expected):
    assert solve_mumford(M, rhs) == expected


def test_solve_mumford_rejects_degenerate():
    with pytest.raises(NotNegativeDefinite):
        solve_mumford(TRIANGLE, (1, 0, 0))


def test_solve_mumford_dimension():
    with pytest.raises(DimensionMismatch):
        solve_mumford(A2, (1,))


def test_bareiss_singular():
    assert bareiss_solve([[1, 2], [2, 4]], [1, 2]) is None
    assert bareiss_solve([[0, 1], [1, 0]], [3, 4]) == (4, 3)


def _random_nd(rng):
    g = random_negative_definite_graph(rng, max_vertices=6)
    # a positive rational multiple stays negative definite and is no longer integral
    c = F(rng.randint(1, 5), rng.randint(1, 5))
    return [[c * x for x in row] for row in g.gram().to_lists()]


def test_solve_mumford_against_gauss_jordan_oracle():
    rng = random.Random(7)
    for _ in range(60):
        rows = _random_nd(rng)
        M = PairingMatrix.from_rows(rows)
        assert is_negative_definite(M)
        rhs = tuple(F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in rows)
        e = solve_mumford(M, rhs)
        assert e == gauss_jordan_solve(rows, [-r for r in rhs])
        # orthogonality against each basis vector, exactly
        for j in range(M.dim):
            unit = tuple(int(i == j) for i in range(M.dim))
            assert pair(M, e, unit) + rhs[j] == 0


def test_minors_against_sympy():
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(1, 5)
        rows = [[F(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = F(rng.randint(-6, 6), rng.randint(1, 3))
        mine = leading_minors(PairingMatrix.from_rows(rows))
        ref = sympy_minors(rows)
        assert mine == ref[: len(mine)]
        if len(mine) < n:
            assert mine[-1] == 0


def test_induced_pairing_against_lift_oracle():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(2, 5)
        rows = [[F(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = F(rng.randint(-4, 4), rng.randint(1, 2))
        k = rng.randrange(n)
        rows[k][k] = -F(rng.randint(1, 4), rng.randint(1, 3))
        assert induced_pairing(PairingMatrix.from_rows(rows), k).to_lists() == induced_by_pullback(rows, k)


small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(small, min_size=n * n, max_size=n * n), st.lists(small, min_size=n, max_size=n), st.lists(small, min_size=n, max_size=n))))
def test_pair_bilinear_symmetric(data):
    n, flat, u, v = data
    rows = [[flat[i * n + j] if i <= j else flat[j * n + i] for j in range(n)] for i in range(n)]
    M = PairingMatrix.from_rows(rows)
    assert pair(M, u, v) == pair(M, v, u)
    w = [a + b for a, b in zip(u, v)]
    assert pair(M, w, v) == pair(M, u, v) + pair(M, v, v)
    assert pair(M, [3 * a for a in u], v) == 3 * pair(M, u, v)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(small, min_size=n * n, max_size=n * n))))
def test_definiteness_verdict_is_exhibitable(data):
    n, flat = data
    rows = [[flat[i * n + j] if i <= j else flat[j * n + i] for j in range(n)] for i in range(n)]
    M = PairingMatrix.from_rows(rows)
    minors = leading_minors(M)
    if is_negative_definite(M):
        solve_mumford(M, [1] * n)
    else:
        assert any(m == 0 or (m > 0) != (k % 2 == 0) for k, m in enumerate(minors, 1))
