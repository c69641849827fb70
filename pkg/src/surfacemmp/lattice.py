"""Exact rational symmetric bilinear forms.

Everything here works over :class:`fractions.Fraction`. Matrices are stored as
tuples of tuples so that values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import DimensionMismatch, NotNegativeDefinite

Rational = Fraction
CoeffVector = tuple  # tuple[Fraction, ...]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; use Fraction, int or 'p/q' strings")
    return Fraction(x)


def vector(values: Iterable) -> CoeffVector:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class PairingMatrix:
    """A square rational matrix, usually the Gram matrix of a generating set.

    Symmetry is not enforced at construction so that validators can report it.
    """

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(x) for x in row) for row in self.entries)
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise DimensionMismatch("pairing matrix is not square", dim=n, row_length=len(row))
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "PairingMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def is_symmetric(self) -> bool:
        n = self.dim
        return all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(i + 1, n))

    def asymmetric_pairs(self) -> list[tuple[int, int]]:
        n = self.dim
        return [(i, j) for i in range(n) for j in range(i + 1, n) if self.entries[i][j] != self.entries[j][i]]

    def apply(self, v: Sequence) -> CoeffVector:
        if len(v) != self.dim:
            raise DimensionMismatch("vector length does not match matrix", dim=self.dim, length=len(v))
        return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in self.entries)

    def submatrix(self, indices: Sequence[int]) -> "PairingMatrix":
        return PairingMatrix(tuple(tuple(self.entries[i][j] for j in indices) for i in indices))

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self.entries]


def pair(M: PairingMatrix, u: Sequence, v: Sequence) -> Fraction:
    """Return ``u^T M v``."""
    if len(u) != M.dim or len(v) != M.dim:
        raise DimensionMismatch(
            "vector length does not match pairing dimension", dim=M.dim, lengths=[len(u), len(v)]
        )
    total = Fraction(0)
    for i, ui in enumerate(u):
        if ui == 0:
            continue
        row = M.entries[i]
        total += ui * sum((row[j] * vj for j, vj in enumerate(v) if vj != 0), Fraction(0))
    return total


def _integer_scaled(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    """Scale every entry by the common denominator; returns (integer rows, scale)."""
    scale = 1
    for row in rows:
        for x in row:
            scale = lcm(scale, x.denominator)
    return [[int(x * scale) for x in row] for row in rows], scale


def leading_minors(M: PairingMatrix) -> list[Fraction]:
    """Leading principal minors, read off the pivots of fraction-free elimination.

    Elimination stops after the first vanishing minor; the returned list is then
    shorter than ``M.dim`` and ends with that zero.
    """
    a, scale = _integer_scaled(M.entries)
    n = len(a)
    minors: list[Fraction] = []
    prev = 1
    for k in range(n):
        pivot = a[k][k]
        minors.append(Fraction(pivot, scale ** (k + 1)))
        if pivot == 0:
            break
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return minors


def negative_definite_witness(M: PairingMatrix) -> tuple[int, Fraction] | None:
    """``None`` if negative definite, else ``(k, minor)`` for the first failing minor order k."""
    minors = leading_minors(M)
    for k, m in enumerate(minors, start=1):
        if m == 0 or (m > 0) != (k % 2 == 0):
            return k, m
    return None


def is_negative_definite(M: PairingMatrix) -> bool:
    """Sylvester's criterion: ``(-1)^k`` times the k-th leading minor is positive for all k."""
    if not M.is_symmetric():
        return False
    return negative_definite_witness(M) is None


def bareiss_solve(A: Sequence[Sequence], b: Sequence) -> CoeffVector | None:
    """Solve ``A x = b`` exactly by fraction-free elimination with row pivoting.

    Returns ``None`` when ``A`` is singular.
    """
    n = len(A)
    if len(b) != n or any(len(row) != n for row in A):
        raise DimensionMismatch("system is not square", rows=n, rhs=len(b))
    if n == 0:
        return ()
    aug, _ = _integer_scaled([[as_fraction(x) for x in row] + [as_fraction(bi)] for row, bi in zip(A, b)])
    # each row was scaled by the same factor, so the solution is unchanged
    prev = 1
    for k in range(n):
        p = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if p is None:
            return None
        if p != k:
            aug[k], aug[p] = aug[p], aug[k]
        pivot = aug[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                aug[i][j] = (aug[i][j] * pivot - aug[i][k] * aug[k][j]) // prev
            aug[i][k] = 0
        prev = pivot
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(aug[i][n]) - sum((aug[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        x[i] = s / aug[i][i]
    return tuple(x)


def solve_mumford(M: PairingMatrix, rhs: Sequence) -> CoeffVector:
    """Coefficients ``e`` with ``M e = -rhs``.

    With ``M`` the Gram matrix of exceptional curves and ``rhs_j = D'.E_j`` this
    makes ``D' + sum e_i E_i`` orthogonal to every ``E_j``.
    """
    if len(rhs) != M.dim:
        raise DimensionMismatch("rhs length does not match pairing dimension", dim=M.dim, length=len(rhs))
    if not M.is_symmetric():
        raise NotNegativeDefinite("exceptional Gram matrix is not symmetric")
    witness = negative_definite_witness(M)
    if witness is not None:
        k, minor = witness
        raise NotNegativeDefinite(
            "exceptional Gram matrix is not negative definite; orthogonal lift is not unique",
            order=k,
            minor=str(minor),
        )
    solution = bareiss_solve(M.entries, [-as_fraction(r) for r in rhs])
    assert solution is not None  # negative definite implies invertible
    return solution


def induced_pairing(M: PairingMatrix, index: int) -> PairingMatrix:
    """Pairing on the remaining generators after contracting generator ``index``.

    ``D1.D2 := (D1 + a1 C).(D2 + a2 C)`` with ``a_i = -(D_i.C)/C^2``, which
    simplifies to ``D1.D2 - (D1.C)(D2.C)/C^2``.
    """
    c2 = M[index, index]
    if c2 >= 0:
        raise NotNegativeDefinite("contracted generator must have negative square", square=str(c2))
    keep = [i for i in range(M.dim) if i != index]
    rows = []
    for i in keep:
        ci = M[i, index]
        rows.append(tuple(M[i, j] - ci * M[j, index] / c2 for j in keep))
    return PairingMatrix(tuple(rows))
