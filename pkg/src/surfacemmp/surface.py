"""Surface models over a finite curve catalog, and one-curve contractions.

A model is described by the Gram matrix of the generators ``(K, C_1, ..., C_n)``.
Divisor classes are coefficient tuples over that generating set; the set need
not be linearly independent (on P^2, ``K = -3H``), only the pairing matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from . import lattice
from .errors import DimensionMismatch, NotContractible, UnknownCurve
from .lattice import PairingMatrix, as_fraction

CANONICAL = "K"
FIELDS = ("generic", "fbar_p")


@dataclass(frozen=True)
class CurveRecord:
    id: str
    genus: int = 0
    vertical: bool = False
    boundary_component: bool = False
    # a singular curve only needs p_a >= genus of its normalization
    singular: bool = False


@dataclass(frozen=True)
class SurfaceModel:
    curves: tuple
    pairing: PairingMatrix
    chi: Fraction = Fraction(1)
    smooth: bool = True
    rational_singularities: bool = True
    picard_rank: int | None = None
    field: str = "generic"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "chi", as_fraction(self.chi))
        if self.pairing.dim != len(self.curves) + 1:
            raise DimensionMismatch(
                "pairing must cover K plus every catalog curve",
                dim=self.pairing.dim,
                curves=len(self.curves),
            )

    @property
    def basis(self) -> tuple[str, ...]:
        return (CANONICAL,) + tuple(c.id for c in self.curves)

    @property
    def dim(self) -> int:
        return self.pairing.dim

    @property
    def curve_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.curves)

    def index(self, curve_id: str) -> int:
        """Basis position of a curve (K sits at 0)."""
        for i, c in enumerate(self.curves):
            if c.id == curve_id:
                return i + 1
        raise UnknownCurve(f"unknown curve id {curve_id!r}", curve=curve_id)

    def curve(self, curve_id: str) -> CurveRecord:
        return self.curves[self.index(curve_id) - 1]

    def unit(self, i: int) -> tuple:
        return tuple(Fraction(int(j == i)) for j in range(self.dim))

    def canonical(self) -> tuple:
        return self.unit(0)

    def class_of(self, curve_id: str) -> tuple:
        return self.unit(self.index(curve_id))

    def divisor(self, coefficients: Mapping[str, object]) -> tuple:
        """Class from ``{"K": 1, "E": "1/2", ...}``."""
        v = [Fraction(0)] * self.dim
        for name, coeff in coefficients.items():
            i = 0 if name == CANONICAL else self.index(name)
            v[i] += as_fraction(coeff)
        return tuple(v)

    def boundary_class(self, b: "Boundary") -> tuple:
        return self.divisor(b.coefficients)

    def log_canonical_class(self, b: "Boundary") -> tuple:
        return add(self.canonical(), self.boundary_class(b))

    def dot(self, u: Sequence, v: Sequence) -> Fraction:
        return lattice.pair(self.pairing, u, v)

    def curve_dot(self, u: Sequence, curve_id: str) -> Fraction:
        """``u . C`` read off a row of the Gram matrix."""
        j = self.index(curve_id)
        if len(u) != self.dim:
            raise DimensionMismatch("class length does not match model", dim=self.dim, length=len(u))
        return sum((ui * self.pairing[i, j] for i, ui in enumerate(u) if ui), Fraction(0))

    def self_intersection(self, curve_id: str) -> Fraction:
        j = self.index(curve_id)
        return self.pairing[j, j]

    def k_dot(self, curve_id: str) -> Fraction:
        return self.pairing[0, self.index(curve_id)]

    def describe(self, v: Sequence) -> dict[str, Fraction]:
        return {name: c for name, c in zip(self.basis, v) if c != 0}


@dataclass(frozen=True)
class Boundary:
    coefficients: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {k: as_fraction(v) for k, v in dict(self.coefficients).items()}
        object.__setattr__(self, "coefficients", coeffs)

    def __hash__(self):
        return hash(tuple(sorted(self.coefficients.items())))

    def get(self, curve_id: str) -> Fraction:
        return self.coefficients.get(curve_id, Fraction(0))

    def restrict(self, ids) -> "Boundary":
        keep = set(ids)
        return Boundary({k: v for k, v in self.coefficients.items() if k in keep})

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.coefficients.values())

    def max_coefficient(self) -> Fraction:
        return max(self.coefficients.values(), default=Fraction(0))


def add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def scale(c, v: Sequence) -> tuple:
    c = as_fraction(c)
    return tuple(c * a for a in v)


def sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    subject: str | None = None

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "subject": self.subject}


def validate_model(m: SurfaceModel, b: Boundary | None = None, boundary_mode: bool = True) -> list[Finding]:
    """Every violated model invariant; an empty list means the model is well formed."""
    b = b or Boundary()
    out: list[Finding] = []
    seen = set()
    for c in m.curves:
        if c.id in seen:
            out.append(Finding("duplicate-id", f"curve id {c.id!r} appears twice", c.id))
        seen.add(c.id)
        if c.id == CANONICAL:
            out.append(Finding("reserved-id", "curve id 'K' is reserved for the canonical class", c.id))
        if c.genus < 0:
            out.append(Finding("negative-genus", f"curve {c.id!r} has negative genus", c.id))
    for i, j in m.pairing.asymmetric_pairs():
        out.append(
            Finding("asymmetric", f"pairing not symmetric at ({m.basis[i]}, {m.basis[j]})", f"{m.basis[i]}.{m.basis[j]}")
        )
    if m.field not in FIELDS:
        out.append(Finding("field", f"unknown field tag {m.field!r}"))
    if m.picard_rank is not None and m.picard_rank < 1:
        out.append(Finding("picard-rank", "picard rank hint must be positive"))
    if m.smooth:
        for c in m.curves:
            i = m.index(c.id)
            for d in m.curves:
                v = m.pairing[i, m.index(d.id)]
                if v.denominator != 1 and c.id <= d.id:
                    out.append(
                        Finding("non-integral", f"smooth model has non-integral entry {c.id}.{d.id} = {v}", f"{c.id}.{d.id}")
                    )
            twice_pa_minus_2 = m.pairing[i, i] + m.pairing[0, i]
            if twice_pa_minus_2.denominator != 1 or twice_pa_minus_2 % 2 != 0:
                out.append(
                    Finding(
                        "adjunction",
                        f"adjunction violated for {c.id!r}: C^2 + K.C = {twice_pa_minus_2} is not 2p_a - 2 for an integer p_a",
                        c.id,
                    )
                )
                continue
            pa = int(twice_pa_minus_2) // 2 + 1
            expected_ok = pa >= c.genus if c.singular else pa == c.genus
            if not expected_ok:
                out.append(
                    Finding(
                        "adjunction",
                        f"adjunction violated for {c.id!r}: 2*{c.genus}-2 != C^2 + K.C = {twice_pa_minus_2}",
                        c.id,
                    )
                )
    ids = set(m.curve_ids)
    for cid, coeff in b.coefficients.items():
        if cid not in ids:
            out.append(Finding("unknown-boundary-curve", f"boundary references unknown curve {cid!r}", cid))
        if coeff < 0:
            out.append(Finding("boundary-negative", f"boundary coefficient of {cid!r} is negative", cid))
        elif boundary_mode and coeff > 1:
            out.append(Finding("boundary-range", f"boundary coefficient of {cid!r} exceeds 1 ({coeff})", cid))
    return out


@dataclass(frozen=True)
class BirationalMorphism:
    """Contraction of one catalog curve; coordinates on the target are the
    source coordinates with the exceptional slot removed."""

    source: SurfaceModel
    target: SurfaceModel
    exceptional: str
    discrepancy: Fraction

    @property
    def exceptional_index(self) -> int:
        return self.source.index(self.exceptional)

    def pullback(self, D: Sequence) -> tuple:
        return pullback(self, D)

    def pushforward(self, D: Sequence) -> tuple:
        return pushforward(self, D)


def pullback(f: BirationalMorphism, D: Sequence) -> tuple:
    """Mumford pullback: strict transform plus the orthogonalizing multiple of the exceptional curve."""
    if len(D) != f.target.dim:
        raise DimensionMismatch("class does not live on the target", dim=f.target.dim, length=len(D))
    k = f.exceptional_index
    strict = list(D[:k]) + [Fraction(0)] + list(D[k:])
    c2 = f.source.pairing.submatrix([k])
    rhs = f.source.curve_dot(strict, f.exceptional)
    (e,) = lattice.solve_mumford(c2, [rhs])
    strict[k] = e
    return tuple(as_fraction(x) for x in strict)


def pushforward(f: BirationalMorphism, D: Sequence) -> tuple:
    if len(D) != f.source.dim:
        raise DimensionMismatch("class does not live on the source", dim=f.source.dim, length=len(D))
    k = f.exceptional_index
    return tuple(D[:k]) + tuple(D[k + 1 :])


def contract_curve(m: SurfaceModel, b: Boundary | None, curve_id: str) -> tuple[SurfaceModel, Boundary, BirationalMorphism]:
    """Contract a curve of negative square; returns (target, pushed boundary, morphism)."""
    b = b or Boundary()
    k = m.index(curve_id)
    c = m.curves[k - 1]
    c2 = m.pairing[k, k]
    if c2 >= 0:
        raise NotContractible(
            f"curve {curve_id!r} has C^2 = {c2} >= 0: not birationally contractible in this engine",
            curve=curve_id,
            square=str(c2),
        )
    kc = m.pairing[0, k]
    discrepancy = kc / c2
    pairing = lattice.induced_pairing(m.pairing, k)
    smooth = m.smooth and c.genus == 0 and c2 == -1 and not c.singular
    rational = m.rational_singularities and (kc + c2) < 0
    target = SurfaceModel(
        curves=tuple(x for x in m.curves if x.id != curve_id),
        pairing=pairing,
        chi=m.chi,
        smooth=smooth,
        rational_singularities=rational,
        picard_rank=None if m.picard_rank is None else m.picard_rank - 1,
        field=m.field,
        name=m.name,
    )
    pushed = Boundary({cid: v for cid, v in b.coefficients.items() if cid != curve_id})
    return target, pushed, BirationalMorphism(m, target, curve_id, discrepancy)


@dataclass(frozen=True)
class CompositeMorphism:
    """A chain of one-curve contractions, source first."""

    steps: tuple

    @property
    def source(self) -> SurfaceModel:
        return self.steps[0].source

    @property
    def target(self) -> SurfaceModel:
        return self.steps[-1].target

    def pullback(self, D: Sequence) -> tuple:
        for f in reversed(self.steps):
            D = pullback(f, D)
        return tuple(D)

    def pushforward(self, D: Sequence) -> tuple:
        for f in self.steps:
            D = pushforward(f, D)
        return tuple(D)


def compose(steps: Sequence[BirationalMorphism]) -> CompositeMorphism:
    steps = tuple(steps)
    if not steps:
        raise ValueError("cannot compose an empty chain")
    for f, g in zip(steps, steps[1:]):
        if f.target != g.source:
            raise ValueError("morphisms do not chain")
    return CompositeMorphism(steps)


def with_canonical_shift(m: SurfaceModel, gamma: Sequence) -> SurfaceModel:
    """Model whose canonical generator is replaced by ``K + gamma`` (gamma a class on m)."""
    new_k = add(m.canonical(), gamma)
    n = m.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            u = new_k if i == 0 else m.unit(i)
            v = new_k if j == 0 else m.unit(j)
            row.append(m.dot(u, v))
        rows.append(row)
    return replace(m, pairing=PairingMatrix.from_rows(rows), smooth=False)
