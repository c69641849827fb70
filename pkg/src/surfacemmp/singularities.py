"""Resolution dual graphs of isolated normal surface singularities.

Canonical intersections on the resolution come from adjunction,
``K_Y.E = -E^2 + 2 p_a(E) - 2``, so a graph only stores self-intersections,
genera and edge multiplicities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import lattice
from .errors import DimensionMismatch, NotLogCanonical, NotNegativeDefinite, StructureViolation, UnknownCurve
from .lattice import PairingMatrix, as_fraction
from .surface import Boundary, CurveRecord, SurfaceModel, contract_curve

CLASSES = ("terminal", "canonical", "klt", "lc", "not-lc")


@dataclass(frozen=True)
class Vertex:
    id: str
    self_intersection: int
    genus: int = 0


@dataclass(frozen=True)
class StrictTransform:
    """A boundary component passing through the point: coefficient and how often it meets each vertex."""

    curve: str
    coefficient: Fraction
    meetings: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coefficient", as_fraction(self.coefficient))
        object.__setattr__(self, "meetings", dict(self.meetings))

    def __hash__(self):
        return hash((self.curve, self.coefficient, tuple(sorted(self.meetings.items()))))


@dataclass(frozen=True)
class ResolutionGraph:
    vertices: tuple
    edges: tuple = ()
    strict_transforms: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "strict_transforms", tuple(self.strict_transforms))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    def position(self, vid: str) -> int:
        for i, v in enumerate(self.vertices):
            if v.id == vid:
                return i
        raise UnknownCurve(f"unknown vertex {vid!r}", vertex=vid)

    def gram(self) -> PairingMatrix:
        n = len(self.vertices)
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i, v in enumerate(self.vertices):
            rows[i][i] = Fraction(v.self_intersection)
        for a, b, mult in self.edges:
            i, j = self.position(a), self.position(b)
            if i == j:
                raise DimensionMismatch(f"self-loop at {a!r}; encode nodal curves through their genus", vertex=a)
            rows[i][j] += mult
            rows[j][i] += mult
        return PairingMatrix.from_rows(rows)

    def canonical_degrees(self) -> tuple:
        return tuple(Fraction(-v.self_intersection + 2 * v.genus - 2) for v in self.vertices)

    def boundary_degrees(self) -> tuple:
        """``B'.E_j`` summed over the strict transforms with their coefficients."""
        out = [Fraction(0)] * len(self.vertices)
        for st in self.strict_transforms:
            for vid, k in st.meetings.items():
                out[self.position(vid)] += st.coefficient * k
        return tuple(out)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = {v.id: set() for v in self.vertices}
        for a, b, mult in self.edges:
            if mult > 0:
                adj[a].add(b)
                adj[b].add(a)
        seen = {self.vertices[0].id}
        stack = [self.vertices[0].id]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def validate(self) -> list[str]:
        problems = []
        if len(set(self.ids)) != len(self.ids):
            problems.append("duplicate vertex ids")
        for v in self.vertices:
            if v.self_intersection > -1:
                problems.append(f"vertex {v.id!r} has self-intersection {v.self_intersection} > -1")
            if v.genus < 0:
                problems.append(f"vertex {v.id!r} has negative genus")
        ids = set(self.ids)
        for a, b, mult in self.edges:
            if a not in ids or b not in ids:
                problems.append(f"edge ({a}, {b}) references an unknown vertex")
            elif a == b:
                problems.append(f"self-loop at {a!r}")
            if mult < 1:
                problems.append(f"edge ({a}, {b}) has non-positive multiplicity")
        for st in self.strict_transforms:
            if st.coefficient < 0:
                problems.append(f"strict transform {st.curve!r} has negative coefficient")
            for vid, k in st.meetings.items():
                if vid not in ids:
                    problems.append(f"strict transform {st.curve!r} meets unknown vertex {vid!r}")
                if k < 0:
                    problems.append(f"strict transform {st.curve!r} has negative meeting count")
        if not self.is_connected():
            problems.append("graph is not connected")
        if not problems:
            witness = lattice.negative_definite_witness(self.gram())
            if witness is not None:
                problems.append(f"intersection matrix is not negative definite (leading minor of order {witness[0]} is {witness[1]})")
        return problems

    def without_boundary(self) -> "ResolutionGraph":
        return ResolutionGraph(self.vertices, self.edges, (), self.name)


@dataclass(frozen=True)
class DiscrepancyResult:
    coefficients: Mapping[str, Fraction]
    classification: str

    def to_dict(self) -> dict:
        return {"coefficients": dict(self.coefficients), "classification": self.classification}


def classify(coefficients) -> str:
    a = list(coefficients)
    if all(x < 0 for x in a):
        return "terminal"
    if all(x <= 0 for x in a):
        return "canonical"
    if all(x < 1 for x in a):
        return "klt"
    if all(x <= 1 for x in a):
        return "lc"
    return "not-lc"


def _checked_gram(g: ResolutionGraph) -> PairingMatrix:
    gram = g.gram()
    witness = lattice.negative_definite_witness(gram)
    if witness is not None:
        raise NotNegativeDefinite(
            "intersection matrix of the exceptional curves must be negative definite; "
            "this graph is not the resolution of a normal point",
            order=witness[0],
            minor=str(witness[1]),
        )
    return gram


def discrepancies(g: ResolutionGraph) -> DiscrepancyResult:
    """Solve ``(K_Y + sum a_i E_i + B').E_j = 0`` for the coefficients ``a_i``."""
    gram = _checked_gram(g)
    rhs = [k + d for k, d in zip(g.canonical_degrees(), g.boundary_degrees())]
    a = lattice.solve_mumford(gram, rhs)
    coeffs = dict(zip(g.ids, a))
    return DiscrepancyResult(coeffs, classify(a))


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool
    effective_canonical_pullback: bool
    coefficients: Mapping[str, Fraction]
    minus_one_curves: tuple = ()

    def __bool__(self):
        return self.minimal

    def to_dict(self) -> dict:
        return {
            "minimal": self.minimal,
            "effective_canonical_pullback": self.effective_canonical_pullback,
            "coefficients": dict(self.coefficients),
            "minus_one_curves": list(self.minus_one_curves),
        }


def is_minimal_resolution(g: ResolutionGraph) -> MinimalityReport:
    """No rational (-1)-vertex; also reports whether the boundary-free a_i are all >= 0."""
    bare = discrepancies(g.without_boundary())
    bad = tuple(v.id for v in g.vertices if v.self_intersection == -1 and v.genus == 0)
    return MinimalityReport(
        minimal=not bad,
        effective_canonical_pullback=all(a >= 0 for a in bare.coefficients.values()),
        coefficients=bare.coefficients,
        minus_one_curves=bad,
    )


@dataclass(frozen=True)
class ContractionStage:
    vertex: str
    witness: Fraction  # (K+E).E under the current induced pairing
    self_intersection: Fraction
    canonical_degree: Fraction


@dataclass(frozen=True)
class StructureReport:
    sequence: tuple
    case: str  # "a": the point is Q-factorial after the sequence; "b": one lc-centre curve remains
    remaining: str | None
    discrepancies: DiscrepancyResult

    @property
    def order(self) -> list[str]:
        return [s.vertex for s in self.sequence]

    def to_dict(self) -> dict:
        return {
            "sequence": [
                {
                    "vertex": s.vertex,
                    "witness": s.witness,
                    "self_intersection": s.self_intersection,
                    "canonical_degree": s.canonical_degree,
                }
                for s in self.sequence
            ],
            "case": self.case,
            "remaining": self.remaining,
            "discrepancies": self.discrepancies.to_dict(),
        }


def local_model(g: ResolutionGraph) -> SurfaceModel:
    """The graph as a surface model over ``(K, E_1, ..., E_n, B_1, ...)``.

    Only pairings against exceptional curves are meaningful; ``K^2``, ``K.B``
    and ``B.B`` are germ-level unknowns and set to 0.
    """
    gram = g.gram()
    n = len(g.vertices)
    kdeg = g.canonical_degrees()
    names = list(g.ids) + [st.curve for st in g.strict_transforms]
    dim = 1 + len(names)
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(n):
        rows[0][i + 1] = rows[i + 1][0] = kdeg[i]
        for j in range(n):
            rows[i + 1][j + 1] = gram[i, j]
    for s, st in enumerate(g.strict_transforms):
        col = 1 + n + s
        for vid, k in st.meetings.items():
            i = 1 + g.position(vid)
            rows[i][col] = rows[col][i] = Fraction(k)
    curves = [CurveRecord(v.id, v.genus) for v in g.vertices]
    curves += [CurveRecord(st.curve, 0, boundary_component=True) for st in g.strict_transforms]
    return SurfaceModel(
        curves=tuple(curves),
        pairing=PairingMatrix.from_rows(rows),
        smooth=False,
        rational_singularities=False,
        name=g.name,
    )


def lc_contraction_sequence(g: ResolutionGraph) -> StructureReport:
    """Contract exceptional curves with ``(K+E).E < 0`` one at a time.

    Ends with nothing left (case "a") or with a single curve satisfying
    ``(K+E).E = 0`` and no boundary through the point (case "b").
    """
    disc = discrepancies(g)
    if disc.classification == "not-lc":
        raise NotLogCanonical("not log canonical", coefficients={k: str(v) for k, v in disc.coefficients.items()})
    model = local_model(g)
    boundary = Boundary({st.curve: st.coefficient for st in g.strict_transforms})
    remaining = list(g.ids)
    stages: list[ContractionStage] = []
    while remaining:
        scored = []
        for vid in remaining:
            e2 = model.self_intersection(vid)
            ke = model.k_dot(vid)
            scored.append((ke + e2, vid, e2, ke))
        # most negative (K+E).E first, then lowest id
        eligible = sorted(s for s in scored if s[0] < 0)
        if not eligible:
            break
        value, vid, e2, ke = eligible[0]
        model, boundary, _ = contract_curve(model, boundary, vid)
        remaining.remove(vid)
        stages.append(ContractionStage(vid, value, e2, ke))
    if not remaining:
        return StructureReport(tuple(stages), "a", None, disc)
    if len(remaining) == 1:
        vid = remaining[0]
        value = model.k_dot(vid) + model.self_intersection(vid)
        boundary_free = all(st.coefficient == 0 for st in g.strict_transforms)
        if value == 0 and boundary_free:
            if disc.coefficients[vid] != 1:
                raise StructureViolation(
                    f"case (b) terminal vertex {vid!r} has coefficient {disc.coefficients[vid]} != 1",
                    vertex=vid,
                )
            return StructureReport(tuple(stages), "b", vid, disc)
    raise StructureViolation(
        "structure theorem violated — input invalid: no remaining curve has (K+E).E < 0",
        remaining=remaining,
    )


@dataclass(frozen=True)
class FundamentalCycle:
    cycle: Mapping[str, int]
    arithmetic_genus: Fraction
    is_rational: bool

    def to_dict(self) -> dict:
        return {"cycle": dict(self.cycle), "arithmetic_genus": self.arithmetic_genus, "is_rational": self.is_rational}


def fundamental_cycle(g: ResolutionGraph) -> FundamentalCycle:
    """Laufer's increment loop from ``Z = sum E_i``; rational iff ``p_a(Z) = 0``."""
    gram = _checked_gram(g)
    if not g.is_connected():
        raise DimensionMismatch("fundamental cycle needs a connected graph")
    n = len(g.vertices)
    z = [1] * n
    while True:
        for i in range(n):
            if sum(gram[i, j] * z[j] for j in range(n)) > 0:
                z[i] += 1
                break
        else:
            break
    zf = tuple(Fraction(x) for x in z)
    z2 = lattice.pair(gram, zf, zf)
    kz = sum((k * x for k, x in zip(g.canonical_degrees(), zf)), Fraction(0))
    pa = 1 + (z2 + kz) / 2
    return FundamentalCycle(dict(zip(g.ids, z)), pa, pa == 0)


def to_dot(g: ResolutionGraph) -> str:
    """Undirected DOT edge list; vertices labelled ``id (self-intersection[, genus])``."""
    lines = [f"graph {_dot_id(g.name or 'resolution')} {{"]
    for v in g.vertices:
        label = f"{v.id} ({v.self_intersection}" + (f", g={v.genus})" if v.genus else ")")
        lines.append(f"  {_dot_id(v.id)} [label={_dot_id(label)}];")
    for a, b, mult in g.edges:
        attr = f" [label={mult}]" if mult != 1 else ""
        lines.append(f"  {_dot_id(a)} -- {_dot_id(b)}{attr};")
    for st in g.strict_transforms:
        lines.append(f"  {_dot_id(st.curve)} [shape=box, label={_dot_id(f'{st.curve} ({st.coefficient})')}];")
        for vid, k in st.meetings.items():
            if k:
                attr = f" [style=dashed, label={k}]" if k != 1 else " [style=dashed]"
                lines.append(f"  {_dot_id(st.curve)} -- {_dot_id(vid)}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def chain(self_intersections, name: str = "") -> ResolutionGraph:
    """Linear chain ``E1 - E2 - ...`` of rational curves."""
    vs = [Vertex(f"E{i + 1}", s) for i, s in enumerate(self_intersections)]
    edges = [(f"E{i + 1}", f"E{i + 2}", 1) for i in range(len(vs) - 1)]
    return ResolutionGraph(tuple(vs), tuple(edges), name=name)


def cycle(self_intersections, name: str = "") -> ResolutionGraph:
    g = chain(self_intersections, name)
    n = len(g.vertices)
    return ResolutionGraph(g.vertices, g.edges + ((f"E{n}", "E1", 1),), name=name)


def star(arms, centre: int = -2, name: str = "") -> ResolutionGraph:
    """Central rational curve with chains attached; ``arms`` lists self-intersections per arm."""
    vs = [Vertex("E0", centre)]
    edges = []
    for a, arm in enumerate(arms):
        prev = "E0"
        for k, s in enumerate(arm):
            vid = f"E{a + 1}{k + 1}"
            vs.append(Vertex(vid, s))
            edges.append((prev, vid, 1))
            prev = vid
    return ResolutionGraph(tuple(vs), tuple(edges), name=name)

