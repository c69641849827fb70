"""Nef regions of boundaries as exact rational polytopes.

Boundaries are points ``B = sum b_i B_i`` of the box ``0 <= b_i <= ceil(delta_i)``
spanned by the components of a fixed boundary; a curve ``C`` cuts out the
halfspace ``(K + B).C >= 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import lattice
from .errors import ConfigError, NotInPolytope, UnknownCurve
from .lattice import as_fraction
from .surface import Boundary, SurfaceModel

MIN_LENGTH = Fraction(3)


@dataclass(frozen=True)
class BoundaryCube:
    component_ids: tuple
    upper_bounds: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "component_ids", tuple(self.component_ids))
        bounds = dict(self.upper_bounds)
        object.__setattr__(self, "upper_bounds", bounds)
        if len(set(self.component_ids)) != len(self.component_ids):
            raise ConfigError("cube components must be distinct")
        for cid in self.component_ids:
            u = bounds.get(cid)
            if not isinstance(u, int) or u < 1:
                raise ConfigError(f"upper bound of {cid!r} must be a positive integer, got {u!r}")

    def __hash__(self):
        return hash((self.component_ids, tuple(sorted(self.upper_bounds.items()))))

    @property
    def dim(self) -> int:
        return len(self.component_ids)

    @classmethod
    def from_boundary(cls, b: Boundary) -> "BoundaryCube":
        """Components are the support of b; each bound is the round-up of its coefficient."""
        ids = tuple(cid for cid, v in b.coefficients.items() if v > 0)
        return cls(ids, {cid: max(1, math.ceil(b.get(cid))) for cid in ids})


@dataclass(frozen=True)
class Halfspace:
    """``normal . x >= offset``."""

    normal: tuple
    offset: Fraction
    label: str = ""

    def value(self, x: Sequence) -> Fraction:
        return sum((a * b for a, b in zip(self.normal, x)), Fraction(0))

    def satisfied(self, x: Sequence) -> bool:
        return self.value(x) >= self.offset

    def tight(self, x: Sequence) -> bool:
        return self.value(x) == self.offset

    def to_dict(self) -> dict:
        return {"normal": list(self.normal), "offset": self.offset, "label": self.label}


@dataclass(frozen=True)
class RationalPolytope:
    coordinates: tuple
    halfspaces: tuple
    vertices: tuple
    bases: tuple  # bases[i]: indices of dim independent halfspaces tight at vertices[i]

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    @property
    def empty(self) -> bool:
        return not self.vertices

    def first_violated(self, x: Sequence) -> int | None:
        for i, h in enumerate(self.halfspaces):
            if not h.satisfied(x):
                return i
        return None

    def contains(self, x: Sequence) -> bool:
        return self.first_violated(x) is None

    def point(self, b: Boundary | Sequence) -> tuple:
        if isinstance(b, Boundary):
            extra = [cid for cid, v in b.coefficients.items() if v != 0 and cid not in self.coordinates]
            if extra:
                raise NotInPolytope(f"boundary has components outside the cube: {extra}", components=extra)
            return tuple(b.get(cid) for cid in self.coordinates)
        return tuple(as_fraction(x) for x in b)

    def to_dict(self) -> dict:
        return {
            "coordinates": list(self.coordinates),
            "halfspaces": [h.to_dict() for h in self.halfspaces],
            "vertices": [list(v) for v in self.vertices],
        }


def length_constant(m: SurfaceModel, cube: BoundaryCube) -> Fraction:
    """``max({3} | {-(K + u_i B_i).B_i : B_i^2 < 0})`` over the cube components."""
    values = [MIN_LENGTH]
    for cid in cube.component_ids:
        b2 = m.self_intersection(cid)
        if b2 < 0:
            values.append(-(m.k_dot(cid) + cube.upper_bounds[cid] * b2))
    return max(values)


def cube_halfspaces(cube: BoundaryCube) -> list[Halfspace]:
    n = cube.dim
    out = []
    for i, cid in enumerate(cube.component_ids):
        e = tuple(Fraction(int(j == i)) for j in range(n))
        out.append(Halfspace(e, Fraction(0), f"{cid} >= 0"))
        out.append(Halfspace(tuple(-x for x in e), Fraction(-cube.upper_bounds[cid]), f"{cid} <= {cube.upper_bounds[cid]}"))
    return out


def nef_halfspace(m: SurfaceModel, cube: BoundaryCube, curve_id: str) -> Halfspace:
    normal = tuple(m.pairing[m.index(cid), m.index(curve_id)] for cid in cube.component_ids)
    return Halfspace(normal, -m.k_dot(curve_id), f"(K+B).{curve_id} >= 0")


def enumerate_vertices(halfspaces: Sequence[Halfspace], dim: int) -> tuple[tuple, tuple]:
    """Vertices by solving every dim-subset of constraints as equalities.

    Returns (vertices, certifying bases), vertices sorted lexicographically.
    """
    found: dict[tuple, tuple] = {}
    for subset in itertools.combinations(range(len(halfspaces)), dim):
        A = [halfspaces[i].normal for i in subset]
        rhs = [halfspaces[i].offset for i in subset]
        x = lattice.bareiss_solve(A, rhs)
        if x is None:
            continue
        if all(h.satisfied(x) for h in halfspaces) and x not in found:
            found[x] = subset
    ordered = sorted(found)
    return tuple(ordered), tuple(found[v] for v in ordered)


def nef_polytope(m: SurfaceModel, cube: BoundaryCube, curve_set: Sequence[str]) -> RationalPolytope:
    """Boundaries in the cube with ``(K+B).C >= 0`` for each listed curve."""
    if not curve_set:
        raise ConfigError("curve set must be non-empty")
    for cid in list(cube.component_ids) + list(curve_set):
        if cid not in m.curve_ids:
            raise UnknownCurve(f"unknown curve id {cid!r}", curve=cid)
    hs = cube_halfspaces(cube) + [nef_halfspace(m, cube, cid) for cid in curve_set]
    vertices, bases = enumerate_vertices(hs, cube.dim)
    return RationalPolytope(cube.component_ids, tuple(hs), vertices, bases)


def _face_vertices(P: RationalPolytope, tight: Sequence[int]) -> list[int]:
    return [i for i, v in enumerate(P.vertices) if all(P.halfspaces[t].tight(v) for t in tight)]


def decompose_boundary(delta: Boundary | Sequence, P: RationalPolytope) -> list[tuple[Fraction, int]]:
    """Write delta as a convex combination of at most dim+1 vertices.

    Repeatedly shoot a ray from a vertex of the current face through the point;
    where it leaves the polytope lies a strictly smaller face, on which we recurse.
    """
    x = P.point(delta)
    bad = P.first_violated(x)
    if bad is not None:
        h = P.halfspaces[bad]
        raise NotInPolytope(f"boundary violates constraint {h.label}", index=bad, constraint=h.label)
    terms: list[tuple[Fraction, int]] = []
    weight = Fraction(1)
    point = x
    while True:
        tight = [i for i, h in enumerate(P.halfspaces) if h.tight(point)]
        face = _face_vertices(P, tight)
        v0 = face[0]
        if P.vertices[v0] == point:
            terms.append((weight, v0))
            break
        vertex = P.vertices[v0]
        direction = tuple(p - q for p, q in zip(point, vertex))
        # largest t with vertex + t*direction feasible; t > 1 because point is not on the exit facet
        t_exit = None
        for h in P.halfspaces:
            rate = h.value(direction)
            if rate < 0:
                t = (h.value(vertex) - h.offset) / -rate
                if t_exit is None or t < t_exit:
                    t_exit = t
        exit_point = tuple(q + t_exit * d for q, d in zip(vertex, direction))
        # point = (1 - 1/t) vertex + (1/t) exit_point
        terms.append((weight * (1 - 1 / t_exit), v0))
        weight = weight / t_exit
        point = exit_point
    merged: dict[int, Fraction] = {}
    for w, i in terms:
        merged[i] = merged.get(i, Fraction(0)) + w
    return [(w, i) for i, w in merged.items() if w != 0]


def reconstruct(terms: Sequence[tuple[Fraction, int]], P: RationalPolytope) -> tuple:
    out = [Fraction(0)] * P.dim
    for w, i in terms:
        for k, c in enumerate(P.vertices[i]):
            out[k] += w * c
    return tuple(out)
