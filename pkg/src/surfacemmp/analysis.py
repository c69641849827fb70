"""Numerical certificates for divisors on a surface model.

Kodaira dimension is never computed. Where semi-ampleness depends on it, the
numerical dimension (2 for nef classes of positive square, at most 1 otherwise)
stands in, and a caller-declared Kodaira dimension is the only way past the
non-big case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .errors import ConfigError
from .lattice import as_fraction
from .surface import Boundary, SurfaceModel, sub

CATALOG_NOTE = "relative to catalog: only the declared curves were tested"


@dataclass(frozen=True)
class Inequality:
    """One checked numerical statement, kept so a certificate can be replayed."""

    statement: str
    value: Fraction
    relation: str  # one of ">=", ">", "<", "=="
    bound: Fraction
    holds: bool

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "value": self.value,
            "relation": self.relation,
            "bound": self.bound,
            "holds": self.holds,
        }


def _check(statement: str, value, relation: str, bound=0) -> Inequality:
    value, bound = as_fraction(value), as_fraction(bound)
    holds = {
        ">=": value >= bound,
        ">": value > bound,
        "<": value < bound,
        "<=": value <= bound,
        "==": value == bound,
    }[relation]
    return Inequality(statement, value, relation, bound, holds)


def degrees(m: SurfaceModel, D: Sequence) -> dict[str, Fraction]:
    return {cid: m.curve_dot(D, cid) for cid in m.curve_ids}


def is_nef(m: SurfaceModel, D: Sequence) -> bool:
    return all(v >= 0 for v in degrees(m, D).values())


def is_numerically_trivial(m: SurfaceModel, D: Sequence) -> bool:
    return all(m.dot(D, m.unit(j)) == 0 for j in range(m.dim))


def numerical_dimension(m: SurfaceModel, D: Sequence) -> int | None:
    """2, 1 or 0 for classes nef on the catalog; None when D is not nef."""
    if not is_nef(m, D):
        return None
    if m.dot(D, D) > 0:
        return 2
    return 0 if is_numerically_trivial(m, D) else 1


def euler_char(m: SurfaceModel, D: Sequence) -> Fraction:
    """Riemann-Roch on a smooth model: ``chi(O) + D.(D - K)/2``."""
    if not m.smooth:
        raise ConfigError("Riemann-Roch is only applied on smooth models")
    return m.chi + m.dot(D, sub(D, m.canonical())) / 2


def keel_locus(m: SurfaceModel, L: Sequence) -> list[str]:
    """Catalog curves on which the nef class L has degree zero."""
    deg = degrees(m, L)
    negative = [cid for cid, v in deg.items() if v < 0]
    if negative:
        raise ConfigError(f"class is not nef on the catalog (negative on {negative})", curves=negative)
    return [cid for cid, v in deg.items() if v == 0]


@dataclass(frozen=True)
class KeelReport:
    locus: tuple
    square: Fraction
    notes: tuple

    def to_dict(self) -> dict:
        return {"locus": list(self.locus), "square": self.square, "notes": list(self.notes)}


def keel_report(m: SurfaceModel, L: Sequence) -> KeelReport:
    locus = keel_locus(m, L)
    square = m.dot(L, L)
    notes = []
    if not locus and square > 0:
        notes.append("semi-ample by Keel reduction (ample case)")
    for cid in locus:
        if m.curve(cid).genus == 0:
            notes.append(f"{cid}: restriction to P^1 is automatically semi-ample")
        else:
            notes.append(f"{cid}: restriction to a curve of genus {m.curve(cid).genus} must be checked separately")
    notes.append(CATALOG_NOTE)
    return KeelReport(tuple(locus), square, tuple(notes))


CONSISTENT = "no constraint"
INCONSISTENT = "model inconsistent with adjunction theorem: (K+C).C < 0 forces C = P^1"
RATIONAL_OK = "consistent: (K+C).C < 0 and C is rational"
TORSION_CASE = "P^1 or torsion normal bundle case: (K+C).C = 0"


@dataclass(frozen=True)
class AdjunctionVerdict:
    curve: str
    degree: Fraction  # (K+C).C
    verdict: str
    consistent: bool

    def to_dict(self) -> dict:
        return {"curve": self.curve, "degree": self.degree, "verdict": self.verdict, "consistent": self.consistent}


def adjunction_check(m: SurfaceModel, curve_id: str) -> AdjunctionVerdict:
    degree = m.k_dot(curve_id) + m.self_intersection(curve_id)
    genus = m.curve(curve_id).genus
    if degree < 0:
        if genus > 0:
            return AdjunctionVerdict(curve_id, degree, INCONSISTENT, False)
        return AdjunctionVerdict(curve_id, degree, RATIONAL_OK, True)
    if degree == 0:
        return AdjunctionVerdict(curve_id, degree, TORSION_CASE, True)
    return AdjunctionVerdict(curve_id, degree, CONSISTENT, True)


@dataclass(frozen=True)
class CanonicalTypeVerdict:
    is_canonical_type: bool
    canonical_degrees: Mapping[str, Fraction]
    cycle_degrees: Mapping[str, Fraction]
    connected: bool
    gcd: int
    reasons: tuple = ()

    def __bool__(self):
        return self.is_canonical_type

    def to_dict(self) -> dict:
        return {
            "is_canonical_type": self.is_canonical_type,
            "canonical_degrees": dict(self.canonical_degrees),
            "cycle_degrees": dict(self.cycle_degrees),
            "connected": self.connected,
            "gcd": self.gcd,
            "reasons": list(self.reasons),
        }


def _connected(m: SurfaceModel, ids: Sequence[str]) -> bool:
    ids = list(ids)
    if not ids:
        return False
    seen, stack = {ids[0]}, [ids[0]]
    while stack:
        a = stack.pop()
        for b in ids:
            if b not in seen and m.pairing[m.index(a), m.index(b)] > 0:
                seen.add(b)
                stack.append(b)
    return len(seen) == len(ids)


def detect_canonical_type(m: SurfaceModel, components: Mapping[str, int]) -> CanonicalTypeVerdict:
    """Is ``Y = sum n_i E_i`` an indecomposable curve of canonical type?

    Needs ``K.E_i = Y.E_i = 0`` for all i, connected support and ``gcd(n_i) = 1``.
    """
    for cid, n in components.items():
        m.index(cid)
        if not isinstance(n, int) or n <= 0:
            raise ConfigError(f"multiplicity of {cid!r} must be a positive integer")
    y = m.divisor(components)
    kdeg = {cid: m.k_dot(cid) for cid in components}
    ydeg = {cid: m.curve_dot(y, cid) for cid in components}
    connected = _connected(m, list(components))
    g = 0
    for n in components.values():
        g = gcd(g, n)
    reasons = []
    if any(v != 0 for v in kdeg.values()):
        reasons.append("K.E_i != 0 for some component")
    if any(v != 0 for v in ydeg.values()):
        reasons.append("Y.E_i != 0 for some component")
    if not connected:
        reasons.append("support is not connected")
    if g != 1:
        reasons.append(f"gcd of multiplicities is {g}")
    return CanonicalTypeVerdict(not reasons, kdeg, ydeg, connected, g, tuple(reasons))


@dataclass(frozen=True)
class Certificate:
    issued: bool
    conclusion: str
    checks: tuple
    assumptions: tuple = ()
    reason: str | None = None

    def __bool__(self):
        return self.issued

    def to_dict(self) -> dict:
        return {
            "issued": self.issued,
            "conclusion": self.conclusion,
            "reason": self.reason,
            "checks": [c.to_dict() for c in self.checks],
            "assumptions": list(self.assumptions),
        }


def _refuse(reason: str, checks, assumptions=()) -> Certificate:
    return Certificate(False, "no certificate", tuple(checks), tuple(assumptions), reason)


def bpf_certificate(
    m: SurfaceModel,
    b: Boundary,
    D: Sequence,
    cartier: bool = True,
    difference_semi_ample: bool = False,
) -> Certificate:
    """Basepoint-free hypotheses for a nef Cartier D on a Q-factorial surface.

    Requires boundary coefficients in [0, 1), D nef, and either D - (K+Delta)
    nef with positive square or a declared semi-ample D - (K+Delta).
    """
    checks: list[Inequality] = []
    assumptions = [
        "catalog completeness: nefness tested only on declared curves",
        "the surface is Q-factorial",
    ]
    for cid, coeff in sorted(b.coefficients.items()):
        checks.append(_check(f"delta_{cid} >= 0", coeff, ">="))
        checks.append(_check(f"delta_{cid} < 1", coeff, "<", 1))
    if any(c < 0 for c in b.coefficients.values()):
        return _refuse("boundary coefficients must be non-negative", checks, assumptions)
    if any(c >= 1 for c in b.coefficients.values()):
        return _refuse("strict boundary required by the hypothesis delta_j < 1", checks, assumptions)
    if not cartier:
        return _refuse("D must be Cartier; no Cartier declaration was supplied", checks, assumptions)
    assumptions.append("D is Cartier (declared by caller)")
    nef_checks = [_check(f"D.{cid} >= 0", v, ">=") for cid, v in degrees(m, D).items()]
    checks.extend(nef_checks)
    if not all(c.holds for c in nef_checks):
        return _refuse("D not nef", checks, assumptions)
    N = sub(D, m.log_canonical_class(b))
    n_checks = [_check(f"(D-(K+Delta)).{cid} >= 0", v, ">=") for cid, v in degrees(m, N).items()]
    square = _check("(D-(K+Delta))^2 > 0", m.dot(N, N), ">")
    checks.extend(n_checks)
    checks.append(square)
    if all(c.holds for c in n_checks) and square.holds:
        return Certificate(
            True, "D is semi-ample (D-(K+Delta) nef and big), " + CATALOG_NOTE, tuple(checks), tuple(assumptions)
        )
    if difference_semi_ample:
        assumptions.append("D-(K+Delta) is semi-ample (declared by caller)")
        return Certificate(
            True, "D is semi-ample (D-(K+Delta) semi-ample), " + CATALOG_NOTE, tuple(checks), tuple(assumptions)
        )
    return _refuse("D-(K+Delta) is not nef and big on the catalog", checks, assumptions)


def abundance_certificate(m: SurfaceModel, b: Boundary, kappa: int | None = None) -> Certificate:
    """Semi-ampleness of a nef K+Delta, keyed on its numerical dimension.

    Big classes get a certificate outright. Otherwise one is issued only when the
    caller declares the Kodaira dimension (1 or 0); numerical data cannot tell
    nu = 1 with kappa = 0 apart from the semi-ample cases.
    """
    L = m.log_canonical_class(b)
    checks = [_check(f"(K+Delta).{cid} >= 0", v, ">=") for cid, v in degrees(m, L).items()]
    square = m.dot(L, L)
    checks.append(_check("(K+Delta)^2 > 0", square, ">"))
    nu = numerical_dimension(m, L)
    if nu is None:
        return _refuse("K+Delta is not nef on the catalog", checks)
    if nu == 2:
        return Certificate(True, "K+Delta is semi-ample (nef and big), " + CATALOG_NOTE, tuple(checks))
    if kappa is None:
        return _refuse(
            f"numerical dimension {nu}: semi-ampleness needs a Kodaira dimension declaration "
            "(nef classes with nu = 1 and kappa = 0 need not be semi-ample)",
            checks,
        )
    if kappa == nu:
        return Certificate(
            True,
            f"K+Delta is semi-ample (declared kappa = {kappa} equals numerical dimension), " + CATALOG_NOTE,
            tuple(checks),
            (f"Kodaira dimension {kappa} (declared by caller)",),
        )
    return _refuse(f"declared kappa = {kappa} differs from numerical dimension {nu}", checks)


@dataclass(frozen=True)
class DivisorReport:
    nef_on_catalog: bool
    self_intersection: Fraction
    big_certificate: bool
    keel_locus: tuple
    euler_char: Fraction | None
    numerical_dimension: int | None
    degrees: Mapping[str, Fraction] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "nef_on_catalog": self.nef_on_catalog,
            "self_intersection": self.self_intersection,
            "big_certificate": self.big_certificate,
            "keel_locus": list(self.keel_locus),
            "euler_char": self.euler_char,
            "numerical_dimension": self.numerical_dimension,
            "degrees": dict(self.degrees),
        }


def divisor_report(m: SurfaceModel, D: Sequence) -> DivisorReport:
    deg = degrees(m, D)
    nef = all(v >= 0 for v in deg.values())
    square = m.dot(D, D)
    locus = tuple(cid for cid, v in deg.items() if v == 0) if nef else ()
    chi = euler_char(m, D) if m.smooth else None
    return DivisorReport(nef, square, nef and square > 0, locus, chi, numerical_dimension(m, D), deg)
