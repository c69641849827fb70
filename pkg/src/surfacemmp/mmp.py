"""The (K+Delta)-minimal model program over a curve catalog.

Nefness, extremality and the end-state checks are all relative to the
declared catalog: the driver certifies what the catalog shows, it never proves
statements about curves it was not told about.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, InvalidModel
from .surface import (
    Boundary,
    SurfaceModel,
    contract_curve,
    sub,
    scale,
    validate_model,
)

log = logging.getLogger(__name__)

MODES = ("QF", "FP", "LC")
MINIMAL_MODEL = "MinimalModel"
MORI_FIBER = "MoriFiberOverCurve"
FANO = "FanoRhoOne"

# length bounds for R-boundaries: C^2 <= 0 gives 2, any extremal ray has a curve with 3
NEGATIVE_CURVE_LENGTH = Fraction(2)
RAY_LENGTH = Fraction(3)


@dataclass(frozen=True)
class MMPConfig:
    mode: str = "QF"
    relative: bool = False
    max_steps: int | None = None

    def __post_init__(self):
        mode = self.mode.upper()
        if mode not in MODES:
            raise ConfigError(f"unknown MMP mode {self.mode!r}; expected one of {', '.join(MODES)}")
        object.__setattr__(self, "mode", mode)
        if self.max_steps is not None and self.max_steps < 0:
            raise ConfigError("max_steps must be non-negative")

    @property
    def boundary_mode(self) -> bool:
        return self.mode != "FP"


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    subject: str | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "subject": self.subject}


@dataclass(frozen=True)
class EndState:
    kind: str
    witness: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "witness": self.witness}


@dataclass
class MMPRun:
    config: MMPConfig
    initial: SurfaceModel
    boundary: Boundary
    steps: list = field(default_factory=list)
    values: list = field(default_factory=list)  # (K_i + Delta_i).C_i per step
    end_state: EndState | None = None
    final: SurfaceModel | None = None
    final_boundary: Boundary | None = None
    validator_log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.validator_log)

    @property
    def discrepancies(self) -> list[Fraction]:
        return [f.discrepancy for f in self.steps]

    def to_dict(self) -> dict:
        steps = []
        for f, value in zip(self.steps, self.values):
            k = f.exceptional_index
            c2 = f.source.pairing[k, k]
            kc = f.source.pairing[0, k]
            steps.append(
                {
                    "curve": f.exceptional,
                    "genus": f.source.curve(f.exceptional).genus,
                    "self_intersection": c2,
                    "canonical_degree": kc,
                    "log_canonical_degree": value,
                    "adjunction_degree": kc + c2,
                    "discrepancy": f.discrepancy,
                    "basis_dim": [f.source.dim, f.target.dim],
                }
            )
        final = self.final
        return {
            "model": self.initial.name,
            "mode": self.config.mode,
            "relative": self.config.relative,
            "steps": steps,
            "end_state": self.end_state.to_dict() if self.end_state else None,
            "final": {
                "basis": list(final.basis),
                "pairing": final.pairing.to_lists(),
                "boundary": dict(sorted(self.final_boundary.coefficients.items())),
                "smooth": final.smooth,
                "rational_singularities": final.rational_singularities,
                "picard_rank": final.picard_rank,
            },
            "validators": [c.to_dict() for c in self.validator_log],
            "ok": self.ok,
            "note": "nef, extremal and end-state verdicts are relative to the curve catalog",
        }


def log_canonical_degree(m: SurfaceModel, b: Boundary, curve_id: str) -> Fraction:
    return m.curve_dot(m.log_canonical_class(b), curve_id)


def _candidates(m: SurfaceModel, cfg: MMPConfig):
    return [c for c in m.curves if c.vertical or not cfg.relative]


def find_negative_curve(m: SurfaceModel, b: Boundary, cfg: MMPConfig | None = None) -> str | None:
    """Curve with C^2 < 0 minimizing (K+Delta).C < 0; ties go to catalog order."""
    cfg = cfg or MMPConfig()
    best = None
    for c in _candidates(m, cfg):
        if m.self_intersection(c.id) >= 0:
            continue
        value = log_canonical_degree(m, b, c.id)
        if value < 0 and (best is None or value < best[0]):
            best = (value, c.id)
    return None if best is None else best[1]


def check_prerequisites(m: SurfaceModel, b: Boundary, cfg: MMPConfig) -> None:
    findings = validate_model(m, b, boundary_mode=cfg.boundary_mode)
    range_errors = [f for f in findings if f.code == "boundary-range"]
    if range_errors:
        raise ConfigError(
            f"mode {cfg.mode} requires boundary coefficients <= 1: " + "; ".join(f.message for f in range_errors),
            findings=[f.to_dict() for f in range_errors],
        )
    if findings:
        raise InvalidModel(
            "model fails validation: " + "; ".join(f.message for f in findings),
            findings=[f.to_dict() for f in findings],
        )
    if cfg.mode == "FP" and m.field != "fbar_p":
        raise ConfigError("FP mode requires a model over the algebraic closure of a finite field (field = fbar_p)")


def run_mmp(m: SurfaceModel, b: Boundary | None = None, cfg: MMPConfig | None = None) -> MMPRun:
    """Contract negative curves until none is left, then classify the end state."""
    b = b or Boundary()
    cfg = cfg or MMPConfig()
    check_prerequisites(m, b, cfg)
    run = MMPRun(cfg, m, b)
    cap = len(m.curves) if cfg.max_steps is None else min(cfg.max_steps, len(m.curves))
    model, boundary = m, b
    while len(run.steps) < cap:
        cid = find_negative_curve(model, boundary, cfg)
        if cid is None:
            break
        value = log_canonical_degree(model, boundary, cid)
        model, boundary, f = contract_curve(model, boundary, cid)
        log.debug("contracted %s: (K+D).C = %s, discrepancy %s", cid, value, f.discrepancy)
        run.steps.append(f)
        run.values.append(value)
    run.final, run.final_boundary = model, boundary
    run.end_state = classify_end_state(model, boundary, cfg)
    if len(run.steps) == cap and find_negative_curve(model, boundary, cfg) is not None:
        run.validator_log.append(Check("step-cap", False, f"stopped at the step cap {cap} with a contractible curve left"))
    run.validator_log.extend(_step_checks(run))
    run.validator_log.extend(_end_state_checks(run))
    if cfg.boundary_mode:
        run.validator_log.extend(validate_length_bounds(run, b))
    return run


def mmp_over_fp(m: SurfaceModel, b: Boundary | None = None, relative: bool = False, max_steps: int | None = None) -> MMPRun:
    """Same driver; over the closure of a finite field every surface is Q-factorial and
    boundary coefficients may exceed 1."""
    return run_mmp(m, b, MMPConfig("FP", relative, max_steps))


def classify_end_state(m: SurfaceModel, b: Boundary, cfg: MMPConfig) -> EndState:
    negatives = []
    for c in _candidates(m, cfg):
        value = log_canonical_degree(m, b, c.id)
        if value < 0:
            negatives.append((m.self_intersection(c.id), value, c.id))
    if not negatives:
        return EndState(MINIMAL_MODEL)
    contractible = [x for x in negatives if x[0] < 0]
    if contractible:
        # only reachable when the step cap stopped the run early
        return EndState("Incomplete", min(contractible, key=lambda x: x[1])[2])
    # witness: the shortest curve, -(K+Delta).C smallest, ties to catalog order
    fibres = [x for x in negatives if x[0] == 0]
    if fibres:
        return EndState(MORI_FIBER, max(fibres, key=lambda x: x[1])[2])
    return EndState(FANO, max(negatives, key=lambda x: x[1])[2])


def _step_checks(run: MMPRun) -> list[Check]:
    out = []
    boundary = run.boundary
    rational = run.initial.rational_singularities
    for f, value in zip(run.steps, run.values):
        src = f.source
        b_i = boundary.restrict(src.curve_ids)
        recomputed = log_canonical_degree(src, b_i, f.exceptional)
        out.append(
            Check(
                "negative-step",
                recomputed < 0 and recomputed == value,
                f"(K+Delta).{f.exceptional} = {recomputed}",
                f.exceptional,
            )
        )
        drop = src.dim - f.target.dim
        hint_ok = src.picard_rank is None or f.target.picard_rank == src.picard_rank - 1
        out.append(Check("rho-drop", drop == 1 and hint_ok, f"basis {src.dim} -> {f.target.dim}", f.exceptional))
        if run.config.relative:
            vertical = src.curve(f.exceptional).vertical
            out.append(Check("relative-scope", vertical, "contracted curve is vertical" if vertical else "non-vertical curve contracted", f.exceptional))
        k = f.exceptional_index
        adj = src.pairing[0, k] + src.pairing[k, k]
        licensed = rational and adj < 0
        flag = f.target.rational_singularities
        out.append(
            Check(
                "rationality-flag",
                flag == licensed and not (flag and not src.rational_singularities),
                f"(K+C).C = {adj}; flag {src.rational_singularities} -> {flag}",
                f.exceptional,
            )
        )
        rational = licensed
    return out


def _orthogonal_complement(m: SurfaceModel, c_index: int) -> list[tuple]:
    """Basis of ``{v : v.C = 0}`` inside the span of the generators."""
    f = [m.pairing[i, c_index] for i in range(m.dim)]
    pivot = next((i for i, x in enumerate(f) if x != 0), None)
    if pivot is None:
        return [m.unit(i) for i in range(m.dim)]
    out = []
    for j in range(m.dim):
        if j == pivot:
            continue
        v = [Fraction(0)] * m.dim
        v[j] = Fraction(1)
        v[pivot] = -f[j] / f[pivot]
        out.append(tuple(v))
    return out


def fibre_degeneracy(m: SurfaceModel, curve_id: str) -> list[tuple[int, int, Fraction]]:
    """Pairs of the orthogonal-complement basis that do not pair to zero (empty when degenerate)."""
    basis = _orthogonal_complement(m, m.index(curve_id))
    bad = []
    for i, u in enumerate(basis):
        for j in range(i, len(basis)):
            value = m.dot(u, basis[j])
            if value != 0:
                bad.append((i, j, value))
    return bad


def proportionality_failures(m: SurfaceModel, curve_id: str) -> list[str]:
    """Generators not numerically proportional to the curve (tested against every generator)."""
    c = m.class_of(curve_id)
    c2 = m.dot(c, c)
    bad = []
    for i, name in enumerate(m.basis):
        g = m.unit(i)
        residual = sub(g, scale(m.dot(g, c) / c2, c))
        if any(m.dot(residual, m.unit(j)) != 0 for j in range(m.dim)):
            bad.append(name)
    return bad


def _end_state_checks(run: MMPRun) -> list[Check]:
    m, b, end = run.final, run.final_boundary, run.end_state
    cfg = run.config
    out = []
    if end.kind == MINIMAL_MODEL:
        worst = [c.id for c in _candidates(m, cfg) if log_canonical_degree(m, b, c.id) < 0]
        out.append(Check("nef-on-catalog", not worst, "K+Delta is nef on every catalog curve" if not worst else f"negative on {worst}"))
    elif end.kind == MORI_FIBER:
        bad = fibre_degeneracy(m, end.witness)
        out.append(
            Check(
                "fibre-degeneracy",
                not bad,
                "every pair of classes orthogonal to the fibre pairs to 0"
                if not bad
                else f"{len(bad)} orthogonal pairs with non-zero product, first {bad[0][2]}",
                end.witness,
            )
        )
    elif end.kind == FANO:
        bad = proportionality_failures(m, end.witness)
        out.append(
            Check(
                "rho-one-proportionality",
                not bad,
                "every generator is numerically proportional to the witness" if not bad else f"not proportional: {bad}",
                end.witness,
            )
        )
        non_negative = [c.id for c in m.curves if log_canonical_degree(m, b, c.id) >= 0]
        out.append(
            Check(
                "anti-ample-on-catalog",
                not non_negative,
                "-(K+Delta) is positive on every catalog curve" if not non_negative else f"not positive on {non_negative}",
            )
        )
    else:
        out.append(Check("end-state", False, f"run ended without a classified end state (witness {end.witness})", end.witness))
    return out


def validate_length_bounds(run: MMPRun, b: Boundary | None = None) -> list[Check]:
    """Length bounds of negative extremal curves for a boundary (coefficients in [0, 1])."""
    b = run.boundary if b is None else b
    if b.max_coefficient() > 1:
        return [Check("length-bounds", True, "not applicable: boundary has coefficients > 1")]
    out = []
    for f in run.steps:
        src = f.source
        value = -log_canonical_degree(src, b.restrict(src.curve_ids), f.exceptional)
        out.append(
            Check(
                "length-negative-curve",
                value <= NEGATIVE_CURVE_LENGTH,
                f"-(K+Delta).{f.exceptional} = {value} <= {NEGATIVE_CURVE_LENGTH}",
                f.exceptional,
            )
        )
        genus = src.curve(f.exceptional).genus
        out.append(
            Check(
                "extremal-rational",
                genus == 0,
                f"genus of {f.exceptional} is {genus}",
                f.exceptional,
            )
        )
    end = run.end_state
    if end is not None and end.witness is not None and end.kind in (MORI_FIBER, FANO):
        value = ray_length(run.final, run.final_boundary, end.witness)
        out.append(
            Check(
                "length-ray",
                value <= RAY_LENGTH,
                f"shortest catalog curve on the ray of {end.witness} has -(K+Delta).C = {value} <= {RAY_LENGTH}",
                end.witness,
            )
        )
    return out


def ray_length(m: SurfaceModel, b: Boundary, curve_id: str) -> Fraction:
    """Smallest -(K+Delta).C' over catalog curves C' numerically equal to a positive multiple of C."""
    c = m.class_of(curve_id)
    best = -log_canonical_degree(m, b, curve_id)
    for other in m.curves:
        d = m.class_of(other.id)
        # d = t c numerically, t > 0
        dots_c = [m.dot(c, m.unit(j)) for j in range(m.dim)]
        dots_d = [m.dot(d, m.unit(j)) for j in range(m.dim)]
        pivot = next((j for j, x in enumerate(dots_c) if x != 0), None)
        if pivot is None:
            continue
        t = dots_d[pivot] / dots_c[pivot]
        if t > 0 and all(y == t * x for x, y in zip(dots_c, dots_d)):
            best = min(best, -log_canonical_degree(m, b, other.id))
    return best


def contracted_curves(run: MMPRun) -> list[str]:
    return [f.exceptional for f in run.steps]

