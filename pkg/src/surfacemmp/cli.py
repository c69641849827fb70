"""Command-line entry points.

Exit codes: 0 success, 1 model or operation error (including failed
validation), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, mmp, polytope, singularities
from .document import ModelDocument, dumps, format_rational, load_model
from .errors import EngineError
from .surface import Boundary, validate_model

FIXTURE_ENV = "SURFACEMMP_FIXTURES"


class UsageError(Exception):
    pass


def resolve_path(name: str) -> Path:
    """Look the file up as given, then with ``.toml``; a fixture root from the
    environment takes precedence for paths under ``fixtures/``."""
    candidates = []
    root = os.environ.get(FIXTURE_ENV)
    if root:
        rel = Path(name)
        if rel.parts and rel.parts[0] == "fixtures":
            rel = Path(*rel.parts[1:])
        candidates += [Path(root) / rel, Path(root) / rel.with_name(rel.name + ".toml")]
    p = Path(name)
    candidates += [p, p.with_name(p.name + ".toml")]
    for c in candidates:
        if c.is_file():
            return c
    raise UsageError(f"no such model file: {name}")


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else format_rational(x)
    return str(x)


def table(headers, rows) -> str:
    cells = [[fmt(h) for h in headers]] + [[fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def parse_divisor(spec: str) -> dict[str, Fraction]:
    """``"K=1,E=1/2"`` -> coefficients."""
    out: dict[str, Fraction] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"divisor terms look like NAME=p/q, got {part!r}")
        name, value = (s.strip() for s in part.split("=", 1))
        try:
            out[name] = out.get(name, Fraction(0)) + Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad coefficient {value!r}") from None
    return out


def _require_model(doc: ModelDocument):
    if doc.model is None:
        raise EngineError("document has no surface block")
    return doc.model


def _graphs(doc: ModelDocument, name: str | None):
    if name is not None:
        if name not in doc.graphs:
            raise EngineError(f"no graph named {name!r}")
        return [doc.graphs[name]]
    if not doc.graphs:
        raise EngineError("document has no resolution graphs")
    return list(doc.graphs.values())


SINGULARITY_LABELS = {
    "terminal": "terminal",
    "canonical": "canonical, not terminal",
    "klt": "klt, not canonical",
    "lc": "lc, not klt",
    "not-lc": "not lc",
}


def cmd_validate(doc: ModelDocument, args) -> tuple[dict, str, int]:
    findings = []
    if doc.model is not None:
        strict = args.strict_boundary or doc.model.field != "fbar_p"
        findings += [f.to_dict() for f in validate_model(doc.model, doc.boundary, boundary_mode=strict)]
        for cid in doc.model.curve_ids:
            v = analysis.adjunction_check(doc.model, cid)
            if not v.consistent:
                findings.append({"code": "adjunction-theorem", "message": v.verdict, "subject": cid})
    for g in doc.graphs.values():
        for problem in g.validate():
            findings.append({"code": "graph", "message": problem, "subject": g.name})
    result = {"command": "validate", "document": doc.name, "valid": not findings, "findings": findings}
    if findings:
        text = f"{doc.name}: INVALID\n" + "\n".join(f"  [{f['code']}] {f['message']}" for f in findings)
    else:
        text = f"{doc.name}: valid"
    return result, text, 0 if not findings else 1


def cmd_classify(doc: ModelDocument, args) -> tuple[dict, str, int]:
    results, lines = [], []
    for g in _graphs(doc, args.graph):
        disc = singularities.discrepancies(g)
        minimal = singularities.is_minimal_resolution(g)
        entry = {
            "graph": g.name,
            "discrepancies": disc.to_dict(),
            "minimal_resolution": minimal.to_dict(),
        }
        coeffs = ",".join(fmt(a) for a in disc.coefficients.values())
        line = f"{g.name}: {SINGULARITY_LABELS[disc.classification]}; coefficients {coeffs}"
        if g.is_connected():
            fc = singularities.fundamental_cycle(g)
            entry["fundamental_cycle"] = fc.to_dict()
            cyc = ",".join(str(z) for z in fc.cycle.values())
            line += f"\n  fundamental cycle ({cyc}), p_a = {fmt(fc.arithmetic_genus)}, " + (
                "rational" if fc.is_rational else "not rational"
            )
        if not minimal.minimal:
            line += f"\n  not minimal: (-1)-curves {', '.join(minimal.minus_one_curves)}"
        if args.dot:
            entry["dot"] = singularities.to_dot(g)
            line += "\n" + entry["dot"].rstrip()
        results.append(entry)
        lines.append(line)
    return {"command": "classify-singularity", "document": doc.name, "graphs": results}, "\n".join(lines), 0


def cmd_mmp(doc: ModelDocument, args) -> tuple[dict, str, int]:
    m = _require_model(doc)
    cfg = mmp.MMPConfig(args.mode, args.relative, args.max_steps)
    run = mmp.run_mmp(m, doc.boundary, cfg)
    result = {"command": "mmp-run", "document": doc.name, "run": run.to_dict()}
    rows = [
        (i, f.exceptional, f.source.pairing[f.exceptional_index, f.exceptional_index], v, f.discrepancy)
        for i, (f, v) in enumerate(zip(run.steps, run.values), start=1)
    ]
    end = run.end_state
    text = [f"{doc.name}: mode {cfg.mode}{' relative' if cfg.relative else ''}, {len(run.steps)} step(s)"]
    if rows:
        text.append(table(["step", "curve", "C^2", "(K+D).C", "discrepancy"], rows))
    text.append(f"end state: {end.kind}" + (f" (witness {end.witness})" if end.witness else ""))
    text.append(f"final K^2 = {fmt(run.final.pairing[0, 0])}, basis {', '.join(run.final.basis)}")
    failed = [c for c in run.validator_log if not c.passed]
    text.append(f"validators: {len(run.validator_log) - len(failed)}/{len(run.validator_log)} passed")
    for c in failed:
        text.append(f"  FAILED {c.name}: {c.detail}")
    text.append("(verdicts are relative to the curve catalog)")
    return result, "\n".join(text), 0 if run.ok else 1


def cmd_polytope(doc: ModelDocument, args) -> tuple[dict, str, int]:
    m = _require_model(doc)
    cube = polytope.BoundaryCube.from_boundary(doc.boundary)
    curves = args.curves or list(m.curve_ids)
    P = polytope.nef_polytope(m, cube, curves)
    const = polytope.length_constant(m, cube)
    result = {
        "command": "nef-polytope",
        "document": doc.name,
        "curves": list(curves),
        "length_constant": const,
        "polytope": P.to_dict(),
    }
    text = [
        f"{doc.name}: nef polytope over ({', '.join(cube.component_ids)}), curves {', '.join(curves)}",
        f"length constant M = {fmt(const)}",
        table(["constraint", "normal", "offset"], [(h.label, "(" + ", ".join(fmt(x) for x in h.normal) + ")", h.offset) for h in P.halfspaces]),
    ]
    if P.vertices:
        text.append(table(["vertex"] + list(cube.component_ids), [(i,) + tuple(v) for i, v in enumerate(P.vertices)]))
    else:
        text.append("empty: no boundary in the cube is nef on these curves")
    point = P.point(doc.boundary)
    if P.vertices and P.contains(point):
        terms = polytope.decompose_boundary(doc.boundary, P)
        result["decomposition"] = [{"weight": w, "vertex": i} for w, i in terms]
        text.append("boundary = " + " + ".join(f"{fmt(w)}*v{i}" for w, i in terms))
    return result, "\n".join(text), 0


def cmd_analyze(doc: ModelDocument, args) -> tuple[dict, str, int]:
    m = _require_model(doc)
    b = doc.boundary
    if args.divisor:
        D = m.divisor(parse_divisor(args.divisor))
        label = args.divisor
    else:
        D = m.log_canonical_class(b)
        label = "K+Delta"
    report = analysis.divisor_report(m, D)
    result = {"command": "analyze", "document": doc.name, "divisor": m.describe(D), "report": report.to_dict()}
    text = [f"{doc.name}: divisor {label}"]
    text.append(table(["curve", "D.C"], list(report.degrees.items())))
    text.append(f"D^2 = {fmt(report.self_intersection)}; nef on catalog: {report.nef_on_catalog}")
    if report.euler_char is not None:
        text.append(f"chi(D) = {fmt(report.euler_char)}")
    if report.nef_on_catalog:
        keel = analysis.keel_report(m, D)
        result["keel"] = keel.to_dict()
        text.append(f"Keel locus: {{{', '.join(keel.locus)}}}")
        text += [f"  {n}" for n in keel.notes]
    adj = [analysis.adjunction_check(m, cid) for cid in m.curve_ids]
    result["adjunction"] = [a.to_dict() for a in adj]
    text.append(table(["curve", "(K+C).C", "verdict"], [(a.curve, a.degree, a.verdict) for a in adj]))
    bpf = analysis.bpf_certificate(m, b, D, cartier=not args.not_cartier, difference_semi_ample=args.difference_semi_ample)
    result["bpf"] = bpf.to_dict()
    text.append(f"basepoint-free certificate: {bpf.conclusion if bpf.issued else 'refused (' + bpf.reason + ')'}")
    ab = analysis.abundance_certificate(m, b, args.kappa)
    result["abundance"] = ab.to_dict()
    text.append(f"abundance certificate for K+Delta: {ab.conclusion if ab.issued else 'refused (' + ab.reason + ')'}")
    if args.canonical_type:
        comps = {k: int(v) for k, v in parse_divisor(args.canonical_type).items()}
        ct = analysis.detect_canonical_type(m, comps)
        result["canonical_type"] = ct.to_dict()
        text.append(f"canonical type: {ct.is_canonical_type}" + (f" ({'; '.join(ct.reasons)})" if ct.reasons else ""))
    return result, "\n".join(text), 0


def cmd_lc(doc: ModelDocument, args) -> tuple[dict, str, int]:
    results, lines = [], []
    for g in _graphs(doc, args.graph):
        rep = singularities.lc_contraction_sequence(g)
        results.append({"graph": g.name, **rep.to_dict()})
        rows = [(i, s.vertex, s.self_intersection, s.canonical_degree, s.witness) for i, s in enumerate(rep.sequence, 1)]
        lines.append(f"{g.name}: case ({rep.case})" + (f", remaining curve {rep.remaining}" if rep.remaining else ""))
        if rows:
            lines.append(table(["step", "curve", "E^2", "K.E", "(K+E).E"], rows))
    return {"command": "lc-structure", "document": doc.name, "graphs": results}, "\n".join(lines), 0


COMMANDS = {
    "validate": cmd_validate,
    "classify-singularity": cmd_classify,
    "mmp-run": cmd_mmp,
    "nef-polytope": cmd_polytope,
    "analyze": cmd_analyze,
    "lc-structure": cmd_lc,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="surfacemmp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file", help="model document (TOML); '.toml' may be omitted")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("validate", "check a model document")
    p.add_argument("--strict-boundary", action="store_true", help="require coefficients <= 1 even over fbar_p")
    p = add("classify-singularity", "discrepancies and fundamental cycle of resolution graphs")
    p.add_argument("--graph", help="only this graph")
    p.add_argument("--dot", action="store_true", help="include a DOT rendering")
    p = add("mmp-run", "run the minimal model program")
    p.add_argument("--mode", type=str.lower, choices=["qf", "fp", "lc"], default="qf")
    p.add_argument("--relative", action="store_true", help="only contract vertical curves")
    p.add_argument("--max-steps", type=int)
    p = add("nef-polytope", "nef region of boundaries inside the boundary cube")
    p.add_argument("--curves", nargs="+", help="curves to test (default: whole catalog)")
    p = add("analyze", "divisor report and certificates")
    p.add_argument("--divisor", help="e.g. 'K=1,E=1/2' (default K+Delta)")
    p.add_argument("--not-cartier", action="store_true", help="do not declare the divisor Cartier")
    p.add_argument("--difference-semi-ample", action="store_true", help="declare D-(K+Delta) semi-ample")
    p.add_argument("--kappa", type=int, help="declared Kodaira dimension of K+Delta")
    p.add_argument("--canonical-type", help="cycle to test, e.g. 'F=1'")
    p = add("lc-structure", "contraction sequence of an lc singularity")
    p.add_argument("--graph", help="only this graph")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        path = resolve_path(args.file)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = load_model(path)
        result, text, code = COMMANDS[args.command](doc, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        if args.json:
            sys.stdout.write(dumps({"command": args.command, "error": exc.to_dict()}))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(dumps(result) if args.json else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
