"""Model documents (TOML) and the JSON report encoding.

Rationals are written as strings ``"p/q"`` (or plain integers) so that no value
ever passes through a float.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ParseError
from .lattice import PairingMatrix
from .singularities import ResolutionGraph, StrictTransform, Vertex
from .surface import CANONICAL, FIELDS, Boundary, CurveRecord, SurfaceModel

SCHEMA_VERSION = 1

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")
_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_'\-]*$")

TOP_KEYS = {"schema", "surface", "curves", "intersections", "boundary", "graphs"}
SURFACE_KEYS = {"name", "chi", "smooth", "field", "rational_singularities", "picard_rank"}
CURVE_KEYS = {"id", "genus", "vertical", "singular"}
GRAPH_KEYS = {"name", "vertices", "edges", "strict_transforms"}
VERTEX_KEYS = {"id", "self", "genus"}
STRICT_KEYS = {"curve", "coefficient", "meetings"}


@dataclass
class ModelDocument:
    schema: int
    model: SurfaceModel | None
    boundary: Boundary = field(default_factory=Boundary)
    graphs: dict = field(default_factory=dict)
    name: str = ""


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.lines = text.splitlines()

    def line_of(self, *needles: str, occurrence: int = 1) -> int | None:
        for needle in needles:
            hits = [i for i, line in enumerate(self.lines, start=1) if needle in line]
            if hits:
                return hits[min(occurrence, len(hits)) - 1]
        return None

    def fail(self, message: str, key: str | None = None, *needles: str):
        line = self.line_of(*needles) if needles else (self.line_of(key) if key else None)
        raise ParseError(message, line=line, key=key)

    def rational(self, value: Any, key: str) -> Fraction:
        if isinstance(value, bool) or isinstance(value, float):
            self.fail(f"expected a rational literal 'p/q', got {value!r}", key)
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            m = _RATIONAL.match(value)
            if m:
                den = int(m.group(2)) if m.group(2) is not None else 1
                if den == 0:
                    self.fail(f"zero denominator in {value!r}", key)
                return Fraction(int(m.group(1)), den)
        self.fail(f"expected a rational literal 'p/q', got {value!r}", key)

    def integer(self, value: Any, key: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(f"expected an integer, got {value!r}", key)
        return value

    def boolean(self, value: Any, key: str) -> bool:
        if not isinstance(value, bool):
            self.fail(f"expected true/false, got {value!r}", key)
        return value

    def ident(self, value: Any, key: str) -> str:
        if not isinstance(value, str) or not _ID.match(value):
            self.fail(f"invalid identifier {value!r}", key)
        return value

    def table(self, value: Any, key: str) -> dict:
        if not isinstance(value, dict):
            self.fail("expected a table", key)
        return value

    def no_unknown(self, data: dict, allowed: set, where: str):
        for k in data:
            if k not in allowed:
                self.fail(f"unknown key {k!r} in {where}", k, f"{k} =", f"{k}=", k)

    def parse(self) -> ModelDocument:
        try:
            data = tomllib.loads(self.text)
        except tomllib.TOMLDecodeError as exc:
            m = re.search(r"line (\d+)", str(exc))
            raise ParseError(f"syntax error: {exc}", line=int(m.group(1)) if m else None) from None
        self.no_unknown(data, TOP_KEYS, "document")
        if "schema" not in data:
            self.fail("missing schema version", "schema")
        schema = self.integer(data["schema"], "schema")
        if schema != SCHEMA_VERSION:
            self.fail(f"unsupported schema version {schema}", "schema")
        model, boundary, name = None, Boundary(), ""
        if "surface" in data or "curves" in data or "intersections" in data:
            model = self.parse_surface(data)
            name = model.name
            boundary = self.parse_boundary(data.get("boundary", {}), model)
        elif "boundary" in data:
            self.fail("boundary block needs a surface", "boundary")
        graphs = {}
        raw_graphs = data.get("graphs", [])
        if not isinstance(raw_graphs, list):
            self.fail("graphs must be an array of tables", "graphs")
        for g in raw_graphs:
            graph = self.parse_graph(self.table(g, "graphs"))
            if graph.name in graphs:
                self.fail(f"duplicate graph name {graph.name!r}", "name", f'"{graph.name}"')
            graphs[graph.name] = graph
        if model is None and not graphs:
            self.fail("document has neither a surface nor a resolution graph")
        return ModelDocument(schema, model, boundary, graphs, name)

    def parse_surface(self, data: dict) -> SurfaceModel:
        if "surface" not in data:
            self.fail("missing [surface] block", "surface")
        surf = self.table(data["surface"], "surface")
        self.no_unknown(surf, SURFACE_KEYS, "[surface]")
        for req in ("name", "chi", "smooth", "field"):
            if req not in surf:
                self.fail(f"[surface] is missing {req!r}", req, "[surface]")
        name = surf["name"]
        if not isinstance(name, str):
            self.fail("surface name must be a string", "name")
        field_tag = surf["field"]
        if field_tag not in FIELDS:
            self.fail(f"field must be one of {FIELDS}, got {field_tag!r}", "field")
        picard = surf.get("picard_rank")
        if picard is not None:
            picard = self.integer(picard, "picard_rank")
        curves_raw = data.get("curves", [])
        if not isinstance(curves_raw, list):
            self.fail("curves must be an array of tables", "curves")
        curves: list[CurveRecord] = []
        seen: set[str] = set()
        for c in curves_raw:
            c = self.table(c, "curves")
            self.no_unknown(c, CURVE_KEYS, "[[curves]]")
            if "id" not in c or "genus" not in c:
                self.fail("each curve needs 'id' and 'genus'", "id", "[[curves]]")
            cid = self.ident(c["id"], "id")
            if cid == CANONICAL:
                self.fail("curve id 'K' is reserved for the canonical class", "id", f'"{cid}"')
            if cid in seen:
                raise ParseError(
                    f"duplicate curve id {cid!r}", line=self.line_of(f'id = "{cid}"', occurrence=2), key="id"
                )
            seen.add(cid)
            genus = self.integer(c["genus"], "genus")
            if genus < 0:
                self.fail(f"genus of {cid!r} is negative", "genus", f'"{cid}"')
            curves.append(
                CurveRecord(
                    cid,
                    genus,
                    vertical=self.boolean(c.get("vertical", False), "vertical"),
                    singular=self.boolean(c.get("singular", False), "singular"),
                )
            )
        basis = [CANONICAL] + [c.id for c in curves]
        index = {name: i for i, name in enumerate(basis)}
        inter = self.table(data.get("intersections", {}), "intersections")
        n = len(basis)
        entries: list[list[Fraction | None]] = [[None] * n for _ in range(n)]
        for key, value in inter.items():
            parts = key.split(".")
            if len(parts) != 2 or parts[0] not in index or parts[1] not in index:
                self.fail(f"intersection key {key!r} must be 'A.B' over K and declared curve ids", key, f'"{key}"')
            i, j = index[parts[0]], index[parts[1]]
            if entries[i][j] is not None:
                self.fail(f"duplicate intersection entry {key!r}", key, f'"{key}"')
            v = self.rational(value, key)
            entries[i][j] = entries[j][i] = v
        boundary_ids = set(self.table(data.get("boundary", {}), "boundary"))
        for i in range(n):
            for j in range(i, n):
                if entries[i][j] is None:
                    self.fail(f"pairing incomplete: missing entry {basis[i]}.{basis[j]}", f"{basis[i]}.{basis[j]}", "[intersections]")
        curves = [
            CurveRecord(c.id, c.genus, c.vertical, c.id in boundary_ids, c.singular) for c in curves
        ]
        return SurfaceModel(
            curves=tuple(curves),
            pairing=PairingMatrix.from_rows(entries),
            chi=self.rational(surf["chi"], "chi"),
            smooth=self.boolean(surf["smooth"], "smooth"),
            rational_singularities=self.boolean(surf.get("rational_singularities", True), "rational_singularities"),
            picard_rank=picard,
            field=field_tag,
            name=name,
        )

    def parse_boundary(self, raw: Any, model: SurfaceModel) -> Boundary:
        raw = self.table(raw, "boundary")
        coeffs = {}
        for cid, v in raw.items():
            if cid not in model.curve_ids:
                self.fail(f"boundary references unknown curve {cid!r}", cid, f"{cid} =", f"{cid}=")
            coeffs[cid] = self.rational(v, cid)
        return Boundary(coeffs)

    def parse_graph(self, g: dict) -> ResolutionGraph:
        self.no_unknown(g, GRAPH_KEYS, "[[graphs]]")
        name = g.get("name")
        if not isinstance(name, str) or not name:
            self.fail("each graph needs a name", "name", "[[graphs]]")
        vertices = []
        seen = set()
        for v in g.get("vertices", []):
            v = self.table(v, "vertices")
            self.no_unknown(v, VERTEX_KEYS, f"vertex of graph {name!r}")
            if "id" not in v or "self" not in v:
                self.fail("each vertex needs 'id' and 'self'", "vertices", f'"{name}"')
            vid = self.ident(v["id"], "id")
            if vid in seen:
                self.fail(f"duplicate vertex id {vid!r} in graph {name!r}", "id", f'"{vid}"')
            seen.add(vid)
            s = self.integer(v["self"], "self")
            if s > -1:
                self.fail(f"vertex {vid!r} has self-intersection {s} > -1", "self", f'"{vid}"')
            genus = self.integer(v.get("genus", 0), "genus")
            vertices.append(Vertex(vid, s, genus))
        if not vertices:
            self.fail(f"graph {name!r} has no vertices", "vertices", f'"{name}"')
        edges = []
        for e in g.get("edges", []):
            if not isinstance(e, list) or len(e) not in (2, 3):
                self.fail("edges are [a, b] or [a, b, multiplicity]", "edges", "edges")
            a, b = e[0], e[1]
            mult = self.integer(e[2], "edges") if len(e) == 3 else 1
            if a not in seen or b not in seen:
                self.fail(f"edge {e!r} references an unknown vertex", "edges", "edges")
            if a == b:
                self.fail(f"self-loop at {a!r}", "edges", "edges")
            if mult < 1:
                self.fail(f"edge {e!r} needs a positive multiplicity", "edges", "edges")
            edges.append((a, b, mult))
        strict = []
        for st in g.get("strict_transforms", []):
            st = self.table(st, "strict_transforms")
            self.no_unknown(st, STRICT_KEYS, "strict transform")
            cid = self.ident(st.get("curve"), "curve")
            coeff = self.rational(st.get("coefficient", 0), "coefficient")
            if coeff < 0:
                self.fail(f"strict transform {cid!r} has negative coefficient", "coefficient", f'"{cid}"')
            meetings = {}
            for vid, k in self.table(st.get("meetings", {}), "meetings").items():
                if vid not in seen:
                    self.fail(f"strict transform {cid!r} meets unknown vertex {vid!r}", "meetings", f'"{cid}"')
                k = self.integer(k, "meetings")
                if k < 0:
                    self.fail("meeting counts must be non-negative", "meetings", f'"{cid}"')
                meetings[vid] = k
            strict.append(StrictTransform(cid, coeff, meetings))
        return ResolutionGraph(tuple(vertices), tuple(edges), tuple(strict), name)


def parse_model(text: str) -> ModelDocument:
    """Strict parse: unknown keys, duplicate ids and missing pairing entries are errors."""
    return _Parser(text).parse()


def load_model(path) -> ModelDocument:
    """Parse a file; graph-only documents are named after the file stem."""
    with open(path, encoding="utf-8") as fh:
        doc = parse_model(fh.read())
    if not doc.name:
        doc.name = Path(path).stem
    return doc


# --- report encoding -------------------------------------------------------

_ENCODED_RATIONAL = re.compile(r"^-?\d+/\d+$")


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def encode(obj: Any) -> Any:
    """JSON-ready tree; every Fraction becomes ``"p/q"`` (denominator always written)."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return encode(obj.to_dict())
    return obj


def decode(obj: Any) -> Any:
    if isinstance(obj, str) and _ENCODED_RATIONAL.match(obj):
        num, den = obj.split("/")
        return Fraction(int(num), int(den))
    if isinstance(obj, dict):
        return {k: decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode(v) for v in obj]
    return obj


def dumps(report: Any) -> str:
    return json.dumps(encode(report), indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    return decode(json.loads(text))


def normalize(obj: Any) -> Any:
    """The in-memory shape a report takes after a JSON round trip (tuples become lists)."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    return obj
