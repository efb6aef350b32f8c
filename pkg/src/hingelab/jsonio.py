"""JSON encodings for every value the CLI moves across its boundary.

Exact scalars travel as canonical fraction strings ("3", "-5/7"), float
scalars as numbers rounded to 12 significant digits; keys are emitted
sorted, so equal values serialize to identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction

from . import hinges, hybrid, relations, satake, sky, velocity
from .core import EXACT, FLOAT, Matrix, Subspace, as_exact, subspace_span
from .errors import SchemaError

FLOAT_DIGITS = 12


# ---------------------------------------------------------------------------
# scalars

def encode_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(Fraction(x))
    if isinstance(x, float):
        return float(f"{x:.{FLOAT_DIGITS}g}")
    raise SchemaError(f"unsupported scalar {x!r}")


def decode_scalar(x):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"bad rational literal {x!r}") from e
    if isinstance(x, bool):
        raise SchemaError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    raise SchemaError(f"unsupported scalar payload {x!r}")


def _decode_row(row):
    if not isinstance(row, list):
        raise SchemaError("rows must be lists")
    return [decode_scalar(x) for x in row]


# ---------------------------------------------------------------------------
# matrices and subspaces

def encode_matrix(m: Matrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "data": [[encode_scalar(x) for x in row] for row in m.data],
    }


def decode_matrix(obj) -> Matrix:
    if not isinstance(obj, dict) or "data" not in obj:
        raise SchemaError("matrix payload needs a 'data' field")
    data = [_decode_row(r) for r in obj["data"]]
    if not data:
        raise SchemaError("matrix payload is empty")
    if "rows" in obj and obj["rows"] != len(data):
        raise SchemaError("row count mismatch")
    if "cols" in obj and any(obj["cols"] != len(r) for r in data):
        raise SchemaError("column count mismatch")
    kinds = {type(x) for row in data for x in row}
    if float in kinds and Fraction in kinds:
        raise SchemaError("matrix mixes exact and float entries")
    backend = FLOAT if float in kinds else EXACT
    return Matrix(data, backend)


def encode_subspace(s: Subspace) -> dict:
    return {
        "ambient": s.ambient,
        "basis": [[encode_scalar(x) for x in row] for row in s.basis],
    }


def decode_subspace(obj) -> Subspace:
    if not isinstance(obj, dict) or "ambient" not in obj:
        raise SchemaError("subspace payload needs an 'ambient' field")
    ambient = int(obj["ambient"])
    rows = [_decode_row(r) for r in obj.get("basis", [])]
    kinds = {type(x) for row in rows for x in row}
    backend = FLOAT if float in kinds else EXACT
    return subspace_span(rows, backend, ambient=ambient)


# ---------------------------------------------------------------------------
# relations and hinges

def encode_relation(p: relations.LinearRelation) -> dict:
    out = encode_subspace(p.space)
    out["n"] = p.n
    return out


def decode_relation(obj) -> relations.LinearRelation:
    if not isinstance(obj, dict) or "n" not in obj:
        raise SchemaError("relation payload needs an 'n' field")
    return relations.LinearRelation(int(obj["n"]), decode_subspace(obj))


def encode_hinge(h: hinges.Hinge) -> dict:
    return {
        "n": h.n,
        "components": [encode_subspace(p.space) for p in h.components],
    }


def decode_hinge(obj) -> hinges.Hinge:
    if not isinstance(obj, dict) or "components" not in obj:
        raise SchemaError("hinge payload needs 'components'")
    n = int(obj["n"])
    comps = [relations.LinearRelation(n, decode_subspace(c))
             for c in obj["components"]]
    return hinges.validate_hinge(comps)


def encode_admissible_set(a: hinges.AdmissibleSet) -> dict:
    return {
        "n": a.n,
        "elements": [encode_subspace(p.space) for p in a.elements],
    }


def encode_cartan_path(p: hinges.CartanPath) -> dict:
    return {
        "g1": encode_matrix(p.g1),
        "lambda": [encode_scalar(x) for x in p.exponents],
        "g2": encode_matrix(p.g2),
    }


def decode_cartan_path(obj) -> hinges.CartanPath:
    for key in ("g1", "lambda", "g2"):
        if key not in obj:
            raise SchemaError(f"cartan path payload needs '{key}'")
    return hinges.CartanPath(
        decode_matrix(obj["g1"]),
        [decode_scalar(x) for x in obj["lambda"]],
        decode_matrix(obj["g2"]),
    )


# ---------------------------------------------------------------------------
# satake data

def encode_quadratic_form(q: relations.QuadraticFormOnQuotient) -> dict:
    return {
        "basis": [[encode_scalar(x) for x in row] for row in q.basis],
        "gram": encode_matrix(q.gram) if q.gram is not None else None,
    }


def encode_satake_point(p: satake.SatakeBoundaryPoint) -> dict:
    return {
        "n": p.n,
        "flag": [encode_subspace(v) for v in p.flag],
        "forms": [encode_quadratic_form(f) for f in p.forms],
    }


# ---------------------------------------------------------------------------
# velocity data

def encode_poly_sequence(seq: velocity.PolySequence) -> dict:
    return {
        "k": seq.k,
        "l": seq.l,
        "polys": [[encode_scalar(c) for c in p.coeffs] for p in seq.polys],
    }


def decode_poly_sequence(obj) -> velocity.PolySequence:
    for key in ("k", "l", "polys"):
        if key not in obj:
            raise SchemaError(f"poly sequence payload needs '{key}'")
    polys = [velocity.RationalPoly([as_exact(decode_scalar(c)) for c in p])
             for p in obj["polys"]]
    return velocity.PolySequence(int(obj["k"]), int(obj["l"]), polys)


def encode_velocity_point(v: velocity.VelocityPoint) -> dict:
    return {"n": v.n, "mu": [encode_scalar(x) for x in v.mu]}


def decode_velocity_point(obj) -> velocity.VelocityPoint:
    if "mu" not in obj:
        raise SchemaError("velocity payload needs 'mu'")
    mu = [decode_scalar(x) for x in obj["mu"]]
    n = int(obj["n"]) if "n" in obj else len(mu) + 2
    return velocity.VelocityPoint(tuple(mu), n)


def encode_karpelevich_point(p: velocity.KarpelevichPoint) -> dict:
    def node(member):
        a, b = member
        children = p.tree.children(member)
        out = {"interval": [a, b]}
        if children:
            out["children"] = [node(c) for c in children]
            out["simplex"] = [encode_scalar(x)
                              for x in p.simplex_values[member]]
        elif member in p.cone_values:
            out["cone"] = [encode_scalar(x) for x in p.cone_values[member]]
        return out

    return {"root": node(p.tree.interval)}


def decode_karpelevich_point(obj) -> velocity.KarpelevichPoint:
    if "root" not in obj:
        raise SchemaError("karpelevich payload needs 'root'")
    members = []
    cone = {}
    simp = {}

    def walk(node):
        a, b = node["interval"]
        member = (int(a), int(b))
        members.append(member)
        if "children" in node:
            simp[member] = tuple(decode_scalar(x) for x in node["simplex"])
            for child in node["children"]:
                walk(child)
        elif "cone" in node:
            cone[member] = tuple(decode_scalar(x) for x in node["cone"])

    walk(obj["root"])
    k, l = members[0]
    tree = velocity.TreePartition(k, l, members)
    return velocity.KarpelevichPoint(tree, cone, simp)


# ---------------------------------------------------------------------------
# sky data

def encode_flag(f: sky.Flag) -> dict:
    return {
        "ambient": f.ambient,
        "subspaces": [encode_subspace(s) for s in f.subspaces],
    }


def decode_flag(obj) -> sky.Flag:
    if not isinstance(obj, dict) or "ambient" not in obj:
        raise SchemaError("flag payload needs 'ambient'")
    return sky.Flag(int(obj["ambient"]),
                    [decode_subspace(s) for s in obj.get("subspaces", [])])


def encode_sky_point(p: sky.SkyPoint) -> dict:
    return {
        "velocity": encode_velocity_point(p.velocity),
        "flag": encode_flag(p.flag),
    }


def decode_sky_point(obj) -> sky.SkyPoint:
    for key in ("velocity", "flag"):
        if key not in obj:
            raise SchemaError(f"sky point payload needs '{key}'")
    return sky.SkyPoint(decode_velocity_point(obj["velocity"]),
                        decode_flag(obj["flag"]))


def encode_geodesic(g: sky.GeodesicFromBase) -> dict:
    return {
        "frame": encode_matrix(g.frame),
        "lambda": [encode_scalar(x) for x in g.exponents],
    }


def decode_geodesic(obj) -> sky.GeodesicFromBase:
    for key in ("frame", "lambda"):
        if key not in obj:
            raise SchemaError(f"geodesic payload needs '{key}'")
    return sky.GeodesicFromBase(decode_matrix(obj["frame"]),
                                [decode_scalar(x) for x in obj["lambda"]])


# ---------------------------------------------------------------------------
# hybrid data

def encode_do_point(p: hybrid.DynkinOlshanetskyPoint) -> dict:
    return {
        "hinge": encode_hinge(p.hinge),
        "mu": [encode_scalar(x) for x in p.mu],
    }


def decode_do_point(obj) -> hybrid.DynkinOlshanetskyPoint:
    for key in ("hinge", "mu"):
        if key not in obj:
            raise SchemaError(f"DO point payload needs '{key}'")
    h = decode_hinge(obj["hinge"])
    mu = tuple(decode_scalar(x) for x in obj["mu"])
    gammas = tuple(h.parts(j).image.dim for j in range(h.length))
    return hybrid.DynkinOlshanetskyPoint(h, mu, gammas)


def encode_karpelevich_compactification_point(
        p: hybrid.KarpelevichCompactificationPoint) -> dict:
    return {
        "hinge": encode_hinge(p.hinge),
        "kpoint": encode_karpelevich_point(p.kpoint),
    }


def encode_oriented_geodesic(g) -> dict:
    return {
        "frame": encode_matrix(g.frame),
        "lambda": [encode_scalar(x) for x in g.exponents],
    }


def encode_spd_point(p: satake.SpdPoint) -> dict:
    return {"matrix": encode_matrix(p.matrix)}


def decode_spd_point(obj) -> satake.SpdPoint:
    if "matrix" not in obj:
        raise SchemaError("spd payload needs 'matrix'")
    return satake.SpdPoint(decode_matrix(obj["matrix"]))


# ---------------------------------------------------------------------------
# deterministic dumping

def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, stable float formatting."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
