"""Command line front end: hinge-lab <verb> <action> [options].

Every action reads JSON payloads (one or more --in files), runs one
library computation and writes deterministic JSON (default), text, or
DOT for graph actions.  Exit codes: 0 success, 1 domain error, 2 I/O or
schema error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import geodesics, hinges, hybrid, jsonio, relations, satake, sky, velocity
from .core import DEFAULT_TOL, EXACT, Matrix
from .errors import HingeLabError, SchemaError


def _require(payload, *keys):
    for key in keys:
        if key not in payload:
            raise SchemaError(f"input needs field '{key}'")
    return payload


def _num(x) -> float:
    return float(f"{float(x):.{jsonio.FLOAT_DIGITS}g}")


# ---------------------------------------------------------------------------
# action handlers: (payload, tol) -> (json-able object, text renderer)

def _relation_parts(payload, tol):
    p = jsonio.decode_relation(payload)
    parts = relations.relation_parts(p, tol)
    out = {
        "kernel": jsonio.encode_subspace(parts.kernel),
        "image": jsonio.encode_subspace(parts.image),
        "domain": jsonio.encode_subspace(parts.domain),
        "indef": jsonio.encode_subspace(parts.indef),
        "rank": parts.rank,
    }
    text = (
        f"rank {parts.rank}; dim Ker {parts.kernel.dim}, "
        f"dim Im {parts.image.dim}, dim Dom {parts.domain.dim}, "
        f"dim Indef {parts.indef.dim}"
    )
    return out, text


def _relation_classify(payload, tol):
    p = jsonio.decode_relation(payload)
    flags = relations.classify(p, tol)
    text = (
        f"symmetric: {str(flags['is_symmetric']).lower()}; "
        f"nonnegative: {str(flags['is_nonnegative']).lower()}"
    )
    return flags, text


def _relation_scale(payload, tol):
    _require(payload, "relation", "lambda")
    p = jsonio.decode_relation(payload["relation"])
    lam = jsonio.decode_scalar(payload["lambda"])
    out = jsonio.encode_relation(relations.scale(lam, p))
    return out, f"scaled relation, n={p.n}"


def _hinge_validate(payload, tol):
    _require(payload, "n", "components")
    n = int(payload["n"])
    comps = [relations.LinearRelation(n, jsonio.decode_subspace(c))
             for c in payload["components"]]
    h = hinges.validate_hinge(comps, tol)
    return jsonio.encode_hinge(h), f"valid hinge, k={h.length}"


def _hinge_limit(payload, tol):
    path = jsonio.decode_cartan_path(payload)
    h = hinges.cartan_limit(path, tol)
    return jsonio.encode_hinge(h), f"hinge with {h.length} component(s)"


def _hinge_admissible(payload, tol):
    h = jsonio.decode_hinge(payload)
    adm = hinges.admissible_set(h)
    return (
        jsonio.encode_admissible_set(adm),
        f"admissible set of size {adm.size}",
    )


def _hinge_hausdorff(payload, tol):
    _require(payload, "hinge", "path", "t_samples", "s_samples")
    h = jsonio.decode_hinge(payload["hinge"])
    path = jsonio.decode_cartan_path(payload["path"])
    d = hinges.curve_hausdorff(
        h, path,
        [float(t) for t in payload["t_samples"]],
        [float(s) for s in payload["s_samples"]],
    )
    return {"distance": _num(d)}, f"{d:.{jsonio.FLOAT_DIGITS}g}"


def _hinge_estimate(payload, tol):
    _require(payload, "samples")
    samples = [jsonio.decode_matrix(m).to_float() for m in payload["samples"]]
    est = hinges.numeric_hinge_estimate(samples, tol=payload.get("tol", 1e-6))
    out = {
        "hinge": jsonio.encode_hinge(est.hinge),
        "exponents": [_num(x) for x in est.exponents],
        "residual": _num(est.residual),
    }
    return out, f"k={est.hinge.length}, residual {est.residual:.3g}"


def _satake_limit(payload, tol):
    _require(payload, "frame", "lambda")
    h = satake.spd_cartan_limit(
        jsonio.decode_matrix(payload["frame"]),
        [jsonio.decode_scalar(x) for x in payload["lambda"]],
        tol,
    )
    return jsonio.encode_hinge(h), f"positive hinge, k={h.length}"


def _satake_positive(payload, tol):
    h = jsonio.decode_hinge(payload)
    flag = satake.is_positive_hinge(h, tol)
    return {"is_positive": flag}, str(flag).lower()


def _satake_flagforms(payload, tol):
    h = jsonio.decode_hinge(payload)
    point = satake.hinge_to_flag_forms(h, tol)
    out = jsonio.encode_satake_point(point)
    return out, f"flag with {point.steps} proper step(s)"


def _velocity_simple(payload, tol):
    seq = jsonio.decode_poly_sequence(payload)
    v = velocity.simple_velocity_limit(seq)
    if v is None:
        return {"bounded": True}, "bounded"
    return jsonio.encode_velocity_point(v), f"mu = {[str(x) for x in v.mu]}"


def _velocity_karpelevich(payload, tol):
    seq = jsonio.decode_poly_sequence(payload)
    kp = velocity.karpelevich_limit(seq)
    return jsonio.encode_karpelevich_point(kp), _karpelevich_text(kp)


def _karpelevich_text(kp) -> str:
    lines = []
    for member in sorted(kp.tree.members):
        if member in kp.simplex_values:
            vals = ", ".join(str(x) for x in kp.simplex_values[member])
            lines.append(f"{member[0]}..{member[1]}: simplex ({vals})")
        elif member in kp.cone_values:
            vals = ", ".join(str(x) for x in kp.cone_values[member])
            lines.append(f"{member[0]}..{member[1]}: cone ({vals})")
        else:
            lines.append(f"{member[0]}..{member[1]}")
    return "\n".join(lines)


def _velocity_trees(payload, tol):
    _require(payload, "k", "l")
    trees = velocity.enumerate_tree_partitions(int(payload["k"]),
                                               int(payload["l"]))
    out = {
        "count": len(trees),
        "trees": [sorted([list(m) for m in t.members]) for t in trees],
    }
    return out, f"{len(trees)} tree-partition(s)"


def _velocity_faces(payload, tol):
    _require(payload, "k", "l")
    trees = velocity.enumerate_tree_partitions(int(payload["k"]),
                                               int(payload["l"]))
    faces = []
    for t in trees:
        f = velocity.face_of(t)
        faces.append({
            "members": sorted([list(m) for m in t.members]),
            "dimension": f.dimension,
            "factors": [
                {"interval": list(fc.interval), "kind": fc.kind,
                 "dimension": fc.dimension}
                for fc in f.factors
            ],
        })
    text = "\n".join(
        f"dim {f['dimension']}: {f['members']}" for f in faces
    )
    return {"faces": faces}, text


def _sky_point(payload, tol):
    g = jsonio.decode_geodesic(payload)
    p = sky.sky_from_geodesic(g, tol)
    return jsonio.encode_sky_point(p), f"flag dims {p.flag.dims}"


def _sky_qr(payload, tol):
    _require(payload, "matrix", "lambda")
    g = sky.connecting_geodesic_limit(
        jsonio.decode_matrix(payload["matrix"]).to_float(),
        [float(jsonio.decode_scalar(x)) for x in payload["lambda"]],
        tol,
    )
    return jsonio.encode_geodesic(g), "limit geodesic frame computed"


def _sky_relpos(payload, tol):
    _require(payload, "f", "g")
    w = sky.relative_position(jsonio.decode_flag(payload["f"]),
                              jsonio.decode_flag(payload["g"]))
    return {"permutation": list(w)}, f"w = {list(w)}"


def _sky_tits(payload, tol):
    _require(payload, "p", "q")
    d = sky.tits_distance(jsonio.decode_sky_point(payload["p"]),
                          jsonio.decode_sky_point(payload["q"]), tol)
    return {"distance": _num(d)}, f"{d:.{jsonio.FLOAT_DIGITS}g}"


def _sky_angle(payload, tol):
    _require(payload, "p", "q")
    a = sky.angle_at_base(jsonio.decode_geodesic(payload["p"]),
                          jsonio.decode_geodesic(payload["q"]))
    return {"angle": _num(a)}, f"{a:.{jsonio.FLOAT_DIGITS}g}"


def _sky_graph(payload, tol):
    graph = sky.n3_incidence_graph(
        lines=payload.get("lines"),
        seed=int(payload.get("seed", 0)),
        n_lines=int(payload.get("n_lines", 6)),
    )
    out = {
        "lines": [jsonio.encode_subspace(s) for s in graph.lines],
        "planes": [jsonio.encode_subspace(s) for s in graph.planes],
        "edges": sorted([list(e) for e in graph.edges]),
        "core_count": graph.core_count,
        "edge_length": _num(graph.EDGE_LENGTH),
    }
    text = (
        f"{len(graph.lines)} lines ({graph.core_count} core), "
        f"{len(graph.planes)} planes, {len(graph.edges)} edges"
    )
    return out, text, graph.to_dot()


def _sky_chambers(payload, tol):
    _require(payload, "frame")
    chambers = sky.apartment_chambers(
        jsonio.decode_matrix(payload["frame"]), tol
    )
    out = {
        "count": len(chambers),
        "chambers": [jsonio.encode_flag(c) for c in chambers],
    }
    return out, f"{len(chambers)} chambers"


def _hybrid_do(payload, tol):
    _require(payload, "frame", "exponents")
    path = hybrid.HybridPath(
        jsonio.decode_matrix(payload["frame"]),
        jsonio.decode_poly_sequence(payload["exponents"]), tol,
    )
    p = hybrid.do_limit(path, tol)
    if isinstance(p, satake.SpdPoint):
        return (
            {"interior": jsonio.encode_spd_point(p)},
            "interior point (bounded exponents)",
        )
    return (
        jsonio.encode_do_point(p),
        f"boundary point, s={p.hinge.length}, mu={[str(x) for x in p.mu]}",
    )


def _hybrid_project(payload, tol):
    p = jsonio.decode_do_point(payload)
    data = hybrid.do_project_to_sky(p)
    out = {
        "kernel_flag": [jsonio.encode_subspace(s) for s in data.kernel_flag],
        "taus": [jsonio.encode_scalar(x) for x in data.taus],
        "sky_point": jsonio.encode_sky_point(data.to_sky_point()),
    }
    return out, f"taus = {[str(x) for x in data.taus]}"


def _hybrid_geodesic(payload, tol):
    g = jsonio.decode_geodesic(payload)
    p = hybrid.geodesic_do_limit(g, tol)
    out = jsonio.encode_do_point(p)
    out["is_geodesic_limit"] = hybrid.is_geodesic_limit(p)
    return out, f"strict: {str(hybrid.is_geodesic_limit(p)).lower()}"


def _hybrid_karpelevich(payload, tol):
    _require(payload, "frame", "exponents")
    p = hybrid.karpelevich_limit_point(
        jsonio.decode_matrix(payload["frame"]),
        jsonio.decode_poly_sequence(payload["exponents"]), tol,
    )
    if isinstance(p, satake.SpdPoint):
        return (
            {"interior": jsonio.encode_spd_point(p)},
            "interior point (bounded exponents)",
        )
    out = jsonio.encode_karpelevich_compactification_point(p)
    return out, f"hinge k={p.hinge.length} + velocity tree"


def _geodesic_stratum(payload, tol):
    v = jsonio.decode_velocity_point(payload)
    s = geodesics.stratum_of(v)
    stab = geodesics.stabilizer(s)
    out = {
        "block_ends": list(s.block_ends),
        "block_sizes": list(s.block_sizes),
        "stabilizer_dimension": stab.dimension,
        "stratum_dimension": geodesics.stratum_dimension(s),
    }
    text = (
        f"blocks {s.block_sizes}, stabilizer dim {stab.dimension}, "
        f"stratum dim {out['stratum_dimension']}"
    )
    return out, text


def _geodesic_limit(payload, tol):
    _require(payload, "drift", "frame", "exponents")
    path = geodesics.DriftingSpdPath(
        jsonio.decode_matrix(payload["drift"]).to_float(),
        jsonio.decode_matrix(payload["frame"]).to_float(),
        jsonio.decode_poly_sequence(payload["exponents"]),
    )
    base = (jsonio.decode_spd_point(payload["base"])
            if "base" in payload else None)
    times = [float(t) for t in payload.get("sample_times", (10, 20, 30, 40))]
    z, diag = geodesics.sequence_to_geodesic_limit(path, base, times)
    out = {
        "frame": jsonio.encode_matrix(z.frame),
        "lambda": [_num(x) for x in z.exponents],
        "residuals": [_num(r) for r in diag.residuals],
    }
    return out, f"limit geodesic; residuals {[f'{r:.2g}' for r in diag.residuals]}"


def _geodesic_seaurchin(payload, tol):
    g = jsonio.decode_geodesic(payload)
    flag = geodesics.is_sea_urchin_point(
        g,
        max_denominator=int(payload.get("max_denominator", 10 ** 6)),
    )
    return {"rational_velocity": flag}, str(flag).lower()


ACTIONS = {
    ("relation", "parts"): _relation_parts,
    ("relation", "classify"): _relation_classify,
    ("relation", "scale"): _relation_scale,
    ("hinge", "validate"): _hinge_validate,
    ("hinge", "limit"): _hinge_limit,
    ("hinge", "admissible"): _hinge_admissible,
    ("hinge", "hausdorff"): _hinge_hausdorff,
    ("hinge", "estimate"): _hinge_estimate,
    ("satake", "limit"): _satake_limit,
    ("satake", "positive"): _satake_positive,
    ("satake", "flagforms"): _satake_flagforms,
    ("velocity", "simple"): _velocity_simple,
    ("velocity", "karpelevich"): _velocity_karpelevich,
    ("velocity", "trees"): _velocity_trees,
    ("velocity", "faces"): _velocity_faces,
    ("sky", "point"): _sky_point,
    ("sky", "qr"): _sky_qr,
    ("sky", "relpos"): _sky_relpos,
    ("sky", "tits"): _sky_tits,
    ("sky", "angle"): _sky_angle,
    ("sky", "graph"): _sky_graph,
    ("sky", "chambers"): _sky_chambers,
    ("hybrid", "do"): _hybrid_do,
    ("hybrid", "project"): _hybrid_project,
    ("hybrid", "geodesic"): _hybrid_geodesic,
    ("hybrid", "karpelevich"): _hybrid_karpelevich,
    ("geodesic", "stratum"): _geodesic_stratum,
    ("geodesic", "limit"): _geodesic_limit,
    ("geodesic", "seaurchin"): _geodesic_seaurchin,
}


def _build_parser() -> argparse.ArgumentParser:
    verbs = sorted({v for v, _ in ACTIONS})
    parser = argparse.ArgumentParser(
        prog="hinge-lab",
        description="Boundary computations for SL(n,R)/SO(n).",
    )
    parser.add_argument("verb", choices=verbs)
    parser.add_argument("action")
    parser.add_argument("--in", dest="inputs", action="append", default=[],
                        metavar="FILE", help="JSON input file (repeatable)")
    parser.add_argument("--out", dest="output", metavar="FILE",
                        help="output file (default stdout)")
    parser.add_argument("--format", choices=("json", "text", "dot"),
                        default="json")
    parser.add_argument("--tol", type=float, default=None,
                        help="float tolerance (default 1e-9 or HINGELAB_TOL)")
    parser.add_argument("--exact", action="store_true",
                        help="reject float payloads")
    return parser


def _contains_float(obj) -> bool:
    if isinstance(obj, float):
        return True
    if isinstance(obj, dict):
        return any(_contains_float(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_contains_float(v) for v in obj)
    return False


def run(argv) -> tuple[int, str]:
    """Dispatch one command; returns (exit code, output text)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (int(e.code) if e.code else 0), ""
    key = (args.verb, args.action)
    if key not in ACTIONS:
        known = ", ".join(sorted(a for v, a in ACTIONS if v == args.verb))
        sys.stderr.write(
            f"unknown action '{args.action}' for verb '{args.verb}'; "
            f"known: {known}\n"
        )
        return 2, ""
    tol = args.tol
    if tol is None:
        env = os.environ.get("HINGELAB_TOL")
        tol = float(env) if env else DEFAULT_TOL
    payload: dict = {}
    try:
        for path in args.inputs:
            with open(path, "r", encoding="utf-8") as fh:
                chunk = jsonio.loads(fh.read())
            if not isinstance(chunk, dict):
                raise SchemaError("top-level JSON payload must be an object")
            payload.update(chunk)
        if args.exact and _contains_float(payload):
            raise SchemaError("--exact given but the payload has float entries")
        result = ACTIONS[key](payload, tol)
    except SchemaError as e:
        sys.stderr.write(f"schema error: {e}\n")
        return 2, ""
    except OSError as e:
        sys.stderr.write(f"io error: {e}\n")
        return 2, ""
    except HingeLabError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1, ""
    if len(result) == 3:
        json_obj, text, dot = result
    else:
        json_obj, text = result
        dot = None
    if args.format == "json":
        out = jsonio.dumps(json_obj) + "\n"
    elif args.format == "text":
        out = text + "\n"
    else:
        if dot is None:
            sys.stderr.write("dot output is only available for graph actions\n")
            return 2, ""
        out = dot + "\n"
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(out)
        except OSError as e:
            sys.stderr.write(f"io error: {e}\n")
            return 2, ""
        return 0, ""
    return 0, out


def main() -> None:
    code, out = run(sys.argv[1:])
    if out:
        sys.stdout.write(out)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
