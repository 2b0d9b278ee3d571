"""Command-line entry point: ``qnk <subcommand> ...``.

Exit codes: 0 success, 1 input or I/O error, 2 a required check failed.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .convergence import LanternSpec, convergence_sweep, lantern_report, sweep_failures
from .errors import FormatError, QnkError
from .flat import build_flat_associate, multiple_area, region_areas
from .gons import enumerate_normal_curve_lengths
from .intersection import (
    check_tameness,
    class_counts,
    find_cylinders,
    intersect,
    is_internally_quasi_normal,
    is_quasi_normal,
)
from .linearize import build_pl_surface
from .median import edge_ratio_set, med_subdivide
from .quality import complex_fatness, tet_quality_arrays
from .simplicial import Complex3, mesh_size, read_complex, write_complex
from .surface import SurfaceMesh, mesh_from_triangles, read_off, surface_area, write_off


class CheckFailed(Exception):
    """A required property did not hold (exit code 2)."""


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("QNK_THREADS", "1")))


def _meta(args, **tolerances) -> dict:
    tol = {k: v for k, v in tolerances.items() if v is not None}
    return {"tool_version": __version__, "seed": args.seed, "tolerances": tol}


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _surface(path: str, c: Complex3) -> SurfaceMesh:
    return read_off(path, c.ambient)


# pattern files carry their inputs, so later stages recompute the same pattern


def _pattern_doc(s: SurfaceMesh, c: Complex3, seed: int, tol) -> dict:
    return {
        "format": "qnk-pattern",
        "seed": seed,
        "tol": tol,
        "complex": c.to_dict(),
        "surface": {"vertices": s.vertices.tolist(), "triangles": s.triangles.tolist()},
    }


def _load_pattern(path: str):
    doc = _load_json(path)
    if doc.get("format") != "qnk-pattern":
        raise FormatError(f"{path}: not a pattern file")
    c = Complex3.from_dict(doc["complex"])
    s = SurfaceMesh(doc["surface"]["vertices"], doc["surface"]["triangles"], c.ambient)
    return intersect(s, c, seed=doc.get("seed", 0), tol=doc.get("tol"))


# subcommands --------------------------------------------------------------

def cmd_validate(args) -> int:
    c = read_complex(args.inp)
    report = _meta(args) | {
        "valid": True,
        "ambient": c.ambient.to_dict(),
        "vertices": len(c.vertices),
        "edges": len(c.edges),
        "faces": len(c.faces),
        "tets": c.n_tets,
        "boundary_faces": len(c.boundary_faces()),
        "lambda": mesh_size(c),
    }
    _dump(report, args.out)
    return 0


def cmd_quality(args) -> int:
    c = read_complex(args.inp)
    q = tet_quality_arrays(np.stack([c.tet_coords(t) for t in range(c.n_tets)]))
    rows = [
        {"tet_id": t, "phi": float(q["phi"][t]), "r": float(q["r"][t]), "R": float(q["R"][t]),
         "min_dihedral": float(q["dihedral"][t].min()), "diameter": float(q["diameter"][t])}
        for t in range(c.n_tets)
    ]
    _dump(_meta(args) | {"min_fatness": complex_fatness(c), "rows": rows}, args.out)
    return 0


def cmd_subdivide(args) -> int:
    c = read_complex(args.inp)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rel_tol = 1e-6 if args.tol is None else args.tol
    rows = []
    for level in range(1, args.levels + 1):
        c, _ = med_subdivide(c, rel_tol)
        write_complex(c, out_dir / f"level_{level}.json")
        rows.append({"level": level, "tets": c.n_tets, "lambda": mesh_size(c),
                     "min_fatness": complex_fatness(c), "edge_ratio_set": edge_ratio_set(c)})
    _dump(_meta(args, shape_rel_tol=rel_tol) | {"rows": rows}, out_dir / "report.json")
    return 0


def cmd_classify(args) -> int:
    c = read_complex(args.complex)
    s = _surface(args.surface, c)
    p = intersect(s, c, seed=args.seed, tol=args.tol)
    qn, w = is_quasi_normal(p)
    iqn, iw = is_internally_quasi_normal(p, c)
    tame = check_tameness(p, args.samples)
    report = _meta(args, decision_tol=p.tol) | {
        "quasi_normal": qn,
        "internally_quasi_normal": iqn,
        "counts": class_counts(p),
        "violations": [x.to_dict() for x in w],
        "internal_violations": [x.to_dict() for x in iw],
        "cylinders": [{"disks": list(d), "arcs": list(a)} for d, a in find_cylinders(p, tame)],
        "tameness": [r.to_dict() for r in tame],
        "perturbation": [float(x) for x in p.perturbation],
        "attempts": p.attempts,
    }
    if args.pattern:
        _dump(_pattern_doc(s, c, args.seed, args.tol), args.pattern)
    _dump(report, args.out)
    if args.require_quasi_normal and not (iqn if args.internal else qn):
        raise CheckFailed("surface is not quasi-normal")
    return 0


def _require_qn(p, internal: bool) -> None:
    ok, w = is_internally_quasi_normal(p) if internal else is_quasi_normal(p)
    if not ok:
        raise CheckFailed(f"pattern is not quasi-normal: {[x.to_dict() for x in w]}")


def cmd_flat_associate(args) -> int:
    p = _load_pattern(args.pattern)
    _require_qn(p, args.internal)
    f = build_flat_associate(p, args.samples, internal=args.internal)
    verts, tris = mesh_from_triangles(f.triangle_points())
    write_off(args.out, verts, tris)
    areas = region_areas(f)
    report = _meta(args, decision_tol=p.tol) | {
        "triangles": len(f.pieces),
        "area": surface_area(f),
        "multiple_area": multiple_area(f),
        "multiplicities": [{"region": rid, "face": f.regions[rid][0], "count": n, "area": areas.get(rid, 0.0)}
                           for rid, n in sorted(f.multiplicity.items())],
        "gluing_ok": f.gluing_ok,
        "euler_char": f.euler_characteristic(),
    }
    _dump(report, args.report)
    if not f.gluing_ok:
        raise CheckFailed(f"gluing audit failed: {len(f.unmatched)} unmatched segments")
    return 0


def cmd_linearize(args) -> int:
    p = _load_pattern(args.pattern)
    _require_qn(p, args.internal)
    m = build_pl_surface(p, samples=args.samples)
    write_off(args.out, m.vertices, m.triangles)
    report = _meta(args, decision_tol=p.tol) | {
        "triangles": len(m.triangles),
        "area": surface_area(m),
        "closed": m.closed,
        "euler_char": m.euler_characteristic(),
    }
    _dump(report, args.report)
    return 0


def cmd_converge(args) -> int:
    c = read_complex(args.complex)
    s = _surface(args.surface, c)
    rows = convergence_sweep(s, c, args.levels, samples=args.samples, seed=args.seed,
                             internal=args.internal, workers=_threads(args))
    failures = sweep_failures(rows)
    # the CLI only has the mesh, so normals are always mesh-referenced
    report = _meta(args, samples_per_triangle=args.samples) | {
        "normal_reference": "mesh", "rows": [r.to_dict() for r in rows], "failures": failures}
    _dump(report, args.out)
    if failures:
        raise CheckFailed("; ".join(failures))
    return 0


def cmd_lantern(args) -> int:
    ns = [int(x) for x in args.n.split(",") if x.strip()]
    mode = {"skinny": "Skinny", "fat": "Fat"}[args.mode]
    rows = lantern_report([LanternSpec.of(n, mode) for n in ns])
    _dump(_meta(args) | {"rows": rows}, args.out)
    bad = [r["n"] for r in rows if r.get("bound_n_over_8_ok") is False
           or (r.get("within_1pct") is False and r["n"] >= 64)]
    if bad:
        raise CheckFailed(f"lantern bound failed for n = {bad}")
    return 0


def cmd_enumerate_gons(args) -> int:
    lengths = sorted(enumerate_normal_curve_lengths(args.max))
    sys.stdout.write(json.dumps(lengths) + "\n")
    if args.out:
        _dump(_meta(args) | {"max": args.max, "lengths": lengths}, args.out)
    return 0


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="worker cap (default: $QNK_THREADS or 1)")
    common.add_argument("--samples", type=int, default=16, help="samples per triangle")
    common.add_argument("--tol", type=float, default=None)

    parser = argparse.ArgumentParser(prog="qnk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="build and check a complex")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("quality", parents=[common], help="per-tet fatness report")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("subdivide", parents=[common], help="iterated median subdivision")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out-dir", "--out", dest="out_dir", required=True)
    p.set_defaults(func=cmd_subdivide)

    p = sub.add_parser("classify", parents=[common], help="intersect a surface with a complex")
    p.add_argument("--surface", required=True)
    p.add_argument("--complex", "--in", dest="complex", required=True)
    p.add_argument("--out")
    p.add_argument("--pattern", help="also write a pattern file for later stages")
    p.add_argument("--internal", action="store_true", help="use the internally quasi-normal variant")
    p.add_argument("--require-quasi-normal", action="store_true")
    p.set_defaults(func=cmd_classify)

    for name, func, helptext in (("flat-associate", cmd_flat_associate, "flat associate surface"),
                                 ("linearize", cmd_linearize, "PL surface from edge points")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--pattern", "--in", dest="pattern", required=True)
        p.add_argument("--out", required=True, help="OFF mesh")
        p.add_argument("--report")
        p.add_argument("--internal", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("converge", parents=[common], help="subdivision convergence sweep")
    p.add_argument("--surface", required=True)
    p.add_argument("--complex", "--in", dest="complex", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--internal", action="store_true")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("lantern", parents=[common], help="Schwarz lantern areas")
    p.add_argument("--mode", choices=["skinny", "fat"], required=True)
    p.add_argument("--n", required=True, help="comma-separated n values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lantern)

    p = sub.add_parser("enumerate-gons", parents=[common], help="lengths of normal curves on a tet")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate_gons)
    return parser


def _error(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        _error("CheckFailed", str(exc))
        return 2
    except QnkError as exc:
        _error(exc.code, str(exc))
        return 1
    except (OSError, ValueError, KeyError) as exc:
        _error(type(exc).__name__, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
