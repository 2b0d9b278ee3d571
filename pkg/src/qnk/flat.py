"""Flat associate of a quasi-normal intersection pattern.

Each disk is replaced by a piecewise flat disk spanned by its points on the
1-skeleton:

* a normal triangle becomes the flat triangle on its three edge points;
* a normal quad becomes the cone from its four edge points to their centroid;
* a non-normal disk that is a graph over a face ``f`` becomes the polygon in
  ``f`` through its edge points on the edges of ``f``, with each excursion off
  ``f`` (edge points on edges leaving ``f``) capped by the polygon on that run
  and its two neighbours in ``f``.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateSpan, GluingMismatch, NotAGraph, SelfIntersectingRegion
from .intersection import (
    DiskClass,
    DiskComponent,
    IntersectionPattern,
    check_tameness,
    is_internally_quasi_normal,
    is_quasi_normal,
)
from .simplicial import LOCAL_EDGES, LOCAL_FACES, FaceLabel
from .surface import triangle_areas

COLLINEAR_TOL = 1e-12


class PieceKind(str, Enum):
    TRI3 = "Tri3"
    QUAD_CONE = "QuadCone"
    FACE_REGION = "FaceRegion"
    CORNER_CAP = "CornerCap"


@dataclass
class FlatPiece:
    tet: int
    component: int
    kind: PieceKind
    keys: tuple  # point keys of the three corners
    points: np.ndarray  # (3, 3) corners in the tet frame
    region: int | None = None


@dataclass
class FlatAssociateSurface:
    pieces: list = field(default_factory=list)
    multiplicity: dict = field(default_factory=dict)  # region id -> count
    regions: list = field(default_factory=list)  # region id -> (face id, frozenset of keys)
    gluing_ok: bool = True
    unmatched: list = field(default_factory=list)

    def triangle_points(self) -> np.ndarray:
        if not self.pieces:
            return np.zeros((0, 3, 3))
        return np.stack([p.points for p in self.pieces])

    @property
    def provenance(self) -> list:
        return [(p.tet, p.component, p.kind) for p in self.pieces]

    def euler_characteristic(self) -> int:
        verts = {k for p in self.pieces for k in p.keys}
        edges = {_undirected(s) for p in self.pieces for s in _segments(p)}
        return len(verts) - len(edges) + len(self.pieces)


def _segments(piece: FlatPiece):
    """Directed sides as (key a, key b, displacement); in a small torus the same
    two points can be joined by segments in different lattice directions."""
    for j in range(3):
        a, b = piece.keys[j], piece.keys[(j + 1) % 3]
        disp = tuple(np.round(piece.points[(j + 1) % 3] - piece.points[j], 9) + 0.0)
        yield a, b, disp


def _undirected(seg):
    a, b, disp = seg
    back = (b, a, tuple(-x + 0.0 for x in disp))
    return min(seg, back, key=repr)


def _edge_points(d: DiskComponent, p: IntersectionPattern):
    """Edge points of the disk boundary in loop order: (key, coords, local edge)."""
    out = []
    for key, shift, _, local in d.loops[0]:
        if local[0] == "e":
            out.append((key, p.point_coords(key, shift), local[1]))
    return out


def _check_span(pts: np.ndarray) -> None:
    a, b, c = pts
    scale = max(np.linalg.norm(b - a), np.linalg.norm(c - a), np.linalg.norm(c - b)) ** 2
    if np.linalg.norm(np.cross(b - a, c - a)) <= COLLINEAR_TOL * scale:
        raise DegenerateSpan("edge points are collinear")


def flat_disk_elementary(d: DiskComponent, p: IntersectionPattern) -> list[FlatPiece]:
    """Flat triangle for a normal triangle; centroid cone for a normal quad."""
    if d.klass not in (DiskClass.ELEMENTARY3, DiskClass.ELEMENTARY4):
        raise ValueError(f"component {d.id} is {d.klass}, not elementary")
    ep = _edge_points(d, p)
    keys = [k for k, _, _ in ep]
    pts = np.array([x for _, x, _ in ep])
    if len(ep) == 3:
        _check_span(pts)
        return [FlatPiece(d.tet_id, d.id, PieceKind.TRI3, tuple(keys), pts)]
    centre = pts.mean(axis=0)
    _check_span(pts[:3])
    ckey = ("centroid", d.id)
    return [
        FlatPiece(d.tet_id, d.id, PieceKind.QUAD_CONE, (keys[j], keys[(j + 1) % 4], ckey),
                  np.array([pts[j], pts[(j + 1) % 4], centre]))
        for j in range(4)
    ]


def _fan(keys, pts):
    return [((keys[0], keys[j], keys[j + 1]), np.array([pts[0], pts[j], pts[j + 1]]))
            for j in range(1, len(keys) - 1)]


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def _check_simple(pts2: np.ndarray, scale: float) -> None:
    m = len(pts2)
    for j in range(m):
        if np.linalg.norm(pts2[j] - pts2[(j + 1) % m]) <= 1e-12 * scale:
            raise SelfIntersectingRegion("consecutive region points coincide")
    for j in range(m):
        for k in range(j + 2, m):
            if j == 0 and k == m - 1:
                continue
            if _segments_cross(pts2[j], pts2[(j + 1) % m], pts2[k], pts2[(k + 1) % m]):
                raise SelfIntersectingRegion("region boundary crosses itself")


def flat_disk_nonnormal(d: DiskComponent, p: IntersectionPattern, local_face: int | None,
                        ) -> tuple[list[FlatPiece], frozenset]:
    """Face region plus caps for a tame non-normal disk over ``local_face``.

    Returns the pieces and the region identity (keys of the region corners).
    """
    if local_face is None:
        raise NotAGraph(f"component {d.id} is not a graph over any face")
    i = local_face
    ep = _edge_points(d, p)
    in_face = [i not in LOCAL_EDGES[k] for _, _, k in ep]
    if not any(in_face):
        raise NotAGraph(f"component {d.id} has no edge points on face {i}")
    # rotate so the sequence starts at a point on the face
    start = in_face.index(True)
    ep = ep[start:] + ep[:start]
    in_face = in_face[start:] + in_face[:start]

    region = [(k, x) for (k, x, _), f in zip(ep, in_face) if f]
    pieces = []
    m = len(ep)
    j = 0
    while j < m:
        if in_face[j] and not in_face[(j + 1) % m]:
            run = [j]
            q = (j + 1) % m
            while not in_face[q]:
                run.append(q)
                q = (q + 1) % m
            run.append(q)
            keys = [ep[r][0] for r in run]
            pts = np.array([ep[r][1] for r in run])
            for kk, tri in _fan(keys, pts):
                pieces.append(FlatPiece(d.tet_id, d.id, PieceKind.CORNER_CAP, kk, tri))
            j += len(run) - 1
        else:
            j += 1

    region_id = frozenset(k for k, _ in region)
    if len(region) >= 3:
        c = p.complex
        fp = c.vertices[c.tets[d.tet_id]][list(LOCAL_FACES[i])]
        n = np.cross(fp[1] - fp[0], fp[2] - fp[0])
        u = (fp[1] - fp[0]) / np.linalg.norm(fp[1] - fp[0])
        v = np.cross(n / np.linalg.norm(n), u)
        pts = np.array([x for _, x in region])
        pts2 = np.stack([pts @ u, pts @ v], axis=1)
        _check_simple(pts2, float(np.ptp(pts2, axis=0).max()))
        for kk, tri in _fan([k for k, _ in region], pts):
            pieces.append(FlatPiece(d.tet_id, d.id, PieceKind.FACE_REGION, kk, tri))
    elif len(region) == 2:
        a, b = (x for _, x in region)
        if np.linalg.norm(a - b) <= 1e-12 * max(1.0, np.linalg.norm(a)):
            raise SelfIntersectingRegion("bent curve collapses to a point")
    for piece in pieces:
        a, b, cc = piece.points
        if np.linalg.norm(np.cross(b - a, cc - a)) <= COLLINEAR_TOL * np.ptp(piece.points, axis=0).max() ** 2:
            raise DegenerateSpan(f"degenerate {piece.kind.value} triangle in component {d.id}")
    return pieces, region_id


def build_flat_associate(p: IntersectionPattern, samples: int = 64, internal: bool = False,
                         require_quasi_normal: bool = True) -> FlatAssociateSurface:
    """Flat associate of every disk, with the gluing audit and region multiplicities."""
    if require_quasi_normal:
        ok, witnesses = is_internally_quasi_normal(p) if internal else is_quasi_normal(p)
        if not ok:
            raise ValueError(f"pattern is not quasi-normal: {[w.to_dict() for w in witnesses]}")
    tame = {r.component: r for r in check_tameness(p, samples)}
    out = FlatAssociateSurface()
    region_index = {}
    counts = Counter()
    face_of = {}
    for d in p.components:
        if d.klass in (DiskClass.ELEMENTARY3, DiskClass.ELEMENTARY4):
            out.pieces += flat_disk_elementary(d, p)
        elif d.klass is DiskClass.NON_NORMAL:
            if not d.loops or not any(loc[0] == "e" for *_, loc in d.loops[0]):
                continue  # bounded by a closed curve in one face
            r = tame[d.id]
            pieces, rkey = flat_disk_nonnormal(d, p, r.local_face)
            key = (r.face_id, rkey)
            if key not in region_index:
                region_index[key] = len(out.regions)
                out.regions.append(key)
            rid = region_index[key]
            counts[rid] += 1
            face_of[rid] = r.face_id
            for piece in pieces:
                if piece.kind is PieceKind.FACE_REGION:
                    piece.region = rid
            out.pieces += pieces
    out.multiplicity = {rid: n for rid, n in counts.items() if n > 1}
    out.gluing_ok, out.unmatched = gluing_audit(out, p)
    return out


def gluing_audit(f: FlatAssociateSurface, p: IntersectionPattern):
    """Every segment must be used twice with opposite orientation, except
    segments lying in a boundary face of the complex."""
    directed = Counter(seg for piece in f.pieces for seg in _segments(piece))
    boundary_keys = set()
    c = p.complex
    for a in p.arcs:
        if c.face_labels[a.face_id] is FaceLabel.BOUNDARY:
            boundary_keys.update((a.points[0], a.points[-1]))
    unmatched = []
    seen = set()
    for seg, n in directed.items():
        a, b, disp = seg
        e = _undirected(seg)
        if e in seen:
            continue
        seen.add(e)
        back = directed.get((b, a, tuple(-x + 0.0 for x in disp)), 0)
        if n == 1 and back == 1:
            continue
        if n == 1 and back == 0 and a in boundary_keys and b in boundary_keys:
            continue
        unmatched.append((a, b, n, back))
    return not unmatched, unmatched


def require_glued(f: FlatAssociateSurface) -> None:
    if not f.gluing_ok:
        raise GluingMismatch(f"{len(f.unmatched)} unmatched segments, first {f.unmatched[0]}")


def multiple_area(f: FlatAssociateSurface) -> float:
    """Area with each face region counted as many times as disks project onto it."""
    if not f.pieces:
        return 0.0
    areas = triangle_areas(f.triangle_points())
    mult = np.array([f.multiplicity.get(piece.region, 1) if piece.region is not None else 1
                     for piece in f.pieces])
    return float(np.sum(areas * mult))


def region_areas(f: FlatAssociateSurface) -> dict:
    out = defaultdict(float)
    areas = triangle_areas(f.triangle_points()) if f.pieces else []
    for piece, a in zip(f.pieces, areas):
        if piece.region is not None:
            out[piece.region] += float(a)
    return dict(out)
