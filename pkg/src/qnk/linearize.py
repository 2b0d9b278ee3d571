"""Secant-map linearization: points on (possibly curved) edges are moved to the
straight edge at the same relative arclength, and disks are rebuilt from the
moved points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpan, GluingMismatch, PointNotOnEdge
from .flat import flat_disk_nonnormal
from .intersection import DiskClass, DiskComponent, IntersectionPattern, check_tameness
from .simplicial import Complex3, build_complex
from .surface import SurfaceMesh, triangle_areas

TIE_TOL = 1e-12


@dataclass
class ParamCurveEdge:
    """An edge drawn as a polyline from ``polyline[0]`` to ``polyline[-1]``."""

    edge_id: int
    polyline: np.ndarray

    def __post_init__(self):
        self.polyline = np.asarray(self.polyline, dtype=float).reshape(-1, 3)
        if len(self.polyline) < 2:
            raise ValueError("polyline needs at least two points")
        seg = np.linalg.norm(np.diff(self.polyline, axis=0), axis=1)
        self.arclength = np.concatenate([[0.0], np.cumsum(seg)])
        if self.arclength[-1] <= 0:
            raise ValueError("polyline has zero length")

    @property
    def straight_span(self) -> tuple[np.ndarray, np.ndarray]:
        return self.polyline[0], self.polyline[-1]

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    @classmethod
    def straight(cls, edge_id: int, a, b) -> "ParamCurveEdge":
        return cls(edge_id, np.array([a, b], dtype=float))

    def locate(self, x, tol: float = 1e-9) -> float:
        """Arclength fraction of the polyline point nearest ``x``."""
        x = np.asarray(x, dtype=float)
        a, b = self.polyline[:-1], self.polyline[1:]
        d = b - a
        dd = np.einsum("ij,ij->i", d, d)
        u = np.clip(np.einsum("ij,ij->i", x - a, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        foot = a + u[:, None] * d
        dist = np.linalg.norm(foot - x, axis=1)
        k = int(np.argmin(dist))
        if dist[k] > tol * self.length:
            raise PointNotOnEdge(f"point is {dist[k]:.3g} away from edge {self.edge_id}")
        s = self.arclength[k] + u[k] * np.sqrt(dd[k])
        return float(s / self.length)


def project_point_to_edge(x, e: ParamCurveEdge, tol: float = 1e-9) -> np.ndarray:
    """Point of the straight edge at the same relative arclength as ``x`` on ``e``."""
    t = e.locate(x, tol)
    a, b = e.straight_span
    return a + t * (b - a)


def curved_edge_table(c: Complex3, warp, samples: int = 16) -> dict[int, ParamCurveEdge]:
    """Image of every straight edge under the map ``warp`` (vectorized over points),
    sampled as a polyline.  Vertices are fixed points only if ``warp`` fixes them."""
    t = np.linspace(0.0, 1.0, samples + 1)
    table = {}
    for e, (a, b) in enumerate(c.edges):
        pa, pb = c.vertices[a], c.vertices[b]
        table[e] = ParamCurveEdge(e, warp(pa + t[:, None] * (pb - pa)))
    return table


def linearize_complex(c: Complex3, edges: dict[int, ParamCurveEdge] | None = None) -> Complex3:
    """Straight complex with the same vertices and combinatorics.

    The curved table must cover every edge and agree with the vertices at the
    endpoints; straight edges may be given as two-point polylines.
    """
    if edges is not None:
        missing = set(range(len(c.edges))) - set(edges)
        if missing:
            raise ValueError(f"curved-edge table misses {len(missing)} edges")
        for e, (a, b) in enumerate(c.edges):
            p, q = edges[e].straight_span
            scale = max(1.0, float(np.abs(c.vertices[[a, b]]).max()))
            if not (np.allclose(p, c.vertices[a], atol=1e-12 * scale)
                    and np.allclose(q, c.vertices[b], atol=1e-12 * scale)):
                raise ValueError(f"edge {e} polyline does not end at its vertices")
    return build_complex(c.vertices.copy(), c.tets.copy(), c.ambient)


def projected_points(p: IntersectionPattern, edges: dict[int, ParamCurveEdge] | None = None,
                     curved_points: dict | None = None) -> dict:
    """Projected coordinates of every edge point, computed once per point key.

    ``curved_points`` gives each edge point's position on its curved edge; by
    default the pattern's own (straight-edge) positions are used.
    """
    out = {}
    for key, (e, _) in p.te_param.items():
        x = p.points[key] if curved_points is None else curved_points[key]
        if edges is None:
            out[key] = np.asarray(x, dtype=float)
        else:
            out[key] = project_point_to_edge(x, edges[e])
    return out


def _quad_split(keys, pts):
    """Two triangles of the quad, split along the diagonal of smaller total area."""
    splits = []
    for a in (0, 1):
        b, c, d = (a + 1) % 4, (a + 2) % 4, (a + 3) % 4
        tris = [(a, b, c), (a, c, d)]
        area = float(triangle_areas(np.array([[pts[i] for i in t] for t in tris])).sum())
        diag = tuple(sorted((keys[a], keys[c]), key=repr))
        splits.append((area, diag, tris))
    (a0, d0, t0), (a1, d1, t1) = splits
    if abs(a0 - a1) <= TIE_TOL * max(a0, a1):
        return t0 if repr(d0) <= repr(d1) else t1
    return t0 if a0 < a1 else t1


def build_pl_disk(d: DiskComponent, p: IntersectionPattern, proj: dict,
                  local_face: int | None = None) -> list[tuple]:
    """Triangles of the PL disk as ((key, shift) triples, (3, 3) points)."""
    entries = [(k, sh) for k, sh, _, loc in d.loops[0] if loc[0] == "e"]
    L = np.asarray(p.complex.ambient.period if p.complex.ambient.is_torus else (0.0, 0.0, 0.0))

    def pos(k, sh):
        return proj[k] + np.asarray(sh) * L

    if d.klass in (DiskClass.ELEMENTARY3, DiskClass.ELEMENTARY4):
        pts = [pos(k, sh) for k, sh in entries]
        if len(entries) == 3:
            a, b, c = pts
            if np.linalg.norm(np.cross(b - a, c - a)) <= 1e-12 * max(np.ptp(pts, axis=0)) ** 2:
                raise DegenerateSpan(f"component {d.id}: collinear edge points")
            tris = [(0, 1, 2)]
        else:
            tris = _quad_split([k for k, _ in entries], pts)
        return [(tuple(entries[i] for i in t), np.array([pts[i] for i in t])) for t in tris]
    if d.klass is DiskClass.NON_NORMAL:
        shift_of = dict(entries)
        pieces, _ = flat_disk_nonnormal(d, p, local_face)
        out = []
        for piece in pieces:
            ks = tuple((k, shift_of[k]) for k in piece.keys)
            out.append((ks, np.array([pos(k, sh) for k, sh in ks])))
        return out
    raise ValueError(f"component {d.id} is {d.klass.value}")


def build_pl_surface(p: IntersectionPattern, c_hat: Complex3 | None = None,
                     edges: dict[int, ParamCurveEdge] | None = None,
                     curved_points: dict | None = None, samples: int = 64) -> SurfaceMesh:
    """PL surface in the linearized complex; one vertex per projected edge point."""
    proj = projected_points(p, edges, curved_points)
    tame = {r.component: r.local_face for r in check_tameness(p, samples)}
    ambient = (c_hat or p.complex).ambient
    index: dict = {}
    verts, tris = [], []
    for d in p.components:
        if d.klass is DiskClass.NON_NORMAL and not any(loc[0] == "e" for *_, loc in d.loops[0]):
            continue
        if d.klass not in (DiskClass.ELEMENTARY3, DiskClass.ELEMENTARY4, DiskClass.NON_NORMAL):
            raise ValueError(f"component {d.id} is {d.klass.value}")
        for ks, pts in build_pl_disk(d, p, proj, tame.get(d.id)):
            tri = []
            for (k, sh), x in zip(ks, pts):
                vk = (k, tuple(int(s) for s in sh))
                if vk not in index:
                    index[vk] = len(verts)
                    verts.append(x)
                tri.append(index[vk])
            tris.append(tri)
    mesh = SurfaceMesh(np.array(verts).reshape(-1, 3), np.array(tris).reshape(-1, 3), ambient)
    if p.surface.closed and p.surface.oriented and mesh.topology.n_boundary_edges:
        boundary_faces = set(p.complex.boundary_faces())
        if not boundary_faces:
            raise GluingMismatch(f"{mesh.topology.n_boundary_edges} unmatched PL edges")
    return mesh
