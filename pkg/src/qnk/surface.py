"""Triangle meshes for embedded surfaces, OFF reading/writing and areas."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import FormatError, NonManifoldSurface
from .simplicial import AmbientModel, simplex_keys, vertex_classes


@dataclass(eq=False)
class SurfaceMesh:
    """Oriented triangle mesh.

    In a flat torus, each triangle is stored by its lift: a vertex that is
    reached across the period appears as a separate entry whose coordinates
    differ by a period vector.  Entries are identified through
    :func:`vertex_classes`.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    ambient: AmbientModel = field(default_factory=AmbientModel.euclidean)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise FormatError("triangle index out of range")

    def with_ambient(self, ambient: AmbientModel) -> "SurfaceMesh":
        return SurfaceMesh(self.vertices, self.triangles, ambient)

    def translated(self, v) -> "SurfaceMesh":
        return SurfaceMesh(self.vertices + np.asarray(v, dtype=float), self.triangles, self.ambient)

    def triangle_points(self) -> np.ndarray:
        return self.vertices[self.triangles]

    @cached_property
    def topology(self) -> "SurfaceTopology":
        return SurfaceTopology.build(self)

    @property
    def oriented(self) -> bool:
        return self.topology.oriented

    @property
    def closed(self) -> bool:
        return self.topology.n_boundary_edges == 0

    def euler_characteristic(self) -> int:
        t = self.topology
        return t.n_vertices - t.n_edges + len(self.triangles)


# local edge k of a triangle runs from corner k to corner k + 1
TRI_EDGES = ((0, 1), (1, 2), (2, 0))


@dataclass(eq=False)
class SurfaceTopology:
    vertex_class: np.ndarray
    vertex_shift: np.ndarray
    tri_edges: np.ndarray  # (T, 3) edge class ids
    tri_edge_shift: np.ndarray  # (T, 3, 3) lattice shift of each stored edge copy
    tri_edge_order: np.ndarray  # (T, 3, 2) canonical corner order
    edge_count: np.ndarray
    n_vertices: int
    n_edges: int
    n_boundary_edges: int
    oriented: bool

    @classmethod
    def build(cls, s: SurfaceMesh) -> "SurfaceTopology":
        vclass, vshift = vertex_classes(s.vertices, s.ambient)
        tris = s.triangles
        if len(tris) == 0:
            empty = np.zeros((0, 3), dtype=np.int64)
            return cls(vclass, vshift, empty, np.zeros((0, 3, 3), np.int64),
                       np.zeros((0, 3, 2), np.int64), np.zeros(0, np.int64), 0, 0, 0, True)
        ids = tris[:, np.array(TRI_EDGES)].reshape(-1, 2)
        if np.any(vclass[ids[:, 0]] == vclass[ids[:, 1]]) and not s.ambient.is_torus:
            raise NonManifoldSurface("triangle with a repeated vertex")
        eidx, eoff, eorder = simplex_keys(ids, vclass, vshift, s.ambient)
        counts = np.bincount(eidx)
        if counts.max() > 2:
            raise NonManifoldSurface(f"an edge is shared by {counts.max()} triangles")
        # consistent winding: the two uses of an interior edge run opposite ways
        forward = eorder[:, 0] == 0
        fsum = np.bincount(eidx, weights=forward.astype(float), minlength=len(counts))
        interior = counts == 2
        oriented = bool(np.all(fsum[interior] == 1))
        shift = np.rint(eoff / np.asarray(s.ambient.period)).astype(np.int64) if s.ambient.is_torus \
            else np.zeros((len(eidx), 3), dtype=np.int64)
        return cls(
            vertex_class=vclass,
            vertex_shift=vshift,
            tri_edges=eidx.reshape(-1, 3),
            tri_edge_shift=shift.reshape(-1, 3, 3),
            tri_edge_order=eorder.reshape(-1, 3, 2),
            edge_count=counts,
            n_vertices=len(np.unique(vclass[tris])),
            n_edges=len(counts),
            n_boundary_edges=int(np.sum(counts == 1)),
            oriented=oriented,
        )


def triangle_areas(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return 0.5 * np.linalg.norm(np.cross(p[..., 1, :] - p[..., 0, :], p[..., 2, :] - p[..., 0, :]), axis=-1)


def surface_area(s) -> float:
    """Sum of triangle areas of a SurfaceMesh or anything with ``triangle_points()``."""
    p = s.triangle_points()
    if len(p) == 0:
        return 0.0
    return float(np.sum(triangle_areas(p)))


def read_off(path, ambient: AmbientModel | None = None) -> SurfaceMesh:
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.append(line)
    if not tokens or not tokens[0].startswith("OFF"):
        raise FormatError(f"{path}: missing OFF header")
    head = tokens[0][3:].split() or tokens.pop(1).split()
    tokens = tokens[1:]
    try:
        nv, nf = int(head[0]), int(head[1])
        verts = [list(map(float, tokens[i].split()[:3])) for i in range(nv)]
        faces = []
        for line in tokens[nv:nv + nf]:
            parts = line.split()
            if int(parts[0]) != 3:
                raise FormatError(f"{path}: only triangles are supported")
            faces.append([int(x) for x in parts[1:4]])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return SurfaceMesh(np.array(verts).reshape(-1, 3), np.array(faces).reshape(-1, 3),
                       ambient or AmbientModel.euclidean())


def write_off(path, vertices, triangles) -> None:
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    with open(path, "w") as fh:
        fh.write(f"OFF\n{len(vertices)} {len(triangles)} 0\n")
        for v in vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for t in triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def mesh_from_triangles(points) -> tuple[np.ndarray, np.ndarray]:
    """Merge a (T, 3, 3) triangle soup into vertices/indices by exact coordinates."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    verts, inverse = np.unique(p, axis=0, return_inverse=True)
    return verts, inverse.reshape(-1, 3)
