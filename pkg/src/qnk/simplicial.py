"""Embedded tetrahedral complexes in a Euclidean region or a flat 3-torus.

A complex is given by vertex coordinates and tetrahedra (4-tuples of vertex
indices).  In the flat torus each tetrahedron is stored by its lift, i.e. with
the actual (unwrapped) coordinates of its corners; faces and edges of
different tetrahedra are identified when they are translates of each other by
a period vector.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DegenerateTet,
    DuplicateSimplex,
    FormatError,
    ImproperIntersection,
    IndexOutOfRange,
)

# local edge (i, j) of a tet, and local face i (opposite local vertex i)
LOCAL_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
LOCAL_FACES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
# local edges lying in local face i
FACE_EDGES = tuple(
    tuple(k for k, e in enumerate(LOCAL_EDGES) if set(e) <= set(f)) for f in LOCAL_FACES
)

VOLUME_TOL = 1e-12
_QUANTUM_BITS = 30


class AmbientKind(str, Enum):
    EUCLIDEAN = "EuclideanRegion"
    TORUS = "FlatTorus3"


class FaceLabel(str, Enum):
    INTERNAL = "Internal"
    BOUNDARY = "Boundary"


class TetLabel(str, Enum):
    INTERNAL = "Internal"
    PERIPHERAL = "Peripheral"


@dataclass(frozen=True)
class AmbientModel:
    kind: AmbientKind = AmbientKind.EUCLIDEAN
    period: tuple[float, float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AmbientKind(self.kind))
        if self.kind is AmbientKind.TORUS:
            if self.period is None or len(self.period) != 3:
                raise ValueError("FlatTorus3 needs a length-3 period")
            period = tuple(float(p) for p in self.period)
            if not all(np.isfinite(p) and p > 0 for p in period):
                raise ValueError(f"period components must be positive, got {period}")
            object.__setattr__(self, "period", period)
        elif self.period is not None:
            raise ValueError("period is only meaningful for FlatTorus3")

    @classmethod
    def euclidean(cls) -> "AmbientModel":
        return cls(AmbientKind.EUCLIDEAN)

    @classmethod
    def torus(cls, period=(1.0, 1.0, 1.0)) -> "AmbientModel":
        return cls(AmbientKind.TORUS, tuple(period))

    @property
    def is_torus(self) -> bool:
        return self.kind is AmbientKind.TORUS

    def shifts(self) -> np.ndarray:
        """The 27 period shifts {-1, 0, 1}^3 * period (just the origin in R^3)."""
        if not self.is_torus:
            return np.zeros((1, 3))
        grid = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=float)
        # put the zero shift first so untranslated pieces come first
        grid = grid[np.argsort(np.abs(grid).sum(axis=1), kind="stable")]
        return grid * np.asarray(self.period)

    def wrap(self, points: np.ndarray) -> np.ndarray:
        """Map points into the fundamental cell [0, period)."""
        points = np.asarray(points, dtype=float)
        if not self.is_torus:
            return points
        period = np.asarray(self.period)
        out = np.mod(points, period)
        out[out >= period] = 0.0
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.is_torus:
            d["period"] = list(self.period)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AmbientModel":
        return cls(AmbientKind(d["kind"]), tuple(d["period"]) if "period" in d else None)


@dataclass(frozen=True)
class ManifoldBounds:
    """Curvature budget and injectivity radius of the ambient manifold.

    Both are inputs supplied by the caller; nothing here estimates them.
    """

    curvature_budget_C: float = 0.0
    inj_radius: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.curvature_budget_C) or self.curvature_budget_C < 0:
            raise ValueError("curvature_budget_C must be finite and nonnegative")
        if not (np.isfinite(self.inj_radius) and self.inj_radius > 0):
            raise ValueError("inj_radius must be finite and positive")


def ambient_distance(p, q, ambient: AmbientModel) -> float:
    """Euclidean distance, minimised over the 27 nearest period shifts in a torus."""
    diff = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    if not ambient.is_torus:
        return float(np.linalg.norm(diff))
    return float(np.min(np.linalg.norm(diff[None, :] + ambient.shifts(), axis=1)))


def vertex_classes(coords, ambient: AmbientModel):
    """Identify points equal up to a period shift.

    Returns ``(cls, shift)``: an integer class per point (classes numbered in
    sorted order of the wrapped, quantised position) and the integer lattice
    shift of each point relative to its wrapped copy.  In R^3 every point is
    its own class.
    """
    coords = np.asarray(coords, dtype=float).reshape(-1, 3)
    if not ambient.is_torus:
        return np.arange(len(coords)), np.zeros((len(coords), 3), dtype=np.int64)
    scale = 2**_QUANTUM_BITS
    q = np.rint(coords / (np.asarray(ambient.period) / scale)).astype(np.int64)
    wrapped = np.mod(q, scale)
    shift = (q - wrapped) // scale
    _, cls = np.unique(wrapped, axis=0, return_inverse=True)
    return cls.reshape(-1), shift


def simplex_keys(ids, vclass, vshift, ambient: AmbientModel):
    """Canonical identity of simplices up to period translation.

    ``ids`` is (M, k) of vertex indices.  Returns ``(index, offsets, order)``:
    a dense id per simplex (equal ids for translates, numbered in sorted key
    order), the translation taking the canonical copy onto each given copy,
    and the permutation putting each simplex's corners in canonical order.
    The canonical copy is the lift whose smallest-class corner is wrapped.
    """
    ids = np.asarray(ids, dtype=np.int64)
    m, k = ids.shape
    cls = vclass[ids]
    if not ambient.is_torus:
        order = np.argsort(cls, axis=1, kind="stable")
        cls_sorted = np.take_along_axis(cls, order, axis=1)
        _, index = np.unique(cls_sorted, axis=0, return_inverse=True)
        return index.reshape(-1), np.zeros((m, 3)), order
    sh = vshift[ids]
    # corners of one simplex may share a class (e.g. a one-vertex torus);
    # order by (class, shift), which is preserved under translation
    comp = cls.astype(np.int64)
    for a in range(3):
        comp = comp * 1024 + (sh[:, :, a] + 512)
    order = np.argsort(comp, axis=1, kind="stable")
    cls_sorted = np.take_along_axis(cls, order, axis=1)
    sh_sorted = np.take_along_axis(sh, order[:, :, None], axis=1)
    rel = sh_sorted - sh_sorted[:, :1, :]
    key = np.concatenate([cls_sorted, rel.reshape(m, -1)], axis=1)
    _, index = np.unique(key, axis=0, return_inverse=True)
    offsets = sh_sorted[:, 0, :] * np.asarray(ambient.period)
    return index.reshape(-1), offsets, order


@dataclass(eq=False)
class Complex3:
    """A validated simplicial 3-complex; build it with :func:`build_complex`."""

    vertices: np.ndarray
    tets: np.ndarray
    ambient: AmbientModel
    edges: np.ndarray = field(repr=False)
    faces: np.ndarray = field(repr=False)
    tet_edges: np.ndarray = field(repr=False)
    tet_edge_offsets: np.ndarray = field(repr=False)
    tet_edge_flip: np.ndarray = field(repr=False)
    tet_faces: np.ndarray = field(repr=False)
    tet_face_offsets: np.ndarray = field(repr=False)
    tet_face_order: np.ndarray = field(repr=False)
    face_tets: list = field(repr=False)
    face_labels: list = field(repr=False)
    face_peripheral: np.ndarray = field(repr=False)
    edge_on_boundary: np.ndarray = field(repr=False)
    tet_labels: list = field(repr=False)
    vertex_class: np.ndarray = field(repr=False)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def tet_coords(self, t: int) -> np.ndarray:
        return self.vertices[self.tets[t]]

    def local_face_coords(self, t: int, i: int) -> np.ndarray:
        """Corners of local face ``i`` of tet ``t`` in canonical order, tet frame."""
        local = [self.tets[t][k] for k in LOCAL_FACES[i]]
        order = self.tet_face_order[t, i]
        return self.vertices[[local[k] for k in order]]

    def local_edge_coords(self, t: int, k: int) -> np.ndarray:
        """Endpoints of local edge ``k`` of tet ``t`` in canonical order, tet frame."""
        i, j = LOCAL_EDGES[k]
        a, b = self.tets[t][i], self.tets[t][j]
        if self.tet_edge_flip[t, k]:
            a, b = b, a
        return self.vertices[[a, b]]

    def boundary_faces(self) -> list[int]:
        return [f for f, lab in enumerate(self.face_labels) if lab is FaceLabel.BOUNDARY]

    def to_dict(self) -> dict:
        tets = sorted(tuple(int(v) for v in t) for t in self.tets)
        return {
            "ambient": self.ambient.to_dict(),
            "vertices": [[float(x) for x in v] for v in self.vertices],
            "tets": [list(t) for t in tets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Complex3":
        try:
            ambient = AmbientModel.from_dict(d.get("ambient", {"kind": "EuclideanRegion"}))
            return build_complex(d["vertices"], d["tets"], ambient)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed complex: {exc}") from exc


def tet_signed_volume(p: np.ndarray) -> np.ndarray:
    """Signed volume of tets given as (..., 4, 3) corner arrays."""
    p = np.asarray(p, dtype=float)
    d = p[..., 1:, :] - p[..., :1, :]
    return np.einsum("...i,...i->...", d[..., 0, :], np.cross(d[..., 1, :], d[..., 2, :])) / 6.0


def _tet_diameters(p: np.ndarray) -> np.ndarray:
    return np.max(
        np.stack([np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in LOCAL_EDGES], axis=1),
        axis=1,
    )


def build_complex(vertices, tets, ambient: AmbientModel | None = None) -> Complex3:
    """Validate ``vertices``/``tets`` and derive skeleta, adjacency and labels.

    Each tet is normalised to sorted vertex indices, with the last two swapped
    when needed so that its signed volume is positive.  Tets keep their input
    order; edges and faces are numbered in sorted order of their keys.
    """
    ambient = ambient or AmbientModel.euclidean()
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 3 or not np.all(np.isfinite(verts)):
        raise FormatError("vertices must be a finite (N, 3) array")
    tet_arr = np.asarray(tets)
    if tet_arr.ndim != 2 or tet_arr.shape[1] != 4 or len(tet_arr) == 0:
        raise FormatError("need at least one tet given as 4 vertex indices")
    if not np.issubdtype(tet_arr.dtype, np.integer):
        if not np.issubdtype(tet_arr.dtype, np.number) or np.any(np.mod(tet_arr, 1) != 0):
            raise FormatError("tet indices must be integers")
        tet_arr = tet_arr.astype(np.int64)
    if tet_arr.min() < 0 or tet_arr.max() >= len(verts):
        raise IndexOutOfRange(f"tet index outside 0..{len(verts) - 1}")

    norm = np.sort(tet_arr.astype(np.int64), axis=1)
    rep = np.flatnonzero((np.diff(norm, axis=1) == 0).any(axis=1))
    if len(rep):
        raise DegenerateTet(f"tet {rep[0]} repeats a vertex: {norm[rep[0]].tolist()}")
    p = verts[norm]
    vol = tet_signed_volume(p)
    small = np.flatnonzero(np.abs(vol) < VOLUME_TOL * _tet_diameters(p) ** 3)
    if len(small):
        raise DegenerateTet(f"tet {small[0]} has volume {vol[small[0]]:.3e} below tolerance")
    neg = vol < 0
    norm[neg, 2], norm[neg, 3] = norm[neg, 3], norm[neg, 2].copy()
    m = len(norm)

    vclass, vshift = vertex_classes(verts, ambient)
    tidx, _, _ = simplex_keys(norm, vclass, vshift, ambient)
    counts = np.bincount(tidx)
    if counts.max() > 1:
        dup = np.flatnonzero(tidx == np.argmax(counts > 1))
        raise DuplicateSimplex(f"tets {dup.tolist()} coincide")

    e_ids = norm[:, np.array(LOCAL_EDGES)].reshape(-1, 2)
    eidx, eoff, eorder = simplex_keys(e_ids, vclass, vshift, ambient)
    _, efirst = np.unique(eidx, return_index=True)
    edges = np.take_along_axis(e_ids, eorder, axis=1)[efirst]

    f_ids = norm[:, np.array(LOCAL_FACES)].reshape(-1, 3)
    fidx, foff, forder = simplex_keys(f_ids, vclass, vshift, ambient)
    _, ffirst = np.unique(fidx, return_index=True)
    f_canon = np.take_along_axis(f_ids, forder, axis=1)
    faces = f_canon[ffirst]

    fcount = np.bincount(fidx)
    if fcount.max() > 2:
        bad = int(np.argmax(fcount > 2))
        raise ImproperIntersection(f"face {bad} is shared by {fcount[bad]} tets")

    # glued tets must lie on opposite sides of their common face
    inc = np.argsort(fidx, kind="stable")
    shared = fcount[fidx[inc]] == 2
    pairs = inc[shared].reshape(-1, 2)
    if len(pairs):
        fc = verts[f_canon[pairs]] - foff[pairs][:, :, None, :]
        apex_local = (pairs % 4)
        apex = verts[norm[pairs // 4, apex_local]] - foff[pairs]
        nrm = np.cross(fc[:, :, 1] - fc[:, :, 0], fc[:, :, 2] - fc[:, :, 0])
        side = np.einsum("pki,pki->pk", nrm, apex - fc[:, :, 0])
        clash = np.flatnonzero(side[:, 0] * side[:, 1] >= 0)
        if len(clash):
            t0, t1 = (pairs[clash[0]] // 4).tolist()
            raise ImproperIntersection(f"tets {t0} and {t1} overlap across a shared face")

    face_tets: list[list[tuple[int, int]]] = [[] for _ in range(len(faces))]
    for flat in inc.tolist():
        face_tets[fidx[flat]].append((flat // 4, flat % 4))
    is_bdry = fcount == 1
    face_labels = [FaceLabel.BOUNDARY if b else FaceLabel.INTERNAL for b in is_bdry]

    tet_faces = fidx.reshape(m, 4)
    tet_edges = eidx.reshape(m, 6)
    bflat = np.flatnonzero(is_bdry[fidx])
    boundary_classes = np.unique(vclass[f_ids[bflat]])
    edge_on_boundary = np.zeros(len(edges), dtype=bool)
    if len(bflat):
        fe = np.array(FACE_EDGES)[bflat % 4]
        edge_on_boundary[tet_edges[bflat // 4][np.arange(len(bflat))[:, None], fe]] = True
    face_peripheral = np.isin(vclass[faces], boundary_classes).any(axis=1)
    tet_peripheral = np.isin(vclass[norm], boundary_classes).any(axis=1)
    tet_labels = [TetLabel.PERIPHERAL if b else TetLabel.INTERNAL for b in tet_peripheral]

    return Complex3(
        vertices=verts,
        tets=norm,
        ambient=ambient,
        edges=edges,
        faces=faces,
        tet_edges=tet_edges,
        tet_edge_offsets=eoff.reshape(m, 6, 3),
        tet_edge_flip=(eorder[:, 0] == 1).reshape(m, 6),
        tet_faces=tet_faces,
        tet_face_offsets=foff.reshape(m, 4, 3),
        tet_face_order=forder.reshape(m, 4, 3),
        face_tets=face_tets,
        face_labels=face_labels,
        face_peripheral=face_peripheral,
        edge_on_boundary=edge_on_boundary,
        tet_labels=tet_labels,
        vertex_class=vclass,
    )


def mesh_size(c: Complex3) -> float:
    """Largest tet diameter.

    Diameters are taken from each tet's own (lifted) edge vectors, which is the
    intrinsic geodesic edge length; for tets smaller than half a period this is
    the minimum-image torus distance.
    """
    p = c.vertices[c.tets]
    d = [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in LOCAL_EDGES]
    return float(np.max(d))


def edge_lengths(c: Complex3) -> np.ndarray:
    """(M, 6) lifted edge lengths per tet, in ``LOCAL_EDGES`` order."""
    p = c.vertices[c.tets]
    return np.stack([np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in LOCAL_EDGES], axis=1)


def read_complex(path) -> Complex3:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return Complex3.from_dict(data)


def write_complex(c: Complex3, path) -> None:
    with open(path, "w") as fh:
        json.dump(c.to_dict(), fh, indent=1)
        fh.write("\n")
