"""Intersection of a surface mesh with a tetrahedral complex.

Every surface triangle is clipped against every tet it may meet (in a flat
torus, against each period image that overlaps).  Clipped points carry
symbolic keys so that the same point computed from two different tets is
recognised as one:

* ``('v', c)``: surface vertex of class ``c``;
* ``('ef', e, f, r)``: surface edge class ``e`` crossing face class ``f``;
* ``('te', tau, e, r)``: surface triangle ``tau`` crossing complex edge ``e``.

``r`` is the lattice shift between the two canonical copies involved, so keys
are invariant under period translation.  Side-of-plane decisions and point
coordinates are computed once per key in a canonical frame and cached, which
keeps the combinatorics consistent across neighbouring tets.  A decision that
is too close to zero triggers a retry with a small seeded translation of the
surface.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .errors import PerturbationFailed
from .median import EDGE_INDEX
from .simplicial import LOCAL_EDGES, LOCAL_FACES, Complex3, FaceLabel, TetLabel, mesh_size
from .surface import TRI_EDGES, SurfaceMesh, triangle_areas

DECISION_TOL = 1e-12  # relative to mesh size
PERTURBATION = 1e-7  # relative to mesh size
MAX_ATTEMPTS = 8


class ArcClass(str, Enum):
    NORMAL = "NormalArc"
    BENT = "BentCurve"
    CLOSED = "ClosedCurve"
    OPEN = "OpenArc"  # ends at the surface's own boundary inside a face


class DiskClass(str, Enum):
    ELEMENTARY3 = "Elementary3"
    ELEMENTARY4 = "Elementary4"
    NORMAL_NGON = "NormalNGon"
    NON_NORMAL = "NonNormal"
    NON_DISK = "NonDisk"


@dataclass
class Polygon:
    tet: int
    triangle: int
    shift: tuple[int, int, int]  # lattice shift of the surface triangle copy
    keys: list  # point keys, in surface winding order
    shifts: list  # frame shift of each point (tet frame = canonical + shift * period)
    labels: list  # label of the edge from point i to point i + 1
    local: list  # ('v',), ('f', i) or ('e', k): tet-local feature each point lies on
    coords: np.ndarray

    def area(self) -> float:
        p = self.coords
        if len(p) < 3:
            return 0.0
        return float(np.sum(triangle_areas(np.stack([np.repeat(p[:1], len(p) - 2, 0), p[1:-1], p[2:]], 1))))


@dataclass
class Arc:
    id: int
    face_id: int
    points: list  # point keys along the arc
    polyline: np.ndarray  # coordinates in the face's canonical frame
    endpoints: tuple[int, int] | None  # complex edge ids, None for closed curves
    klass: ArcClass | None = None
    tets: list = field(default_factory=list)
    end_local: tuple | None = None  # local edges of the endpoints in the first tet


@dataclass
class DiskComponent:
    id: int
    tet_id: int
    polygons: list
    loops: list  # boundary loops: lists of (key, shift, label_to_next, local)
    loop_arcs: list  # per loop, arc ids in loop order
    euler_char: int
    n_vertices: int
    n_edges: int
    area: float
    open_boundary: bool = False
    klass: DiskClass | None = None
    n_gon: int | None = None
    partition: tuple | None = None  # tet-local vertex sides, Elementary3/4 only

    @property
    def is_disk(self) -> bool:
        return self.euler_char == 1 and len(self.loops) == 1 and not self.open_boundary


@dataclass
class IntersectionPattern:
    complex: Complex3 = field(repr=False)
    surface: SurfaceMesh = field(repr=False)
    arcs: list
    components: list
    face_arcs: dict  # face id -> arc ids
    tet_components: dict  # tet id -> component ids
    points: dict = field(repr=False)  # key -> canonical coordinates
    te_param: dict = field(repr=False)  # 'te' key -> (edge id, t from canonical first vertex)
    perturbation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    perturbation_magnitude: float = 0.0
    attempts: int = 1
    seed: int = 0
    tol: float = 0.0

    def point_coords(self, key, shift) -> np.ndarray:
        return self.points[key] + np.asarray(shift) * _period(self.complex)

    def to_dict(self) -> dict:
        """Deterministic summary (used for reproducibility checks)."""
        return {
            "perturbation": [float(x) for x in self.perturbation],
            "attempts": self.attempts,
            "arcs": [
                {
                    "id": a.id,
                    "face": a.face_id,
                    "class": a.klass.value if a.klass else None,
                    "endpoints": list(a.endpoints) if a.endpoints else None,
                    "points": [_key_str(k) for k in a.points],
                    "tets": a.tets,
                }
                for a in self.arcs
            ],
            "components": [
                {
                    "id": d.id,
                    "tet": d.tet_id,
                    "class": d.klass.value if d.klass else None,
                    "n_gon": d.n_gon,
                    "euler_char": d.euler_char,
                    "arcs": d.loop_arcs,
                    "area": d.area,
                }
                for d in self.components
            ],
        }


def _key_str(k) -> str:
    return ":".join(str(x) for x in k)


def _period(c: Complex3) -> np.ndarray:
    return np.asarray(c.ambient.period) if c.ambient.is_torus else np.ones(3)


class _Degenerate(Exception):
    pass


class _Clipper:
    def __init__(self, s: SurfaceMesh, c: Complex3, delta: np.ndarray, tol: float):
        self.s, self.c, self.delta, self.tol = s, c, np.asarray(delta, dtype=float), tol
        self.topo = s.topology
        self.L = _period(c)
        torus = c.ambient.is_torus
        self.face_shift = (np.rint(c.tet_face_offsets / self.L).astype(np.int64) if torus
                           else np.zeros(c.tet_face_offsets.shape, np.int64))
        self.edge_shift = (np.rint(c.tet_edge_offsets / self.L).astype(np.int64) if torus
                           else np.zeros(c.tet_edge_offsets.shape, np.int64))
        # canonical face planes and edges
        self.face_anchor = np.zeros((len(c.faces), 3))
        self.face_normal = np.zeros((len(c.faces), 3))
        for f, inc in enumerate(c.face_tets):
            t, i = inc[0]
            p = c.local_face_coords(t, i) - c.tet_face_offsets[t, i]
            n = np.cross(p[1] - p[0], p[2] - p[0])
            self.face_anchor[f] = p[0]
            self.face_normal[f] = n / np.linalg.norm(n)
        self.edge_pts = np.zeros((len(c.edges), 2, 3))
        done = np.zeros(len(c.edges), dtype=bool)
        for t in range(c.n_tets):
            for k in range(6):
                e = c.tet_edges[t, k]
                if not done[e]:
                    self.edge_pts[e] = c.local_edge_coords(t, k) - c.tet_edge_offsets[t, k]
                    done[e] = True
        self.points: dict = {}
        self.te_param: dict = {}
        self._decisions: dict = {}

    # canonical geometry -------------------------------------------------
    def vertex_point(self, vidx: int):
        cls = int(self.topo.vertex_class[vidx])
        key = ("v", cls)
        if key not in self.points:
            self.points[key] = self.s.vertices[vidx] - self.topo.vertex_shift[vidx] * self.L + self.delta
        return key, self.topo.vertex_shift[vidx]

    def decision(self, key, dshift, f: int) -> float:
        dk = (key, f, tuple(int(x) for x in dshift))
        d = self._decisions.get(dk)
        if d is None:
            x = self.points[key] + np.asarray(dshift) * self.L
            d = float(np.dot(self.face_normal[f], x - self.face_anchor[f]))
            self._decisions[dk] = d
        return d

    def edge_face_point(self, key, pa, pb, f: int):
        if key not in self.points:
            n, a = self.face_normal[f], self.face_anchor[f]
            da, db = np.dot(n, pa - a), np.dot(n, pb - a)
            self.points[key] = pa + (pb - pa) * (da / (da - db))

    def tri_edge_point(self, key, tri, e: int):
        if key not in self.points:
            a, b = self.edge_pts[e]
            n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
            t = float(np.dot(n, tri[0] - a) / np.dot(n, b - a))
            self.points[key] = a + (b - a) * t
            self.te_param[key] = (int(e), t)

    # clipping -----------------------------------------------------------
    def clip(self, t: int, tau: int, nshift: np.ndarray) -> Polygon | None:
        c, L = self.c, self.L
        tri_idx = self.s.triangles[tau]
        tri = self.s.vertices[tri_idx] + nshift * L + self.delta  # tet frame
        poly = []
        for k in range(3):
            key, vsh = self.vertex_point(int(tri_idx[k]))
            e = int(self.topo.tri_edges[tau, k])
            esh = self.topo.tri_edge_shift[tau, k] + nshift
            order = self.topo.tri_edge_order[tau, k]
            ends = tuple(TRI_EDGES[k][o] for o in order)
            poly.append([key, tuple(int(x) for x in vsh + nshift), ("se", e, tuple(esh), ends), ("v",)])
        tet_pts = c.vertices[c.tets[t]]
        for i in range(4):
            if len(poly) < 3:
                return None
            f = int(c.tet_faces[t, i])
            fsh = self.face_shift[t, i]
            apex = np.dot(self.face_normal[f], tet_pts[i] - fsh * L - self.face_anchor[f])
            sign = 1.0 if apex > 0 else -1.0
            d = []
            for key, sh, _, _ in poly:
                v = self.decision(key, np.asarray(sh) - fsh, f) * sign
                if abs(v) < self.tol:
                    raise _Degenerate(f"point {key} on face {f}")
                d.append(v)
            out = []
            m = len(poly)
            for j in range(m):
                a, b = poly[j], poly[(j + 1) % m]
                a_in, b_in = d[j] > 0, d[(j + 1) % m] > 0
                if a_in:
                    out.append(a)
                if a_in != b_in:
                    x = self._crossing(t, tau, nshift, tri, i, f, fsh, a[2])
                    # leaving: the new edge runs along the face; entering: rest of a-b
                    out.append([x[0], x[1], ("fp", i) if a_in else a[2], x[2]])
            poly = out
        if len(poly) < 3:
            return None
        keys = [p[0] for p in poly]
        shifts = [p[1] for p in poly]
        coords = np.array([self.points[k] + np.asarray(s) * L for k, s in zip(keys, shifts)])
        return Polygon(t, tau, tuple(int(x) for x in nshift), keys, shifts,
                       [p[2] for p in poly], [p[3] for p in poly], coords)

    def _crossing(self, t, tau, nshift, tri, i, f, fsh, label):
        """Point where a polygon edge with ``label`` crosses local face ``i``.

        Returns [key, frame shift, local feature].
        """
        L = self.L
        if label[0] == "se":
            _, e, esh, (ka, kb) = label
            rel = tuple(int(x) for x in np.asarray(esh) - fsh)
            key = ("ef", e, f, rel)
            self.edge_face_point(key, tri[ka] - fsh * L, tri[kb] - fsh * L, f)
            return [key, tuple(int(x) for x in fsh), ("f", i)]
        j = label[1]
        u, w = (v for v in range(4) if v not in (i, j))
        k = EDGE_INDEX[(u, w)]
        e = int(self.c.tet_edges[t, k])
        esh = self.edge_shift[t, k]
        key = ("te", int(tau), e, tuple(int(x) for x in nshift - esh))
        self.tri_edge_point(key, tri - esh * L, e)
        return [key, tuple(int(x) for x in esh), ("e", k)]


def _candidate_placements(s: SurfaceMesh, c: Complex3, delta, margin: float):
    """(tet, triangle, lattice shift) triples whose bounding boxes overlap."""
    tri = s.triangle_points() + delta
    tlo, thi = tri.min(axis=1) - margin, tri.max(axis=1) + margin
    p = c.vertices[c.tets]
    blo, bhi = p.min(axis=1), p.max(axis=1)
    out = []
    if not c.ambient.is_torus:
        centres = (blo + bhi) / 2
        rad = np.linalg.norm(bhi - blo, axis=1).max() / 2
        tree = cKDTree(centres)
        tc = (tlo + thi) / 2
        radii = np.linalg.norm(thi - tlo, axis=1) / 2 + rad
        for tau, cand in enumerate(tree.query_ball_point(tc, radii)):
            cand = np.array(sorted(cand), dtype=np.int64)
            if len(cand) == 0:
                continue
            ok = np.all((blo[cand] <= thi[tau]) & (bhi[cand] >= tlo[tau]), axis=1)
            out.extend((int(t), tau, (0, 0, 0)) for t in cand[ok])
        return sorted(out)
    L = np.asarray(c.ambient.period)
    for tau in range(len(tri)):
        lo = np.ceil((blo - thi[tau]) / L).astype(np.int64)
        hi = np.floor((bhi - tlo[tau]) / L).astype(np.int64)
        ok = np.flatnonzero(np.all(lo <= hi, axis=1))
        for t in ok:
            for nx in range(lo[t, 0], hi[t, 0] + 1):
                for ny in range(lo[t, 1], hi[t, 1] + 1):
                    for nz in range(lo[t, 2], hi[t, 2] + 1):
                        out.append((int(t), tau, (nx, ny, nz)))
    return sorted(out)


def _intersect_once(s, c, delta, tol):
    clipper = _Clipper(s, c, delta, tol)
    margin = 1e-9 * mesh_size(c)
    by_tet = defaultdict(list)
    for t, tau, n in _candidate_placements(s, c, delta, margin):
        poly = clipper.clip(t, tau, np.array(n, dtype=np.int64))
        if poly is not None:
            by_tet[t].append(poly)
    components, tet_components = [], {}
    for t in sorted(by_tet):
        tet_components[t] = []
        for polys in _split_components(by_tet[t]):
            comp = _make_component(len(components), t, polys)
            tet_components[t].append(comp.id)
            components.append(comp)
    arcs, face_arcs = _collect_arcs(components, c, clipper)
    return clipper, components, tet_components, arcs, face_arcs


def _split_components(polys: list) -> list[list]:
    parent = list(range(len(polys)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    owner = {}
    for idx, p in enumerate(polys):
        ids = list(zip(p.keys, p.shifts))
        for j in range(len(ids)):
            e = frozenset((ids[j], ids[(j + 1) % len(ids)]))
            if e in owner:
                ra, rb = find(owner[e]), find(idx)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            else:
                owner[e] = idx
    groups = defaultdict(list)
    for idx in range(len(polys)):
        groups[find(idx)].append(polys[idx])
    return [groups[r] for r in sorted(groups)]


def _make_component(cid: int, t: int, polys: list) -> DiskComponent:
    verts, edge_count, directed = set(), defaultdict(int), {}
    for p in polys:
        ids = list(zip(p.keys, p.shifts))
        verts.update(ids)
        for j in range(len(ids)):
            a, b = ids[j], ids[(j + 1) % len(ids)]
            edge_count[frozenset((a, b))] += 1
            directed[(a, b)] = (p.labels[j], p.local[j], p.local[(j + 1) % len(ids)])
    nxt = {}
    pinched = False
    for (a, b), (label, la, _lb) in directed.items():
        if edge_count[frozenset((a, b))] == 1:
            if a in nxt:
                pinched = True
            nxt[a] = (b, label, la)
    loops = []
    seen = set()
    for start in sorted(nxt, key=repr):
        if start in seen:
            continue
        loop, cur = [], start
        while cur not in seen and cur in nxt:
            seen.add(cur)
            b, label, la = nxt[cur]
            loop.append((cur[0], cur[1], label, la))
            cur = b
        loops.append(loop)
    chi = len(verts) - len(edge_count) + len(polys)
    open_boundary = pinched or any(lab[0] != "fp" for lp in loops for _, _, lab, _ in lp)
    return DiskComponent(
        id=cid,
        tet_id=t,
        polygons=polys,
        loops=loops,
        loop_arcs=[],
        euler_char=chi,
        n_vertices=len(verts),
        n_edges=len(edge_count),
        area=float(sum(p.area() for p in polys)),
        open_boundary=open_boundary,
    )


def _collect_arcs(components, c: Complex3, clipper: _Clipper):
    arcs, index = [], {}
    L = clipper.L
    for comp in components:
        t = comp.tet_id
        for loop in comp.loops:
            ids = []
            faces = [lab[1] if lab[0] == "fp" else None for _, _, lab, _ in loop]
            m = len(loop)
            if m and all(fc is not None and fc == faces[0] for fc in faces):
                runs = [(0, m, True)]
            else:
                # rotate so that a run starts at index 0
                starts = [j for j in range(m) if faces[j] is not None and faces[j - 1] != faces[j]]
                runs = []
                for s0 in starts:
                    e0 = s0
                    while faces[e0 % m] == faces[s0] and e0 - s0 < m:
                        e0 += 1
                    runs.append((s0, e0, False))
            for s0, e0, closed in runs:
                i = faces[s0]
                f = int(c.tet_faces[t, i])
                fsh = clipper.face_shift[t, i]
                pts = [loop[j % m] for j in range(s0, e0 + (0 if closed else 1))]
                keys = [p[0] for p in pts]
                coords = np.array([clipper.points[p[0]] + (np.asarray(p[1]) - fsh) * L for p in pts])
                if closed:
                    akey = (f, "closed", frozenset(keys))
                    endpoints, end_local = None, None
                else:
                    akey = (f, frozenset((keys[0], keys[-1])))
                    ends = [clipper.te_param.get(k, (None,))[0] for k in (keys[0], keys[-1])]
                    endpoints = tuple(ends) if None not in ends else None
                    end_local = (pts[0][3], pts[-1][3])
                if akey in index:
                    arc = arcs[index[akey]]
                    if t not in arc.tets:
                        arc.tets.append(t)
                else:
                    arc = Arc(len(arcs), f, keys, coords, endpoints, tets=[t], end_local=end_local)
                    if closed:
                        arc.klass = ArcClass.CLOSED
                    index[akey] = arc.id
                    arcs.append(arc)
                ids.append(arc.id)
            comp.loop_arcs.append(ids)
    face_arcs = defaultdict(list)
    for a in arcs:
        face_arcs[a.face_id].append(a.id)
    return arcs, dict(face_arcs)


def intersect(s: SurfaceMesh, c: Complex3, seed: int = 0, max_attempts: int = MAX_ATTEMPTS,
              tol: float | None = None) -> IntersectionPattern:
    """Clip ``s`` by every tet of ``c`` and record arcs and per-tet components.

    Attempt 0 uses the surface as given; if any side-of-plane decision is
    within ``tol`` of zero (default ``1e-12 * mesh_size``), the surface is
    translated by a seeded random vector of length ``1e-7 * mesh_size`` and
    the clipping redone.
    """
    s = s.with_ambient(c.ambient) if s.ambient != c.ambient else s
    s.topology  # validates manifoldness
    lam = mesh_size(c)
    tol = DECISION_TOL * lam if tol is None else tol
    rng = np.random.default_rng(seed)
    delta = np.zeros(3)
    for attempt in range(max_attempts):
        try:
            clipper, comps, tet_comps, arcs, face_arcs = _intersect_once(s, c, delta, tol)
        except _Degenerate:
            v = rng.normal(size=3)
            delta = v / np.linalg.norm(v) * PERTURBATION * lam
            continue
        p = IntersectionPattern(
            complex=c,
            surface=s,
            arcs=arcs,
            components=comps,
            face_arcs=face_arcs,
            tet_components=tet_comps,
            points=clipper.points,
            te_param=clipper.te_param,
            perturbation=delta,
            perturbation_magnitude=float(np.linalg.norm(delta)),
            attempts=attempt + 1,
            seed=seed,
            tol=tol,
        )
        return classify_components(classify_arcs(p))
    raise PerturbationFailed(f"no general position after {max_attempts} attempts")


def classify_arcs(p: IntersectionPattern) -> IntersectionPattern:
    for a in p.arcs:
        if a.klass is ArcClass.CLOSED:
            continue
        if a.endpoints is None:
            a.klass = ArcClass.OPEN
        elif a.end_local[0] == a.end_local[1]:
            a.klass = ArcClass.BENT
        else:
            a.klass = ArcClass.NORMAL
    return p


def _partition(loop) -> tuple | None:
    parity = np.zeros(6, dtype=int)
    for _, _, _, local in loop:
        if local[0] == "e":
            parity[local[1]] ^= 1
    side = [0] + [int(parity[EDGE_INDEX[(0, v)]]) for v in (1, 2, 3)]
    for k, (u, w) in enumerate(LOCAL_EDGES):
        if parity[k] != side[u] ^ side[w]:
            return None
    ones = tuple(v for v in range(4) if side[v])
    zeros = tuple(v for v in range(4) if not side[v])
    return tuple(sorted((zeros, ones), key=len))


def classify_components(p: IntersectionPattern) -> IntersectionPattern:
    for d in p.components:
        d.n_gon, d.partition = None, None
        if not d.is_disk:
            d.klass = DiskClass.NON_DISK
            continue
        kinds = [p.arcs[a].klass for a in d.loop_arcs[0]]
        if any(k is not ArcClass.NORMAL for k in kinds):
            d.klass = DiskClass.NON_NORMAL
            continue
        d.n_gon = len(kinds)
        part = _partition(d.loops[0])
        sizes = tuple(len(x) for x in part) if part else None
        if d.n_gon == 3 and sizes == (1, 3):
            d.klass, d.partition = DiskClass.ELEMENTARY3, part
        elif d.n_gon == 4 and sizes == (2, 2):
            d.klass, d.partition = DiskClass.ELEMENTARY4, part
        else:
            d.klass = DiskClass.NORMAL_NGON
    return p


@dataclass
class Witness:
    kind: str  # "NonDisk", "NormalNGon", "ClosedCurve", "BoundaryBentCurve", "OpenBoundary"
    component: int | None = None
    arc: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "component": self.component, "arc": self.arc, "detail": self.detail}


def is_quasi_normal(p: IntersectionPattern) -> tuple[bool, list[Witness]]:
    w = []
    for d in p.components:
        if d.klass is DiskClass.NON_DISK:
            w.append(Witness("NonDisk", component=d.id, detail=f"chi={d.euler_char}, loops={len(d.loops)}"))
        elif d.klass is DiskClass.NORMAL_NGON:
            w.append(Witness("NormalNGon", component=d.id, detail=f"n={d.n_gon}"))
    for a in p.arcs:
        if a.klass is ArcClass.CLOSED:
            w.append(Witness("ClosedCurve", arc=a.id, detail=f"face {a.face_id}"))
    return not w, w


def is_internally_quasi_normal(p: IntersectionPattern, c: Complex3 | None = None):
    """Quasi-normality relaxed on the boundary.

    A closed curve is allowed when it lies in a Boundary face of a Peripheral
    tet.  A bent curve on a peripheral, non-boundary face whose endpoints lie
    on a boundary edge is a violation.
    """
    c = c or p.complex
    allowed_closed = set()
    for a in p.arcs:
        if a.klass is ArcClass.CLOSED:
            if c.face_labels[a.face_id] is FaceLabel.BOUNDARY and all(
                c.tet_labels[t] is TetLabel.PERIPHERAL for t in a.tets
            ):
                allowed_closed.add(a.id)
    ok, w = is_quasi_normal(p)
    w = [x for x in w if not (x.kind == "ClosedCurve" and x.arc in allowed_closed)]
    w = [
        x for x in w
        if not (x.kind == "NonDisk" and _closed_in_boundary(p.components[x.component], allowed_closed))
    ]
    for a in p.arcs:
        if a.klass is ArcClass.BENT and c.face_peripheral[a.face_id] \
                and c.face_labels[a.face_id] is FaceLabel.INTERNAL \
                and a.endpoints and c.edge_on_boundary[a.endpoints[0]]:
            w.append(Witness("BoundaryBentCurve", arc=a.id, detail=f"edge {a.endpoints[0]}"))
    return not w, w


def _closed_in_boundary(d: DiskComponent, allowed: set) -> bool:
    return bool(d.loop_arcs) and all(a in allowed for ids in d.loop_arcs for a in ids)


# tameness -----------------------------------------------------------------

def _sample_bary(k: int) -> np.ndarray:
    """Barycentric centroids of the k*k sub-triangles of a uniform split."""
    pts = []
    for i in range(k):
        for j in range(k - i):
            pts.append(((i + 1 / 3) / k, (j + 1 / 3) / k))
            if i + j < k - 1:
                pts.append(((i + 2 / 3) / k, (j + 2 / 3) / k))
    uv = np.array(pts)
    return np.column_stack([1 - uv.sum(axis=1), uv[:, 0], uv[:, 1]])


def _component_triangles(d: DiskComponent) -> np.ndarray:
    tris = []
    for poly in d.polygons:
        p = poly.coords
        for j in range(1, len(p) - 1):
            tris.append((p[0], p[j], p[j + 1]))
    return np.array(tris)


def projection_is_injective(tris: np.ndarray, normal: np.ndarray, samples: int = 64) -> bool:
    """Sampled test that orthogonal projection along ``normal`` is one-to-one."""
    n = normal / np.linalg.norm(normal)
    u = np.cross(n, [1.0, 0, 0] if abs(n[0]) < 0.9 else [0, 1.0, 0])
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    q = np.stack([tris @ u, tris @ v], axis=-1)  # (T, 3, 2)
    det = (q[:, 1, 0] - q[:, 0, 0]) * (q[:, 2, 1] - q[:, 0, 1]) - (q[:, 1, 1] - q[:, 0, 1]) * (q[:, 2, 0] - q[:, 0, 0])
    scale = np.max(np.abs(q)) ** 2 + 1e-300
    if np.any(np.abs(det) <= 1e-14 * scale) or not (np.all(det > 0) or np.all(det < 0)):
        return False
    k = max(1, int(round(np.sqrt(samples))))
    bary = _sample_bary(k)
    pts = np.einsum("sk,tkd->tsd", bary, q).reshape(-1, 2)
    owner = np.repeat(np.arange(len(q)), len(bary))
    a, b, c = q[:, 0], q[:, 1], q[:, 2]
    for start in range(0, len(pts), 4096):
        x = pts[start:start + 4096, None, :]
        w0 = _cross2(b - a, x - a)
        w1 = _cross2(c - b, x - b)
        w2 = _cross2(a - c, x - c)
        sgn = np.sign(det)[None, :]
        inside = (w0 * sgn > 0) & (w1 * sgn > 0) & (w2 * sgn > 0)
        inside[np.arange(len(x)), owner[start:start + 4096]] = False
        if inside.any():
            return False
    return True


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass
class TamenessReport:
    component: int
    tet: int
    face_id: int | None
    local_face: int | None
    is_graph: bool
    has_corner: bool

    def to_dict(self) -> dict:
        return {"component": self.component, "tet": self.tet, "face_id": self.face_id,
                "is_graph": self.is_graph, "has_corner": self.has_corner}


def _has_corner(d: DiskComponent, i: int) -> bool:
    """Is some vertex v of local face i cut off by two consecutive arcs meeting
    at the edge from v to the vertex opposite face i?"""
    seq = [local[1] for loop in d.loops for _, _, _, local in loop if local[0] == "e"]
    m = len(seq)
    for j in range(m):
        k1, k2, k3 = seq[j - 1], seq[j], seq[(j + 1) % m]
        u, w = LOCAL_EDGES[k2]
        if i not in (u, w):
            continue
        v = w if u == i else u
        e1, e3 = set(LOCAL_EDGES[k1]), set(LOCAL_EDGES[k3])
        if k1 != k3 and v in e1 and v in e3 and i not in e1 and i not in e3:
            return True
    return False


def check_tameness(p: IntersectionPattern, samples: int = 64) -> list[TamenessReport]:
    out = []
    c = p.complex
    for d in p.components:
        if d.klass is not DiskClass.NON_NORMAL:
            continue
        tris = _component_triangles(d)
        pts = c.vertices[c.tets[d.tet_id]]
        # among faces the disk is a graph over, prefer the one carrying most of
        # its edge points (a lune around an edge is also a graph over faces
        # that miss the edge, which would leave an empty parameter region)
        edge_seq = [local[1] for _, _, _, local in d.loops[0] if local[0] == "e"] if d.loops else []
        found, best = None, -1
        for i in range(4):
            a, b, cc = pts[list(LOCAL_FACES[i])]
            if projection_is_injective(tris, np.cross(b - a, cc - a), samples):
                on_face = sum(1 for k in edge_seq if i not in LOCAL_EDGES[k])
                if on_face > best:
                    found, best = i, on_face
        corner = _has_corner(d, found) if found is not None else any(_has_corner(d, i) for i in range(4))
        out.append(TamenessReport(
            component=d.id,
            tet=d.tet_id,
            face_id=int(c.tet_faces[d.tet_id, found]) if found is not None else None,
            local_face=found,
            is_graph=found is not None,
            has_corner=corner,
        ))
    return out


def find_cylinders(p: IntersectionPattern, tameness: list[TamenessReport] | None = None):
    """Pairs of NonNormal disks in face-adjacent tets with bent curves sharing both
    endpoints and projecting to the same face (the reported tameness face, or
    else the face the two tets share)."""
    tameness = tameness if tameness is not None else check_tameness(p)
    face_of = {r.component: r.face_id for r in tameness}
    c = p.complex
    bent = {}
    for d in p.components:
        if d.klass is DiskClass.NON_NORMAL:
            bent[d.id] = [a for a in d.loop_arcs[0] if p.arcs[a].klass is ArcClass.BENT]
    out = []
    ids = sorted(bent)
    for x in range(len(ids)):
        for y in range(x + 1, len(ids)):
            da, db = p.components[ids[x]], p.components[ids[y]]
            shared = set(c.tet_faces[da.tet_id]) & set(c.tet_faces[db.tet_id])
            if da.tet_id == db.tet_id or not shared:
                continue
            fa, fb = face_of.get(da.id), face_of.get(db.id)
            if fa is None or fa != fb:
                g = int(next(iter(shared)))
                t, i = c.face_tets[g][0]
                a, b, cc = c.local_face_coords(t, i)
                n = np.cross(b - a, cc - a)
                if not (projection_is_injective(_component_triangles(da), n)
                        and projection_is_injective(_component_triangles(db), n)):
                    continue
            common = set(bent[da.id]) & set(bent[db.id])  # arcs in the shared face
            for a1 in bent[da.id]:
                for a2 in bent[db.id]:
                    arc1, arc2 = p.arcs[a1], p.arcs[a2]
                    if a1 not in common and a2 not in common and {arc1.points[0], arc1.points[-1]} == {arc2.points[0], arc2.points[-1]}:
                        out.append(((da.id, db.id), (a1, a2)))
    return out


def euler_audit(p: IntersectionPattern) -> dict:
    """chi(F) from the pieces: sum of component chi, minus open arcs, plus edge points."""
    comp = sum(d.euler_char for d in p.components)
    open_arcs = sum(1 for a in p.arcs if a.klass is not ArcClass.CLOSED)
    te_points = len(p.te_param)
    return {"components": comp, "open_arcs": open_arcs, "edge_points": te_points,
            "euler_char": comp - open_arcs + te_points}


def class_counts(p: IntersectionPattern) -> dict:
    counts = {k.value: 0 for k in DiskClass}
    for d in p.components:
        counts[d.klass.value] += 1
    return counts
