"""Convergence diagnostics: Hausdorff distance, normal deviation, bent-curve
angles, subdivision sweeps and the Schwarz lantern.

The Hausdorff distance here is the *sum* of the two directed maxima,
``max_a d(a, B) + max_b d(b, A)``, not the more common maximum of the two.
It is at most twice the max form and still satisfies the triangle inequality.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMesh
from .flat import build_flat_associate, multiple_area
from .intersection import ArcClass, IntersectionPattern, intersect, is_internally_quasi_normal, is_quasi_normal
from .median import med_subdivide
from .quality import complex_fatness
from .simplicial import AmbientModel, Complex3, ManifoldBounds, mesh_size
from .surface import SurfaceMesh, surface_area, triangle_areas

DEFAULT_SAMPLES = 16
DEFAULT_NORMAL_SAMPLES = 4


# sampling -----------------------------------------------------------------

def _triangles(x) -> np.ndarray:
    p = np.asarray(x.triangle_points() if hasattr(x, "triangle_points") else x, dtype=float)
    return p.reshape(-1, 3, 3)


def sample_barycentric(k: int) -> np.ndarray:
    """Centroids of the k*k sub-triangles of a uniform split, as barycentric rows."""
    pts = []
    for i in range(k):
        for j in range(k - i):
            pts.append(((i + 1 / 3) / k, (j + 1 / 3) / k))
            if i + j < k - 1:
                pts.append(((i + 2 / 3) / k, (j + 2 / 3) / k))
    uv = np.array(pts)
    return np.column_stack([1 - uv.sum(axis=1), uv[:, 0], uv[:, 1]])


def _per_side(samples: int) -> int:
    return max(1, int(round(np.sqrt(samples))))


def sample_points(tris: np.ndarray, samples: int) -> np.ndarray:
    """Sub-triangle centroids of every triangle plus all corners."""
    bary = sample_barycentric(_per_side(samples))
    inner = np.einsum("sk,tkd->tsd", bary, tris).reshape(-1, 3)
    return np.vstack([inner, tris.reshape(-1, 3)])


def sampling_resolution(tris: np.ndarray, samples: int) -> float:
    """Largest sub-triangle diameter: every surface point is this close to a sample."""
    if len(tris) == 0:
        return 0.0
    d = np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2).max()
    return float(d / _per_side(samples))


def refine_triangles(tris: np.ndarray, max_diam: float, max_rounds: int = 12) -> np.ndarray:
    """Split each triangle 1-to-4 at edge midpoints until all diameters are <= max_diam."""
    tris = np.asarray(tris, dtype=float)
    for _ in range(max_rounds):
        if len(tris) == 0 or np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2).max() <= max_diam:
            break
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        tris = np.concatenate([np.stack(t, axis=1) for t in
                               ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))])
    return tris


class _Nearest:
    """Nearest-sample queries, periodic in a flat torus."""

    def __init__(self, pts: np.ndarray, ambient: AmbientModel):
        self.ambient = ambient
        if ambient.is_torus:
            self.L = np.asarray(ambient.period, dtype=float)
            self.tree = cKDTree(self._wrap(pts), boxsize=self.L)
        else:
            self.tree = cKDTree(pts)

    def _wrap(self, x):
        w = np.mod(x, self.L)
        return np.where(w >= self.L, w - self.L, w)

    def query(self, x, workers: int = 1):
        if self.ambient.is_torus:
            x = self._wrap(x)
        return self.tree.query(x, workers=workers)


def _ambient_of(*xs) -> AmbientModel:
    for x in xs:
        amb = getattr(x, "ambient", None)
        if amb is not None and amb.is_torus:
            return amb
    return AmbientModel.euclidean()


# Hausdorff ----------------------------------------------------------------

@dataclass
class HausdorffResult:
    distance: float
    a_to_b: float
    b_to_a: float
    n_samples_a: int
    n_samples_b: int
    resolution: float  # sum of both sampling resolutions


def hausdorff_details(a, b, samples_per_triangle: int = DEFAULT_SAMPLES,
                      ambient: AmbientModel | None = None, workers: int = 1) -> HausdorffResult:
    ta, tb = _triangles(a), _triangles(b)
    if len(ta) == 0 or len(tb) == 0:
        raise EmptyMesh("Hausdorff distance needs two non-empty meshes")
    ambient = ambient or _ambient_of(a, b)
    pa, pb = sample_points(ta, samples_per_triangle), sample_points(tb, samples_per_triangle)
    ab = float(_Nearest(pb, ambient).query(pa, workers)[0].max())
    ba = float(_Nearest(pa, ambient).query(pb, workers)[0].max())
    res = sampling_resolution(ta, samples_per_triangle) + sampling_resolution(tb, samples_per_triangle)
    return HausdorffResult(ab + ba, ab, ba, len(pa), len(pb), res)


def hausdorff(a, b, samples_per_triangle: int = DEFAULT_SAMPLES, ambient: AmbientModel | None = None) -> float:
    """Sum of directed maxima between the sampled point sets of two meshes."""
    return hausdorff_details(a, b, samples_per_triangle, ambient).distance


# normals ------------------------------------------------------------------

def triangle_normals(tris: np.ndarray) -> np.ndarray:
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    return n / np.linalg.norm(n, axis=1, keepdims=True)


@dataclass
class NormalDeviation:
    max_angle: float
    mean_angle: float
    folded: bool  # orientations disagreed; angles folded to [0, pi/2]
    n_samples: int


def normal_angle_details(ref, approx, samples: int = DEFAULT_NORMAL_SAMPLES, ref_normal=None,
                         ambient: AmbientModel | None = None, workers: int = 1) -> NormalDeviation:
    """Angle between the normal of ``approx`` at sample points and the normal of
    ``ref`` at the nearest point.

    ``ref_normal(points) -> unit normals`` replaces the nearest-triangle lookup
    when the reference is a smooth model with known normals.
    """
    ta = _triangles(approx)
    if len(ta) == 0:
        raise EmptyMesh("approximating mesh is empty")
    keep = triangle_areas(ta) > 1e-14 * max(1.0, float(triangle_areas(ta).max()))
    ta = ta[keep]
    bary = sample_barycentric(_per_side(samples))
    pts = np.einsum("sk,tkd->tsd", bary, ta).reshape(-1, 3)
    na = np.repeat(triangle_normals(ta), len(bary), axis=0)
    if ref_normal is not None:
        nr = np.asarray(ref_normal(pts), dtype=float)
    else:
        tr = _triangles(ref)
        if len(tr) == 0:
            raise EmptyMesh("reference mesh is empty")
        ambient = ambient or _ambient_of(ref, approx)
        rb = sample_barycentric(_per_side(max(samples, DEFAULT_SAMPLES)))
        rp = np.einsum("sk,tkd->tsd", rb, tr).reshape(-1, 3)
        _, idx = _Nearest(rp, ambient).query(pts, workers)
        nr = triangle_normals(tr)[idx // len(rb)]
    cos = np.clip(np.einsum("ij,ij->i", na, nr), -1.0, 1.0)
    folded = bool(np.mean(cos) < 0)
    ang = np.arccos(np.abs(cos)) if folded else np.arccos(cos)
    return NormalDeviation(float(ang.max()), float(ang.mean()), folded, len(pts))


def normal_angle_deviation(ref, approx, samples: int = DEFAULT_NORMAL_SAMPLES, ref_normal=None) -> float:
    return normal_angle_details(ref, approx, samples, ref_normal).max_angle


# bent-curve angles ----------------------------------------------------------

@dataclass
class BentAngle:
    arc: int
    edge: int
    theta_start: float
    theta_end: float
    bound: float
    ok: bool


def _edge_angle(direction, edge_dir) -> float:
    c = abs(float(np.dot(direction, edge_dir))) / (np.linalg.norm(direction) * np.linalg.norm(edge_dir))
    return float(np.arccos(min(1.0, c)))


def angle_bound_check(p: IntersectionPattern, bounds: ManifoldBounds, safety: float = 1.5,
                      lam: float | None = None) -> list[BentAngle]:
    """Angle between each bent curve and its edge at both endpoints, against
    ``safety * C * lambda``.  The curve's tangent at an endpoint is taken from
    its first (last) polyline segment."""
    c = p.complex
    lam = mesh_size(c) if lam is None else lam
    bound = safety * bounds.curvature_budget_C * lam
    out = []
    for a in p.arcs:
        if a.klass is not ArcClass.BENT or len(a.polyline) < 2:
            continue
        e = a.endpoints[0]
        u, v = c.vertices[c.edges[e]]
        edge_dir = v - u
        th0 = _edge_angle(a.polyline[1] - a.polyline[0], edge_dir)
        th1 = _edge_angle(a.polyline[-1] - a.polyline[-2], edge_dir)
        out.append(BentAngle(a.id, int(e), th0, th1, bound, max(th0, th1) <= bound))
    return out


# sweeps -------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    level: int
    lam: float
    min_fatness: float
    hausdorff: float
    area_fa: float
    multiple_area_fa: float
    area_ref: float
    max_normal_angle: float
    bound_2lambda_ok: bool
    quasi_normal: bool = True
    sampling_slack: float = 0.0
    n_tets: int = 0
    n_triangles: int = 0
    attempts: int = 1
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def convergence_sweep(s: SurfaceMesh, c0: Complex3, levels: int, samples: int = DEFAULT_SAMPLES,
                      normal_samples: int = DEFAULT_NORMAL_SAMPLES, seed: int = 0,
                      ref_area: float | None = None, ref_normal=None, internal: bool = False,
                      ref_refine: float = 8.0, workers: int = 1) -> list[ConvergenceReport]:
    """Subdivide ``levels`` times; at each level intersect, build the flat
    associate and compare it with ``s``.

    At each level the reference surface is split (for measurement only) until
    its triangles are ``ref_refine`` times smaller than that level's mesh size,
    so both sample sets scale with lambda and the sampled distance is not
    floored by the reference's own coarseness.
    """
    s = s.with_ambient(c0.ambient)
    complexes = [c0]
    for _ in range(levels):
        complexes.append(med_subdivide(complexes[-1])[0])
    area_ref = surface_area(s) if ref_area is None else ref_area
    out = []
    for j, c in enumerate(complexes):
        p = intersect(s, c, seed=seed)
        ok, wit = is_internally_quasi_normal(p) if internal else is_quasi_normal(p)
        lam = mesh_size(c)
        row = ConvergenceReport(level=j, lam=lam, min_fatness=complex_fatness(c), hausdorff=float("nan"),
                                area_fa=float("nan"), multiple_area_fa=float("nan"), area_ref=area_ref,
                                max_normal_angle=float("nan"), bound_2lambda_ok=False, quasi_normal=ok,
                                n_tets=c.n_tets, attempts=p.attempts, witnesses=[w.to_dict() for w in wit])
        if ok:
            f = build_flat_associate(p, internal=internal)
            tri = f.triangle_points()
            ref_tris = refine_triangles(s.triangle_points(), lam / ref_refine)
            h = hausdorff_details(ref_tris, tri, samples, s.ambient, workers)
            row.hausdorff = h.distance
            row.sampling_slack = h.resolution
            row.bound_2lambda_ok = h.distance <= 2 * lam + h.resolution
            row.area_fa = surface_area(f)
            row.multiple_area_fa = multiple_area(f)
            row.max_normal_angle = normal_angle_details(s, f, normal_samples, ref_normal, s.ambient,
                                                        workers).max_angle
            row.n_triangles = len(tri)
        out.append(row)
    return out


def sweep_failures(rows: list[ConvergenceReport]) -> list[str]:
    """Checks a sweep is expected to pass: d_H <= 2 lambda (+ slack) at every
    quasi-normal level, and an area gap that does not grow over the last half."""
    bad = [f"level {r.level}: d_H={r.hausdorff:.4g} > 2*lambda={2 * r.lam:.4g} + slack"
           for r in rows if r.quasi_normal and not r.bound_2lambda_ok]
    qn = [r for r in rows if r.quasi_normal]
    tail = qn[len(qn) // 2:]
    gaps = [abs(r.multiple_area_fa - r.area_ref) for r in tail]
    for a, b, r in zip(gaps, gaps[1:], tail[1:]):
        if b > a * (1 + 1e-9) + 1e-12:
            bad.append(f"level {r.level}: area gap grew from {a:.4g} to {b:.4g}")
    return bad


# Schwarz lantern ----------------------------------------------------------

class LanternMode(str, Enum):
    SKINNY = "Skinny"
    FAT = "Fat"


@dataclass(frozen=True)
class LanternSpec:
    n_around: int
    n_rows: int | None = None
    mode: LanternMode = LanternMode.FAT
    radius: float = 1.0
    height: float = 1.0

    def __post_init__(self):
        if self.n_around < 3:
            raise ValueError("n_around must be at least 3")
        if self.n_rows is None:
            rows = self.n_around ** 3 if self.mode is LanternMode.SKINNY else self.n_around
            object.__setattr__(self, "n_rows", rows)
        if self.n_rows < 1:
            raise ValueError("n_rows must be at least 1")

    @classmethod
    def of(cls, n: int, mode) -> "LanternSpec":
        return cls(n_around=n, mode=LanternMode(mode))


def _ring(spec: LanternSpec, r, j) -> np.ndarray:
    step = 2 * np.pi / spec.n_around
    ang = j * step + (r % 2) * step / 2
    z = np.broadcast_to(spec.height * r / spec.n_rows, np.shape(ang))
    return np.stack([spec.radius * np.cos(ang), spec.radius * np.sin(ang), z], axis=-1)


def _band_triangles(spec: LanternSpec, r0: int, r1: int) -> np.ndarray:
    """Triangle points of the bands starting at rings r0..r1-1.

    Ring r is rotated by half a step when r is odd, so the vertex of ring r+1
    above the midpoint of (j, j+1) on ring r has index j + (r mod 2).
    """
    k = np.arange(r0, r1)[:, None]
    j = np.arange(spec.n_around)[None, :]
    o = k % 2
    a, b = _ring(spec, k, j), _ring(spec, k, j + 1)
    top, top_left = _ring(spec, k + 1, j + o), _ring(spec, k + 1, j + o - 1)
    up = np.stack([a, b, top], axis=-2)
    down = np.stack([a, top, top_left], axis=-2)
    return np.concatenate([up.reshape(-1, 3, 3), down.reshape(-1, 3, 3)])


def build_lantern(spec: LanternSpec) -> SurfaceMesh:
    """Inscribed lantern: n_rows + 1 rings of n_around points, odd rings rotated
    by half a step, 2 * n_around * n_rows outward-oriented triangles."""
    n, m = spec.n_around, spec.n_rows
    r = np.arange(m + 1)[:, None]
    verts = _ring(spec, r, np.arange(n)[None, :]).reshape(-1, 3)
    k = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    o = k % 2

    def vid(rr, jj):
        return np.broadcast_to(rr * n + jj % n, (m, n))

    up = np.stack([vid(k, j), vid(k, j + 1), vid(k + 1, j + o)], axis=-1)
    down = np.stack([vid(k, j), vid(k + 1, j + o), vid(k + 1, j + o - 1)], axis=-1)
    return SurfaceMesh(verts, np.concatenate([up.reshape(-1, 3), down.reshape(-1, 3)]))


def lantern_area(spec: LanternSpec, chunk_rows: int = 4096) -> float:
    """PL area of the lantern, summed band by band without building the mesh."""
    total = 0.0
    for r0 in range(0, spec.n_rows, chunk_rows):
        r1 = min(spec.n_rows, r0 + chunk_rows)
        total += float(np.sum(triangle_areas(_band_triangles(spec, r0, r1))))
    return total


def lantern_report(specs: list[LanternSpec]) -> list[dict]:
    rows = []
    for spec in specs:
        area = lantern_area(spec)
        row = {"n": spec.n_around, "rows": spec.n_rows, "mode": spec.mode.value, "area": area,
               "triangles": 2 * spec.n_around * spec.n_rows}
        if spec.mode is LanternMode.SKINNY:
            row["bound_n_over_8_ok"] = area >= spec.n_around / 8
        else:
            exact = 2 * np.pi * spec.radius * spec.height
            row["rel_error"] = abs(area - exact) / exact
            row["within_1pct"] = row["rel_error"] <= 0.01
        rows.append(row)
    return rows
