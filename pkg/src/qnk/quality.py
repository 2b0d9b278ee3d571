"""Fatness (inradius / circumradius), dihedral angles and the fatness conditions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSimplex
from .simplicial import LOCAL_EDGES, Complex3

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class SimplexQuality:
    fatness_phi: float
    insphere_r: float
    circumsphere_R: float
    dihedral_angles: tuple[float, ...]
    diameter: float
    volume: float
    # Vol_j(face) / diam(face)^j over proper faces of dimension 1 and 2
    face_ratios: tuple[float, ...] = ()

    @property
    def min_dihedral(self) -> float:
        return min(self.dihedral_angles)


@dataclass(frozen=True)
class FatnessReport:
    angle_condition_holds: bool
    area_condition_holds: bool
    phi: float
    c_k: float
    min_dihedral: float
    min_face_ratio: float
    max_face_ratio: float


def _triangle_area(a, b, c) -> np.ndarray:
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1)


def tet_quality_arrays(p: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorised r, R, phi, dihedral angles and volume for (M, 4, 3) tets."""
    p = np.asarray(p, dtype=float)
    d = p[:, 1:] - p[:, :1]
    vol = np.einsum("mi,mi->m", d[:, 0], np.cross(d[:, 1], d[:, 2])) / 6.0
    areas = np.stack(
        [_triangle_area(*(p[:, k] for k in range(4) if k != i)) for i in range(4)], axis=1
    )
    r = 3.0 * np.abs(vol) / areas.sum(axis=1)
    # circumcentre relative to p0: 2 d_i . x = |d_i|^2
    rhs = 0.5 * np.einsum("mij,mij->mi", d, d)
    centre = np.linalg.solve(d, rhs[:, :, None])[:, :, 0]
    big_r = np.linalg.norm(centre, axis=1)

    # outward normal of the face opposite each vertex
    normals = np.empty((len(p), 4, 3))
    for i in range(4):
        a, b, c = (p[:, k] for k in range(4) if k != i)
        n = np.cross(b - a, c - a)
        inward = np.einsum("mi,mi->m", n, p[:, i] - a) > 0
        n[inward] *= -1
        normals[:, i] = n / np.linalg.norm(n, axis=1, keepdims=True)
    dihedral = np.empty((len(p), 6))
    for k, (i, j) in enumerate(LOCAL_EDGES):
        a, b = (x for x in range(4) if x not in (i, j))
        cos = -np.einsum("mi,mi->m", normals[:, a], normals[:, b])
        dihedral[:, k] = np.arccos(np.clip(cos, -1.0, 1.0))
    lengths = np.stack([np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in LOCAL_EDGES], axis=1)
    return {
        "phi": r / big_r,
        "r": r,
        "R": big_r,
        "dihedral": dihedral,
        "volume": np.abs(vol),
        "diameter": lengths.max(axis=1),
        "areas": areas,
    }


def simplex_quality(s) -> SimplexQuality:
    """Quality of a straight triangle (3 points) or tetrahedron (4 points)."""
    p = np.asarray(s, dtype=float)
    if p.shape not in ((3, 3), (4, 3)):
        raise DegenerateSimplex(f"expected 3 or 4 points in R^3, got shape {p.shape}")
    diam = max(np.linalg.norm(p[i] - p[j]) for i, j in itertools.combinations(range(len(p)), 2))
    if len(p) == 3:
        return _triangle_quality(p, diam)
    vol = abs(float(np.dot(p[1] - p[0], np.cross(p[2] - p[0], p[3] - p[0])))) / 6.0
    if not diam > 0 or vol < DEGENERACY_TOL * diam**3:
        raise DegenerateSimplex(f"tet volume {vol:.3e} below tolerance")
    q = tet_quality_arrays(p[None])
    ratios = [1.0] * 6
    for i in range(4):
        tri = p[[k for k in range(4) if k != i]]
        tdiam = max(np.linalg.norm(tri[a] - tri[b]) for a, b in ((0, 1), (0, 2), (1, 2)))
        ratios.append(float(q["areas"][0, i]) / tdiam**2)
    return SimplexQuality(
        fatness_phi=float(q["phi"][0]),
        insphere_r=float(q["r"][0]),
        circumsphere_R=float(q["R"][0]),
        dihedral_angles=tuple(float(x) for x in q["dihedral"][0]),
        diameter=float(diam),
        volume=vol,
        face_ratios=tuple(ratios),
    )


def _triangle_quality(p: np.ndarray, diam: float) -> SimplexQuality:
    area = float(_triangle_area(p[0], p[1], p[2]))
    if not diam > 0 or area < DEGENERACY_TOL * diam**2:
        raise DegenerateSimplex(f"triangle area {area:.3e} below tolerance")
    a = np.linalg.norm(p[1] - p[2])
    b = np.linalg.norm(p[0] - p[2])
    c = np.linalg.norm(p[0] - p[1])
    r = 2.0 * area / (a + b + c)
    big_r = a * b * c / (4.0 * area)
    angles = []
    for i in range(3):
        u, v = p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]
        cos = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
        angles.append(float(np.arccos(np.clip(cos, -1.0, 1.0))))
    return SimplexQuality(
        fatness_phi=float(r / big_r),
        insphere_r=float(r),
        circumsphere_R=float(big_r),
        dihedral_angles=tuple(angles),
        diameter=float(diam),
        volume=area,
        face_ratios=(1.0, 1.0, 1.0),
    )


def check_fatness_conditions(q: SimplexQuality, c_k: float) -> FatnessReport:
    """Angle and area conditions for fatness with constant ``c_k``.

    Angle: phi / c_k <= min dihedral <= c_k * phi.
    Area: phi <= Vol_j(s) / diam(s)^j <= c_k * phi over the proper faces s of
    dimension >= 1 (the top simplex itself is excluded).
    """
    if not c_k >= 1:
        raise ValueError("c_k must be >= 1")
    phi = q.fatness_phi
    lo, hi = min(q.face_ratios), max(q.face_ratios)
    return FatnessReport(
        angle_condition_holds=bool(phi / c_k <= q.min_dihedral <= c_k * phi),
        area_condition_holds=bool(phi <= lo and hi <= c_k * phi),
        phi=phi,
        c_k=c_k,
        min_dihedral=q.min_dihedral,
        min_face_ratio=lo,
        max_face_ratio=hi,
    )


def tet_fatness(c: Complex3) -> np.ndarray:
    return tet_quality_arrays(c.vertices[c.tets])["phi"]


def complex_fatness(c: Complex3) -> float:
    """Minimum fatness over all tets."""
    return float(np.min(tet_fatness(c)))
