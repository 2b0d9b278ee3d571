"""Reference complexes and surfaces used by the tests, the CLI and the sweeps."""

from __future__ import annotations

import itertools

import numpy as np

from .simplicial import AmbientModel, Complex3, build_complex
from .surface import SurfaceMesh

SQRT2, SQRT3 = np.sqrt(2.0), np.sqrt(3.0)


def regular_tet_points(a: float = 1.0) -> np.ndarray:
    return a * np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, SQRT3 / 2, 0.0], [0.5, SQRT3 / 6, np.sqrt(2.0 / 3.0)]]
    )


def almost_regular_tet_points(rho: float = 0.5) -> np.ndarray:
    """Five edges of length rho; edge 23 has length rho * sqrt(2)."""
    h = rho * SQRT2 / 2
    return np.array(
        [[0.0, 0.0, 0.0], [rho, 0.0, 0.0], [rho / 2, rho / 2, h], [rho / 2, rho / 2, -h]]
    )


def needle_tet_points(height: float = 1e-6) -> np.ndarray:
    """Unit equilateral base with the apex ``height`` above its centroid."""
    base = regular_tet_points()[:3]
    apex = np.append(base.mean(axis=0)[:2], height)
    return np.vstack([base, apex])


def single_tet_complex(points) -> Complex3:
    return build_complex(np.asarray(points, dtype=float), [[0, 1, 2, 3]])


def two_glued_tets() -> Complex3:
    p = regular_tet_points()
    apex2 = 2 * p[:3].mean(axis=0) - p[3]
    return build_complex(np.vstack([p, apex2]), [[0, 1, 2, 3], [0, 1, 2, 4]])


def kuhn_cube_tets(index) -> list[list[int]]:
    """Six tets of the unit cube along the main diagonal; ``index(corner)`` maps
    integer corners (0/1 triples) to vertex ids."""
    tets = []
    for perm in itertools.permutations(range(3)):
        p = np.zeros(3, dtype=int)
        tet = [index(tuple(p))]
        for axis in perm:
            p[axis] += 1
            tet.append(index(tuple(p)))
        tets.append(tet)
    return tets


def cube_complex(n: int = 1, size: float = 1.0, origin=(0.0, 0.0, 0.0), torus: bool = False) -> Complex3:
    """n^3 grid of Kuhn-triangulated cubes filling [origin, origin + size]^3.

    With ``torus=True`` the box is the fundamental domain of a flat torus with
    period ``size`` in each direction.
    """
    origin = np.asarray(origin, dtype=float)
    h = size / n
    grid = {}
    verts = []

    def vid(ijk):
        if ijk not in grid:
            grid[ijk] = len(verts)
            verts.append(origin + h * np.array(ijk, dtype=float))
        return grid[ijk]

    tets = []
    for cell in itertools.product(range(n), repeat=3):
        tets += kuhn_cube_tets(lambda c, cell=cell: vid(tuple(a + b for a, b in zip(cell, c))))
    ambient = AmbientModel.torus((size,) * 3) if torus else AmbientModel.euclidean()
    return build_complex(np.array(verts), tets, ambient)


def plane_torus_surface(z: float = 0.3, n: int = 1, period: float = 1.0) -> SurfaceMesh:
    """The horizontal 2-torus {z = const} in the flat 3-torus, as a 2 n^2 triangle grid."""
    h = period / n
    verts = [(i * h, j * h, z) for j in range(n + 1) for i in range(n + 1)]
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            tris += [(a, b, c), (a, c, d)]
    return SurfaceMesh(np.array(verts), np.array(tris), AmbientModel.torus((period,) * 3))


def icosphere(subdivisions: int = 2, radius: float = 1.0, centre=(0.0, 0.0, 0.0)) -> SurfaceMesh:
    t = (1 + np.sqrt(5)) / 2
    v = np.array([(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
                  (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)], float)
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = list(v / np.linalg.norm(v, axis=1, keepdims=True))
    faces = f
    for _ in range(subdivisions):
        cache, new = {}, []

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                cache[key] = len(verts)
                verts.append(m / np.linalg.norm(m))
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return SurfaceMesh(np.asarray(centre) + radius * np.array(verts), np.array(faces))


def sphere_patch(axis, half_angle: float, n: int, radius: float = 1.0, centre=(0.0, 0.0, 0.0)) -> SurfaceMesh:
    """Spherical cap around ``axis``: a polar grid with ``n`` rings, outward normals."""
    axis = np.asarray(axis, dtype=float)
    axis /= np.linalg.norm(axis)
    u = np.cross(axis, [1.0, 0, 0] if abs(axis[0]) < 0.9 else [0, 1.0, 0])
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    verts = [axis]
    rings = []
    for r in range(1, n + 1):
        theta = half_angle * r / n
        k = 6 * r
        ring = []
        for j in range(k):
            phi = 2 * np.pi * j / k
            verts.append(np.cos(theta) * axis + np.sin(theta) * (np.cos(phi) * u + np.sin(phi) * w))
            ring.append(len(verts) - 1)
        rings.append(ring)
    tris = []
    for j in range(6):
        tris.append((0, rings[0][j], rings[0][(j + 1) % 6]))
    for r in range(1, n):
        inner, outer = rings[r - 1], rings[r]
        ki, ko = len(inner), len(outer)
        i = o = 0
        while i < ki or o < ko:
            # advance along whichever ring lags in angle
            ai = (i + 1) / ki
            ao = (o + 1) / ko
            if o < ko and (i >= ki or ao <= ai):
                tris.append((inner[i % ki], outer[o], outer[(o + 1) % ko]))
                o += 1
            else:
                tris.append((inner[i % ki], outer[o % ko], inner[(i + 1) % ki]))
                i += 1
    return SurfaceMesh(np.asarray(centre) + radius * np.array(verts), np.array(tris))


def edge_grazing_sphere(beta: float = np.pi / 8, chord: float = 0.0125, size: float = 0.2,
                        n: int = 2, rings: int = 80, half_angle: float = 0.35):
    """Unit sphere crossing one axis-parallel grid edge twice, ``chord`` apart.

    The grid edge through the middle of the box runs along x; the sphere's
    normal there is (0, cos beta, sin beta), away from every face normal of
    the Kuhn grid and its median refinements.  The two crossings sit inside
    the same quarter of that edge, so each face through the edge carries a
    bent curve at every subdivision level up to 2.

    Returns (complex, surface, foot point).
    """
    r_hat = np.array([0.0, np.cos(beta), np.sin(beta)])
    depth = 1.0 - np.sqrt(1.0 - (chord / 2) ** 2)
    foot = (1.0 - depth) * r_hat
    h = size / n
    # foot at the middle of the first quarter of the edge from the box centre
    origin = foot - np.array([size / 2 + h / 8, size / 2, size / 2])
    return cube_complex(n, size, origin), sphere_patch(r_hat, half_angle, rings), foot


# hand-built intersections with one regular tet ------------------------------

def cone_disk(centre, boundary, scale: float = 1.3) -> SurfaceMesh:
    """Cone from ``centre`` over the closed polygon ``boundary``, stretched by
    ``scale`` past it.

    With the centre inside a convex tet and each polygon side inside one face,
    the part of the cone inside the tet is exactly the cone over the polygon,
    so the intersection curve is the polygon itself.
    """
    c = np.asarray(centre, dtype=float)
    q = c + scale * (np.asarray(boundary, dtype=float) - c)
    m = len(q)
    tris = [(0, 1 + j, 1 + (j + 1) % m) for j in range(m)]
    return SurfaceMesh(np.vstack([c, q]), np.array(tris))


def _on_edge(p, u, w, t):
    return p[u] + t * (p[w] - p[u])


def corner_triangle_disk(t: float = 0.3) -> SurfaceMesh:
    """Flat triangle cutting off vertex 0."""
    p = regular_tet_points()
    b = [_on_edge(p, 0, k, t) for k in (1, 2, 3)]
    return cone_disk(np.mean(b, axis=0), b)


def quad_disk() -> SurfaceMesh:
    """Flat square through the midpoints of edges 02, 03, 13, 12 (separates 01 from 23)."""
    p = regular_tet_points()
    b = [_on_edge(p, u, w, 0.5) for u, w in ((0, 2), (0, 3), (1, 3), (1, 2))]
    return cone_disk(np.mean(b, axis=0), b)


def normal_ngon_disk(n: int = 8) -> SurfaceMesh:
    """Cone from the centroid over a normal curve with n arcs."""
    from .gons import normal_curve_of_length, realize_normal_curve

    p = regular_tet_points()
    b = [x for _, x in realize_normal_curve(normal_curve_of_length(n), p)]
    return cone_disk(p.mean(axis=0), b)


def _lune_boundary(p, push: float = 0.1):
    """Two bent curves around the middle of edge 01, in faces 012 and 013."""
    a, b = _on_edge(p, 0, 1, 0.4), _on_edge(p, 0, 1, 0.6)
    mid = (a + b) / 2
    return [a, mid + push * (p[2] - mid), b, mid + push * (p[3] - mid)], mid


def lune_disk() -> SurfaceMesh:
    """Non-normal disk bounded by two bent curves on edge 01; a graph over a face."""
    p = regular_tet_points()
    b, mid = _lune_boundary(p)
    return cone_disk(mid + 0.05 * (p[2] - mid) + 0.05 * (p[3] - mid), b)


def folded_lune_disk() -> SurfaceMesh:
    """The lune's boundary coned from near the opposite edge 23: a graph over no face."""
    p = regular_tet_points()
    b, _ = _lune_boundary(p)
    return cone_disk(0.8 * (p[2] + p[3]) / 2 + 0.2 * p.mean(axis=0), b)


def corner_band_disk() -> SurfaceMesh:
    """Band around vertex 0 that dips back to face 012 twice.

    Edge points in loop order: 01, 03, 02, (bent curve on 02), 02, 03, 01,
    (bent curve on 01).  The first three cut off vertex 0 of face 012.
    """
    p = regular_tet_points()
    p1, p2, p3 = (_on_edge(p, 0, k, 0.2) for k in (1, 3, 2))
    p4, p5, p6 = (_on_edge(p, 0, k, 0.5) for k in (2, 3, 1))
    m34 = (p3 + p4) / 2 + 0.05 * (p[1] - (p3 + p4) / 2)
    m61 = (p6 + p1) / 2 + 0.05 * (p[2] - (p6 + p1) / 2)
    return cone_disk(p.mean(axis=0), [p1, p2, p3, m34, p4, p5, p6, m61])


def face_blister(radius: float = 0.15, depth: float = 0.05) -> SurfaceMesh:
    """Small sphere pushed through the middle of face 012: one closed curve."""
    p = regular_tet_points()
    c = p[:3].mean(axis=0) + np.array([0.0, 0.0, depth - radius])
    return icosphere(2, radius, c)


def inscribed_sphere_annuli(radius: float = 0.28) -> SurfaceMesh:
    """Sphere about the centroid crossing all four faces but no edge: a
    four-holed sphere inside the tet."""
    return icosphere(3, radius, regular_tet_points().mean(axis=0))


def edge_sphere_two_tets(tilt: float = 0.25, chord: float = 0.1, rings: int = 40):
    """Two glued tets and a unit sphere grazing the middle of edge 01.

    The sphere cuts the edge twice, ``chord`` apart, so each tet sees a lune
    bounded by bent curves and the two lunes close up into a cylinder across
    the shared face 012.  The sphere's normal at the edge is tilted by
    ``tilt`` out of face 012 so that both lunes are graphs over it.  Edge 01
    lies on the boundary while face 012 is internal.  Returns (complex, surface).
    """
    c = two_glued_tets()
    v = c.vertices
    mid = (v[0] + v[1]) / 2
    along = (v[1] - v[0]) / np.linalg.norm(v[1] - v[0])
    inward = v[2] - mid - np.dot(v[2] - mid, along) * along
    inward /= np.linalg.norm(inward)
    n = np.cross(along, inward)
    d = np.cos(tilt) * inward + np.sin(tilt) * n
    depth = 1.0 - np.sqrt(1.0 - (chord / 2) ** 2)
    return c, sphere_patch(d, 0.4, rings, 1.0, mid - (1.0 - depth) * d)
