"""Median subdivision of triangles, tetrahedra and complexes.

Each tet is cut at its six edge midpoints into four corner tets and a central
octahedron; the octahedron is split into four tets around one of its three
diagonals (segments joining midpoints of opposite edges).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InconsistentMidpoint
from .quality import complex_fatness, simplex_quality
from .simplicial import LOCAL_EDGES, Complex3, build_complex, mesh_size

EDGE_INDEX = {e: k for k, e in enumerate(LOCAL_EDGES)} | {
    (j, i): k for k, (i, j) in enumerate(LOCAL_EDGES)
}
# opposite edge pairs (local edge indices); pairing p uses diagonal mid(e1)-mid(e2)
PAIRINGS = ((0, 5), (1, 4), (2, 3))
TIE_TOL = 1e-9


class ShapeKind(str, Enum):
    REGULAR = "Regular"
    ALMOST_REGULAR = "AlmostRegular"
    GENERAL = "General"


class ChildRole(str, Enum):
    PERIPHERAL = "Peripheral"
    INTERNAL = "Internal"


@dataclass(frozen=True)
class TetShapeClass:
    kind: ShapeKind
    edge_lengths: tuple[float, ...]
    rel_tolerance: float
    long_edge: int | None = None  # local edge index, AlmostRegular only


@dataclass(frozen=True)
class SubdivisionRecord:
    parent: int
    children: tuple[int, ...]
    roles: tuple[ChildRole, ...]
    new_vertices: tuple[int, ...]  # midpoint vertex ids, LOCAL_EDGES order
    octahedron_diagonal: tuple[int, int]
    diagonal_rule: str


def _child_templates() -> np.ndarray:
    """(3, 8, 4) local index templates, one per octahedron diagonal choice.

    Local indices: 0..3 parent corners, 4 + k midpoint of local edge k.
    """
    def mid(a, b):
        return 4 + EDGE_INDEX[(a, b)]

    corners = []
    for i in range(4):
        j, k, l = (x for x in range(4) if x != i)
        corners.append((i, mid(i, j), mid(i, k), mid(i, l)))
    out = []
    for e1, e2 in PAIRINGS:
        i, j = LOCAL_EDGES[e1]
        k, l = LOCAL_EDGES[e2]
        equator = (mid(i, k), mid(i, l), mid(j, l), mid(j, k))
        inner = [(4 + e1, 4 + e2, equator[s], equator[(s + 1) % 4]) for s in range(4)]
        out.append(corners + inner)
    return np.array(out, dtype=np.int64)


CHILD_TEMPLATES = _child_templates()
CHILD_ROLES = (ChildRole.PERIPHERAL,) * 4 + (ChildRole.INTERNAL,) * 4


def _edge_lengths(p: np.ndarray) -> np.ndarray:
    return np.stack([np.linalg.norm(p[..., i, :] - p[..., j, :], axis=-1) for i, j in LOCAL_EDGES], -1)


def _shape_codes(lengths: np.ndarray, rel_tol: float):
    """Vectorised shape classes: (kind code 0/1/2, long edge or -1) per row."""
    lengths = np.atleast_2d(lengths)
    lo, hi = lengths.min(axis=1), lengths.max(axis=1)
    regular = hi <= lo * (1 + rel_tol)
    long_edge = np.argmax(lengths, axis=1)
    rest = lengths.copy()
    rest[np.arange(len(rest)), long_edge] = np.nan
    rlo, rhi = np.nanmin(rest, axis=1), np.nanmax(rest, axis=1)
    ratio = hi / (np.nanmean(rest, axis=1) * np.sqrt(2))
    almost = ~regular & (rhi <= rlo * (1 + rel_tol)) & (np.abs(ratio - 1) <= rel_tol)
    code = np.where(regular, 0, np.where(almost, 1, 2))
    return code, np.where(almost, long_edge, -1)


_KINDS = (ShapeKind.REGULAR, ShapeKind.ALMOST_REGULAR, ShapeKind.GENERAL)


def classify_tet_shape(t, rel_tol: float = 1e-6) -> TetShapeClass:
    p = np.asarray(t, dtype=float)
    simplex_quality(p)  # raises DegenerateSimplex
    lengths = _edge_lengths(p)
    code, long_edge = _shape_codes(lengths, rel_tol)
    return TetShapeClass(
        kind=_KINDS[code[0]],
        edge_lengths=tuple(float(x) for x in lengths),
        rel_tolerance=rel_tol,
        long_edge=int(long_edge[0]) if code[0] == 1 else None,
    )


def shape_counts(c: Complex3, rel_tol: float = 1e-6) -> dict[ShapeKind, int]:
    """Number of tets of each shape class in ``c``."""
    code, _ = _shape_codes(_edge_lengths(c.vertices[c.tets]), rel_tol)
    n = np.bincount(code, minlength=3)
    return {k: int(n[i]) for i, k in enumerate(_KINDS)}


def med_triangle(t) -> list[np.ndarray]:
    """Split a triangle at its edge midpoints: three corner triangles, then the middle one."""
    p = np.asarray(t, dtype=float)
    simplex_quality(p)
    a, b, c = p
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return [np.array(x) for x in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))]


def _choose_diagonals(p: np.ndarray, ids: np.ndarray, rel_tol: float):
    """Pairing index per tet and the rule used.

    AlmostRegular tets take the diagonal through the midpoint of the long
    edge; otherwise the shortest diagonal, ties broken by the smallest sorted
    pair of parent edges (by vertex id).
    """
    code, long_edge = _shape_codes(_edge_lengths(p), rel_tol)
    diag = np.stack(
        [
            np.linalg.norm(
                p[:, LOCAL_EDGES[e1][0]] + p[:, LOCAL_EDGES[e1][1]]
                - p[:, LOCAL_EDGES[e2][0]] - p[:, LOCAL_EDGES[e2][1]],
                axis=1,
            )
            / 2
            for e1, e2 in PAIRINGS
        ],
        axis=1,
    )
    choice = np.argmin(diag, axis=1)
    near = diag <= diag.min(axis=1, keepdims=True) * (1 + TIE_TOL)
    for t in np.flatnonzero(near.sum(axis=1) > 1):
        keys = {}
        for c in np.flatnonzero(near[t]):
            e1, e2 = PAIRINGS[c]
            pair = sorted(tuple(sorted(int(ids[t, v]) for v in LOCAL_EDGES[e])) for e in (e1, e2))
            keys[c] = tuple(pair)
        choice[t] = min(keys, key=keys.__getitem__)
    pairing_of_edge = {e: n for n, pr in enumerate(PAIRINGS) for e in pr}
    almost = code == 1
    if almost.any():
        choice[almost] = [pairing_of_edge[int(e)] for e in long_edge[almost]]
    rule = np.where(almost, "dual-to-long-edge", "shortest")
    return choice, rule


def med_tet(t, shape: TetShapeClass | None = None, rel_tol: float = 1e-6):
    """Subdivide one tet; returns (record, (8, 4, 3) child corner arrays).

    Local point ids in the record: 0..3 parent corners, 4..9 edge midpoints.
    """
    p = np.asarray(t, dtype=float)
    simplex_quality(p)
    if shape is not None:
        rel_tol = shape.rel_tolerance
    pts = np.vstack([p, [(p[i] + p[j]) / 2 for i, j in LOCAL_EDGES]])
    choice, rule = _choose_diagonals(p[None], np.arange(4)[None], rel_tol)
    if shape is not None and shape.kind is ShapeKind.ALMOST_REGULAR:
        choice[0] = next(n for n, pr in enumerate(PAIRINGS) if shape.long_edge in pr)
        rule[0] = "dual-to-long-edge"
    tmpl = CHILD_TEMPLATES[choice[0]]
    e1, e2 = PAIRINGS[choice[0]]
    record = SubdivisionRecord(
        parent=0,
        children=tuple(range(8)),
        roles=CHILD_ROLES,
        new_vertices=tuple(range(4, 10)),
        octahedron_diagonal=(4 + e1, 4 + e2),
        diagonal_rule=str(rule[0]),
    )
    return record, pts[tmpl]


def med_subdivide(c: Complex3, rel_tol: float = 1e-6) -> tuple[Complex3, list[SubdivisionRecord]]:
    """One median subdivision of every tet; midpoints are shared across tets.

    Child ``8 * t + s`` of parent ``t`` is its corner tet at local vertex ``s``
    for s < 4 and an octahedron tet otherwise.
    """
    m = c.n_tets
    p = c.vertices[c.tets]
    choice, rule = _choose_diagonals(p, c.tets, rel_tol)

    # one new vertex per lifted edge: (edge id, lattice shift of its copy)
    mids = np.stack([(p[:, i] + p[:, j]) / 2 for i, j in LOCAL_EDGES], axis=1).reshape(-1, 3)
    key = c.tet_edges.reshape(-1, 1)
    if c.ambient.is_torus:
        shift = np.rint(c.tet_edge_offsets.reshape(-1, 3) / np.asarray(c.ambient.period))
        key = np.hstack([key, shift.astype(np.int64)])
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    new_coords = mids[first]
    drift = np.linalg.norm(new_coords[inverse] - mids, axis=1)
    lam = mesh_size(c)
    if drift.max() > 1e-9 * lam:
        bad = int(np.argmax(drift))
        raise InconsistentMidpoint(f"tet {bad // 6} edge {bad % 6} midpoint drifts by {drift[bad]:.3e}")
    n0 = len(c.vertices)
    mid_ids = (n0 + inverse).reshape(m, 6)
    local = np.hstack([c.tets, mid_ids])
    tmpl = CHILD_TEMPLATES[choice].reshape(m, 32)
    children = np.take_along_axis(local, tmpl, axis=1).reshape(m * 8, 4)
    out = build_complex(np.vstack([c.vertices, new_coords]), children, c.ambient)
    records = []
    for t in range(m):
        e1, e2 = PAIRINGS[choice[t]]
        records.append(
            SubdivisionRecord(
                parent=t,
                children=tuple(range(8 * t, 8 * t + 8)),
                roles=CHILD_ROLES,
                new_vertices=tuple(int(x) for x in mid_ids[t]),
                octahedron_diagonal=(int(mid_ids[t, e1]), int(mid_ids[t, e2])),
                diagonal_rule=str(rule[t]),
            )
        )
    return out, records


def distinct_values(x, rel_tol: float = 1e-9) -> list[float]:
    """Sorted cluster representatives of ``x`` (gaps above ``rel_tol`` split clusters)."""
    v = np.sort(np.asarray(x, dtype=float).ravel())
    if len(v) == 0:
        return []
    cuts = np.flatnonzero(np.diff(v) > rel_tol * v[1:])
    starts = np.concatenate([[0], cuts + 1])
    return [float(v[s]) for s in starts]


def edge_ratio_set(c: Complex3, rel_tol: float = 1e-9) -> list[float]:
    """Distinct edge lengths divided by the shortest edge."""
    lengths = distinct_values(_edge_lengths(c.vertices[c.tets]), rel_tol)
    return distinct_values(np.array(lengths) / lengths[0], rel_tol)


@dataclass
class LevelResult:
    level: int
    complex: Complex3 = field(repr=False)
    records: list = field(repr=False)
    lam: float
    min_fatness: float
    edge_ratio_set: list[float]
    halved: bool  # lambda equals the previous level's lambda / 2 to 1e-12 relative


def med_iterate(c: Complex3, n: int, rel_tol: float = 1e-6) -> list[LevelResult]:
    """Levels 1..n of iterated median subdivision with per-level summaries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    prev_lam = mesh_size(c)
    cur = c
    for level in range(1, n + 1):
        cur, records = med_subdivide(cur, rel_tol)
        lam = mesh_size(cur)
        out.append(
            LevelResult(
                level=level,
                complex=cur,
                records=records,
                lam=lam,
                min_fatness=complex_fatness(cur),
                edge_ratio_set=edge_ratio_set(cur),
                halved=bool(abs(lam - prev_lam / 2) <= 1e-12 * prev_lam),
            )
        )
        prev_lam = lam
    return out
