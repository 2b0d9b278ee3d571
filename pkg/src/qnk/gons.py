"""Lengths of simple closed normal curves on the boundary of a tetrahedron.

A normal curve system on the boundary of a tet is determined by its normal
coordinates: for each of the 4 faces, the number of arcs cutting off each of
the face's 3 corners.  The counts must agree on every edge (both faces
containing an edge see the same number of crossings).  We enumerate all such
coordinate vectors with total arc count <= max_len, realise each one as
disjoint arcs, and keep those forming a single closed curve.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

FACES = tuple(tuple(v for v in range(4) if v != o) for o in range(4))


def _edge(u: int, w: int) -> tuple[int, int]:
    return (u, w) if u < w else (w, u)


def _arcs(x: dict):
    """Endpoint pairs ((edge, index), (edge, index)) of every arc of ``x``.

    On an edge (u, w), points are indexed from the smaller vertex; in each
    face the corner-u arcs use the points nearest u.
    """
    for face in FACES:
        for c in face:
            others = [w for w in face if w != c]
            for k in range(x[(face, c)]):
                ends = []
                for w in others:
                    e = _edge(c, w)
                    if c == e[0]:
                        ends.append((e, k))
                    else:
                        n = x[(face, e[0])] + x[(face, e[1])]
                        ends.append((e, n - 1 - k))
                yield ends[0], ends[1]


def curve_components(x: dict) -> int:
    """Number of closed curves realised by normal coordinates ``x``.

    ``x[(face, corner)]`` is the number of arcs in ``face`` around ``corner``.
    """
    point_id: dict[tuple, int] = {}

    def pid(p):
        return point_id.setdefault(p, len(point_id))

    rows, cols = [], []
    for a, b in _arcs(x):
        rows.append(pid(a))
        cols.append(pid(b))
    if not point_id:
        return 0
    n = len(point_id)
    graph = coo_matrix(([1] * len(rows), (rows, cols)), shape=(n, n))
    return connected_components(graph, directed=False)[0]


def normal_coordinates(max_len: int):
    """Yield every non-empty matching coordinate vector with at most ``max_len`` arcs.

    Faces 012, 013 and 023 are chosen freely subject to agreement on edges
    01, 02 and 03; face 123 is then determined by its three edge counts.
    """
    f012, f013, f023, f123 = FACES[3], FACES[2], FACES[1], FACES[0]
    for a0, a1 in itertools.product(range(max_len + 1), repeat=2):
        for a2 in range(max_len + 1 - a0 - a1):
            for b0 in range(a0 + a1 + 1):
                b1 = a0 + a1 - b0  # edge 01
                for b3 in range(max_len + 1):
                    for c0 in range(min(a0 + a2, b0 + b3) + 1):
                        c2 = a0 + a2 - c0  # edge 02
                        c3 = b0 + b3 - c0  # edge 03
                        s12, s13, s23 = a1 + a2, b1 + b3, c2 + c3
                        twice = s12 + s13 - s23
                        if twice < 0 or twice % 2:
                            continue
                        d1 = twice // 2
                        d2, d3 = s12 - d1, s13 - d1
                        if d2 < 0 or d3 < 0:
                            continue
                        total = a0 + a1 + a2 + b0 + b1 + b3 + c0 + c2 + c3 + d1 + d2 + d3
                        if total == 0 or total > max_len:
                            continue
                        yield {
                            (f012, 0): a0, (f012, 1): a1, (f012, 2): a2,
                            (f013, 0): b0, (f013, 1): b1, (f013, 3): b3,
                            (f023, 0): c0, (f023, 2): c2, (f023, 3): c3,
                            (f123, 1): d1, (f123, 2): d2, (f123, 3): d3,
                        }


def enumerate_normal_curve_lengths(max_len: int) -> set[int]:
    """All lengths <= max_len (number of normal arcs) of a simple closed normal curve."""
    if not 0 <= max_len <= 20:
        raise ValueError("max_len must be in 0..20")
    found = set()
    for x in normal_coordinates(max_len):
        total = sum(x.values())
        if total not in found and curve_components(x) == 1:
            found.add(total)
    return found


def realize_normal_curve(x: dict, corners) -> list:
    """Ordered points of a connected normal curve with coordinates ``x``.

    ``corners`` are the tet's 4 vertex positions.  The j-th of n points on
    edge (u, w) sits at fraction (j + 1) / (n + 1) from u.  Returns a list of
    (edge, point) pairs in traversal order; raises ValueError if ``x`` gives
    more than one curve.
    """
    corners = np.asarray(corners, dtype=float)
    adj: dict = {}
    for a, b in _arcs(x):
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if curve_components(x) != 1:
        raise ValueError("coordinates do not give a single closed curve")
    start = min(adj)
    order, prev, cur = [start], None, start
    while True:
        nxt = adj[cur][1] if adj[cur][0] == prev else adj[cur][0]
        if nxt == start:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    count = {}
    for (e, _) in adj:
        count[e] = count.get(e, 0) + 1
    out = []
    for e, j in order:
        t = (j + 1) / (count[e] + 1)
        out.append((e, corners[e[0]] + t * (corners[e[1]] - corners[e[0]])))
    return out


def normal_curve_of_length(n: int) -> dict:
    """Some coordinate vector realizing a single normal curve with n arcs."""
    for x in normal_coordinates(n):
        if sum(x.values()) == n and curve_components(x) == 1:
            return x
    raise ValueError(f"no normal curve of length {n}")
