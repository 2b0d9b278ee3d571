import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from qnk.fixtures import regular_tet_points
from qnk.gons import (
    FACES,
    curve_components,
    enumerate_normal_curve_lengths,
    normal_coordinates,
    normal_curve_of_length,
    realize_normal_curve,
)

EDGES = list(itertools.combinations(range(4), 2))


def oracle_lengths(max_len):
    """Independent route: enumerate edge weights, derive corner counts per face,
    glue arcs with a union-find and keep single curves."""
    found = set()
    for w in itertools.product(range(max_len + 1), repeat=6):
        n = sum(w)
        if n == 0 or n > max_len:
            continue
        weight = dict(zip(EDGES, w))
        arcs, ok = [], True
        for face in itertools.combinations(range(4), 3):
            for c in face:
                a, b = (v for v in face if v != c)
                twice = weight[tuple(sorted((c, a)))] + weight[tuple(sorted((c, b)))] - weight[(a, b) if a < b else (b, a)]
                if twice < 0 or twice % 2:
                    ok = False
                    break
                for k in range(twice // 2):
                    # k-th arc around corner c uses the k-th point from c on both edges
                    arcs.append(((c, a, k), (c, b, k)))
            if not ok:
                break
        if not ok:
            continue
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def canon(c, a, k):
            # the same point seen from the other end of the edge
            u, v = min(c, a), max(c, a)
            return (u, v, k) if c == u else (u, v, weight[(u, v)] - 1 - k)

        for p, q in arcs:
            parent[find(canon(*p))] = find(canon(*q))
        if len({find(x) for x in list(parent)}) == 1:
            found.add(n)
    return found


def test_lengths_up_to_8_match_oracle():
    assert enumerate_normal_curve_lengths(8) == oracle_lengths(8) == {3, 4, 8}


def test_lengths_up_to_12_frozen():
    # frozen from oracle_lengths(12)
    assert enumerate_normal_curve_lengths(12) == {3, 4, 8, 12}


def test_no_odd_lengths_beyond_three():
    assert not enumerate_normal_curve_lengths(11) & {5, 7, 9, 11}


def _coords(corners):
    x = {(f, c): 0 for f in FACES for c in f}
    x.update(corners)
    return x


def test_vertex_link_is_one_triangle():
    x = _coords({((1, 2, 3), 1): 0, ((0, 1, 2), 0): 1, ((0, 1, 3), 0): 1, ((0, 2, 3), 0): 1})
    assert curve_components(x) == 1


def test_two_vertex_links_are_two_curves():
    x = _coords({((0, 1, 2), 0): 1, ((0, 1, 3), 0): 1, ((0, 2, 3), 0): 1,
                 ((0, 1, 3), 3): 1, ((0, 2, 3), 3): 1, ((1, 2, 3), 3): 1})
    assert curve_components(x) == 2


def test_empty_coordinates_have_no_curve():
    assert curve_components(_coords({})) == 0


@given(st.sampled_from([3, 4, 8, 12]))
def test_realized_curve_is_closed_polygon_on_faces(n):
    pts = realize_normal_curve(normal_curve_of_length(n), regular_tet_points())
    assert len(pts) == n
    for (e1, _), (e2, _) in zip(pts, pts[1:] + pts[:1]):
        # consecutive points lie on edges of a common face
        assert len(set(e1) | set(e2)) == 3
    coords = np.array([x for _, x in pts])
    assert len(np.unique(np.round(coords, 12), axis=0)) == n


@given(st.integers(min_value=1, max_value=7))
def test_coordinates_agree_on_edges(max_len):
    for x in itertools.islice(normal_coordinates(max_len), 200):
        assert 0 < sum(x.values()) <= max_len
        for u, w in EDGES:
            counts = []
            for f in FACES:
                if u in f and w in f:
                    counts.append(x[(f, u)] + x[(f, w)])
            assert counts[0] == counts[1]
