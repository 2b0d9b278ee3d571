import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qnk.fixtures import almost_regular_tet_points, cube_complex, regular_tet_points, single_tet_complex
from qnk.median import (
    ChildRole,
    ShapeKind,
    classify_tet_shape,
    distinct_values,
    edge_ratio_set,
    med_iterate,
    med_subdivide,
    med_tet,
    med_triangle,
    shape_counts,
)
from qnk.quality import complex_fatness
from qnk.simplicial import LOCAL_EDGES, mesh_size, tet_signed_volume
from qnk.surface import triangle_areas


def test_med_triangle_quarters_area():
    t = regular_tet_points()[:3]
    kids = med_triangle(t)
    assert len(kids) == 4
    assert triangle_areas(np.array(kids)) == pytest.approx([np.sqrt(3) / 16] * 4)


def test_regular_tet_children():
    rec, kids = med_tet(regular_tet_points())
    vol = np.abs(tet_signed_volume(kids))
    assert vol == pytest.approx(np.full(8, 1 / (48 * np.sqrt(2))))
    assert rec.roles[:4] == (ChildRole.PERIPHERAL,) * 4
    assert rec.roles[4:] == (ChildRole.INTERNAL,) * 4
    lengths = np.linalg.norm(kids[:, [i for i, _ in LOCAL_EDGES]] - kids[:, [j for _, j in LOCAL_EDGES]], axis=2)
    assert distinct_values(lengths) == pytest.approx([0.5, 1 / np.sqrt(2)])


def test_shape_classes():
    assert classify_tet_shape(regular_tet_points()).kind is ShapeKind.REGULAR
    s = classify_tet_shape(almost_regular_tet_points(0.5))
    assert s.kind is ShapeKind.ALMOST_REGULAR and LOCAL_EDGES[s.long_edge] == (2, 3)
    kuhn = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]], dtype=float)
    assert classify_tet_shape(kuhn).kind is ShapeKind.GENERAL


def test_almost_regular_diagonal_is_dual_to_long_edge():
    # the diagonal is the short diagonal of a rhombus with side rho = half the
    # parent's short edge and long diagonal sqrt(3) rho, so it has length rho
    p = almost_regular_tet_points(0.5)
    rec, kids = med_tet(p)
    assert rec.diagonal_rule == "dual-to-long-edge"
    pts = np.vstack([p, [(p[i] + p[j]) / 2 for i, j in LOCAL_EDGES]])
    a, b = rec.octahedron_diagonal
    rho = 0.25
    assert np.linalg.norm(pts[a] - pts[b]) == pytest.approx(rho, abs=1e-12)
    lengths = np.linalg.norm(kids[:, [i for i, _ in LOCAL_EDGES]] - kids[:, [j for _, j in LOCAL_EDGES]], axis=2)
    assert lengths.min() == pytest.approx(rho, abs=1e-12)


def test_kuhn_cube_refines_to_grid():
    # one subdivision of the Kuhn cube is the Kuhn triangulation of the 2x2x2 grid
    c, recs = med_subdivide(cube_complex(1))
    assert c.n_tets == 48 and len(c.vertices) == 27 and len(recs) == 6
    assert mesh_size(c) == pytest.approx(np.sqrt(3) / 2, rel=1e-12)
    g = cube_complex(2, 1.0)
    assert (len(c.edges), len(c.faces)) == (len(g.edges), len(g.faces))


def test_torus_subdivision_keeps_euler_zero():
    c, _ = med_subdivide(cube_complex(1, torus=True))
    n_verts = len(np.unique(c.vertex_class))
    assert n_verts == 8
    assert n_verts - len(c.edges) + len(c.faces) - c.n_tets == 0
    assert not c.boundary_faces()


def test_iterate_summaries():
    levels = med_iterate(single_tet_complex(regular_tet_points()), 3)
    assert [r.complex.n_tets for r in levels] == [8, 64, 512]
    # frozen: 2 - sqrt(3), the fatness of the octahedron tets
    assert [r.min_fatness for r in levels] == pytest.approx([2 - np.sqrt(3)] * 3, abs=1e-12)
    assert [r.halved for r in levels] == [False, True, True]
    assert levels[-1].edge_ratio_set == pytest.approx([1.0, np.sqrt(2)])
    with pytest.raises(ValueError):
        med_iterate(levels[0].complex, 0)


def test_shape_counts_closure():
    c = single_tet_complex(almost_regular_tet_points())
    for _ in range(3):
        c = med_subdivide(c)[0]
        assert shape_counts(c)[ShapeKind.GENERAL] == 0


def test_edge_ratio_set_of_kuhn_grid():
    assert edge_ratio_set(cube_complex(2)) == pytest.approx([1.0, np.sqrt(2), np.sqrt(3)])


points = st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=4, max_size=4)


def _tet(pts):
    p = np.array(pts, dtype=float)
    assume(abs(np.linalg.det(p[1:] - p[0])) / 6 > 1e-3)
    return p


@given(points)
def test_children_tile_the_parent(pts):
    p = _tet(pts)
    _, kids = med_tet(p)
    vol = tet_signed_volume(kids)
    assert np.all(np.abs(vol) > 0)
    assert np.abs(vol).sum() == pytest.approx(abs(tet_signed_volume(p)), rel=1e-9)
    # every child corner is a convex combination of parent corners
    bary = np.linalg.solve(np.vstack([p.T, np.ones(4)]), np.vstack([kids.reshape(-1, 3).T, np.ones(32)]))
    assert bary.min() >= -1e-9


@given(points)
def test_corner_children_are_half_scale(pts):
    p = _tet(pts)
    _, kids = med_tet(p)
    for s in range(4):
        d_child = np.linalg.norm(kids[s][:, None] - kids[s][None], axis=2).max()
        d_parent = np.linalg.norm(p[:, None] - p[None], axis=2).max()
        assert d_child == pytest.approx(d_parent / 2, rel=1e-12)


@given(st.floats(0.1, 10.0))
def test_fatness_is_stable_after_level_one(a):
    c = single_tet_complex(regular_tet_points(a))
    f1 = complex_fatness(med_subdivide(c)[0])
    f2 = complex_fatness(med_subdivide(med_subdivide(c)[0])[0])
    assert f2 == pytest.approx(f1, rel=1e-10)
