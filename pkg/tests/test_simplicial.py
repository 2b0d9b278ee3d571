import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnk.errors import (
    DegenerateTet,
    DuplicateSimplex,
    FormatError,
    ImproperIntersection,
    IndexOutOfRange,
)
from qnk.fixtures import cube_complex, regular_tet_points, single_tet_complex, two_glued_tets
from qnk.simplicial import (
    AmbientModel,
    Complex3,
    FaceLabel,
    ManifoldBounds,
    TetLabel,
    ambient_distance,
    build_complex,
    mesh_size,
    read_complex,
    tet_signed_volume,
    write_complex,
)


def euler(c):
    return len(np.unique(c.vertex_class)) - len(c.edges) + len(c.faces) - c.n_tets


def test_single_tet_skeleton():
    c = single_tet_complex(regular_tet_points())
    assert (len(c.edges), len(c.faces)) == (6, 4)
    assert all(lab is FaceLabel.BOUNDARY for lab in c.face_labels)
    assert c.tet_labels == [TetLabel.PERIPHERAL]
    assert euler(c) == 1


def test_two_glued_tets_share_one_face():
    c = two_glued_tets()
    assert (len(c.edges), len(c.faces)) == (9, 7)
    internal = [f for f, lab in enumerate(c.face_labels) if lab is FaceLabel.INTERNAL]
    assert len(internal) == 1
    assert sorted(t for t, _ in c.face_tets[internal[0]]) == [0, 1]
    assert c.boundary_faces() == [f for f in range(7) if f != internal[0]]


def test_kuhn_cube_counts():
    # 12 cube edges + 6 face diagonals + 1 main diagonal; 12 boundary + 6 internal faces
    c = cube_complex(1)
    assert (c.n_tets, len(c.edges), len(c.faces)) == (6, 19, 18)
    assert sum(lab is FaceLabel.INTERNAL for lab in c.face_labels) == 6
    assert euler(c) == 1


def test_one_vertex_torus():
    c = cube_complex(1, torus=True)
    assert len(np.unique(c.vertex_class)) == 1
    assert (len(c.edges), len(c.faces)) == (7, 12)
    assert euler(c) == 0
    assert not c.boundary_faces()
    assert all(lab is TetLabel.INTERNAL for lab in c.tet_labels)


def test_torus_grid_euler():
    assert euler(cube_complex(2, torus=True)) == 0


def test_tets_are_positively_oriented():
    p = regular_tet_points()
    c = build_complex(p, [[0, 1, 3, 2]])
    assert tet_signed_volume(c.vertices[c.tets])[0] > 0


@pytest.mark.parametrize("tets, err", [
    ([[0, 1, 2, 3], [3, 2, 1, 0]], DuplicateSimplex),
    ([[0, 1, 2, 2]], DegenerateTet),
    ([[0, 1, 2, 7]], IndexOutOfRange),
    ([[0, 1, 2]], FormatError),
])
def test_invalid_tets(tets, err):
    with pytest.raises(err):
        build_complex(regular_tet_points(), tets)


def test_flat_tet_rejected():
    p = regular_tet_points()
    p[3, 2] = 0.0
    with pytest.raises(DegenerateTet):
        single_tet_complex(p)


def test_three_tets_on_a_face():
    p = regular_tet_points()
    extra = [2 * p[:3].mean(axis=0) - p[3], p[:3].mean(axis=0) + [0, 0, 2.0]]
    with pytest.raises(ImproperIntersection):
        build_complex(np.vstack([p, extra]), [[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]])


def test_overlap_across_shared_face():
    p = regular_tet_points()
    q = p[:3].mean(axis=0) + [0, 0, 0.3]
    with pytest.raises(ImproperIntersection):
        build_complex(np.vstack([p, q]), [[0, 1, 2, 3], [0, 1, 2, 4]])


def test_ambient_validation():
    with pytest.raises(ValueError):
        AmbientModel.torus((1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        AmbientModel("EuclideanRegion", (1.0, 1.0, 1.0))


def test_manifold_bounds_validation():
    assert ManifoldBounds(1.0, 0.5).curvature_budget_C == 1.0
    for bad in [(-1.0, 1.0), (np.inf, 1.0), (0.0, 0.0)]:
        with pytest.raises(ValueError):
            ManifoldBounds(*bad)


def test_torus_distance_wraps():
    amb = AmbientModel.torus()
    assert ambient_distance([0.05, 0.5, 0.5], [0.95, 0.5, 0.5], amb) == pytest.approx(0.1)
    assert ambient_distance([0.05, 0.05, 0.05], [0.95, 0.95, 0.95], amb) == pytest.approx(0.1 * np.sqrt(3))


def test_mesh_size_of_unit_cube():
    assert mesh_size(cube_complex(1)) == pytest.approx(np.sqrt(3))


def test_json_round_trip(tmp_path):
    c = cube_complex(2, 0.5, (1, 2, 3), torus=True)
    write_complex(c, tmp_path / "c.json")
    d = read_complex(tmp_path / "c.json")
    assert d.ambient == c.ambient
    assert (len(d.edges), len(d.faces), d.n_tets) == (len(c.edges), len(c.faces), c.n_tets)


def test_malformed_json(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(FormatError):
        read_complex(tmp_path / "bad.json")
    with pytest.raises(FormatError):
        Complex3.from_dict({"vertices": [[0, 0, 0]]})


def rotation(angles):
    a, b, g = angles
    rx = np.array([[1, 0, 0], [0, np.cos(a), -np.sin(a)], [0, np.sin(a), np.cos(a)]])
    rz = np.array([[np.cos(b), -np.sin(b), 0], [np.sin(b), np.cos(b), 0], [0, 0, 1]])
    ry = np.array([[np.cos(g), 0, np.sin(g)], [0, 1, 0], [-np.sin(g), 0, np.cos(g)]])
    return rx @ rz @ ry


angles = st.tuples(*[st.floats(-np.pi, np.pi)] * 3)


@given(angles, st.floats(0.1, 10.0), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_skeleton_is_invariant_under_similarity(ang, scale, shift):
    c = cube_complex(2)
    v = scale * c.vertices @ rotation(ang).T + np.array(shift)
    d = build_complex(v, c.tets)
    assert (len(d.edges), len(d.faces)) == (len(c.edges), len(c.faces))
    assert [lab.value for lab in d.face_labels] == [lab.value for lab in c.face_labels]
    assert mesh_size(d) == pytest.approx(scale * mesh_size(c))


@given(st.lists(st.integers(-2, 2), min_size=3, max_size=3))
def test_torus_lifts_are_identified(shift):
    # translating one tet's lift by a period vector names the same tet
    c = cube_complex(2, torus=True)
    v = c.vertices.copy()
    extra = v[c.tets[0]] + np.array(shift, dtype=float)
    n = len(v)
    tets = c.tets.tolist() + [[n, n + 1, n + 2, n + 3]]
    with pytest.raises(DuplicateSimplex):
        build_complex(np.vstack([v, extra]), tets, c.ambient)
