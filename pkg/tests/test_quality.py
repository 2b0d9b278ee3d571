import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qnk.errors import DegenerateSimplex
from qnk.fixtures import cube_complex, needle_tet_points, regular_tet_points
from qnk.quality import check_fatness_conditions, complex_fatness, simplex_quality, tet_quality_arrays

KUHN = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]], dtype=float)


def test_regular_tet_closed_forms():
    q = simplex_quality(regular_tet_points())
    assert q.insphere_r == pytest.approx(1 / (2 * np.sqrt(6)), rel=1e-12)
    assert q.circumsphere_R == pytest.approx(np.sqrt(6) / 4, rel=1e-12)
    assert q.fatness_phi == pytest.approx(1 / 3, rel=1e-12)
    assert q.min_dihedral == pytest.approx(np.arccos(1 / 3), rel=1e-12)
    assert q.volume == pytest.approx(1 / (6 * np.sqrt(2)), rel=1e-12)


def test_kuhn_tet_closed_forms():
    # circumsphere is the cube's; face areas 1/2, 1/2, sqrt2/2, sqrt2/2;
    # an orthoscheme has three right dihedral angles
    q = simplex_quality(KUHN)
    assert q.circumsphere_R == pytest.approx(np.sqrt(3) / 2, rel=1e-12)
    assert q.insphere_r == pytest.approx((np.sqrt(2) - 1) / 2, rel=1e-12)
    assert q.fatness_phi == pytest.approx((np.sqrt(2) - 1) / np.sqrt(3), rel=1e-12)
    assert sorted(q.dihedral_angles) == pytest.approx(sorted([np.pi / 2] * 3 + [np.pi / 4, np.pi / 3, np.pi / 4]))


def test_equilateral_triangle():
    q = simplex_quality(regular_tet_points()[:3])
    assert q.fatness_phi == pytest.approx(0.5)
    assert q.dihedral_angles == pytest.approx((np.pi / 3,) * 3)


def test_needle_is_thin_and_flat_is_degenerate():
    assert simplex_quality(needle_tet_points(1e-3)).fatness_phi < 1e-2
    with pytest.raises(DegenerateSimplex):
        simplex_quality(needle_tet_points(0.0))
    with pytest.raises(DegenerateSimplex):
        simplex_quality(np.zeros((2, 3)))


def test_fatness_conditions():
    q = simplex_quality(regular_tet_points())
    rep = check_fatness_conditions(q, 4.0)
    assert rep.angle_condition_holds and rep.area_condition_holds
    assert rep.min_face_ratio == pytest.approx(np.sqrt(3) / 4)
    assert not check_fatness_conditions(q, 1.0).angle_condition_holds
    with pytest.raises(ValueError):
        check_fatness_conditions(q, 0.5)


def test_kuhn_cube_fatness():
    assert complex_fatness(cube_complex(3)) == pytest.approx((np.sqrt(2) - 1) / np.sqrt(3), rel=1e-12)


def test_vectorised_matches_scalar():
    p = np.stack([regular_tet_points(), KUHN, needle_tet_points(0.3)])
    arr = tet_quality_arrays(p)
    for k in range(3):
        assert arr["phi"][k] == pytest.approx(simplex_quality(p[k]).fatness_phi, rel=1e-12)


points = st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=4, max_size=4)


def _tet(pts):
    p = np.array(pts, dtype=float)
    vol = abs(np.linalg.det(p[1:] - p[0])) / 6
    assume(vol > 1e-3)
    return p


@given(points)
def test_phi_at_most_one_third(pts):
    # Euler's inequality R >= 3r, equality only for the regular tet
    assert simplex_quality(_tet(pts)).fatness_phi <= 1 / 3 + 1e-12


@given(points, st.floats(0.01, 100.0), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_phi_is_similarity_invariant(pts, scale, shift):
    p = _tet(pts)
    q = scale * p + np.array(shift)
    assert simplex_quality(q).fatness_phi == pytest.approx(simplex_quality(p).fatness_phi, rel=1e-7)


@given(points)
def test_dihedral_angles_in_open_range(pts):
    ang = np.array(simplex_quality(_tet(pts)).dihedral_angles)
    assert np.all((ang > 0) & (ang < np.pi))
