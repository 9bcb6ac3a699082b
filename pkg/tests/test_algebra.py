import numpy as np
import pytest

from g2cal import algebra
from g2cal.errors import DegenerateBasis


def test_phi_totally_antisymmetric():
    cal = algebra.build_calibration()
    assert np.abs(cal.phi + cal.phi.transpose(1, 0, 2)).max() == 0
    assert np.abs(cal.phi + cal.phi.transpose(0, 2, 1)).max() == 0


def test_cross_against_phi(rng):
    cal = algebra.build_calibration()
    for _ in range(500):
        u, v, w = rng.standard_normal((3, 7))
        lhs = np.dot(algebra.cross(u, v, cal), w)
        assert abs(lhs - algebra.phi_form(u, v, w, cal)) < 1e-12


def test_cross_orthogonality_and_norm(rng):
    # u x v is orthogonal to u and v with |u x v|^2 = |u|^2|v|^2 - <u,v>^2
    for _ in range(500):
        u, v = rng.standard_normal((2, 7))
        c = algebra.cross(u, v)
        assert abs(np.dot(c, u)) < 1e-11
        assert abs(np.dot(c, v)) < 1e-11
        want = np.dot(u, u) * np.dot(v, v) - np.dot(u, v) ** 2
        assert abs(np.dot(c, c) - want) < 1e-10


def test_cross_table_r3_block():
    # on span(e1,e2,e3) the product restricts to the ordinary cross product
    e = np.eye(7)
    assert np.allclose(algebra.cross(e[0], e[1]), e[2])
    assert np.allclose(algebra.cross(e[1], e[2]), e[0])
    assert np.allclose(algebra.cross(e[2], e[0]), e[1])


def test_chi_matches_bracket_expression(rng):
    cal = algebra.build_calibration()
    for _ in range(500):
        u, v, w = rng.standard_normal((3, 7))
        a = algebra.chi(u, v, w, cal)
        b = algebra.chi_bracket(u, v, w, cal)
        assert np.abs(a - b).max() < 1e-12


def test_chi_orthogonal_to_arguments(rng):
    for _ in range(200):
        u, v, w = rng.standard_normal((3, 7))
        c = algebra.chi(u, v, w)
        for x in (u, v, w):
            assert abs(np.dot(c, x)) < 1e-11


def test_classify_planes():
    e = np.eye(7)
    flag, res = algebra.classify_plane(e[:3], "associative3")
    assert flag and res < 1e-14
    flag, res = algebra.classify_plane(e[3:], "coassociative4")
    assert flag and res < 1e-14
    # a generic random 3-plane is not associative
    r = np.random.default_rng(3).standard_normal((3, 7))
    flag, res = algebra.classify_plane(r, "associative3")
    assert not flag and res > 1e-3


def test_classify_plane_other_associative_triples():
    # each phi term marks an associative plane
    e = np.eye(7)
    for triple in [(0, 3, 4), (0, 5, 6), (1, 3, 5), (2, 4, 5)]:
        flag, _ = algebra.classify_plane(e[list(triple)], "associative3")
        assert flag


def test_classify_plane_degenerate_raises():
    b = np.ones((3, 7))
    with pytest.raises(DegenerateBasis):
        algebra.classify_plane(b, "associative3")


def test_classify_plane_shape_check():
    with pytest.raises(ValueError):
        algebra.classify_plane(np.eye(7)[:4], "associative3")
