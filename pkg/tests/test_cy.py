import numpy as np
import pytest

from g2cal import cy
from g2cal.errors import DegenerateCell, NonClosedSurface


@pytest.fixture(scope="module")
def torus_dec():
    return cy.build_torus_dec(4)


@pytest.fixture(scope="module")
def sphere_dec():
    return cy.build_sphere3_dec(2)


@pytest.fixture(scope="module")
def product_dec():
    return cy.build_s1xs2_dec(12, 1)


def test_complex_counts_and_euler(torus_dec, sphere_dec, product_dec):
    for dec in (torus_dec, sphere_dec, product_dec):
        v, e = len(dec.vertices), len(dec.edges)
        f, t = len(dec.faces), len(dec.tets)
        assert v - e + f - t == 0         # closed 3-manifold
        assert e + t == f + v             # both staggerings same size


def test_dd_zero_and_orientation(torus_dec, sphere_dec, product_dec):
    for dec in (torus_dec, sphere_dec, product_dec):
        assert abs(dec.d1 @ dec.d0).max() == 0
        assert abs(dec.d2 @ dec.d1).max() == 0
        # consistent orientation: every face gets +1 and -1 from its two tets
        col_sums = np.asarray(dec.d2.sum(axis=0)).ravel()
        assert np.abs(col_sums).max() == 0


def test_stars_positive(torus_dec, sphere_dec, product_dec):
    for dec in (torus_dec, sphere_dec, product_dec):
        for star in (dec.star0, dec.star1, dec.star2, dec.star3):
            assert star.min() > 0


def test_torus_dual_volumes_partition(torus_dec):
    # barycentric vertex cells tile the manifold
    assert abs(torus_dec.star0.sum() - 1.0) < 1e-12
    assert abs((1.0 / torus_dec.star3).sum() - 1.0) < 1e-12


def test_square_is_minus_laplacian(torus_dec, sphere_dec, product_dec):
    for dec in (torus_dec, sphere_dec, product_dec):
        assert cy.dvee_square_vs_laplacian(dec) < 1e-10


def test_betti_numbers(torus_dec, sphere_dec, product_dec):
    assert cy.betti(torus_dec) == (1, 3)
    assert cy.betti(sphere_dec) == (1, 0)
    assert cy.betti(product_dec) == (1, 1)


def test_kernel_dimensions(torus_dec, sphere_dec, product_dec):
    for dec, expect in ((torus_dec, 4), (sphere_dec, 1), (product_dec, 2)):
        dim, gap, vecs = cy.cy_kernel_dim(dec)
        assert dim == expect
        assert gap > 50
        assert cy.kernel_decomposition_residual(dec, vecs) < 1e-8


def test_torus_kernel_contains_constant_forms(torus_dec):
    # the flat coordinate 1-forms dx_a are harmonic cochains: alpha on an
    # edge is the (minimal-image) coordinate increment
    ne = len(torus_dec.edges)
    a, _ = cy.assemble_Dvee(torus_dec)
    for axis in range(3):
        alpha = np.zeros(ne)
        for ei, (p, q) in enumerate(torus_dec.edges):
            d = torus_dec.vertices[q, axis] - torus_dec.vertices[p, axis]
            alpha[ei] = (d + 0.5) % 1.0 - 0.5
        x = np.concatenate([alpha, np.zeros(len(torus_dec.tets))])
        assert np.abs(a @ x).max() < 1e-13
    # and the constant dual function
    x = np.concatenate([np.zeros(ne), np.ones(len(torus_dec.tets))])
    assert np.abs(a @ x).max() < 1e-13


def test_torus_requires_minimum_resolution():
    with pytest.raises(DegenerateCell):
        cy.build_torus_dec(2)


def test_open_complex_rejected(sphere_dec):
    with pytest.raises(NonClosedSurface):
        cy.build_dec(sphere_dec.vertices, sphere_dec.tets[:-1])
