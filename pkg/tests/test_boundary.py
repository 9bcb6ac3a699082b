import dataclasses

import numpy as np
import pytest

from g2cal import algebra, boundary, geometry, meshes
from g2cal.errors import InvalidNormal

E4 = algebra.basis_vector(3)


@pytest.fixture(scope="module")
def ball3_bundles(ball3):
    return boundary.decompose_boundary_bundles(ball3, E4)


def test_bundle_invariants(ball2):
    bnd = boundary.decompose_boundary_bundles(ball2, E4)
    assert bnd.invariance_residual < 1e-10
    dots = np.einsum("nak,nbk->nab", bnd.nu_frames, bnd.mu_frames)
    assert np.abs(dots).max() < 1e-10
    jsq = np.einsum("nkl,nlm->nkm", bnd.j_matrices, bnd.j_matrices)
    assert np.abs(jsq + np.eye(4)).max() < 1e-12
    # nu_X contains e itself
    assert np.allclose(bnd.nu_frames[:, 0], E4[3:])


def test_bundle_rejects_tangent_e(ball2):
    with pytest.raises(InvalidNormal):
        boundary.decompose_boundary_bundles(ball2, algebra.basis_vector(0))


def test_bundle_rejects_non_unit(ball2):
    with pytest.raises(InvalidNormal):
        boundary.decompose_boundary_bundles(ball2, 2.0 * E4)


def test_dl_symmetry_and_trace(ball3, ball3_bundles):
    h = ball3.h
    surf = ball3_bundles.surface
    dl_mu = boundary.assemble_DL(ball3, ball3_bundles, "mu_x")
    dl_nu = boundary.assemble_DL(ball3, ball3_bundles, "nu_x")
    assert dl_mu.asymmetry < 2.0 * h
    assert dl_nu.asymmetry < 2.0 * h
    for dl in (dl_mu, dl_nu):
        assert np.abs(dl.traces - 2.0 * surf.mean_curvature).max() < 2.0 * h


def test_dl_sphere_eigenvalues(ball3, ball3_bundles):
    # round unit sphere: both mu_X eigenvalues equal 1/r = 1
    dl_mu = boundary.assemble_DL(ball3, ball3_bundles, "mu_x")
    assert np.abs(dl_mu.eigenvalues - 1.0).max() < 0.05


def test_dl_nu_eigenstructure(ball3, ball3_bundles):
    # in the (e, n x e) frame the operator is diag(0, 2H)
    h = ball3.h
    surf = ball3_bundles.surface
    dl_nu = boundary.assemble_DL(ball3, ball3_bundles, "nu_x")
    m = dl_nu.matrices
    assert np.abs(m[:, 0, 0]).max() < 2.0 * h
    assert np.abs(m[:, 0, 1]).max() < 2.0 * h
    assert np.abs(m[:, 1, 1] - 2.0 * surf.mean_curvature).max() < 2.0 * h


def test_dl_frame_rotation_invariance(ball2, rng):
    surf = ball2.boundary
    theta = rng.uniform(0, 2 * np.pi, len(surf.node_ids))
    v2 = np.cos(theta)[:, None] * surf.v_dir + np.sin(theta)[:, None] * surf.w_dir
    w2 = np.cos(theta)[:, None] * surf.w_dir - np.sin(theta)[:, None] * surf.v_dir
    rot = dataclasses.replace(surf, v_dir=v2, w_dir=w2)
    ball_rot = dataclasses.replace(ball2, boundary=rot)
    dl_a = boundary.assemble_DL(
        ball2, boundary.decompose_boundary_bundles(ball2, E4), "mu_x"
    )
    dl_b = boundary.assemble_DL(
        ball_rot, boundary.decompose_boundary_bundles(ball_rot, E4), "mu_x"
    )
    assert np.abs(dl_a.eigenvalues - dl_b.eigenvalues).max() < 1e-8


def test_dl_tensoriality(ball2):
    # multiplying the section by a scalar function commutes with the
    # assembled 0th-order matrix up to the stencil truncation error
    bnd = boundary.decompose_boundary_bundles(ball2, E4)
    surf = bnd.surface
    f = 1.0 + 0.5 * np.sin(surf.positions[:, 0]) * np.cos(surf.positions[:, 1])
    dl = boundary.assemble_DL(ball2, bnd, "mu_x")
    cal = algebra.build_calibration()
    stencils, coeffs = boundary.surface_derivative_coefficients(surf)
    projs = np.einsum("nak,nal->nkl", bnd.mu_frames, bnd.mu_frames)
    worst = 0.0
    for i in range(len(surf.node_ids)):
        js = stencils[i]
        for a in range(2):
            sec = np.einsum("jkl,l->jk", projs[js], bnd.mu_frames[i, a])
            fsec = f[js, None] * sec
            dv, dw = coeffs[i][0] @ fsec, coeffs[i][1] @ fsec
            dv7, dw7 = np.zeros(7), np.zeros(7)
            dv7[3:], dw7[3:] = dv, dw
            img = algebra.cross(surf.v_dir[i], dw7, cal) - algebra.cross(
                surf.w_dir[i], dv7, cal
            )
            lhs = np.array([np.dot(img[3:], bnd.mu_frames[i, b]) for b in range(2)])
            rhs = f[i] * dl.matrices[i][:, a]
            worst = max(worst, np.abs(lhs - rhs).max())
    assert worst < 2.0 * ball2.h


def test_chern_numbers_sphere(ball3, ball3_bundles):
    surf = ball3_bundles.surface
    c_t, r_t = boundary.chern_number(surf, boundary.tangent_plane_frames(surf))
    c_nu, r_nu = boundary.chern_number(
        surf, boundary.bundle_plane_frames(ball3_bundles, "nu_x")
    )
    c_mu, r_mu = boundary.chern_number(
        surf, boundary.bundle_plane_frames(ball3_bundles, "mu_x")
    )
    assert (c_t, c_nu, c_mu) == (2, 0, -2)
    assert max(r_t, r_nu, r_mu) < 0.1
    assert c_t + c_nu + c_mu == 0


def test_chern_relation_genus_one():
    surf = meshes.torus_surface_fixture(48, 24)
    bnd = boundary.bundles_from_surface(surf, E4)
    c_t, _ = boundary.chern_number(surf, boundary.tangent_plane_frames(surf))
    c_nu, _ = boundary.chern_number(surf, boundary.bundle_plane_frames(bnd, "nu_x"))
    c_mu, _ = boundary.chern_number(surf, boundary.bundle_plane_frames(bnd, "mu_x"))
    assert (c_t, c_nu, c_mu) == (0, 0, 0)
    assert meshes.euler_genus(surf) == 1
    # trivial bundle on a genus-1 boundary: index 0 + 1 - 1 = 0
    assert boundary.index(None, bnd) == 0


def test_index_ball(ball3, ball3_bundles):
    assert boundary.index(ball3, ball3_bundles) == 1


def test_rigidity_convex_ball(ball3, ball3_bundles):
    shape = geometry.second_fundamental_form(ball3)
    simons = geometry.simons_operators(ball3, shape)
    rep = boundary.rigidity_report(ball3, ball3_bundles, simons)
    assert rep["verdict"] == "SmoothModuli"
    assert rep["expected_dimension"] == 1
    assert rep["min_dl_mu_eigenvalue"] > 0.9


def test_rigidity_dented_ball_inconclusive():
    dent = lambda u: 1.0 - 0.5 * np.exp(-8.0 * (1.0 - u[0]))
    dom = meshes.build_ball_mesh(radius_fn=dent, refinement=3)
    assert dom.boundary.k_v.min() < 0  # hypothesis violated by the dent
    bnd = boundary.decompose_boundary_bundles(dom, E4)
    shape = geometry.second_fundamental_form(dom)
    simons = geometry.simons_operators(dom, shape)
    rep = boundary.rigidity_report(dom, bnd, simons)
    assert rep["verdict"] == "Inconclusive"
    assert rep["min_dl_mu_eigenvalue"] < 0
