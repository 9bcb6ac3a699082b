"""Boundary bundles, the 0th-order operator on them, Chern numbers, index.

All fiber data lives in the 4-component coordinates of the constant
normal frame (e4..e7); surface derivatives are least-squares fits over
boundary node rings in the (v, w) tangent coordinates of each node.
"""

from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .errors import (
    HolonomyResidualTooLarge,
    InvalidNormal,
    MissingCurvatureData,
    NonClosedSurface,
)
from .meshes import euler_genus


@dataclass
class BoundaryBundles:
    """Orthonormal plane frames for nu_X and mu_X at each boundary node."""

    surface: object                 # SurfaceMesh
    e_vector: np.ndarray            # (7,) the defining constant section
    nu_frames: np.ndarray           # (nb, 2, 4) in normal-frame coords
    mu_frames: np.ndarray           # (nb, 2, 4)
    j_matrices: np.ndarray          # (nb, 4, 4) action of n x on the fiber
    invariance_residual: float      # max deviation of n x L from L


@dataclass
class DLField:
    """The assembled 2x2 operator of a plane bundle, node by node."""

    matrices: np.ndarray            # (nb, 2, 2) symmetrized
    eigenvalues: np.ndarray         # (nb, 2) ascending
    traces: np.ndarray              # (nb,)
    asymmetry: float
    label: str = ""

    def quadratic_form(self, coeffs):
        """<DL psi, psi> per node for fields given in the plane frame."""
        return np.einsum("nab,nb,na->n", self.matrices, coeffs, coeffs)


def _fiber_cross_matrix(n_amb, cal):
    """4x4 matrix of eta -> n x eta on the normal-frame coordinates."""
    m = np.zeros((4, 4))
    for k in range(4):
        eta = np.zeros(7)
        eta[3 + k] = 1.0
        m[:, k] = algebra.cross(n_amb, eta, cal)[3:]
    return m


def decompose_boundary_bundles(domain, e):
    """Split nu restricted to the boundary as span(e, n x e) + complement."""
    surf = domain.boundary
    if surf is None:
        raise NonClosedSurface("domain has no boundary surface")
    e = np.asarray(e, dtype=float)
    tang = np.abs(np.einsum("nac,c->na", domain.tangent_frame, e)).max()
    if tang > 1e-10:
        raise InvalidNormal("e must be orthogonal to the tangent spaces")
    return bundles_from_surface(surf, e)


def bundles_from_surface(surf, e):
    """Bundle decomposition from a surface alone (fixtures, injected data)."""
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-10:
        raise InvalidNormal("e must be a unit vector")
    cal = algebra.build_calibration()
    nb = len(surf.node_ids)
    nu = np.zeros((nb, 2, 4))
    mu = np.zeros((nb, 2, 4))
    jmats = np.zeros((nb, 4, 4))
    resid = 0.0
    for jn in range(nb):
        # the complex structure is n x with the inner normal, matching
        # the {v, w = n x v} frame convention of the tangent bundle
        jmat = _fiber_cross_matrix(surf.inner_normal[jn], cal)
        b1 = e[3:].copy()
        b2 = jmat @ b1
        b2 -= np.dot(b2, b1) * b1
        b2 /= np.linalg.norm(b2)
        nu[jn, 0], nu[jn, 1] = b1, b2
        # complement via full QR of [b1 b2 | I]
        q = np.linalg.qr(np.column_stack([b1, b2, np.eye(4)]))[0]
        mu[jn, 0], mu[jn, 1] = q[:, 2], q[:, 3]
        jmats[jn] = jmat
        for plane in (nu[jn], mu[jn]):
            proj = np.einsum("ak,al->kl", plane, plane)
            img = jmat @ plane.T
            resid = max(resid, float(np.abs(img - proj @ img).max()))
    return BoundaryBundles(
        surface=surf,
        e_vector=e,
        nu_frames=nu,
        mu_frames=mu,
        j_matrices=jmats,
        invariance_residual=resid,
    )


def _local_triangles(surf):
    """Triangles reindexed to surface-local node numbering."""
    loc = surf.local_index()
    return np.array([[loc[int(x)] for x in t] for t in surf.triangles])


def _surface_neighbor_lists(surf):
    nb = len(surf.node_ids)
    nbrs = [set() for _ in range(nb)]
    for a, b, c in _local_triangles(surf):
        nbrs[a].update((b, c))
        nbrs[b].update((a, c))
        nbrs[c].update((a, b))
    return [sorted(s) for s in nbrs]


def surface_derivative_coefficients(surf, min_neighbors=8):
    """Per-node stencils for derivatives along v and w.

    Returns (stencils, coeffs): node lists and (2, m) weight rows such
    that sum_j c[a, j] f(stencil[j]) estimates the derivative of f along
    v (a=0) or w (a=1), from a quadratic fit in projected coordinates.
    """
    nbrs = _surface_neighbor_lists(surf)
    stencils, coeffs = [], []
    for i in range(len(surf.node_ids)):
        ring = set(nbrs[i])
        while len(ring) < min_neighbors:
            ring |= {k for j in ring for k in nbrs[j]} - {i}
        js = sorted(ring)
        d = surf.positions[js] - surf.positions[i]
        scale = np.sqrt(np.einsum("jk,jk->j", d, d).mean())
        x = np.column_stack([d @ surf.v_dir[i], d @ surf.w_dir[i]]) / scale
        phi = np.column_stack([
            x[:, 0], x[:, 1],
            0.5 * x[:, 0] ** 2, 0.5 * x[:, 1] ** 2, x[:, 0] * x[:, 1],
        ])
        w = 1.0 / np.einsum("ja,ja->j", x, x)
        pw = phi * w[:, None]
        coef = np.linalg.solve(phi.T @ pw, pw.T)[:2] / scale    # (2, m)
        stencils.append(np.array(js + [i]))
        coeffs.append(np.column_stack([coef, -coef.sum(axis=1)]))
    return stencils, coeffs


def assemble_DL(domain, bundles, which):
    """Assemble the plane operator pi_L(v x grad_w - w x grad_v) nodewise.

    The bundle has no global smooth frame in general, so at each node
    the two local sections are the orthogonal projections of the central
    frame vectors into the neighboring fibers; since the operator is
    tensorial this evaluates it exactly in the limit.
    """
    surf = bundles.surface
    if surf.k_v is None:
        raise MissingCurvatureData("surface has no curvature/frame data")
    frames = {"nu_x": bundles.nu_frames, "mu_x": bundles.mu_frames}[which]
    cal = algebra.build_calibration()
    stencils, coeffs = surface_derivative_coefficients(surf)
    nb = len(surf.node_ids)
    mats = np.zeros((nb, 2, 2))
    asym = 0.0
    frame7 = np.zeros((nb, 2, 7))
    frame7[:, :, 3:] = frames
    # projectors of L at every node, for building the local sections
    projs = np.einsum("nak,nal->nkl", frames, frames)
    for i in range(nb):
        js = stencils[i]
        raw = np.zeros((2, 2))
        for a in range(2):
            # section s_a(x) = pi_{L(x)} ell_a(i), in fiber coordinates
            sec = np.einsum("jkl,l->jk", projs[js], frames[i, a])
            dv = coeffs[i][0] @ sec
            dw = coeffs[i][1] @ sec
            dv7 = np.zeros(7)
            dv7[3:] = dv
            dw7 = np.zeros(7)
            dw7[3:] = dw
            img = algebra.cross(surf.v_dir[i], dw7, cal) - algebra.cross(
                surf.w_dir[i], dv7, cal
            )
            raw[:, a] = frame7[i] @ img
        asym = max(asym, float(np.abs(raw - raw.T).max()))
        mats[i] = 0.5 * (raw + raw.T)
    eigs = np.sort(np.linalg.eigvalsh(mats), axis=1)
    return DLField(
        matrices=mats,
        eigenvalues=eigs,
        traces=np.trace(mats, axis1=1, axis2=2),
        asymmetry=asym,
        label=which,
    )


def chern_number(surf, plane_frames, residual_tol=0.1):
    """First Chern number of an n x -invariant rank-2 plane field.

    plane_frames is (nb, 2, 7) ambient orthonormal pairs (f, J f) with
    J = n x.  The number is the total holonomy angle of projection
    parallel transport around all (outward-oriented) triangles, over
    2 pi; the distance to the nearest integer is the quality residual.
    """
    f1 = plane_frames[:, 0]
    f2 = plane_frames[:, 1]
    # unitary link variable for transport a -> b, as a complex phase
    def link(a, b):
        z = complex(np.dot(f1[a], f1[b]), np.dot(f1[a], f2[b]))
        if abs(z) < 1e-8:
            raise HolonomyResidualTooLarge(
                "plane field not continuous across an edge"
            )
        return z / abs(z)

    total = 0.0
    for i, j, k in _local_triangles(surf):
        u = link(i, j) * link(j, k) * link(k, i)
        total += np.angle(u)
    # triangles are oriented by the outward normal while J uses the
    # inner one, which reverses the sign of the holonomy angles
    c1 = -total / (2.0 * np.pi)
    nearest = int(np.rint(c1))
    residual = abs(c1 - nearest)
    if residual > residual_tol:
        raise HolonomyResidualTooLarge(
            f"holonomy sum {c1:.4f} is not near an integer"
        )
    return nearest, residual


def tangent_plane_frames(surf):
    """(v, w) frames of the boundary tangent bundle, for c1(T dY).

    Fixtures without precomputed frames get one per node from the inner
    normal; the holonomy sum is gauge invariant, so the arbitrary choice
    does not matter.
    """
    if surf.v_dir is not None:
        return np.stack([surf.v_dir, surf.w_dir], axis=1)
    cal = algebra.build_calibration()
    nb = len(surf.node_ids)
    frames = np.zeros((nb, 2, 7))
    for i in range(nb):
        n = surf.inner_normal[i]
        a = np.zeros(7)
        a[int(np.argmin(np.abs(n[:3])))] = 1.0
        t = a - np.dot(a, n) * n
        t /= np.linalg.norm(t)
        frames[i, 0] = t
        frames[i, 1] = algebra.cross(n, t, cal)
    return frames


def bundle_plane_frames(bundles, which):
    """Ambient (nb, 2, 7) frames of nu_X or mu_X, J-compatible."""
    frames = {"nu_x": bundles.nu_frames, "mu_x": bundles.mu_frames}[which]
    nb = len(bundles.surface.node_ids)
    out = np.zeros((nb, 2, 7))
    for i in range(nb):
        b1 = frames[i, 0]
        b2 = bundles.j_matrices[i] @ b1          # J b1, in-plane by invariance
        b2 -= np.dot(b2, b1) * b1
        b2 /= np.linalg.norm(b2)
        out[i, 0, 3:] = b1
        out[i, 1, 3:] = b2
    return out


def index(domain, bundles):
    """The virtual dimension c1(nu_X) + 1 - genus of the boundary."""
    surf = bundles.surface
    c1, _ = chern_number(surf, bundle_plane_frames(bundles, "nu_x"))
    g = euler_genus(surf)
    return c1 + 1 - g


def rigidity_report(domain, bundles, simons):
    """Check the positivity hypotheses and report the verdict.

    SmoothModuli requires the boundary operator on mu_X to be positive
    and the interior curvature operator nonnegative (identically zero in
    the flat totally geodesic case); otherwise Inconclusive with the
    worst offending node.
    """
    dl_mu = assemble_DL(domain, bundles, "mu_x")
    min_node = int(np.argmin(dl_mu.eigenvalues[:, 0]))
    min_dl = float(dl_mu.eigenvalues[min_node, 0])
    r_nu_min = float(simons.min_eig_r_nu.min())
    r_nu_node = int(np.argmin(simons.min_eig_r_nu))
    tol = 1e-8
    ok = min_dl > 0.0 and r_nu_min >= -tol
    report = {
        "verdict": "SmoothModuli" if ok else "Inconclusive",
        "min_dl_mu_eigenvalue": min_dl,
        "min_dl_mu_node": int(bundles.surface.node_ids[min_node]),
        "min_r_nu_eigenvalue": r_nu_min,
        "min_r_nu_node": r_nu_node,
        "expected_dimension": index(domain, bundles),
    }
    if not ok:
        report["violation"] = (
            "boundary operator" if min_dl <= 0.0 else "curvature operator"
        )
    return report
