"""The first-order operator sum_i e_i x grad^perp_i and its analysis.

Everything acts on normal fields stored as (n, 4) coefficient arrays in
the constant normal frame (e4..e7) of the flat model domains.  The
assembled matrix is ordered component-fastest: unknown 4*i + k is the
k-th normal coefficient at node i.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import algebra
from .errors import (
    AmbiguousKernel,
    DegenerateCell,
    MissingFrames,
    SolverNoConvergence,
)
from .fd import grid_derivative_matrices, lsq_gradient_matrices

DENSE_LIMIT = 6000


@dataclass
class AssembledOperator:
    """Sparse operator on normal fields plus its quadrature weights."""

    matrix: sp.csr_matrix          # (4n, 4n)
    node_weights: np.ndarray       # (n,)
    domain: object

    @property
    def weights(self):
        """Per-unknown quadrature weights (component-fastest order)."""
        return np.repeat(self.node_weights, 4)


@dataclass
class BoundaryCondition:
    """Pointwise constraint psi|_{dY} in a rank-2 plane of the normal fiber."""

    node_ids: np.ndarray           # (nb,) domain node indices
    basis: np.ndarray              # (nb, 2, 4) orthonormal plane basis
    label: str = ""

    def projectors(self):
        return np.einsum("nak,nal->nkl", self.basis, self.basis)


def cross_matrices(domain=None):
    """4x4 matrices C_a of eta -> e_a x eta on the constant normal frame."""
    cal = algebra.build_calibration()
    c = np.zeros((3, 4, 4))
    for a in range(3):
        for k in range(4):
            v = cal.cross_table[a, 3 + k]     # e_a x eta_k
            c[a, :, k] = v[3:]
    return c


def _require_constant_frames(domain):
    tf = domain.tangent_frame
    nf = domain.normal_frame
    if tf is None or nf is None:
        raise MissingFrames("domain has no frames")
    if not (np.ptp(tf, axis=0).max() < 1e-14 and np.ptp(nf, axis=0).max() < 1e-14):
        raise MissingFrames("operator assembly requires constant frames")


def assemble_D(domain):
    """Assemble the Dirac-type operator on a flat constant-frame domain."""
    _require_constant_frames(domain)
    if domain.kind == "torus_grid":
        grads = grid_derivative_matrices(domain.grid_n)
    else:
        grads = lsq_gradient_matrices(domain)
    c = cross_matrices()
    mat = sum(sp.kron(grads[a], sp.csr_matrix(c[a])) for a in range(3))
    return AssembledOperator(
        matrix=mat.tocsr(), node_weights=domain.node_weights, domain=domain
    )


def assemble_rough_laplacian(domain):
    """The connection Laplacian -sum_a G_a G_a on the constant frame.

    On flat constant-frame domains the formal adjoint composition
    grad* grad reduces to minus the sum of squared directional
    derivatives; discretizing it that way keeps the composition
    pointwise consistent (the periodic grid satisfies G^T = -G exactly,
    so there this coincides with the weighted-adjoint composition).
    """
    _require_constant_frames(domain)
    if domain.kind == "torus_grid":
        grads = grid_derivative_matrices(domain.grid_n)
    else:
        grads = lsq_gradient_matrices(domain)
    lap = -sum(g @ g for g in grads)
    return AssembledOperator(
        matrix=sp.kron(lap, sp.identity(4)).tocsr(),
        node_weights=domain.node_weights,
        domain=domain,
    )


def symbol(xi):
    """Principal symbol: the matrix of s -> s x xi on the normal fiber."""
    cal = algebra.build_calibration()
    xi7 = np.zeros(7)
    xi7[:3] = xi
    m = np.zeros((4, 4))
    for k in range(4):
        eta = np.zeros(7)
        eta[3 + k] = 1.0
        m[:, k] = algebra.cross(eta, xi7, cal)[3:]
    return m


# ---------------------------------------------------------------------------
# boundary conditions and constrained solves


def _constrained_basis(op, bc):
    """Sparse basis of the constrained subspace (elimination, not penalty).

    Interior nodes keep all 4 components; each boundary node contributes
    the 2 columns of the plane basis.
    """
    n = op.domain.n_nodes
    nb = 0 if bc is None else len(bc.node_ids)
    rows, cols, vals = [], [], []
    is_bnd = np.zeros(n, dtype=bool)
    if bc is not None:
        is_bnd[bc.node_ids] = True
    col = 0
    col_node = []
    for i in range(n):
        if not is_bnd[i]:
            for k in range(4):
                rows.append(4 * i + k)
                cols.append(col)
                vals.append(1.0)
                col += 1
                col_node.append(i)
    if bc is not None:
        for j, i in enumerate(bc.node_ids):
            for a in range(2):
                for k in range(4):
                    v = bc.basis[j, a, k]
                    if v != 0.0:
                        rows.append(4 * int(i) + k)
                        cols.append(col)
                        vals.append(float(v))
                col += 1
                col_node.append(int(i))
    z = sp.csr_matrix((vals, (rows, cols)), shape=(4 * n, col))
    return z, np.array(col_node)


def singular_values(op, bc=None, count=12):
    """Smallest singular values (and vectors) of the weighted operator.

    Returns (sigma, vectors) with vectors in the full (4n,) space.  The
    singular values are with respect to the quadrature inner products.
    """
    w = op.weights
    z, col_node = _constrained_basis(op, bc)
    colw = np.repeat(op.node_weights[col_node], 1)
    a = sp.diags(np.sqrt(w)) @ op.matrix @ z @ sp.diags(1.0 / np.sqrt(colw))
    m = a.shape[1]
    if m <= DENSE_LIMIT:
        u, s, vt = np.linalg.svd(a.toarray(), full_matrices=False)
        order = np.argsort(s)[:count]
        sig = s[order]
        vecs = (z @ sp.diags(1.0 / np.sqrt(colw)) @ vt[order].T).T
    else:
        k = a.T @ a
        scale = spla.norm(k, np.inf)
        try:
            vals, vecs_c = spla.eigsh(
                (k + k.T) * 0.5, k=count, sigma=-1e-8 * scale, which="LM"
            )
        except spla.ArpackNoConvergence as exc:
            raise SolverNoConvergence(f"shift-invert eigsh failed: {exc}") from exc
        order = np.argsort(vals)
        sig = np.sqrt(np.maximum(vals[order], 0.0))
        vecs = (z @ sp.diags(1.0 / np.sqrt(colw)) @ vecs_c[:, order]).T
    return sig, vecs


def spectrum(op, bc=None, count=None):
    """Eigenvalues of the closed operator, or singular values under a bc.

    Without a boundary condition the operator is symmetric with respect
    to the quadrature weights and true (signed) eigenvalues are
    returned; with a pointwise boundary condition the constrained
    operator maps between different spaces and the nonnegative spectral
    values are reported instead.
    """
    if bc is None:
        w = op.weights
        sw = np.sqrt(w)
        sym = sp.diags(sw) @ op.matrix @ sp.diags(1.0 / sw)
        m = sym.shape[0]
        if count is None or m <= DENSE_LIMIT:
            vals = np.linalg.eigvalsh(0.5 * (sym + sym.T).toarray())
            if count is not None:
                vals = vals[np.argsort(np.abs(vals))[:count]]
            return np.sort(vals)
        try:
            vals = spla.eigsh(
                0.5 * (sym + sym.T), k=count, sigma=0.0, which="LM",
                return_eigenvectors=False,
            )
        except spla.ArpackNoConvergence as exc:
            raise SolverNoConvergence(f"shift-invert eigsh failed: {exc}") from exc
        return np.sort(vals)
    sig, _ = singular_values(op, bc, count=count or 12)
    return sig


def kernel_dim(op, bc=None, abs_tol=None, gap_ratio=50.0, count=16):
    """Numerical kernel dimension with an explicit spectral-gap check.

    dim = number of singular values below abs_tol, accepted only if
    sigma_{dim+1} / sigma_dim exceeds gap_ratio.  Returns (dim, gap).
    """
    if abs_tol is None:
        abs_tol = 1e-6 * spla.norm(op.matrix, np.inf)
    sig, _ = singular_values(op, bc, count=count)
    dim = int(np.sum(sig < abs_tol))
    if dim == 0:
        return 0, float(sig[0] / abs_tol)
    if dim >= len(sig):
        raise AmbiguousKernel(
            f"all {len(sig)} computed singular values below tolerance",
            candidates=[dim],
        )
    lo = sig[dim - 1]
    gap = np.inf if lo == 0.0 else float(sig[dim] / lo)
    if gap <= gap_ratio:
        raise AmbiguousKernel(
            f"no clear spectral gap: sigma_{dim}={lo:.3e}, "
            f"sigma_{dim + 1}={sig[dim]:.3e}",
            candidates=[dim - 1, dim],
        )
    return dim, gap


def kernel_vectors(op, bc=None, abs_tol=None, gap_ratio=50.0, count=16):
    """Kernel basis as (dim, n, 4) fields, after the gap check."""
    if abs_tol is None:
        abs_tol = 1e-6 * spla.norm(op.matrix, np.inf)
    dim, _ = kernel_dim(op, bc, abs_tol=abs_tol, gap_ratio=gap_ratio, count=count)
    _, vecs = singular_values(op, bc, count=max(dim, 1))
    n = op.domain.n_nodes
    return vecs[:dim].reshape(dim, n, 4)


def fourier_oracle(n):
    """Exact spectrum of the closed torus operator, mode by mode.

    For each discrete momentum k the symbol of the central difference is
    s_h(k)_j = sin(2 pi k_j h) / h and the 4x4 fiber matrix has
    eigenvalues +-|s_h(k)|, each twice.
    """
    h = 1.0 / n
    vals = []
    for k1 in range(n):
        for k2 in range(n):
            for k3 in range(n):
                s = np.array(
                    [np.sin(2 * np.pi * k * h) / h for k in (k1, k2, k3)]
                )
                r = np.linalg.norm(s)
                vals.extend([r, r, -r, -r])
    return np.sort(np.array(vals))


# ---------------------------------------------------------------------------
# identity residuals


def _norm(field, weights):
    return float(np.sqrt(np.einsum("nk,nk,n->", field, field, weights)))


def _interior_mask(domain, depth=2):
    n = domain.n_nodes
    mask = np.ones(n, dtype=bool)
    if domain.boundary is None:
        return mask
    frontier = set(int(i) for i in domain.boundary.node_ids)
    banned = set(frontier)
    nbrs = domain.neighbor_lists()
    for _ in range(depth - 1):
        frontier = {int(j) for i in frontier for j in nbrs[i]} - banned
        banned |= frontier
    mask[list(banned)] = False
    return mask


def weitzenboeck_residual(domain, psi, r_nu=None):
    """Relative residual of D^2 psi = (grad* grad + R - A) psi.

    On the flat torus both sides reduce to the same commuting difference
    operators and the residual is machine precision; on the ball the
    comparison is restricted to interior nodes (two rings away from the
    boundary) where it is O(h).
    """
    op = assemble_D(domain)
    lap = assemble_rough_laplacian(domain)
    x = psi.reshape(-1)
    lhs = op.matrix @ (op.matrix @ x)
    rhs = lap.matrix @ x
    if r_nu is not None:
        rhs += np.einsum("nkl,nl->nk", r_nu, psi).reshape(-1)
    diff = (lhs - rhs).reshape(-1, 4)
    mask = _interior_mask(domain)
    w = domain.node_weights * mask
    return _norm(diff, w) / _norm(psi, w)


def adjointness_residual(domain, s, s2):
    """Residual of the boundary self-adjointness identity.

    | int <Ds, s'> - <s, Ds'> dy  +  int_{dY} <n x s, s'> dsigma |
    with the discrete quadratures of the domain.
    """
    op = assemble_D(domain)
    ds = (op.matrix @ s.reshape(-1)).reshape(-1, 4)
    ds2 = (op.matrix @ s2.reshape(-1)).reshape(-1, 4)
    w = domain.node_weights
    vol = float(np.einsum("nk,nk,n->", ds, s2, w) - np.einsum("nk,nk,n->", s, ds2, w))
    if domain.boundary is None:
        return abs(vol)
    surf = domain.boundary
    cal = algebra.build_calibration()
    bsum = 0.0
    for j, i in enumerate(surf.node_ids):
        amb_s = domain.normal_frame[i].T @ s[i]
        amb_s2 = domain.normal_frame[i].T @ s2[i]
        nxs = algebra.cross(surf.inner_normal[j], amb_s, cal)
        bsum += surf.node_weights[j] * float(np.dot(nxs, amb_s2))
    return abs(vol + bsum)


def bochner_boundary_residual(domain, psi, dl_quadratic_form, r_nu=None):
    """Residual of the three-term boundary Bochner identity for a kernel field.

    int |grad psi|^2 + int <R_nu psi, psi> + int_{dY} <DL psi, psi> = 0,
    where the last term is supplied as per-boundary-node quadratic form
    values (from the boundary operator module).
    """
    if domain.kind == "torus_grid":
        grads = grid_derivative_matrices(domain.grid_n)
    else:
        grads = lsq_gradient_matrices(domain)
    w = domain.node_weights
    grad_sq = 0.0
    for g in grads:
        d = np.stack([g @ psi[:, k] for k in range(4)], axis=1)
        grad_sq += np.einsum("nk,nk,n->", d, d, w)
    curv = 0.0
    if r_nu is not None:
        curv = float(np.einsum("nkl,nl,nk,n->", r_nu, psi, psi, w))
    surf = domain.boundary
    bterm = float(np.dot(surf.node_weights, dl_quadratic_form))
    return abs(grad_sq + curv + bterm)


# ---------------------------------------------------------------------------
# nonlinear defect and its linearization


def evaluate_F(domain, displacement=None):
    """Pointwise associativity defect of a (possibly displaced) embedding.

    Tangent triples come from the least-squares derivatives of the
    embedding coordinates; the defect at a node is
    chi(t1, t2, t3) / |t1 ^ t2 ^ t3|, which vanishes iff the discrete
    tangent plane is associative.
    """
    cal = algebra.build_calibration()
    if domain.kind == "torus_grid":
        grads = grid_derivative_matrices(domain.grid_n)
    else:
        grads = lsq_gradient_matrices(domain)
    # Differentiate the displacement, not the raw coordinates: the base
    # tangent frame is exact and the grid coordinates are not periodic.
    t = domain.tangent_frame.copy()                      # (n, 3, 7)
    if displacement is not None:
        t = t + np.stack([g @ displacement for g in grads], axis=1)
    gram = np.einsum("nac,nbc->nab", t, t)
    vol = np.sqrt(np.maximum(np.linalg.det(gram), 0.0))
    if np.any(vol < 1e-10):
        raise DegenerateCell("near-dependent tangent triple")
    defect = np.einsum(
        "ijkl,ni,nj,nk->nl", cal.star_phi, t[:, 0], t[:, 1], t[:, 2]
    )
    return defect / vol[:, None]


def linearization_error(domain, psi, steps=None):
    """Best relative mismatch of (F(f_eps) - F(f_-eps)) / 2 eps against D psi.

    psi is a normal field in frame coordinates; the sweep returns the
    minimum over the step sizes (the optimum balances truncation against
    roundoff).
    """
    op = assemble_D(domain)
    dpsi = (op.matrix @ psi.reshape(-1)).reshape(-1, 4)
    dpsi_amb = np.einsum("nk,nkc->nc", dpsi, domain.normal_frame)
    disp = np.einsum("nk,nkc->nc", psi, domain.normal_frame)
    if steps is None:
        steps = np.logspace(-7, -2, 11)
    scale = np.linalg.norm(dpsi_amb)
    best = np.inf
    for eps in steps:
        fd = (evaluate_F(domain, eps * disp) - evaluate_F(domain, -eps * disp)) / (
            2 * eps
        )
        best = min(best, float(np.linalg.norm(fd - dpsi_amb) / scale))
    return best
