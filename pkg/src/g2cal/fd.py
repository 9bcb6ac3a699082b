"""Discrete differentiation helpers.

Periodic grids use central differences; tetrahedral meshes use weighted
least-squares fits over node 1-rings, which gives one code path for both
the ball and the curved sphere fixture.
"""

import numpy as np
import scipy.sparse as sp


def periodic_shift(n, offset):
    """Sparse N^3 x N^3 shift matrix along one axis of the cubic grid."""
    rows = np.arange(n)
    cols = (rows + offset) % n
    s = sp.csr_matrix((np.ones(n), (rows, cols)), shape=(n, n))
    return s


def grid_derivative_matrices(n):
    """Central-difference d/dx_a (a = 0,1,2) on the periodic N^3 grid.

    Node ordering matches build_torus_grid (index = (i*n + j)*n + k).
    """
    h = 1.0 / n
    eye = sp.identity(n, format="csr")
    d1 = (periodic_shift(n, 1) - periodic_shift(n, -1)) / (2.0 * h)
    return [
        sp.kron(sp.kron(d1, eye), eye, format="csr"),
        sp.kron(sp.kron(eye, d1), eye, format="csr"),
        sp.kron(sp.kron(eye, eye), d1, format="csr"),
    ]


def lsq_gradient_matrices(domain, min_neighbors=12):
    """Directional-derivative matrices along the tangent frame directions.

    Returns three sparse (n, n) matrices G_a with (G_a f)(i) the
    least-squares estimate of the derivative of f along
    tangent_frame[i, a].  The fit uses a full quadratic model (gradient
    plus Hessian), growing the stencil ring until it is well determined,
    so the matrices are exact on quadratic fields.  That exactness is
    what makes compositions such as G_a G_b consistent.
    """
    if domain.kind == "torus_grid":
        return grid_derivative_matrices(domain.grid_n)
    nbrs = domain.neighbor_lists()
    n = domain.n_nodes
    rows, cols, vals = [[], [], []], [[], [], []], [[], [], []]
    for i in range(n):
        ring = set(nbrs[i])
        while len(ring) < min_neighbors:
            ring |= {k for j in ring for k in nbrs[j]} - {i}
        js = sorted(ring)
        d = domain.nodes[js] - domain.nodes[i]
        scale = np.sqrt(np.einsum("jk,jk->j", d, d).mean())
        x = np.einsum("jk,ak->ja", d, domain.tangent_frame[i]) / scale  # (m, 3)
        # columns: x1 x2 x3, x1^2/2 x2^2/2 x3^2/2, x1x2 x1x3 x2x3
        phi = np.column_stack([
            x[:, 0], x[:, 1], x[:, 2],
            0.5 * x[:, 0] ** 2, 0.5 * x[:, 1] ** 2, 0.5 * x[:, 2] ** 2,
            x[:, 0] * x[:, 1], x[:, 0] * x[:, 2], x[:, 1] * x[:, 2],
        ])
        w = 1.0 / np.einsum("ja,ja->j", x, x)
        pw = phi * w[:, None]
        coef = np.linalg.solve(phi.T @ pw, pw.T)[:3] / scale     # (3, m)
        for a in range(3):
            rows[a].extend([i] * (len(js) + 1))
            cols[a].extend(list(js) + [i])
            vals[a].extend(list(coef[a]) + [-coef[a].sum()])
    return [
        sp.csr_matrix((vals[a], (rows[a], cols[a])), shape=(n, n))
        for a in range(3)
    ]
