"""Second fundamental form and the Simons curvature operators.

The ambient space is always flat here, so the partial Ricci operator of
the ambient curvature vanishes identically; it is still carried as an
explicit (zero) field so the operator structure matches the curved
theory.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MissingFrames
from .fd import lsq_gradient_matrices


@dataclass
class ShapeField:
    """Per node, per normal direction, a symmetric 3x3 Weingarten matrix."""

    a_matrices: np.ndarray     # (n, 4, 3, 3)
    asymmetry: float           # max |A - A^T| before symmetrization


@dataclass
class SimonsField:
    """The 0th-order operators entering the Bochner identity."""

    r_op: np.ndarray           # (n, 4, 4) partial ambient Ricci (zero, flat)
    a_op: np.ndarray           # (n, 4, 4)  A^t A in the normal frame
    r_nu: np.ndarray           # (n, 4, 4)  r_op - a_op
    min_eig_r_nu: np.ndarray   # (n,)


def second_fundamental_form(domain):
    """Assemble A_{eta_k} by differentiating the normal frame field.

    A_{eta}(u) = -(grad_u eta)^T projected to the tangent space, fitted
    over node 1-rings and symmetrized.
    """
    if domain.tangent_frame is None or domain.normal_frame is None:
        raise MissingFrames("domain has no frames")
    g = lsq_gradient_matrices(domain)
    n = domain.n_nodes
    a = np.zeros((n, 4, 3, 3))
    asym = 0.0
    for k in range(4):
        eta = domain.normal_frame[:, k, :]          # (n, 7) smooth field
        deriv = np.stack([g[b] @ eta for b in range(3)], axis=1)  # (n, 3, 7)
        # A[a, b] = -<grad_{t_a} eta, t_b>
        mat = -np.einsum("nac,nbc->nab", deriv, domain.tangent_frame)
        asym = max(asym, float(np.abs(mat - mat.transpose(0, 2, 1)).max()))
        a[:, k] = 0.5 * (mat + mat.transpose(0, 2, 1))
    return ShapeField(a_matrices=a, asymmetry=asym)


def simons_operators(domain, shape):
    """Build R (zero in flat ambient), the A^t A operator and their difference."""
    a = shape.a_matrices
    n = domain.n_nodes
    a_op = np.einsum("nkab,nlab->nkl", a, a)        # trace(A_k A_l)
    r_op = np.zeros((n, 4, 4))
    r_nu = r_op - a_op
    min_eig = np.array([np.linalg.eigvalsh(m)[0] for m in r_nu])
    return SimonsField(r_op=r_op, a_op=a_op, r_nu=r_nu, min_eig_r_nu=min_eig)


def minimality_defect(domain):
    """Max norm of the discrete mean-curvature vector sum_a (grad_a t_a)^perp.

    Associative submanifolds are minimal; on the flat constant-frame
    domains this is exactly zero.
    """
    g = lsq_gradient_matrices(domain)
    total = np.zeros((domain.n_nodes, 7))
    for a in range(3):
        total += g[a] @ domain.tangent_frame[:, a, :]
    # project to the normal bundle
    coeff = np.einsum("nc,nkc->nk", total, domain.normal_frame)
    perp = np.einsum("nk,nkc->nc", coeff, domain.normal_frame)
    return float(np.linalg.norm(perp, axis=1).max())
