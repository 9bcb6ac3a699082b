"""Exact calibration algebra on R^7.

The fixed convention for the calibration 3-form is

    phi = e123 + e145 + e167 + e246 - e257 - e347 - e356,

which makes span(e1,e2,e3) an associative plane and span(e4..e7) a
coassociative one.  Everything else (the 4-form dual, the cross product
table, the associator) is derived from this table and the orientation
e1^...^e7 = +1.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .errors import DegenerateBasis

# Nonzero coefficients of phi on increasing index triples (0-based).
PHI_TERMS = (
    ((0, 1, 2), 1.0),
    ((0, 3, 4), 1.0),
    ((0, 5, 6), 1.0),
    ((1, 3, 5), 1.0),
    ((1, 4, 6), -1.0),
    ((2, 3, 6), -1.0),
    ((2, 4, 5), -1.0),
)


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class CalibrationAlgebra:
    """phi, its Hodge dual and the derived 7x7 cross product table."""

    phi: np.ndarray        # (7,7,7), totally antisymmetric
    star_phi: np.ndarray   # (7,7,7,7), totally antisymmetric
    cross_table: np.ndarray  # (7,7,7): cross_table[i,j] = e_i x e_j


@lru_cache(maxsize=1)
def build_calibration():
    """Build the fixed-convention calibration algebra (deterministic)."""
    phi = np.zeros((7, 7, 7))
    for (i, j, k), c in PHI_TERMS:
        for p in permutations((i, j, k)):
            phi[p] = c * _perm_sign(p)

    # Hodge dual wrt the Euclidean metric and orientation e1^...^e7 = +1:
    # *(e^S) = sign(S, S^c) e^{S^c} for each increasing triple S.
    star = np.zeros((7, 7, 7, 7))
    for s in combinations(range(7), 3):
        c = phi[s]
        if c == 0.0:
            continue
        comp = tuple(a for a in range(7) if a not in s)
        sign = _perm_sign(s + comp)
        for p in permutations(comp):
            star[p] = c * sign * _perm_sign(p)

    cross_table = phi.copy()  # cross_table[i, j, :] = e_i x e_j
    return CalibrationAlgebra(phi=phi, star_phi=star, cross_table=cross_table)


def phi_form(u, v, w, cal=None):
    """phi(u, v, w)."""
    cal = cal or build_calibration()
    return float(np.einsum("ijk,i,j,k->", cal.phi, u, v, w))


def cross(u, v, cal=None):
    """Seven-dimensional cross product, <u x v, w> = phi(u, v, w)."""
    cal = cal or build_calibration()
    return np.einsum("ijk,i,j->k", cal.phi, u, v)


def chi(u, v, w, cal=None):
    """Associator, defined by <chi(u,v,w), eta> = *phi(u,v,w,eta).

    Vanishes exactly on associative 3-planes; the output is orthogonal
    to span(u, v, w).
    """
    cal = cal or build_calibration()
    return np.einsum("ijkl,i,j,k->l", cal.star_phi, u, v, w)


def chi_bracket(u, v, w, cal=None):
    """Algebraic expression for the associator, used as a test oracle.

    chi(u,v,w) = -u x (v x w) - <u,v> w + <u,w> v.
    """
    cal = cal or build_calibration()
    return -cross(u, cross(v, w, cal), cal) - np.dot(u, v) * w + np.dot(u, w) * v


def classify_plane(basis, kind, cal=None, tol=1e-10):
    """Classify a 3- or 4-plane as associative / coassociative.

    Returns (flag, residual).  Raises DegenerateBasis if the supplied
    vectors are numerically dependent.
    """
    cal = cal or build_calibration()
    b = np.asarray(basis, dtype=float)
    expected = {"associative3": 3, "coassociative4": 4}[kind]
    if b.shape != (expected, 7):
        raise ValueError(f"expected {expected} vectors in R^7, got shape {b.shape}")
    gram = b @ b.T
    if abs(np.linalg.det(gram)) < 1e-12:
        raise DegenerateBasis("plane basis numerically dependent")
    # Orthonormalize; QR of the transpose gives an orthonormal spanning set.
    q, _ = np.linalg.qr(b.T)
    q = q.T
    if kind == "associative3":
        residual = float(np.linalg.norm(chi(q[0], q[1], q[2], cal)))
    else:
        residual = max(
            abs(phi_form(q[i], q[j], q[k], cal))
            for i, j, k in combinations(range(4), 3)
        )
    return residual < tol, residual


def basis_vector(i):
    """Standard basis vector e_{i+1} of R^7 (0-based index)."""
    e = np.zeros(7)
    e[i] = 1.0
    return e
