"""Discrete exterior calculus for the product-model operator on 3-manifolds.

The first-order operator (alpha, tau) -> (-*d alpha - d tau, *d* alpha)
mixes a 1-form and a function.  On a simplicial 3-complex it maps the
staggered pair (primal 1-cochains, dual 0-cochains) to (dual 1-cochains,
primal 0-cochains); both sides have dimension E + T = F + V on a closed
3-manifold, and with barycentric Hodge stars the square is exactly minus
a Hodge Laplacian, block-diagonally.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import AmbiguousKernel, DegenerateCell, NonClosedSurface


@dataclass
class DECComplex:
    """Simplicial 3-complex with incidence matrices and diagonal stars."""

    vertices: np.ndarray       # (V, dim) coordinates
    edges: np.ndarray          # (E, 2) increasing vertex pairs
    faces: np.ndarray          # (F, 3) increasing vertex triples
    tets: np.ndarray           # (T, 4) consistently oriented
    d0: sp.csr_matrix          # (E, V)
    d1: sp.csr_matrix          # (F, E)
    d2: sp.csr_matrix          # (T, F)
    star0: np.ndarray          # (V,)  |dual cell|
    star1: np.ndarray          # (E,)  |dual face| / |edge|
    star2: np.ndarray          # (F,)  |dual edge| / |face|
    star3: np.ndarray          # (T,)  1 / |tet|
    periodic: bool = False

    @property
    def n_unknowns(self):
        return len(self.edges) + len(self.tets)


def _perm_parity(seq):
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _face_sign(tet, omit):
    """Coefficient of the sorted omitted-vertex face in the tet boundary."""
    face = [tet[k] for k in range(4) if k != omit]
    return (-1) ** omit * _perm_parity(face)


def _orient_tets_consistently(tets):
    """Flip tets so every interior face gets opposite induced orientations."""
    tets = [list(t) for t in tets]
    face_map = {}
    for ti, t in enumerate(tets):
        for omit in range(4):
            key = tuple(sorted(t[k] for k in range(4) if k != omit))
            face_map.setdefault(key, []).append(ti)
    if any(len(v) != 2 for v in face_map.values()):
        raise NonClosedSurface("complex is not a closed 3-manifold")
    adjacency = [[] for _ in tets]
    for key, (a, b) in face_map.items():
        adjacency[a].append((b, key))
        adjacency[b].append((a, key))

    def sign_on(ti, key):
        t = tets[ti]
        omit = next(k for k in range(4) if t[k] not in key)
        return _face_sign(t, omit)

    seen = np.zeros(len(tets), dtype=bool)
    seen[0] = True
    queue = [0]
    while queue:
        ti = queue.pop()
        for tj, key in adjacency[ti]:
            if seen[tj]:
                continue
            if sign_on(ti, key) == sign_on(tj, key):
                tets[tj][2], tets[tj][3] = tets[tj][3], tets[tj][2]
            seen[tj] = True
            queue.append(tj)
    if not seen.all():
        raise NonClosedSurface("tet complex is not connected")
    return np.array(tets, dtype=int)


def _minimal_image(diff, periodic):
    if not periodic:
        return diff
    return (diff + 0.5) % 1.0 - 0.5


def _tet_positions(verts, tet, periodic):
    """Vertex positions of one tet, unwrapped around its first vertex."""
    p0 = verts[tet[0]]
    return p0 + np.array(
        [_minimal_image(verts[v] - p0, periodic) for v in tet]
    )


def _simplex_volume(pts):
    """k-volume of a simplex from the Gram determinant of its edges."""
    d = pts[1:] - pts[0]
    g = d @ d.T
    det = np.linalg.det(g)
    k = len(pts) - 1
    return np.sqrt(max(det, 0.0)) / math.factorial(k)


def build_dec(vertices, tets, periodic=False):
    """Assemble the complex: incidences, orientations, barycentric stars."""
    vertices = np.asarray(vertices, dtype=float)
    tets = _orient_tets_consistently(np.asarray(tets, dtype=int))

    edge_set, face_set = set(), set()
    for t in tets:
        s = sorted(int(x) for x in t)
        for i in range(4):
            for j in range(i + 1, 4):
                edge_set.add((s[i], s[j]))
        for omit in range(4):
            face_set.add(tuple(x for k, x in enumerate(s) if k != omit))
    edges = np.array(sorted(edge_set), dtype=int)
    faces = np.array(sorted(face_set), dtype=int)
    e_index = {tuple(e): i for i, e in enumerate(edges)}
    f_index = {tuple(f): i for i, f in enumerate(faces)}

    nv, ne, nf, nt = len(vertices), len(edges), len(faces), len(tets)
    d0 = sp.csr_matrix(
        (
            [x for _ in edges for x in (-1.0, 1.0)],
            (
                [i for i in range(ne) for _ in range(2)],
                [int(v) for e in edges for v in e],
            ),
        ),
        shape=(ne, nv),
    )
    rows, cols, vals = [], [], []
    for fi, (a, b, c) in enumerate(faces):
        for verts_e, sgn in (((b, c), 1.0), ((a, c), -1.0), ((a, b), 1.0)):
            rows.append(fi)
            cols.append(e_index[verts_e])
            vals.append(sgn)
    d1 = sp.csr_matrix((vals, (rows, cols)), shape=(nf, ne))
    rows, cols, vals = [], [], []
    for ti, t in enumerate(tets):
        for omit in range(4):
            key = tuple(sorted(int(t[k]) for k in range(4) if k != omit))
            rows.append(ti)
            cols.append(f_index[key])
            vals.append(float(_face_sign(list(t), omit)))
    d2 = sp.csr_matrix((vals, (rows, cols)), shape=(nt, nf))

    # barycentric dual volumes, accumulated tet by tet
    star0 = np.zeros(nv)
    dual_face_area = np.zeros(ne)      # |dual polygon piece| per edge
    dual_edge_len = np.zeros(nf)       # barycenter-to-barycenter distances
    tet_vol = np.zeros(nt)
    edge_len = np.array(
        [
            np.linalg.norm(
                _minimal_image(vertices[b] - vertices[a], periodic)
            )
            for a, b in edges
        ]
    )
    face_area = np.zeros(nf)
    for ti, t in enumerate(tets):
        pts = _tet_positions(vertices, t, periodic)
        vol = _simplex_volume(pts)
        if vol <= 0.0:
            raise DegenerateCell(f"tet {ti} has zero volume")
        tet_vol[ti] = vol
        bt = pts.mean(axis=0)
        local = {int(v): pts[k] for k, v in enumerate(t)}
        for v in t:
            star0[int(v)] += vol / 4.0
        for omit in range(4):
            tri = [int(t[k]) for k in range(4) if k != omit]
            key = tuple(sorted(tri))
            fi = f_index[key]
            p = np.array([local[v] for v in sorted(tri)])
            bf = p.mean(axis=0)
            dual_edge_len[fi] += np.linalg.norm(bt - bf)
            if face_area[fi] == 0.0:
                face_area[fi] = _simplex_volume(p)
        for i in range(4):
            for j in range(i + 1, 4):
                a, b = sorted((int(t[i]), int(t[j])))
                ei = e_index[(a, b)]
                mid = 0.5 * (local[a] + local[b])
                # the two faces of this tet containing the edge
                for omit in range(4):
                    if int(t[omit]) in (a, b):
                        continue
                    tri = [int(t[k]) for k in range(4) if k != omit]
                    bf = np.mean([local[v] for v in tri], axis=0)
                    dual_face_area[ei] += _simplex_volume(
                        np.array([mid, bf, bt])
                    )
    return DECComplex(
        vertices=vertices,
        edges=edges,
        faces=faces,
        tets=tets,
        d0=d0,
        d1=d1,
        d2=d2,
        star0=star0,
        star1=dual_face_area / edge_len,
        star2=dual_edge_len / face_area,
        star3=1.0 / tet_vol,
        periodic=periodic,
    )


# ---------------------------------------------------------------------------
# fixtures


def build_torus_dec(n):
    """Flat T^3: the periodic n^3 grid, each cube split into six tets."""
    if n < 4:
        raise DegenerateCell("periodic minimal image needs n >= 4")
    idx = lambda i, j, k: ((i % n) * n + (j % n)) * n + (k % n)
    coords = np.array(
        [[i / n, j / n, k / n] for i in range(n) for j in range(n) for k in range(n)]
    )
    from itertools import permutations

    steps = np.eye(3, dtype=int)
    tets = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                base = np.array([i, j, k])
                for perm in permutations(range(3)):
                    chain = [base]
                    for a in perm:
                        chain.append(chain[-1] + steps[a])
                    tets.append([idx(*p) for p in chain])
    return build_dec(coords, tets, periodic=True)


def build_sphere3_dec(refinement=2):
    """Round S^3 via the refined boundary of the 4-dim cross-polytope."""
    from .meshes import build_sphere3_mesh

    dom = build_sphere3_mesh(refinement=refinement)
    return build_dec(dom.nodes[:, :4], dom.cells)


def build_s1xs2_dec(n_circle=12, refine=1):
    """S^1 x S^2 embedded in R^5: icosahedral sphere times a polygon.

    Each prism (triangle x segment) is split into three tets using the
    global vertex order, which makes neighboring prisms agree.
    """
    from .meshes import _icosahedron_vertices

    sphere = _icosahedron_vertices()
    d = np.linalg.norm(sphere[:, None] - sphere[None, :], axis=-1)
    edge = np.min(d[d > 1e-9])
    tris = []
    nv = len(sphere)
    for a in range(nv):
        for b in range(a + 1, nv):
            for c in range(b + 1, nv):
                if max(d[a, b], d[a, c], d[b, c]) < edge * 1.1:
                    tris.append((a, b, c))
    for _ in range(refine):
        sphere, tris = _refine_surface(sphere, tris)
    nv = len(sphere)
    vid = lambda s, lev: (lev % n_circle) * nv + s
    coords = []
    for lev in range(n_circle):
        th = 2.0 * np.pi * lev / n_circle
        ring = np.column_stack(
            [
                sphere,
                np.full(nv, np.cos(th)),
                np.full(nv, np.sin(th)),
            ]
        )
        coords.append(ring)
    coords = np.vstack(coords)
    tets = []
    for lev in range(n_circle):
        for tri in tris:
            a, b, c = sorted(tri)
            a0, b0, c0 = vid(a, lev), vid(b, lev), vid(c, lev)
            a1, b1, c1 = vid(a, lev + 1), vid(b, lev + 1), vid(c, lev + 1)
            tets.extend(
                [[a0, b0, c0, c1], [a0, b0, b1, c1], [a0, a1, b1, c1]]
            )
    return build_dec(coords, tets)


def _refine_surface(verts, tris):
    """One loop-style split of a sphere triangulation, reprojected."""
    verts = list(map(np.asarray, verts))
    mid_cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in mid_cache:
            m = 0.5 * (verts[a] + verts[b])
            m = m / np.linalg.norm(m)
            mid_cache[key] = len(verts)
            verts.append(m)
        return mid_cache[key]

    out = []
    for a, b, c in tris:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(verts), out


# ---------------------------------------------------------------------------
# the operator


def assemble_Dvee(dec):
    """The staggered pair (A, B) of the first-order operator.

    A maps (primal 1-cochains, dual 0-cochains) to (dual 1-cochains,
    primal 0-cochains); B is the same operator on the swapped staggering
    and equals minus the metric adjoint of A, so BA and AB are minus
    block Hodge Laplacians as exact matrix identities.
    """
    s0 = sp.diags(dec.star0)
    s1 = sp.diags(dec.star1)
    s2 = sp.diags(dec.star2)
    s3 = sp.diags(dec.star3)
    s0i = sp.diags(1.0 / dec.star0)
    s1i = sp.diags(1.0 / dec.star1)
    s2i = sp.diags(1.0 / dec.star2)
    a = sp.bmat(
        [
            [-s2 @ dec.d1, -dec.d2.T],
            [s0i @ dec.d0.T @ s1, None],
        ],
        format="csr",
    )
    b = sp.bmat(
        [
            [s1i @ dec.d1.T, -dec.d0],
            [s3 @ dec.d2 @ s2i, None],
        ],
        format="csr",
    )
    return a, b


def metric_weights(dec):
    """Diagonal inner-product weights of the two staggered spaces."""
    m_u = np.concatenate([dec.star1, 1.0 / dec.star3])
    m_v = np.concatenate([1.0 / dec.star2, dec.star0])
    return m_u, m_v


def dvee_square_vs_laplacian(dec):
    """Max relative residual of the square and adjointness identities.

    Checks BA = -diag(Delta_1, Delta_0-dual), AB = -diag(Delta_1-dual,
    Delta_0), and M_V A = -(M_U B)^T, with the Laplacian blocks
    assembled independently from the codifferential formulas.
    """
    a, b = assemble_Dvee(dec)
    s0 = sp.diags(dec.star0)
    s1 = sp.diags(dec.star1)
    s2 = sp.diags(dec.star2)
    s3 = sp.diags(dec.star3)
    s0i = sp.diags(1.0 / dec.star0)
    s1i = sp.diags(1.0 / dec.star1)
    s2i = sp.diags(1.0 / dec.star2)
    lap1 = s1i @ dec.d1.T @ s2 @ dec.d1 + dec.d0 @ s0i @ dec.d0.T @ s1
    lap0d = s3 @ dec.d2 @ s2i @ dec.d2.T
    lap1d = s2 @ dec.d1 @ s1i @ dec.d1.T + dec.d2.T @ s3 @ dec.d2 @ s2i
    lap0 = s0i @ dec.d0.T @ s1 @ dec.d0

    def relmax(m, ref):
        scale = abs(ref).max()
        return abs(m).max() / scale

    ba = (b @ a).tocsr()
    ab = (a @ b).tocsr()
    zero_blk = sp.block_diag([lap1, lap0d])
    res = relmax((ba + zero_blk).tocsr(), ba)
    res = max(res, relmax((ab + sp.block_diag([lap1d, lap0])).tocsr(), ab))
    m_u, m_v = metric_weights(dec)
    adj = sp.diags(m_v) @ a + (sp.diags(m_u) @ b).T
    res = max(res, relmax(adj.tocsr(), (sp.diags(m_v) @ a).tocsr()))
    return res


def betti(dec):
    """(b0, b1) by ranks of the incidence matrices (independent oracle)."""
    rank_d0 = np.linalg.matrix_rank(dec.d0.toarray())
    rank_d1 = np.linalg.matrix_rank(dec.d1.toarray())
    b0 = dec.vertices.shape[0] - rank_d0
    b1 = len(dec.edges) - rank_d1 - rank_d0
    return int(b0), int(b1)


def cy_kernel_dim(dec, abs_tol=None, gap_ratio=50.0, count=12):
    """Kernel dimension of the staggered operator, with a gap check.

    Returns (dim, gap, vectors); singular values are taken with respect
    to the Hodge inner products on both sides.
    """
    a, _ = assemble_Dvee(dec)
    m_u, m_v = metric_weights(dec)
    at = sp.diags(np.sqrt(m_v)) @ a @ sp.diags(1.0 / np.sqrt(m_u))
    sig, vt = _smallest_singular(at, count)
    if abs_tol is None:
        abs_tol = 1e-8 * sp.linalg.norm(a, np.inf)
    dim = int(np.sum(sig < abs_tol))
    if dim >= len(sig):
        raise AmbiguousKernel("all computed singular values tiny", [dim])
    gap = np.inf if dim == 0 or sig[dim - 1] == 0 else sig[dim] / sig[dim - 1]
    if dim > 0 and gap <= gap_ratio:
        raise AmbiguousKernel(
            f"no clear spectral gap at dimension {dim}", [dim - 1, dim]
        )
    vectors = (sp.diags(1.0 / np.sqrt(m_u)) @ vt[:dim].T).T
    return dim, float(gap), vectors


def _smallest_singular(mat, count):
    m = mat.shape[0]
    if m <= 6000:
        _, s, vt = np.linalg.svd(mat.toarray(), full_matrices=False)
        order = np.argsort(s)[:count]
        return s[order], vt[order]
    k = (mat.T @ mat).tocsc()
    scale = sp.linalg.norm(k, np.inf)
    vals, vecs = sp.linalg.eigsh(k, k=count, sigma=-1e-8 * scale, which="LM")
    order = np.argsort(vals)
    return np.sqrt(np.maximum(vals[order], 0.0)), vecs[:, order].T


def kernel_decomposition_residual(dec, vectors):
    """How far kernel vectors are from harmonic-1-form + constant pairs.

    For each (alpha, tau): checks d1 alpha = 0, delta1 alpha = 0 and
    d tau = 0 (tau constant), relative to the vector norm.
    """
    ne = len(dec.edges)
    s0i = sp.diags(1.0 / dec.star0)
    s1 = sp.diags(dec.star1)
    worst = 0.0
    for vec in vectors:
        alpha, tau = vec[:ne], vec[ne:]
        scale = np.linalg.norm(vec)
        r = max(
            np.abs(dec.d1 @ alpha).max(),
            np.abs(s0i @ dec.d0.T @ s1 @ alpha).max(),
            np.abs(dec.d2.T @ tau).max(),
        )
        worst = max(worst, r / scale)
    return worst
