"""Discretized flat model domains embedded in R^7.

Two families are built here: the periodic 3-torus grid sitting in the
first three coordinates, and tetrahedral meshes (a convex ball in
R^3 x {0}, and a round 3-sphere in span(e1..e4) used as the curved test
fixture).  Boundary surfaces carry frames (n, v, w = n x v) and
discrete principal curvatures obtained from local quadric fits.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .errors import (
    InvalidResolution,
    MeshQualityError,
    NonClosedSurface,
)

# ---------------------------------------------------------------------------
# data containers


@dataclass
class SurfaceMesh:
    """Closed triangulated surface, optionally with boundary frames.

    node_ids index into the parent domain's node array; triangles are
    triples of *domain* node ids, oriented so the normal points out of
    the enclosed volume.
    """

    node_ids: np.ndarray          # (nb,) domain node indices
    triangles: np.ndarray         # (nt, 3) domain node indices, outward
    positions: np.ndarray         # (nb, 7)
    inner_normal: np.ndarray = None   # (nb, 7) unit, tangent to Y, into Y
    v_dir: np.ndarray = None          # (nb, 7) characteristic direction
    w_dir: np.ndarray = None          # (nb, 7) w = n x v
    k_v: np.ndarray = None            # (nb,)
    k_w: np.ndarray = None            # (nb,)
    node_weights: np.ndarray = None   # (nb,) area weights

    @property
    def mean_curvature(self):
        return 0.5 * (self.k_v + self.k_w)

    def local_index(self):
        """Map domain node id -> surface-local index."""
        return {int(g): i for i, g in enumerate(self.node_ids)}


@dataclass
class Domain:
    """A discretized 3-manifold embedded in R^7 with frames."""

    kind: str                     # "torus_grid" | "ball" | "sphere3"
    nodes: np.ndarray             # (n, 7)
    cells: np.ndarray = None      # (nt, 4) tetrahedra, or None for grids
    grid_n: int = None            # torus grid resolution
    tangent_frame: np.ndarray = None   # (n, 3, 7)
    normal_frame: np.ndarray = None    # (n, 4, 7)
    boundary: SurfaceMesh = None
    node_weights: np.ndarray = None    # (n,) lumped quadrature weights
    radius: float = None               # sphere3 radius
    meta: dict = field(default_factory=dict)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def h(self):
        """Characteristic mesh spacing."""
        if self.kind == "torus_grid":
            return 1.0 / self.grid_n
        return self.meta.get("h")

    def neighbor_lists(self):
        """1-ring node adjacency from the cell list (cached)."""
        if "neighbors" not in self.meta:
            nbrs = [set() for _ in range(self.n_nodes)]
            for cell in self.cells:
                for a in cell:
                    for b in cell:
                        if a != b:
                            nbrs[a].add(int(b))
            self.meta["neighbors"] = [np.array(sorted(s)) for s in nbrs]
        return self.meta["neighbors"]


# ---------------------------------------------------------------------------
# torus grid


def build_torus_grid(n):
    """Uniform periodic grid on [0,1)^3 embedded as T^3 x {pt} in T^7."""
    if n < 4:
        raise InvalidResolution(f"torus grid needs n >= 4, got {n}")
    h = 1.0 / n
    idx = np.arange(n) * h
    x1, x2, x3 = np.meshgrid(idx, idx, idx, indexing="ij")
    nodes = np.zeros((n**3, 7))
    nodes[:, 0] = x1.ravel()
    nodes[:, 1] = x2.ravel()
    nodes[:, 2] = x3.ravel()
    m = n**3
    tangent = np.zeros((m, 3, 7))
    normal = np.zeros((m, 4, 7))
    for a in range(3):
        tangent[:, a, a] = 1.0
    for a in range(4):
        normal[:, a, 3 + a] = 1.0
    return Domain(
        kind="torus_grid",
        nodes=nodes,
        grid_n=n,
        tangent_frame=tangent,
        normal_frame=normal,
        node_weights=np.full(m, h**3),
    )


# ---------------------------------------------------------------------------
# tetrahedral meshes


def _tet_volumes(points, cells, embed_dim=3):
    """Unsigned 3-volumes of tets for points in any ambient dimension."""
    p = points[cells]
    e = p[:, 1:] - p[:, :1]          # (nt, 3, dim)
    gram = np.einsum("tik,tjk->tij", e, e)
    det = np.linalg.det(gram)
    return np.sqrt(np.maximum(det, 0.0)) / 6.0


def _orient_cells(points, cells):
    """Flip tets so the signed volume (first 3 coords) is positive."""
    p = points[cells][:, :, :3]
    e = p[:, 1:] - p[:, :1]
    sgn = np.linalg.det(e)
    cells = cells.copy()
    flip = sgn < 0
    cells[flip, 0], cells[flip, 1] = cells[flip, 1], cells[flip, 0].copy()
    return cells


def _boundary_faces(cells):
    """Faces incident to exactly one tet, oriented outward."""
    face_count = {}
    for t, cell in enumerate(cells):
        for omit in range(4):
            tri = [cell[k] for k in range(4) if k != omit]
            key = tuple(sorted(int(a) for a in tri))
            face_count.setdefault(key, []).append((t, omit))
    faces = []
    for key, hits in face_count.items():
        if len(hits) == 1:
            faces.append((key, hits[0]))
    return faces


def _refine_tets(points, cells):
    """Bey red refinement: split every tet into 8."""
    points = list(map(tuple, points))
    edge_mid = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in edge_mid:
            pa = np.array(points[a])
            pb = np.array(points[b])
            points.append(tuple(0.5 * (pa + pb)))
            edge_mid[key] = len(points) - 1
        return edge_mid[key]

    new_cells = []
    for c in cells:
        v0, v1, v2, v3 = (int(a) for a in c)
        m01 = mid(v0, v1)
        m02 = mid(v0, v2)
        m03 = mid(v0, v3)
        m12 = mid(v1, v2)
        m13 = mid(v1, v3)
        m23 = mid(v2, v3)
        new_cells += [
            (v0, m01, m02, m03),
            (v1, m01, m12, m13),
            (v2, m02, m12, m23),
            (v3, m03, m13, m23),
            (m01, m02, m03, m23),
            (m01, m02, m12, m23),
            (m01, m03, m13, m23),
            (m01, m12, m13, m23),
        ]
    return np.array(points), np.array(new_cells, dtype=int)


def _icosahedron_vertices():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            v.append((0.0, s1 * 1.0, s2 * t))
            v.append((s1 * 1.0, s2 * t, 0.0))
            v.append((s2 * t, 0.0, s1 * 1.0))
    v = np.array(v)
    return v / np.linalg.norm(v[0])


def _solid_icosahedron():
    """Center node + 12 sphere vertices, 20 tets."""
    verts = _icosahedron_vertices()
    pts = np.vstack([[0.0, 0.0, 0.0], verts])
    # surface triangles by convex-hull adjacency: faces are vertex triples
    # at mutual distance = edge length
    d = np.linalg.norm(verts[:, None] - verts[None, :], axis=-1)
    edge = np.min(d[d > 1e-9])
    tris = []
    for i in range(12):
        for j in range(i + 1, 12):
            if d[i, j] > edge * 1.1:
                continue
            for k in range(j + 1, 12):
                if d[i, k] < edge * 1.1 and d[j, k] < edge * 1.1:
                    tris.append((i + 1, j + 1, k + 1))
    cells = np.array([(0, a, b, c) for a, b, c in tris], dtype=int)
    return pts, cells


def round_radius(r=1.0):
    return lambda u: r


def ellipsoid_radius(a, b, c):
    """Radial support function of an origin-centered ellipsoid."""

    def f(u):
        return 1.0 / np.sqrt((u[0] / a) ** 2 + (u[1] / b) ** 2 + (u[2] / c) ** 2)

    return f


def build_ball_mesh(radius_fn=None, refinement=3, curvature_rings=2):
    """Tetrahedral convex ball in R^3 x {0} from a refined icosahedron.

    radius_fn maps a unit direction (3-vector) to a positive radius;
    default is the round unit ball.
    """
    if radius_fn is None:
        radius_fn = round_radius(1.0)
    pts, cells = _solid_icosahedron()
    for _ in range(refinement):
        pts, cells = _refine_tets(pts, cells)
        bnodes = sorted({int(a) for key, _ in _boundary_faces(cells) for a in key})
        for i in bnodes:
            r = np.linalg.norm(pts[i])
            if r > 1e-12:
                pts[i] = pts[i] / r
    # map the unit template onto the requested star-shaped region
    mapped = np.zeros_like(pts)
    for i, p in enumerate(pts):
        r = np.linalg.norm(p)
        if r > 1e-12:
            mapped[i] = p * radius_fn(p / r)
    pts = mapped

    cells = _orient_cells(pts, cells)
    vols = _tet_volumes(pts, cells)
    if np.any(vols < 1e-12 * vols.mean()):
        raise MeshQualityError("degenerate tetrahedron in ball mesh")

    m = pts.shape[0]
    nodes = np.zeros((m, 7))
    nodes[:, :3] = pts
    tangent = np.zeros((m, 3, 7))
    normal = np.zeros((m, 4, 7))
    for a in range(3):
        tangent[:, a, a] = 1.0
    for a in range(4):
        normal[:, a, 3 + a] = 1.0

    weights = np.zeros(m)
    np.add.at(weights, cells.ravel(), np.repeat(vols / 4.0, 4))

    edge_len = np.linalg.norm(
        nodes[cells[:, 1], :3] - nodes[cells[:, 0], :3], axis=1
    )
    domain = Domain(
        kind="ball",
        nodes=nodes,
        cells=cells,
        tangent_frame=tangent,
        normal_frame=normal,
        node_weights=weights,
        meta={"h": float(edge_len.mean()), "refinement": refinement},
    )
    domain.boundary = _build_boundary_surface(domain, curvature_rings)
    return domain


def _build_boundary_surface(domain, rings=2):
    """Extract the boundary surface, frames and discrete curvatures."""
    faces = _boundary_faces(domain.cells)
    tris = []
    for (key, (t, omit)) in faces:
        cell = domain.cells[t]
        tri = [int(cell[k]) for k in range(4) if k != omit]
        # orient outward: normal . (apex - centroid) < 0
        apex = domain.nodes[cell[omit], :3]
        p = domain.nodes[tri, :3]
        nrm = np.cross(p[1] - p[0], p[2] - p[0])
        if np.dot(nrm, apex - p.mean(axis=0)) > 0:
            tri[1], tri[2] = tri[2], tri[1]
        tris.append(tri)
    tris = np.array(tris, dtype=int)
    node_ids = np.unique(tris)
    pos = domain.nodes[node_ids]
    loc = {int(g): i for i, g in enumerate(node_ids)}
    nb = len(node_ids)

    # area-weighted outward vertex normals and area weights
    out_n = np.zeros((nb, 3))
    area_w = np.zeros(nb)
    for tri in tris:
        p = domain.nodes[tri, :3]
        nrm = 0.5 * np.cross(p[1] - p[0], p[2] - p[0])
        for g in tri:
            out_n[loc[g]] += nrm
            area_w[loc[g]] += np.linalg.norm(nrm) / 3.0
    out_n /= np.linalg.norm(out_n, axis=1, keepdims=True)

    # surface adjacency (expanded to `rings` rings for the quadric fit)
    adj = [set() for _ in range(nb)]
    for tri in tris:
        a, b, c = (loc[g] for g in tri)
        adj[a] |= {b, c}
        adj[b] |= {a, c}
        adj[c] |= {a, b}
    fit_nbrs = []
    for i in range(nb):
        ring = set(adj[i])
        for _ in range(rings - 1):
            ring = ring | {k for j in ring for k in adj[j]}
        ring.discard(i)
        fit_nbrs.append(sorted(ring))

    inner = np.zeros((nb, 7))
    v_dir = np.zeros((nb, 7))
    w_dir = np.zeros((nb, 7))
    k_v = np.zeros(nb)
    k_w = np.zeros(nb)
    for i in range(nb):
        n3 = -out_n[i]                       # inner normal, in R^3
        nbrs = fit_nbrs[i]
        d = pos[nbrs, :3] - pos[i, :3]
        # quadric fit with linear terms; the linear part measures the
        # tilt of the current normal estimate, so iterate once to
        # sharpen it before reading off the curvatures
        for _ in range(3):
            t1 = np.cross(n3, [1.0, 0.0, 0.0])
            if np.linalg.norm(t1) < 0.1:
                t1 = np.cross(n3, [0.0, 1.0, 0.0])
            t1 /= np.linalg.norm(t1)
            t2 = np.cross(n3, t1)
            x = d @ t1
            y = d @ t2
            z = d @ n3                       # height along the inner normal
            cols = np.stack(
                [x, y, 0.5 * x**2, x * y, 0.5 * y**2], axis=1
            )
            coef, *_ = np.linalg.lstsq(cols, z, rcond=None)
            n3 = n3 - coef[0] * t1 - coef[1] * t2
            n3 /= np.linalg.norm(n3)
        shape_op = np.array([[coef[2], coef[3]], [coef[3], coef[4]]])
        evals, evecs = np.linalg.eigh(shape_op)
        # larger eigenvalue first; deterministic sign
        order = [1, 0]
        kv, kw = evals[order]
        vec = evecs[:, order[0]]
        if abs(evals[1] - evals[0]) < 1e-12:
            vec = np.array([1.0, 0.0])
        j = np.argmax(np.abs(vec))
        if vec[j] < 0:
            vec = -vec
        v3 = vec[0] * t1 + vec[1] * t2
        v3 -= np.dot(v3, n3) * n3            # re-orthogonalize after the
        v3 /= np.linalg.norm(v3)             # final normal update
        inner[i, :3] = n3
        v_dir[i, :3] = v3
        k_v[i], k_w[i] = kv, kw
        w_dir[i] = algebra.cross(inner[i], v_dir[i])

    return SurfaceMesh(
        node_ids=node_ids,
        triangles=tris,
        positions=pos,
        inner_normal=inner,
        v_dir=v_dir,
        w_dir=w_dir,
        k_v=k_v,
        k_w=k_w,
        node_weights=area_w,
    )


def build_sphere3_mesh(refinement=2, radius=1.0):
    """Round S^3 of given radius in span(e1..e4): the curved test fixture.

    This submanifold is deliberately *not* associative; it is the
    desk-scale case with a closed-form second fundamental form.
    """
    # boundary of the 4-dimensional cross-polytope: 8 vertices, 16 tets
    pts = []
    for a in range(4):
        for s in (1.0, -1.0):
            p = np.zeros(4)
            p[a] = s
            pts.append(p)
    pts = np.array(pts)
    cells = []
    for s0 in (0, 1):
        for s1 in (0, 1):
            for s2 in (0, 1):
                for s3 in (0, 1):
                    cells.append((0 + s0, 2 + s1, 4 + s2, 6 + s3))
    cells = np.array(cells, dtype=int)
    for _ in range(refinement):
        pts, cells = _refine_tets(pts, cells)
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    pts = pts * radius

    m = pts.shape[0]
    nodes = np.zeros((m, 7))
    nodes[:, :4] = pts
    tangent = np.zeros((m, 3, 7))
    normal = np.zeros((m, 4, 7))
    for i in range(m):
        radial = np.zeros(7)
        radial[:4] = pts[i] / radius
        # tangent = orthogonal complement of radial inside span(e1..e4)
        basis = []
        for a in range(4):
            cand = np.zeros(7)
            cand[a] = 1.0
            cand -= np.dot(cand, radial) * radial
            for b in basis:
                cand -= np.dot(cand, b) * b
            nrm = np.linalg.norm(cand)
            if nrm > 1e-8:
                basis.append(cand / nrm)
        tangent[i] = np.array(basis[:3])
        normal[i, 0] = radial
        for a in range(3):
            normal[i, 1 + a, 4 + a] = 1.0

    vols = _tet_volumes(pts, cells, embed_dim=4)
    weights = np.zeros(m)
    np.add.at(weights, cells.ravel(), np.repeat(vols / 4.0, 4))
    edge_len = np.linalg.norm(pts[cells[:, 1]] - pts[cells[:, 0]], axis=1)
    return Domain(
        kind="sphere3",
        nodes=nodes,
        cells=cells,
        tangent_frame=tangent,
        normal_frame=normal,
        node_weights=weights,
        radius=radius,
        meta={"h": float(edge_len.mean()), "refinement": refinement},
    )


# ---------------------------------------------------------------------------
# surface fixtures and genus


def torus_surface_fixture(n_theta=24, n_phi=12, big_r=2.0, small_r=0.6):
    """Triangulated torus of revolution in R^3 x {0} (genus 1 fixture).

    Oriented outward; inner normal points into the solid torus.
    """
    nodes = np.zeros((n_theta * n_phi, 7))
    inner = np.zeros((n_theta * n_phi, 7))

    def nid(i, j):
        return (i % n_theta) * n_phi + (j % n_phi)

    for i in range(n_theta):
        th = 2 * np.pi * i / n_theta
        for j in range(n_phi):
            ph = 2 * np.pi * j / n_phi
            k = nid(i, j)
            nodes[k, 0] = (big_r + small_r * np.cos(ph)) * np.cos(th)
            nodes[k, 1] = (big_r + small_r * np.cos(ph)) * np.sin(th)
            nodes[k, 2] = small_r * np.sin(ph)
            # outward normal of the tube
            out = np.array(
                [np.cos(ph) * np.cos(th), np.cos(ph) * np.sin(th), np.sin(ph)]
            )
            inner[k, :3] = -out
    tris = []
    for i in range(n_theta):
        for j in range(n_phi):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    tris = np.array(tris, dtype=int)
    node_ids = np.arange(nodes.shape[0])
    return SurfaceMesh(
        node_ids=node_ids,
        triangles=tris,
        positions=nodes,
        inner_normal=inner,
    )


def genus2_surface_fixture():
    """Combinatorial genus-2 surface: connected sum of two tori."""
    s1 = torus_surface_fixture(12, 8)
    s2 = torus_surface_fixture(12, 8)
    n1 = s1.positions.shape[0]
    t1 = [tuple(t) for t in s1.triangles]
    t2 = [tuple(t + n1) for t in s2.triangles]
    rm1 = t1.pop(0)
    rm2 = t2.pop(0)
    # glue with reversed orientation: a<->d, b<->f, c<->e
    a, b, c = rm1
    d, e, f = rm2
    remap = {d: a, e: c, f: b}
    t2 = [tuple(remap.get(x, x) for x in tri) for tri in t2]
    tris = np.array(t1 + t2, dtype=int)
    pos = np.vstack([s1.positions, s2.positions + np.array([6.0] + [0.0] * 6)])
    used = np.unique(tris)
    return SurfaceMesh(node_ids=used, triangles=tris, positions=pos[used])


def euler_genus(surface):
    """Genus from the Euler characteristic of a closed oriented surface."""
    tris = surface.triangles
    verts = np.unique(tris)
    edges = set()
    edge_count = {}
    for tri in tris:
        for u, w in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
            key = (int(u), int(w)) if u < w else (int(w), int(u))
            edges.add(key)
            edge_count[key] = edge_count.get(key, 0) + 1
    if any(c != 2 for c in edge_count.values()):
        raise NonClosedSurface("surface has edges not shared by exactly 2 triangles")
    chi = len(verts) - len(edges) + len(tris)
    if chi % 2 != 0:
        raise NonClosedSurface(f"odd Euler characteristic {chi}")
    return (2 - chi) // 2


# ---------------------------------------------------------------------------
# JSON persistence


def save_mesh_json(domain, path):
    payload = {
        "kind": domain.kind,
        "nodes": domain.nodes.tolist(),
        "cells": domain.cells.tolist() if domain.cells is not None else [],
        "boundary_triangles": (
            domain.boundary.triangles.tolist() if domain.boundary is not None else []
        ),
    }
    if domain.grid_n is not None:
        payload["grid_n"] = domain.grid_n
    if domain.radius is not None:
        payload["radius"] = domain.radius
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True)


def load_mesh_json(path):
    with open(path) as f:
        payload = json.load(f)
    kind = payload["kind"]
    if kind == "torus_grid":
        return build_torus_grid(payload["grid_n"])
    nodes = np.array(payload["nodes"])
    cells = np.array(payload["cells"], dtype=int)
    if kind == "ball":
        # rebuild frames, weights and boundary data from the geometry
        m = nodes.shape[0]
        tangent = np.zeros((m, 3, 7))
        normal = np.zeros((m, 4, 7))
        for a in range(3):
            tangent[:, a, a] = 1.0
        for a in range(4):
            normal[:, a, 3 + a] = 1.0
        cells = _orient_cells(nodes, cells)
        vols = _tet_volumes(nodes[:, :3], cells)
        weights = np.zeros(m)
        np.add.at(weights, cells.ravel(), np.repeat(vols / 4.0, 4))
        edge_len = np.linalg.norm(
            nodes[cells[:, 1], :3] - nodes[cells[:, 0], :3], axis=1
        )
        domain = Domain(
            kind="ball",
            nodes=nodes,
            cells=cells,
            tangent_frame=tangent,
            normal_frame=normal,
            node_weights=weights,
            meta={"h": float(edge_len.mean())},
        )
        domain.boundary = _build_boundary_surface(domain)
        return domain
    raise ValueError(f"unsupported mesh kind {kind!r}")
