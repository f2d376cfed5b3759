"""Discrete holomorphic quadratic differentials on planar nets.

A planar net is a complex array ``z`` with one entry per mesh vertex.  A
quadratic differential ``q`` is a real array aligned with
``mesh.int_edges``; it is holomorphic when, at every interior vertex ``i``,

    sum_j q_ij = 0   and   sum_j q_ij / (z_j - z_i) = 0.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    CrossRatioError,
    DegenerateError,
    LabelingError,
    MeshError,
    MobiusError,
    NotHolomorphicError,
)
from .mesh import build_mesh, integrate_primal_1form

DEFAULT_QHD_TOL = 1e-9


def _check_nondegenerate(mesh, z):
    a, b = mesh.edges.T
    dz = np.abs(z[b] - z[a])
    bad = np.flatnonzero(dz == 0)
    if len(bad):
        u, v = mesh.edges[bad[0]]
        raise DegenerateError(
            f"degenerate edge {mesh.vertex_id(u)}-{mesh.vertex_id(v)}: z_i == z_j"
        )


def verify_qhd(mesh, z, q):
    """Residuals of the two defining sums at every interior vertex.

    Returns
    -------
    sum_q : ndarray of float
    sum_q_dz : ndarray of complex
        Both aligned with ``mesh.interior_vertices``.
    """
    z = np.asarray(z, dtype=complex)
    q = np.asarray(q, dtype=float)
    _check_nondegenerate(mesh, z)
    a, b = mesh.int_edges.T
    w = q / (z[b] - z[a])
    s0 = np.zeros(mesh.n_vertices)
    s1 = np.zeros(mesh.n_vertices, dtype=complex)
    np.add.at(s0, a, q)
    np.add.at(s0, b, q)
    np.add.at(s1, a, w)
    np.add.at(s1, b, -w)
    iv = mesh.interior_vertices
    return s0[iv], s1[iv]


def qhd_scales(mesh, z, q):
    """Magnitudes the two residuals are measured against: max|q|, max|q/dz|."""
    z = np.asarray(z, dtype=complex)
    q = np.asarray(q, dtype=float)
    a, b = mesh.int_edges.T
    s0 = float(np.abs(q).max(initial=0.0))
    s1 = float(np.abs(q / (z[b] - z[a])).max(initial=0.0))
    return s0, s1


def qhd_max_residual(mesh, z, q):
    """Largest residual relative to :func:`qhd_scales`, and its vertex id."""
    r0, r1 = verify_qhd(mesh, z, q)
    s0, s1 = qhd_scales(mesh, z, q)
    rel = np.maximum(
        np.abs(r0) / (s0 if s0 > 0 else 1.0), np.abs(r1) / (s1 if s1 > 0 else 1.0)
    )
    if len(rel) == 0:
        return 0.0, None
    k = int(np.argmax(rel))
    return float(rel[k]), mesh.vertex_id(mesh.interior_vertices[k])


def check_qhd(mesh, z, q, tol=DEFAULT_QHD_TOL):
    rel, vid = qhd_max_residual(mesh, z, q)
    if rel > tol:
        raise NotHolomorphicError(
            f"q is not a holomorphic quadratic differential: relative residual "
            f"{rel:.3e} at vertex {vid}",
            vertex=vid,
            residual=rel,
        )
    return rel


# -- Moebius transformations ---------------------------------------------------


@dataclass(frozen=True)
class MobiusCoeffs:
    """Coefficients of ``z -> (a z + b) / (c z + d)`` normalized to ``ad - bc = 1``.

    Use :meth:`normalized` to build from arbitrary non-singular coefficients.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1) > 1e-12 * max(1.0, abs(self.a * self.d), abs(self.b * self.c)):
            raise MobiusError(f"coefficients not normalized: ad - bc = {det}")

    @classmethod
    def normalized(cls, a, b, c, d):
        a, b, c, d = (complex(x) for x in (a, b, c, d))
        det = a * d - b * c
        if det == 0:
            raise MobiusError("singular Moebius coefficients: ad - bc = 0")
        s = cmath.sqrt(det)
        return cls(a / s, b / s, c / s, d / s)

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def compose(self, other):
        """``self o other``."""
        m = self.matrix() @ other.matrix()
        return MobiusCoeffs.normalized(*m.ravel())

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)


def apply_mobius(z, phi, mesh=None, rtol=1e-14):
    """Image ``phi(z)`` of a planar net; refuses vertices sent to infinity."""
    z = np.asarray(z, dtype=complex)
    den = phi.c * z + phi.d
    scale = abs(phi.c) * np.abs(z) + abs(phi.d)
    bad = np.flatnonzero(np.abs(den) <= rtol * scale)
    if len(bad):
        k = int(bad[0])
        name = mesh.vertex_id(k) if mesh is not None else k
        raise MobiusError(f"Moebius map sends vertex {name} to infinity")
    return (phi.a * z + phi.b) / den


def random_mobius(rng, spread=1.0):
    """Random normalized coefficients with complex Gaussian entries."""
    a, b, c, d = spread * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    return MobiusCoeffs.normalized(a, b, c, d)


# -- harmonic functions --------------------------------------------------------


def _triangles(mesh):
    if any(len(f) != 3 for f in mesh.faces):
        raise MeshError("mesh must be triangulated")
    return np.array(mesh.faces, dtype=int).reshape(-1, 3)


def _signed_areas(mesh, z):
    t = _triangles(mesh)
    zi, zj, zk = z[t[:, 0]], z[t[:, 1]], z[t[:, 2]]
    area = 0.5 * np.imag(np.conj(zj - zi) * (zk - zi))
    size = np.maximum.reduce([abs(zj - zi), abs(zk - zj), abs(zi - zk)])
    bad = np.flatnonzero(np.abs(area) <= 1e-14 * size**2)
    if len(bad):
        raise DegenerateError(f"degenerate triangle {bad[0]} (zero signed area)")
    return t, area


def face_gradients(mesh, z, u):
    """Gradient of the piecewise linear extension of ``u`` as a complex number per face."""
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=float)
    t, area = _signed_areas(mesh, z)
    i, j, k = t.T
    num = u[i] * (z[k] - z[j]) + u[j] * (z[i] - z[k]) + u[k] * (z[j] - z[i])
    return 1j * num / (2 * area)


def qhd_from_harmonic(mesh, z, u, tol=1e-12):
    """Quadratic differential ``q_ij = i du_z(e*_ij) dz(e_ij)`` of a vertex function.

    ``du_z(e*_ij)`` is the jump of the conjugated face gradient from the right
    to the left face of ``e_ij``.  The product is real by construction; the
    imaginary part is checked against ``tol`` times the largest product and
    then discarded.  ``q`` is holomorphic exactly when ``u`` is harmonic for
    the cotangent Laplacian.
    """
    z = np.asarray(z, dtype=complex)
    grad = face_gradients(mesh, z, u)
    a, b = mesh.int_edges.T
    du = np.conj(grad[mesh.int_left]) - np.conj(grad[mesh.int_right])
    dz = z[b] - z[a]
    prod = 1j * du * dz
    # size of the terms that cancel in du, so that q ~ 0 is judged fairly
    scale = np.abs(grad).max(initial=0.0) * np.abs(dz).max(initial=0.0)
    worst = np.abs(prod.imag).max(initial=0.0)
    if worst > tol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"q has imaginary residue {worst:.3e} (scale {scale:.3e})")
    return prod.real.copy()


def _cot_opposite(z, x, y, w):
    # cotangent of the angle at w in a face whose cycle contains x -> y -> w
    p = np.conj(z[x] - z[w]) * (z[y] - z[w])
    return p.real / p.imag


def cotan_weights(mesh, z):
    """``cot(angle jki) + cot(angle ilj)`` per interior edge of a plane triangulation."""
    z = np.asarray(z, dtype=complex)
    _signed_areas(mesh, z)
    w = np.zeros(len(mesh.int_edges))
    for p, (a, b) in enumerate(mesh.int_edges):
        for face, (x, y) in ((mesh.int_left[p], (a, b)), (mesh.int_right[p], (b, a))):
            (c,) = set(mesh.faces[face]) - {a, b}
            w[p] += _cot_opposite(z, x, y, c)
    return w


def cotan_harmonic_residuals(mesh, z, u):
    """Per interior vertex ``sum_j (cot angle jki + cot angle ilj)(u_j - u_i)``."""
    u = np.asarray(u, dtype=float)
    w = cotan_weights(mesh, z)
    a, b = mesh.int_edges.T
    flux = w * (u[b] - u[a])
    acc = np.zeros(mesh.n_vertices)
    np.add.at(acc, a, flux)
    np.add.at(acc, b, -flux)
    return acc[mesh.interior_vertices]


def harmonic_extension(mesh, z, boundary_values):
    """Cotangent-harmonic function with prescribed values on boundary vertices.

    ``boundary_values`` is aligned with ``mesh.boundary_vertices``.
    """
    w = cotan_weights(mesh, z)
    n = mesh.n_vertices
    L = np.zeros((n, n))
    for p, (a, b) in enumerate(mesh.int_edges):
        L[a, b] += w[p]
        L[b, a] += w[p]
        L[a, a] -= w[p]
        L[b, b] -= w[p]
    u = np.zeros(n)
    bv, iv = mesh.boundary_vertices, mesh.interior_vertices
    u[bv] = boundary_values
    if len(iv):
        rhs = -L[np.ix_(iv, bv)] @ u[bv]
        u[iv] = np.linalg.solve(L[np.ix_(iv, iv)], rhs)
    return u


# -- P-graphs, P-nets, circle patterns -----------------------------------------


def _require_pgraph(mesh):
    for i in mesh.interior_vertices:
        if mesh.degree(i) != 4:
            raise LabelingError(
                f"not a P-graph: interior vertex {mesh.vertex_id(i)} has degree "
                f"{mesh.degree(i)}"
            )
    for fi, f in enumerate(mesh.faces):
        if len(f) % 2:
            raise LabelingError(f"not a P-graph: face {fi} has odd length {len(f)}")


def p_labeling(mesh):
    """The P-labeling with ``+1`` on the lowest interior edge of each component.

    Around every interior vertex the four incident edges alternate
    ``+1, -1, +1, -1``.  Edges not constrained by any interior vertex are
    labeled ``+1``.

    Raises
    ------
    LabelingError
        If the mesh is not a P-graph or the constraints are inconsistent
        (which can only happen on non-simply-connected P-graphs).
    """
    _require_pgraph(mesh)
    n = len(mesh.int_edges)
    links = [[] for _ in range(n)]
    for i in mesh.interior_vertices:
        ring = [mesh.int_edge_index[(min(i, j), max(i, j))] for j in mesh.rotation(i)]
        for k in range(4):
            e, f = ring[k], ring[(k + 1) % 4]
            links[e].append((f, -1))
            links[f].append((e, -1))
    mu = np.zeros(n, dtype=int)
    for seed in range(n):
        if mu[seed]:
            continue
        mu[seed] = 1
        queue = deque([seed])
        while queue:
            e = queue.popleft()
            for f, rel in links[e]:
                want = rel * mu[e]
                if mu[f] == 0:
                    mu[f] = want
                    queue.append(f)
                elif mu[f] != want:
                    u, v = mesh.int_edges[f]
                    raise LabelingError(
                        f"inconsistent P-labeling at edge "
                        f"{mesh.vertex_id(u)}-{mesh.vertex_id(v)}"
                    )
    return mu.astype(float)


def pnet_residuals(mesh, z):
    """``1/(z1-z0) - 1/(z2-z0) + 1/(z3-z0) - 1/(z4-z0)`` per interior vertex.

    Neighbours follow the counterclockwise rotation starting at the lowest
    neighbour.  Zero everywhere iff ``z`` is a P-net.
    """
    z = np.asarray(z, dtype=complex)
    _require_pgraph(mesh)
    _check_nondegenerate(mesh, z)
    out = np.zeros(len(mesh.interior_vertices), dtype=complex)
    signs = np.array([1, -1, 1, -1])
    for k, i in enumerate(mesh.interior_vertices):
        ring = mesh.rotation(i)
        out[k] = np.sum(signs / (z[ring] - z[i]))
    return out


def grid_mesh(m, n):
    """``m x n`` vertex grid of quads; vertex ``(r, s)`` has id ``r * n + s``.

    ``r`` runs along the real axis, ``s`` along the imaginary axis, so faces
    are counterclockwise for ``z = r + i s``.
    """
    if m < 2 or n < 2:
        raise ValueError(f"grid sizes must be >= 2, got {m} x {n}")
    vid = lambda r, s: r * n + s  # noqa: E731
    faces = [
        [vid(r, s), vid(r + 1, s), vid(r + 1, s + 1), vid(r, s + 1)]
        for r in range(m - 1)
        for s in range(n - 1)
    ]
    return build_mesh(range(m * n), faces)


def _grid_coords(m, n):
    r, s = np.divmod(np.arange(m * n), n)
    return r, s


def generate_net(kind, **params):
    """Built-in P-nets: ``grid``, ``exp`` and ``regular_circle_pattern``.

    ``grid``
        ``z = origin + spacing * (r + i s)``; params ``m, n, origin=0, spacing=1``.
    ``exp``
        ``z = exp(a r + i b s)``; params ``a, b, m, n``.  The quads have
        cross-ratio ``-sinh(a/2)**2 / sin(b/2)**2``.
    ``regular_circle_pattern``
        Intersection points of equal circles of ``radius`` meeting at right
        angles: a grid rotated by 45 degrees with spacing ``radius * sqrt(2)``.
        Circle centres are the face centres, see :func:`face_circles`.

    Returns ``(mesh, z)``.
    """
    m, n = int(params.get("m", 0)), int(params.get("n", 0))
    mesh = grid_mesh(m, n)
    r, s = _grid_coords(m, n)
    if kind == "grid":
        origin = complex(params.get("origin", 0))
        spacing = float(params.get("spacing", 1.0))
        z = origin + spacing * (r + 1j * s)
    elif kind == "exp":
        a, b = float(params["a"]), float(params["b"])
        if abs(cmath.exp(1j * b) - 1) < 1e-12 or a == 0:
            raise ValueError(f"exp net with a={a}, b={b} has degenerate edges")
        z = np.exp(a * r + 1j * b * s)
    elif kind == "regular_circle_pattern":
        radius = float(params.get("radius", 1.0))
        if radius <= 0:
            raise ValueError("radius must be positive")
        z = radius * (1 + 1j) * (r + 1j * s)
    else:
        raise ValueError(f"unknown net kind {kind!r}")
    return mesh, z.astype(complex)


def face_circles(mesh, z, tol=1e-9):
    """Circumcircle ``(centre, radius)`` of every face; faces must be concyclic."""
    z = np.asarray(z, dtype=complex)
    centres = np.empty(mesh.n_faces, dtype=complex)
    radii = np.empty(mesh.n_faces)
    for fi, f in enumerate(mesh.faces):
        p, q, r = z[list(f[:3])]
        # circumcentre of p, q, r
        d = 2 * np.imag(np.conj(q - p) * (r - p))
        if d == 0:
            raise DegenerateError(f"face {fi} has collinear vertices")
        c = p + (abs(q - p) ** 2 * (r - p) - abs(r - p) ** 2 * (q - p)) / (1j * d)
        rad = abs(p - c)
        if np.abs(np.abs(z[list(f)] - c) - rad).max() > tol * rad:
            raise DegenerateError(f"face {fi} is not concyclic")
        centres[fi], radii[fi] = c, rad
    return centres, radii


def intersection_angle(c1, r1, c2, r2):
    """Angle between two intersecting circles, in radians."""
    d2 = abs(c1 - c2) ** 2
    return math.acos((r1 * r1 + r2 * r2 - d2) / (2 * r1 * r2))


# -- isothermic nets -----------------------------------------------------------


def cross_ratio(z1, z2, z3, z4):
    """``(z1-z2)(z3-z4) / ((z2-z3)(z4-z1))``; ``-1`` on a square."""
    return (z1 - z2) * (z3 - z4) / ((z2 - z3) * (z4 - z1))


def _edge_id(mesh, u, v):
    return mesh.edge_index[(min(u, v), max(u, v))]


def quad_edge_classes(mesh):
    """Split all edges of a quad mesh into two families, ``+1`` and ``-1``.

    Consecutive edges of every quad get opposite labels.  Seeding starts
    from the lowest interior edge so the labels agree with :func:`p_labeling`
    on interior edges; on a grid these are the "horizontal" (``+1``) and
    "vertical" edges.
    """
    if any(len(f) != 4 for f in mesh.faces):
        raise MeshError("quad mesh required")
    n = len(mesh.edges)
    links = [[] for _ in range(n)]
    for f in mesh.faces:
        ring = [_edge_id(mesh, f[k], f[(k + 1) % 4]) for k in range(4)]
        for k in range(4):
            e, g = ring[k], ring[(k + 1) % 4]
            links[e].append(g)
            links[g].append(e)
    cls = np.zeros(n, dtype=int)
    seeds = list(mesh.int_edge_ids) + list(np.flatnonzero(~mesh.is_interior_edge))
    for seed in seeds:
        if cls[seed]:
            continue
        cls[seed] = 1
        queue = deque([seed])
        while queue:
            e = queue.popleft()
            for g in links[e]:
                if cls[g] == 0:
                    cls[g] = -cls[e]
                    queue.append(g)
                elif cls[g] == cls[e]:
                    raise LabelingError("quad mesh edges do not split into two families")
    return cls


def face_cross_ratios(mesh, z):
    z = np.asarray(z, dtype=complex)
    return np.array([cross_ratio(*z[list(f)]) for f in mesh.faces])


def isothermic_dual(mesh, z, tol=1e-8):
    """Christoffel dual of a planar quad net whose quads have cross-ratio -1.

    ``dz*(e) = 1/conj(dz(e))`` on the ``+1`` family of
    :func:`quad_edge_classes` and ``-1/conj(dz(e))`` on the other, integrated
    from the lowest vertex (placed at 0).

    Raises
    ------
    CrossRatioError
        Naming the face whose cross-ratio is farthest from -1.
    """
    z = np.asarray(z, dtype=complex)
    _check_nondegenerate(mesh, z)
    cr = face_cross_ratios(mesh, z)
    dev = np.abs(cr + 1)
    worst = int(np.argmax(dev))
    if dev[worst] > tol:
        raise CrossRatioError(
            f"face {worst} has cross-ratio {cr[worst]:.6g}, expected -1",
            face=worst,
            cross_ratio=complex(cr[worst]),
        )
    cls = quad_edge_classes(mesh)
    a, b = mesh.edges.T
    omega = cls / np.conj(z[b] - z[a])
    return integrate_primal_1form(mesh, omega, base_vertex=0, base_value=0j)


def vertex_parity(mesh):
    """Two-colouring of the vertex graph; the lowest vertex gets colour 0."""
    color = -np.ones(mesh.n_vertices, dtype=int)
    for seed in range(mesh.n_vertices):
        if color[seed] >= 0:
            continue
        color[seed] = 0
        queue = deque([seed])
        while queue:
            u = queue.popleft()
            for v in mesh.neighbors(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    raise MeshError("vertex graph is not bipartite")
    return color


def sublattice_pnet(mesh, z, parity):
    """Restrict a quad net to one vertex colour class, connected by quad diagonals.

    Faces of the result are the rings of neighbours around interior vertices
    of the other colour.  Vertex ids are kept.  Returns ``(submesh, z_sub)``.
    """
    z = np.asarray(z, dtype=complex)
    color = vertex_parity(mesh)
    cycles = []
    for v in mesh.interior_vertices:
        if color[v] != parity:
            cycles.append([mesh.vertex_id(j) for j in mesh.rotation(v)])
    if not cycles:
        raise MeshError("no interior vertex of the opposite colour")
    used = sorted({u for c in cycles for u in c})
    sub = build_mesh(used, cycles)
    return sub, z[[mesh.index_of(u) for u in sub.ids]]
