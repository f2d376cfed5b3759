"""Oriented cell decompositions, their duals and discrete 1-forms.

Conventions
-----------
Faces are cyclic vertex lists, counterclockwise in the reference orientation.
For an oriented edge ``e_ij`` the *left* face is the face whose cycle
traverses ``i -> j``; the *right* face traverses ``j -> i``.  The dual edge
``e*_ij`` runs from the right face to the left face, so for a face function
``g`` we have ``dg(e*_ij) = g[left] - g[right]``.

Per-edge data (quadratic differentials, dual 1-forms, stresses) is stored as
arrays aligned with :attr:`Mesh.int_edges`, each row ``(a, b)`` with
``a < b``.  A dual 1-form array holds ``eta(e*_ab)``; the value on the
reversed edge is its negative, so antisymmetry holds by construction.
Reversing the global orientation swaps left and right and hence negates
every dual 1-form.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property

import numpy as np

from .errors import MeshError, NonManifoldError, NotClosedError, OrientationError

DEFAULT_CLOSED_TOL = 1e-9


class Mesh:
    """Immutable oriented polygonal surface with boundary.

    Build instances with :func:`build_mesh`.  Vertices are stored sorted by
    id; all index arrays refer to positions in :attr:`ids`.

    Attributes
    ----------
    ids : ndarray of int, shape (n_vertices,)
    faces : tuple of tuple of int
        Vertex indices per face.
    edges : ndarray of int, shape (n_edges, 2)
        Undirected edges ``(a, b)`` with ``a < b``, sorted lexicographically.
    left, right : ndarray of int, shape (n_edges,)
        Face traversing ``a -> b`` (resp. ``b -> a``); ``-1`` if absent.
    int_edges : ndarray of int, shape (n_int, 2)
        The interior rows of ``edges`` in the same order.
    int_left, int_right : ndarray of int, shape (n_int,)
    interior_vertices : ndarray of int
        Vertices not incident to a boundary edge, ascending.
    """

    def __init__(self, ids, faces, edges, left, right, directed):
        self.ids = ids
        self.faces = faces
        self.edges = edges
        self.left = left
        self.right = right
        self._directed = directed  # (u, v) -> (face, position of u)

        interior = (left >= 0) & (right >= 0)
        self.is_interior_edge = interior
        self.int_edge_ids = np.flatnonzero(interior)
        self.int_edges = edges[interior]
        self.int_left = left[interior]
        self.int_right = right[interior]
        self.edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(edges)}
        self.int_edge_index = {
            (int(a), int(b)): k for k, (a, b) in enumerate(self.int_edges)
        }

        on_boundary = np.zeros(len(ids), dtype=bool)
        on_boundary[edges[~interior].ravel()] = True
        self.boundary_vertices = np.flatnonzero(on_boundary)
        self.interior_vertices = np.flatnonzero(~on_boundary)
        self._index_of = {int(v): k for k, v in enumerate(ids)}

        self._nbrs = [set() for _ in range(len(ids))]
        for a, b in edges:
            self._nbrs[a].add(int(b))
            self._nbrs[b].add(int(a))
        self._rotations = {i: self._walk_rotation(i) for i in self.interior_vertices}

    def __repr__(self):
        return (
            f"Mesh(n_vertices={self.n_vertices}, n_faces={self.n_faces}, "
            f"n_edges={len(self.edges)}, n_interior_edges={len(self.int_edges)})"
        )

    @property
    def n_vertices(self):
        return len(self.ids)

    @property
    def n_faces(self):
        return len(self.faces)

    def index_of(self, vertex_id):
        return self._index_of[int(vertex_id)]

    def vertex_id(self, index):
        return int(self.ids[index])

    def left_face(self, i, j):
        """Face traversing ``i -> j`` or ``None``."""
        hit = self._directed.get((i, j))
        return None if hit is None else hit[0]

    def _walk_rotation(self, i):
        nbrs = self._nbrs[i]
        start = min(nbrs)
        order = [start]
        j = start
        while True:
            face, pos = self._directed[(i, j)]
            cycle = self.faces[face]
            j = cycle[pos - 1]
            if j == start:
                break
            order.append(j)
            if len(order) > len(nbrs):
                break
        if len(order) != len(nbrs):
            raise NonManifoldError(
                f"vertex {self.vertex_id(i)} has a non-manifold neighbourhood"
            )
        return order

    def rotation(self, i):
        """Counterclockwise neighbours of interior vertex ``i``.

        The cycle starts at the lowest-index neighbour, which is also the
        endpoint of the lowest incident edge in the lexicographic order.
        """
        return self._rotations[i]

    def dual_face(self, i):
        """Faces around interior vertex ``i`` in counterclockwise order.

        Consecutive entries ``phi_r, phi_{r+1}`` are the right and left face
        of ``e_{i, j_{r+1}}`` where ``j`` is :meth:`rotation`.
        """
        return [self._directed[(i, j)][0] for j in self.rotation(i)]

    def neighbors(self, i):
        return sorted(self._nbrs[i])

    def degree(self, i):
        return len(self._nbrs[i])

    @cached_property
    def face_array(self):
        """Faces padded to equal length by repeating their first vertex.

        Padding keeps cyclic sums of ``p_k x p_{k+1}`` unchanged.
        """
        width = max(len(f) for f in self.faces)
        out = np.empty((self.n_faces, width), dtype=int)
        for k, f in enumerate(self.faces):
            out[k, : len(f)] = f
            out[k, len(f) :] = f[0]
        return out

    def dual_connected(self):
        """Whether the dual graph over interior edges is connected."""
        if self.n_faces == 0:
            return True
        seen = _bfs_faces(self, 0)
        return bool(seen.all())

    def dual(self):
        """The interior part of the dual complex as a :class:`Mesh`.

        Vertex ids of the result are primal face indices; its faces are the
        dual faces of :attr:`interior_vertices`, in that order.  A primal face
        realization ``f`` of shape ``(n_faces, 3)`` becomes a vertex
        realization of the dual mesh via ``f[dual.ids]``.
        """
        cycles = [self.dual_face(i) for i in self.interior_vertices]
        used = sorted({phi for c in cycles for phi in c})
        return build_mesh(used, cycles)


def build_mesh(vertex_ids, face_cycles, disk=False):
    """Build a :class:`Mesh` from vertex ids and counterclockwise face cycles.

    Parameters
    ----------
    vertex_ids : iterable of int
    face_cycles : iterable of sequences of vertex ids
    disk : bool
        When set, additionally require a connected interior dual graph.

    Raises
    ------
    MeshError
        Unknown or isolated vertices, short faces, repeated vertices.
    NonManifoldError
        An edge with three or more incident faces, or a vertex whose star is
        not a single fan.
    OrientationError
        Two faces traverse the same oriented edge.
    """
    ids = np.array(sorted(int(v) for v in vertex_ids), dtype=int)
    if len(set(ids.tolist())) != len(ids):
        raise MeshError("duplicate vertex ids")
    index = {int(v): k for k, v in enumerate(ids)}

    faces = []
    for cyc in face_cycles:
        cyc = [int(v) for v in cyc]
        if len(cyc) < 3:
            raise MeshError(f"face {cyc} has fewer than 3 vertices")
        if len(set(cyc)) != len(cyc):
            raise MeshError(f"face {cyc} repeats a vertex")
        try:
            faces.append(tuple(index[v] for v in cyc))
        except KeyError as exc:
            raise MeshError(f"face {cyc} references undeclared vertex {exc}") from None

    directed = {}
    incidence = {}
    for fi, cyc in enumerate(faces):
        n = len(cyc)
        for p in range(n):
            u, v = cyc[p], cyc[(p + 1) % n]
            key = (min(u, v), max(u, v))
            incidence[key] = incidence.get(key, 0) + 1
            if incidence[key] > 2:
                raise NonManifoldError(
                    f"edge {ids[key[0]]}-{ids[key[1]]} has 3 or more faces"
                )
            if (u, v) in directed:
                raise OrientationError(
                    f"edge {ids[u]}->{ids[v]} is traversed in the same direction "
                    f"by faces {directed[(u, v)][0]} and {fi}"
                )
            directed[(u, v)] = (fi, p)

    used = np.zeros(len(ids), dtype=bool)
    for cyc in faces:
        used[list(cyc)] = True
    if not used.all():
        raise MeshError(f"isolated vertex {ids[np.flatnonzero(~used)[0]]}")

    keys = sorted(incidence)
    edges = np.array(keys, dtype=int).reshape(-1, 2)
    left = np.array([directed.get((a, b), (-1,))[0] for a, b in keys], dtype=int)
    right = np.array([directed.get((b, a), (-1,))[0] for a, b in keys], dtype=int)

    mesh = Mesh(ids, tuple(faces), edges, left, right, directed)
    if disk and not mesh.dual_connected():
        raise MeshError("interior dual graph is disconnected")
    return mesh


def _bfs_faces(mesh, base):
    seen = np.zeros(mesh.n_faces, dtype=bool)
    adj = _dual_adjacency(mesh)
    seen[base] = True
    queue = deque([base])
    while queue:
        phi = queue.popleft()
        for _, nb, _ in adj[phi]:
            if not seen[nb]:
                seen[nb] = True
                queue.append(nb)
    return seen


def _dual_adjacency(mesh):
    # per face: (dual edge id, neighbour face, +1 if we leave through the left side)
    adj = [[] for _ in range(mesh.n_faces)]
    for p, (lf, rf) in enumerate(zip(mesh.int_left, mesh.int_right)):
        adj[rf].append((p, int(lf), 1))
        adj[lf].append((p, int(rf), -1))
    return adj


def _magnitude(values):
    values = np.asarray(values)
    if values.ndim == 1:
        return np.abs(values)
    return np.linalg.norm(values.reshape(len(values), -1), axis=1)


def differentiate(mesh, g):
    """Dual 1-form ``dg(e*_ab) = g[left] - g[right]`` of a face function."""
    g = np.asarray(g)
    return g[mesh.int_left] - g[mesh.int_right]


def closedness_residuals(mesh, eta):
    """Per interior vertex ``i`` the sum ``sum_j eta(e*_ij)``.

    Returns an array aligned with ``mesh.interior_vertices``; vector-valued
    forms give vector-valued residuals.
    """
    eta = np.asarray(eta)
    if len(eta) != len(mesh.int_edges):
        raise ValueError(
            f"dual 1-form has {len(eta)} values, mesh has "
            f"{len(mesh.int_edges)} interior edges"
        )
    if np.isnan(eta).any():
        raise ValueError("dual 1-form has missing (NaN) values")
    acc = np.zeros((mesh.n_vertices,) + eta.shape[1:], dtype=eta.dtype)
    np.add.at(acc, mesh.int_edges[:, 0], eta)
    np.add.at(acc, mesh.int_edges[:, 1], -eta)
    return acc[mesh.interior_vertices]


def check_closed(mesh, eta, tol=DEFAULT_CLOSED_TOL):
    """Raise :class:`NotClosedError` unless ``max |residual| <= tol * max |eta|``."""
    res = _magnitude(closedness_residuals(mesh, eta))
    if len(res) == 0:
        return 0.0
    scale = _magnitude(eta).max(initial=0.0)
    worst = int(np.argmax(res))
    if res[worst] > tol * scale:
        vid = mesh.vertex_id(mesh.interior_vertices[worst])
        raise NotClosedError(
            f"dual 1-form is not closed at vertex {vid} "
            f"(residual {res[worst]:.3e}, allowed {tol * scale:.3e})",
            element=vid,
            residual=float(res[worst]),
        )
    return float(res[worst])


def integrate_dual_1form(
    mesh, eta, base_face=0, base_value=0.0, tol=DEFAULT_CLOSED_TOL, tree="bfs"
):
    """Integrate a closed dual 1-form to a function on faces.

    Parameters
    ----------
    eta : array, shape (n_int, ...)
        Values on ``mesh.int_edges``; any trailing shape (complex 3-vectors).
    base_face : int
    base_value : scalar or array
    tree : {"bfs", "dfs"}
        Spanning tree of the dual graph; both visit neighbours in order of
        dual edge id.  Closedness makes the result tree independent.

    Returns
    -------
    g : ndarray, shape (n_faces, ...)
        ``dg == eta`` on every interior edge and ``g[base_face] == base_value``.

    Raises
    ------
    NotClosedError
        Naming the vertex with the largest residual.
    MeshError
        When some face is unreachable from ``base_face``.
    """
    eta = np.asarray(eta)
    check_closed(mesh, eta, tol)
    base_value = np.asarray(base_value)
    dtype = np.result_type(eta.dtype, base_value.dtype, float)
    g = np.zeros((mesh.n_faces,) + eta.shape[1:], dtype=dtype)
    g[base_face] = base_value
    seen = np.zeros(mesh.n_faces, dtype=bool)
    seen[base_face] = True

    adj = _dual_adjacency(mesh)
    frontier = deque([base_face])
    pop = frontier.popleft if tree == "bfs" else frontier.pop
    if tree not in ("bfs", "dfs"):
        raise ValueError(f"unknown tree kind {tree!r}")
    while frontier:
        phi = pop()
        for p, nb, side in adj[phi]:
            if not seen[nb]:
                seen[nb] = True
                g[nb] = g[phi] + side * eta[p]
                frontier.append(nb)
    if not seen.all():
        raise MeshError(
            f"face {int(np.flatnonzero(~seen)[0])} is not reachable from face "
            f"{base_face} through interior edges"
        )
    return g


# -- primal 1-forms, on all edges -------------------------------------------


def primal_closedness_residuals(mesh, omega):
    """Per face the cyclic sum of ``omega`` over its boundary.

    ``omega`` is aligned with ``mesh.edges`` and holds ``omega(e_ab)``, ``a < b``.
    """
    omega = np.asarray(omega)
    out = np.zeros((mesh.n_faces,) + omega.shape[1:], dtype=omega.dtype)
    for fi, cyc in enumerate(mesh.faces):
        n = len(cyc)
        for p in range(n):
            u, v = cyc[p], cyc[(p + 1) % n]
            if u < v:
                out[fi] += omega[mesh.edge_index[(u, v)]]
            else:
                out[fi] -= omega[mesh.edge_index[(v, u)]]
    return out


def integrate_primal_1form(
    mesh, omega, base_vertex=0, base_value=0.0, tol=DEFAULT_CLOSED_TOL
):
    """Integrate a primal 1-form closed around every face to a vertex function."""
    omega = np.asarray(omega)
    res = _magnitude(primal_closedness_residuals(mesh, omega))
    scale = _magnitude(omega).max(initial=0.0)
    if len(res) and res.max() > tol * scale:
        worst = int(np.argmax(res))
        raise NotClosedError(
            f"primal 1-form is not closed around face {worst} "
            f"(residual {res[worst]:.3e})",
            element=worst,
            residual=float(res[worst]),
        )
    base_value = np.asarray(base_value)
    dtype = np.result_type(omega.dtype, base_value.dtype, float)
    h = np.zeros((mesh.n_vertices,) + omega.shape[1:], dtype=dtype)
    h[base_vertex] = base_value
    adj = [[] for _ in range(mesh.n_vertices)]
    for k, (a, b) in enumerate(mesh.edges):
        adj[a].append((k, b, 1))
        adj[b].append((k, a, -1))
    seen = np.zeros(mesh.n_vertices, dtype=bool)
    seen[base_vertex] = True
    queue = deque([base_vertex])
    while queue:
        u = queue.popleft()
        for k, v, side in adj[u]:
            if not seen[v]:
                seen[v] = True
                h[v] = h[u] + side * omega[k]
                queue.append(v)
    if not seen.all():
        raise MeshError("vertex graph is disconnected")
    return h
