"""Self-stresses on the Gauss map and their polar force/torque balance.

An A-minimal surface ``f`` with Gauss map ``N`` defines edge coefficients
``k_ij`` by ``df(e*_ij) = k_ij (N_j - N_i)``.  Since ``f`` closes up around
every interior vertex the forces ``k_ij (N_j - N_i)`` are in equilibrium, and
conversely.  On the polar mesh the same coefficients balance the forces
``k_ij N_i x N_j`` and their torques about the lines through
``r_ij = (N_i + N_j) / (1 + <N_i, N_j>)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, DegenerateError
from .weier import DEFAULT_ADMISSIBLE_EPS, edge_differences


@dataclass
class StressField:
    """Coefficients ``k`` on ``mesh.int_edges`` and the fit residual
    ``|df - k dN|`` of each edge (zero for exact A-minimal input)."""

    k: np.ndarray
    residual: np.ndarray

    def perturbed(self, edge, delta):
        k = self.k.copy()
        k[edge] += delta
        return StressField(k, self.residual.copy())


def _edge_normals(mesh, N):
    N = np.asarray(N, dtype=float)
    a, b = mesh.int_edges.T
    return N[a], N[b]


def _name(mesh, e):
    a, b = mesh.int_edges[e]
    return (mesh.vertex_id(a), mesh.vertex_id(b))


def stress_from_aminimal(mesh, f, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """Least-squares ``k_ij`` with ``df(e*_ij) ~ k_ij (N_j - N_i)``.

    Raises
    ------
    DegenerateError
        On an edge with ``N_i == N_j`` (within ``eps``) but ``df != 0``.
    """
    Ni, Nj = _edge_normals(mesh, N)
    df = edge_differences(mesh, f)
    dN = Nj - Ni
    n2 = np.einsum("ij,ij->i", dN, dN)
    flat = n2 <= eps * eps
    length = np.linalg.norm(df, axis=1)
    scale = max(length.max(initial=0.0), 1e-300)
    bad = np.flatnonzero(flat & (length > 1e-12 * scale))
    if len(bad):
        u, v = _name(mesh, bad[0])
        raise DegenerateError(f"equal normals on edge {u}-{v} with nonzero df; k undefined")
    k = np.where(flat, 0.0, np.einsum("ij,ij->i", dN, df) / np.where(flat, 1.0, n2))
    residual = np.linalg.norm(df - k[:, None] * dN, axis=1)
    return StressField(k, residual)


def stress_from_qhd(mesh, z, q):
    """``k_ij = q_ij (1 + |z_i|^2)(1 + |z_j|^2) / (2 |z_j - z_i|^2)``.

    These are the coefficients of ``Re F`` for the Weierstrass surface of
    ``(z, q)``.
    """
    z = np.asarray(z, dtype=complex)
    a, b = mesh.int_edges.T
    za, zb = z[a], z[b]
    return StressField(
        np.asarray(q, dtype=float)
        * (1 + np.abs(za) ** 2)
        * (1 + np.abs(zb) ** 2)
        / (2 * np.abs(zb - za) ** 2),
        np.zeros(len(a)),
    )


def _k(k):
    return np.asarray(k.k if isinstance(k, StressField) else k, dtype=float)


def equilibrium_residuals(mesh, N, k):
    """``sum_j k_ij (N_j - N_i)`` per interior vertex, shape ``(n_int, 3)``."""
    Ni, Nj = _edge_normals(mesh, N)
    force = _k(k)[:, None] * (Nj - Ni)
    acc = np.zeros((mesh.n_vertices, 3))
    np.add.at(acc, mesh.int_edges[:, 0], force)
    np.add.at(acc, mesh.int_edges[:, 1], -force)
    return acc[mesh.interior_vertices]


def torque_arms(mesh, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """``r_ij = (N_i + N_j) / (1 + <N_i, N_j>)`` on interior edges.

    ``r_ij`` is the intersection of the tangent lines of the edge's two
    polar faces: ``<r, N_i> = <r, N_j> = 1``.
    """
    Ni, Nj = _edge_normals(mesh, N)
    den = 1 + np.einsum("ij,ij->i", Ni, Nj)
    if (den < eps * eps).any():
        u, v = _name(mesh, int(np.argmin(den)))
        raise AdmissibilityError(f"antipodal normals on edge {u}-{v}", edge=(u, v))
    return (Ni + Nj) / den[:, None]


def force_torque_balance(mesh, N, k, eps=DEFAULT_ADMISSIBLE_EPS):
    """Force and torque residuals per interior dual face.

    Returns ``(force, torque)``, each ``(n_int, 3)``:
    ``sum_j k_ij N_i x N_j`` and ``sum_j k_ij r_ij x (N_i x N_j)``.

    Raises
    ------
    AdmissibilityError
        ``N_i == -N_j`` on an edge with ``k != 0``.
    DegenerateError
        ``N_i == N_j`` on an edge with ``k != 0``.
    """
    kk = _k(k)
    Ni, Nj = _edge_normals(mesh, N)
    stressed = kk != 0
    den = 1 + np.einsum("ij,ij->i", Ni, Nj)
    anti = np.flatnonzero(stressed & (den < eps * eps))
    if len(anti):
        u, v = _name(mesh, anti[0])
        raise AdmissibilityError(f"antipodal normals on stressed edge {u}-{v}", edge=(u, v))
    same = np.flatnonzero(stressed & (np.linalg.norm(Nj - Ni, axis=1) < eps))
    if len(same):
        u, v = _name(mesh, same[0])
        raise DegenerateError(f"equal normals on stressed edge {u}-{v}")
    c = np.cross(Ni, Nj)
    r = (Ni + Nj) / np.where(den > 0, den, 1.0)[:, None]
    force = kk[:, None] * c
    torque = kk[:, None] * np.cross(r, c)
    # N_j x N_i = -(N_i x N_j), and r is symmetric
    out_f = np.zeros((mesh.n_vertices, 3))
    out_t = np.zeros((mesh.n_vertices, 3))
    a, b = mesh.int_edges.T
    np.add.at(out_f, a, force)
    np.add.at(out_f, b, -force)
    np.add.at(out_t, a, torque)
    np.add.at(out_t, b, -torque)
    iv = mesh.interior_vertices
    return out_f[iv], out_t[iv]


def polar_mesh(mesh, N, tol=1e-12):
    """Pole ``N^`` of every triangle of the Gauss map: ``<N_a, N^> = 1``.

    Raises
    ------
    ValueError
        If a face is not a triangle.
    DegenerateError
        If a face's plane passes through the origin.
    """
    N = np.asarray(N, dtype=float)
    if any(len(face) != 3 for face in mesh.faces):
        raise ValueError("polar_mesh needs a triangulated Gauss map")
    T = N[np.array(mesh.faces)]
    det = np.linalg.det(T)
    scale = np.prod(np.linalg.norm(T, axis=2), axis=1)
    bad = np.flatnonzero(np.abs(det) <= tol * np.maximum(scale, 1e-300))
    if len(bad):
        raise DegenerateError(f"face {int(bad[0])} of the Gauss map lies in a plane through the origin")
    return np.linalg.solve(T, np.ones((len(T), 3, 1)))[..., 0]
