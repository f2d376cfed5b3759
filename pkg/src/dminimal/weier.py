"""Weierstrass representation of discrete minimal surfaces.

Given a planar net ``z`` and a holomorphic quadratic differential ``q`` the
complex dual 1-form

    dF(e*_ij) = q_ij / (z_j - z_i) * (1 - z_i z_j, i (1 + z_i z_j), z_i + z_j)

is closed and integrates to ``F`` (one complex 3-vector per primal face).
``Re F`` is A-minimal, ``Re(i F)`` is C-minimal, both with the Gauss map
obtained by lifting ``z`` to the unit sphere, and ``Re(exp(i theta) F)`` is the
associated family.
"""

from __future__ import annotations

import numpy as np

from .errors import AdmissibilityError, NotClosedError
from .holo import DEFAULT_QHD_TOL, apply_mobius, check_qhd
from .mesh import integrate_dual_1form

DEFAULT_ADMISSIBLE_EPS = 1e-8
DEFAULT_THETA_SAMPLES = 16


def stereographic_lift(z, mesh=None, eps=DEFAULT_ADMISSIBLE_EPS):
    """Inverse stereographic projection onto the unit sphere.

    ``N = (2 Re z, 2 Im z, |z|^2 - 1) / (1 + |z|^2)``.  When ``mesh`` is given,
    admissibility is checked on every edge and an :class:`AdmissibilityError`
    names the first edge with ``|N_i + N_j| < eps``.
    """
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    N = np.stack([2 * z.real, 2 * z.imag, r2 - 1], axis=-1) / (1 + r2)[..., None]
    if mesh is not None:
        check_admissible(mesh, N, eps)
    return N


def antipodal_edges(mesh, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """Rows of ``mesh.edges`` where the Gauss map is (nearly) antipodal."""
    a, b = mesh.edges.T
    return np.flatnonzero(np.linalg.norm(N[a] + N[b], axis=1) < eps)


def check_admissible(mesh, N, eps=DEFAULT_ADMISSIBLE_EPS):
    bad = antipodal_edges(mesh, N, eps)
    if len(bad):
        u, v = mesh.edges[bad[0]]
        edge = (mesh.vertex_id(u), mesh.vertex_id(v))
        raise AdmissibilityError(
            f"Gauss map is not admissible on edge {edge[0]}-{edge[1]}", edge=edge
        )


def stereographic_projection(N):
    """Inverse of :func:`stereographic_lift` (from the north pole)."""
    N = np.asarray(N, dtype=float)
    return (N[..., 0] + 1j * N[..., 1]) / (1 - N[..., 2])


def weierstrass_vectors(zi, zj):
    """``(1 - zi zj, i (1 + zi zj), zi + zj) / (zj - zi)``, stacked on the last axis."""
    p = zi * zj
    return np.stack([1 - p, 1j * (1 + p), zi + zj], axis=-1) / (zj - zi)[..., None]


def weierstrass_form(mesh, z, q, check=True, tol=DEFAULT_QHD_TOL):
    """The closed complex 3-vector dual 1-form ``dF`` on ``mesh.int_edges``.

    Raises :class:`~dminimal.errors.NotHolomorphicError` with the worst
    vertex when ``check`` is set and ``q`` fails :func:`~dminimal.holo.verify_qhd`.
    """
    z = np.asarray(z, dtype=complex)
    q = np.asarray(q, dtype=float)
    if check:
        check_qhd(mesh, z, q, tol)
    a, b = mesh.int_edges.T
    return q[:, None] * weierstrass_vectors(z[a], z[b])


def integrate_surface(mesh, eta, base_face=0, tree="bfs"):
    """Integrate a closed ``C^3`` dual 1-form; the base face sits at the origin."""
    return integrate_dual_1form(
        mesh, eta, base_face=base_face, base_value=np.zeros(3, dtype=complex), tree=tree
    )


def weierstrass_surface(mesh, z, q, base_face=0, tree="bfs"):
    """``F`` with ``dF`` given by :func:`weierstrass_form`."""
    return integrate_surface(mesh, weierstrass_form(mesh, z, q), base_face, tree)


def associated_surface(F, theta):
    """Member ``Re(exp(i theta) F)`` of the associated family.

    ``theta = 0`` gives the A-minimal surface, ``theta = pi/2`` the conjugate
    C-minimal surface ``Re(i F) = -Im F``.
    """
    return np.real(np.exp(1j * theta) * np.asarray(F))


def theta_samples(count=DEFAULT_THETA_SAMPLES):
    """``count`` uniform angles in ``[0, 2 pi)``."""
    return 2 * np.pi * np.arange(count) / count


def edge_differences(mesh, f):
    """``df(e*_ab) = f[left] - f[right]`` on interior edges."""
    f = np.asarray(f)
    return f[mesh.int_left] - f[mesh.int_right]


def conjugate_from_aminimal(mesh, f, N, base_face=0, tol=1e-9):
    """C-minimal conjugate of an A-minimal surface: ``df~ = N_i x df``.

    The parallelity ``(N_j - N_i) x df = 0`` is checked per edge against
    ``tol * scale`` (``scale`` the longest edge of ``f``); a violation, or a
    closedness failure of the new form, raises :class:`NotClosedError`.
    The result is pinned to the origin at ``base_face``.
    """
    N = np.asarray(N, dtype=float)
    df = edge_differences(mesh, f)
    a, b = mesh.int_edges.T
    scale = np.linalg.norm(df, axis=1).max(initial=0.0)
    par = np.linalg.norm(np.cross(N[b] - N[a], df), axis=1)
    if len(par) and par.max() > tol * max(scale, 1e-300):
        k = int(np.argmax(par))
        edge = (mesh.vertex_id(a[k]), mesh.vertex_id(b[k]))
        raise NotClosedError(
            f"surface is not A-minimal: dN x df = {par[k]:.3e} on edge "
            f"{edge[0]}-{edge[1]}",
            element=edge,
            residual=float(par[k]),
        )
    eta = np.cross(N[a], df)
    return integrate_dual_1form(
        mesh, eta, base_face=base_face, base_value=np.zeros(3), tol=tol
    )


def goursat_matrix(phi):
    """Complex orthogonal 3x3 matrix ``A_phi`` of a normalized Moebius map.

    For ``phi(z) = (a z + b)/(c z + d)`` it transforms the Weierstrass vector
    of an edge of ``z`` into the one of ``phi(z)``.
    """
    a, b, c, d = phi.a, phi.b, phi.c, phi.d
    return np.array(
        [
            [
                0.5 * (a * a - b * b - c * c + d * d),
                0.5j * (a * a + b * b - c * c - d * d),
                -a * b + c * d,
            ],
            [
                0.5j * (-a * a + b * b - c * c + d * d),
                0.5 * (a * a + b * b + c * c + d * d),
                1j * (a * b + c * d),
            ],
            [-a * c + b * d, -1j * (a * c + b * d), a * d + b * c],
        ],
        dtype=complex,
    )


def goursat_transform(mesh, z, F, phi, eps=DEFAULT_ADMISSIBLE_EPS):
    """Goursat transform of a Weierstrass surface.

    Returns ``(F_phi, z_phi, N_phi)`` with ``F_phi = A_phi F`` (still zero at
    the base face), ``z_phi = phi(z)`` and ``N_phi`` its lift.

    Raises
    ------
    MobiusError
        If ``phi`` sends a vertex to infinity.
    AdmissibilityError
        If the transformed Gauss map is antipodal on an edge.
    """
    z_phi = apply_mobius(z, phi, mesh=mesh)
    N_phi = stereographic_lift(z_phi, mesh=mesh, eps=eps)
    F_phi = np.asarray(F) @ goursat_matrix(phi).T
    return F_phi, z_phi, N_phi
