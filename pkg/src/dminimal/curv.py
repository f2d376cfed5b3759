"""Curvature and area of discrete minimal surfaces.

Surfaces ``f`` here are realizations of the dual complex: one 3-vector per
primal face, with the Gauss map ``N`` given per primal vertex.  The dual face
of an interior vertex ``i`` is the polygon of ``f`` over
``mesh.dual_face(i)`` and carries normal ``N_i``.

The area functionals (:func:`total_area`, :func:`mean_curvature_vector`,
:func:`cotan_balance`, :func:`area_gradient_fd`) instead act on a *primal*
realization ``f[v]`` of whatever mesh is passed.  To evaluate them on a dual
surface pass ``mesh.dual()`` and ``f[dual.ids]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import AdmissibilityError, DegenerateError
from .weier import DEFAULT_ADMISSIBLE_EPS, associated_surface, edge_differences

DEFAULT_PLANARITY_TOL = 1e-8
DEFAULT_CURVATURE_TOL = 1e-10
DEFAULT_FD_STEP = 1e-5


def surface_scale(mesh, f):
    """Longest interior dual edge of ``f``; 1.0 for a constant surface."""
    length = np.linalg.norm(edge_differences(mesh, f), axis=1)
    s = float(length.max(initial=0.0))
    return s if s > 0 else 1.0


def _normals_on_edges(mesh, N):
    N = np.asarray(N, dtype=float)
    a, b = mesh.int_edges.T
    return N[a], N[b]


def _vertex_sum(mesh, values):
    """Sum a symmetric per-edge quantity onto both endpoints; interior vertices only."""
    acc = np.zeros((mesh.n_vertices,) + values.shape[1:])
    np.add.at(acc, mesh.int_edges[:, 0], values)
    np.add.at(acc, mesh.int_edges[:, 1], values)
    return acc[mesh.interior_vertices]


def verify_aminimal(mesh, f, N):
    """Per interior edge ``(|dN(e_ij) x df(e*_ij)|, |<N_i + N_j, df(e*_ij)>|)``."""
    Ni, Nj = _normals_on_edges(mesh, N)
    df = edge_differences(mesh, f)
    cross = np.linalg.norm(np.cross(Nj - Ni, df), axis=1)
    dot = np.abs(np.einsum("ij,ij->i", Ni + Nj, df))
    return cross, dot


def is_aminimal(mesh, f, N, tol=DEFAULT_CURVATURE_TOL, eps=DEFAULT_ADMISSIBLE_EPS):
    Ni, Nj = _normals_on_edges(mesh, N)
    if (np.linalg.norm(Ni + Nj, axis=1) < eps).any():
        return False
    cross, dot = verify_aminimal(mesh, f, N)
    bound = tol * surface_scale(mesh, f)
    return bool(cross.max(initial=0.0) <= bound and dot.max(initial=0.0) <= bound)


class DihedralData(NamedTuple):
    """Per interior edge; ``alpha`` is NaN on degenerate edges, ``k`` NaN where
    ``N_i == N_j`` but the edge has positive length."""

    alpha: np.ndarray
    k: np.ndarray
    length: np.ndarray
    term: np.ndarray  # |df| tan(alpha / 2)
    k_residual: np.ndarray  # |df - k N_i x N_j|


def dihedral_and_k(mesh, f, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """Signed dihedral angles and the coefficients ``df~ = k N_i x N_j``.

    ``sin alpha = <N_i x N_j, df/|df|>`` and ``cos alpha = <N_i, N_j>``; the
    angle is their ``atan2``.  ``k`` is the least-squares coefficient along
    ``N_i x N_j``, its orthogonal remainder goes to ``k_residual``.

    Raises
    ------
    AdmissibilityError
        When ``N_i`` and ``N_j`` are antipodal within ``eps``.
    """
    Ni, Nj = _normals_on_edges(mesh, N)
    df = edge_differences(mesh, f)
    length = np.linalg.norm(df, axis=1)
    anti = np.flatnonzero(np.linalg.norm(Ni + Nj, axis=1) < eps)
    if len(anti):
        a, b = mesh.int_edges[anti[0]]
        raise AdmissibilityError(
            f"antipodal normals on edge {mesh.vertex_id(a)}-{mesh.vertex_id(b)}",
            edge=(mesh.vertex_id(a), mesh.vertex_id(b)),
        )
    c = np.cross(Ni, Nj)
    cosv = np.einsum("ij,ij->i", Ni, Nj)
    proj = np.einsum("ij,ij->i", c, df)
    tiny = 1e-300
    degenerate = length <= tiny
    sinv = np.where(degenerate, 0.0, proj / np.where(degenerate, 1.0, length))
    alpha = np.where(degenerate, np.nan, np.arctan2(sinv, cosv))
    # tan(atan2(s, c) / 2) = s / (hypot(s, c) + c); exact for axis-aligned data
    term = length * sinv / (np.hypot(sinv, cosv) + cosv)

    c2 = np.einsum("ij,ij->i", c, c)
    parallel = c2 <= eps * eps
    k = np.where(parallel, 0.0, proj / np.where(parallel, 1.0, c2))
    k_residual = np.linalg.norm(df - k[:, None] * c, axis=1)
    k = np.where(parallel & ~degenerate, np.nan, k)
    return DihedralData(alpha, k, length, term, k_residual)


def scalar_mean_curvature(mesh, f, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """``H~_i = sum_j |df~(e*_ij)| tan(alpha_ij / 2)`` per interior vertex."""
    return _vertex_sum(mesh, dihedral_and_k(mesh, f, N, eps).term)


def planarity_residuals(mesh, f, N):
    """Per interior vertex the largest distance of its dual face's corners from
    the plane through their centroid with normal ``N_i``."""
    f = np.asarray(f, dtype=float)
    N = np.asarray(N, dtype=float)
    out = np.zeros(len(mesh.interior_vertices))
    for k, i in enumerate(mesh.interior_vertices):
        pts = f[mesh.dual_face(i)]
        out[k] = np.abs((pts - pts.mean(axis=0)) @ N[i]).max()
    return out


@dataclass
class CMinimalReport:
    scale: float
    max_planarity: float
    max_mean_curvature: float
    worst_vertex: int | None
    admissible: bool
    planarity_tol: float
    curvature_tol: float
    mean_curvature: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return (
            self.admissible
            and self.max_planarity <= self.planarity_tol * self.scale
            and self.max_mean_curvature <= self.curvature_tol * self.scale
        )


def verify_cminimal(
    mesh,
    f,
    N,
    planarity_tol=DEFAULT_PLANARITY_TOL,
    curvature_tol=DEFAULT_CURVATURE_TOL,
    eps=DEFAULT_ADMISSIBLE_EPS,
):
    """Check planar faces with normal ``N``, admissibility and ``H~ == 0``.

    Tolerances are relative to :func:`surface_scale`.
    """
    scale = surface_scale(mesh, f)
    plan = planarity_residuals(mesh, f, N)
    try:
        H = scalar_mean_curvature(mesh, f, N, eps)
        admissible = True
    except AdmissibilityError:
        H = np.full(len(mesh.interior_vertices), np.nan)
        admissible = False
    absH = np.abs(np.nan_to_num(H, nan=np.inf))
    worst = None
    if len(absH):
        worst = mesh.vertex_id(mesh.interior_vertices[int(np.argmax(absH))])
    return CMinimalReport(
        scale=scale,
        max_planarity=float(plan.max(initial=0.0)),
        max_mean_curvature=float(absH.max(initial=0.0)),
        worst_vertex=worst,
        admissible=admissible,
        planarity_tol=planarity_tol,
        curvature_tol=curvature_tol,
        mean_curvature=H,
    )


def mixed_area_conical(mesh, f, N, Nhat, tol=1e-10):
    """Mixed area ``Area(f~, N^)_i`` of every dual face with its polar offset.

    ``Nhat`` gives the poles of the faces of ``N`` (one point per primal
    face).  The incidences ``<N_i, Nhat_phi> = 1`` are checked first; they
    fail exactly when ``N`` does not have planar faces.
    """
    f = np.asarray(f, dtype=float)
    N = np.asarray(N, dtype=float)
    Nhat = np.asarray(Nhat, dtype=float)
    for fi, face in enumerate(mesh.faces):
        dev = np.abs(N[list(face)] @ Nhat[fi] - 1).max()
        if dev > tol:
            raise DegenerateError(
                f"face {fi} of the Gauss map is not planar / not polar to Nhat "
                f"(incidence error {dev:.3e})"
            )
    out = np.zeros(len(mesh.interior_vertices))
    for k, i in enumerate(mesh.interior_vertices):
        ring = mesh.dual_face(i)
        P, Q = f[ring], Nhat[ring]
        P1, Q1 = np.roll(P, -1, axis=0), np.roll(Q, -1, axis=0)
        out[k] = 0.5 * np.sum((np.cross(P, Q1) + np.cross(Q, P1)) @ N[i])
    return out


def theta_curvatures(mesh, f, N, eps=DEFAULT_ADMISSIBLE_EPS):
    """Per interior vertex the scalar mean curvature ``H^theta`` and the dot sum.

    ``H^theta_i = sum_j <dN(e_ij) x df(e*_ij), (N_i + N_j)/|N_i + N_j|^2>`` and
    ``sum_j <dN(e_ij), df(e*_ij)>``; both vanish along associated families.
    """
    Ni, Nj = _normals_on_edges(mesh, N)
    s = Ni + Nj
    s2 = np.einsum("ij,ij->i", s, s)
    if (np.sqrt(s2) < eps).any():
        k = int(np.argmin(s2))
        a, b = mesh.int_edges[k]
        raise AdmissibilityError(
            f"antipodal normals on edge {mesh.vertex_id(a)}-{mesh.vertex_id(b)}",
            edge=(mesh.vertex_id(a), mesh.vertex_id(b)),
        )
    df = edge_differences(mesh, f)
    dN = Nj - Ni
    # both per-edge terms are symmetric under i <-> j
    h = np.einsum("ij,ij->i", np.cross(dN, df), s) / s2
    dot = np.einsum("ij,ij->i", dN, df)
    return _vertex_sum(mesh, h), _vertex_sum(mesh, dot)


def family_edge_identities(mesh, f_theta, N, mu, theta):
    """Edgewise residuals of the P-net family identities

        df^theta(e*) x dN(e) = -mu sin(theta) (N_i + N_j) / 2
        <df^theta(e*), dN(e)> = mu cos(theta)

    for the normalization ``df = mu dN / |dN|^2`` of the A-minimal member,
    which is half of ``Re dF`` from the Weierstrass form with ``q = mu``.
    """
    Ni, Nj = _normals_on_edges(mesh, N)
    mu = np.asarray(mu, dtype=float)
    df = edge_differences(mesh, f_theta)
    dN = Nj - Ni
    lhs1 = np.cross(df, dN)
    rhs1 = -(mu * np.sin(theta))[:, None] * (Ni + Nj) / 2
    lhs2 = np.einsum("ij,ij->i", df, dN)
    rhs2 = mu * np.cos(theta)
    return np.linalg.norm(lhs1 - rhs1, axis=1), np.abs(lhs2 - rhs2)


# -- vector area and the area functional ---------------------------------------


def vector_area(polygon):
    """``1/2 sum_k p_k x p_{k+1}`` of a closed polygon given as ``(n, 3)``."""
    P = np.asarray(polygon, dtype=float)
    if len(P) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    return 0.5 * np.cross(P, np.roll(P, -1, axis=0)).sum(axis=0)


def face_vector_areas(mesh, f):
    """Vector area of every face of a primal realization ``f``."""
    P = np.asarray(f, dtype=float)[mesh.face_array]
    return 0.5 * np.cross(P, np.roll(P, -1, axis=1)).sum(axis=1)


def dual_vector_areas(mesh, f):
    """Vector area of the dual face of every interior vertex."""
    f = np.asarray(f, dtype=float)
    return np.array([vector_area(f[mesh.dual_face(i)]) for i in mesh.interior_vertices])


def total_area(mesh, f, sigma=None):
    """``sum_phi sigma_phi |A_phi|``; ``sigma`` defaults to all ``+1``."""
    A = np.linalg.norm(face_vector_areas(mesh, f), axis=1)
    if sigma is None:
        return float(A.sum())
    return float(np.dot(np.asarray(sigma, dtype=float), A))


def zero_area_faces(mesh, f, rtol=1e-12):
    A = np.linalg.norm(face_vector_areas(mesh, f), axis=1)
    return np.flatnonzero(A <= rtol * max(A.max(initial=0.0), 1e-300))


def gauss_signs(mesh, f, N):
    """``sigma_i = sign <N_i, A_i>`` for the dual faces of interior vertices.

    The result is aligned with ``mesh.interior_vertices``, hence with the
    faces of ``mesh.dual()``.
    """
    A = dual_vector_areas(mesh, f)
    s = np.einsum("ij,ij->i", A, np.asarray(N)[mesh.interior_vertices])
    return np.where(s >= 0, 1.0, -1.0)


def mean_curvature_vector(mesh, f, sigma=None):
    """``H_i = 1/2 sum_j dN_sigma(e*_ij) x df(e_ij)`` at interior vertices.

    ``N_sigma = sigma A / |A|`` per face.  With counterclockwise faces this is
    the negative gradient of :func:`total_area` with respect to the interior
    vertex positions: moving along ``H`` decreases the area.

    Raises
    ------
    DegenerateError
        If a face next to an interior vertex has zero vector area.
    """
    f = np.asarray(f, dtype=float)
    A = face_vector_areas(mesh, f)
    norm = np.linalg.norm(A, axis=1)
    sig = np.ones(mesh.n_faces) if sigma is None else np.asarray(sigma, dtype=float)
    touching = np.unique(np.concatenate([mesh.int_left, mesh.int_right]))
    scale = max(norm.max(initial=0.0), 1e-300)
    bad = touching[norm[touching] <= 1e-14 * scale]
    if len(bad):
        raise DegenerateError(f"face {int(bad[0])} has vanishing vector area")
    Ns = sig[:, None] * A / np.where(norm > 0, norm, 1.0)[:, None]
    a, b = mesh.int_edges.T
    dN = Ns[mesh.int_left] - Ns[mesh.int_right]
    term = np.cross(dN, f[b] - f[a])
    return 0.5 * _vertex_sum(mesh, term)


def _cot3(p, q, r):
    # cotangent of the angle at r in triangle p, q, r
    u, v = p - r, q - r
    return np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)


def cotan_balance(mesh, f):
    """``sum_j (cot angle jki + cot angle ilj)(f_j - f_i)`` per interior vertex.

    Equals ``2 * mean_curvature_vector(mesh, f)`` on triangulations.
    """
    f = np.asarray(f, dtype=float)
    if any(len(face) != 3 for face in mesh.faces):
        raise ValueError("cotan_balance needs a triangulated mesh")
    tri = np.array(mesh.faces)
    if (np.linalg.norm(face_vector_areas(mesh, f), axis=1) == 0).any():
        raise DegenerateError("degenerate triangle")
    a, b = mesh.int_edges.T
    opp_l = tri[mesh.int_left].sum(axis=1) - a - b
    opp_r = tri[mesh.int_right].sum(axis=1) - a - b
    w = _cot3(f[a], f[b], f[opp_l]) + _cot3(f[a], f[b], f[opp_r])
    flux = w[:, None] * (f[b] - f[a])
    acc = np.zeros((mesh.n_vertices, 3))
    np.add.at(acc, a, flux)
    np.add.at(acc, b, -flux)
    return acc[mesh.interior_vertices]


def _checked_area(mesh, g, sigma, floor):
    A = np.linalg.norm(face_vector_areas(mesh, g), axis=1)
    if (A <= floor).any():
        raise DegenerateError("vector area vanishes under the finite-difference step")
    return float(A.sum() if sigma is None else np.dot(sigma, A))


def area_gradient_fd(mesh, f, sigma=None, step=DEFAULT_FD_STEP):
    """Central-difference gradient of :func:`total_area` at interior vertices."""
    f = np.asarray(f, dtype=float)
    sig = None if sigma is None else np.asarray(sigma, dtype=float)
    floor = 1e-12 * max(np.linalg.norm(face_vector_areas(mesh, f), axis=1).max(), 1e-300)
    out = np.zeros((len(mesh.interior_vertices), 3))
    g = f.copy()
    for k, i in enumerate(mesh.interior_vertices):
        for c in range(3):
            g[i, c] = f[i, c] + step
            up = _checked_area(mesh, g, sig, floor)
            g[i, c] = f[i, c] - step
            down = _checked_area(mesh, g, sig, floor)
            g[i, c] = f[i, c]
            out[k, c] = (up - down) / (2 * step)
    return out


def area_directional_derivative_fd(mesh, f, direction, sigma=None, step=DEFAULT_FD_STEP):
    """Central difference of :func:`total_area` along ``direction`` (per-vertex 3-vectors)."""
    f = np.asarray(f, dtype=float)
    sig = None if sigma is None else np.asarray(sigma, dtype=float)
    floor = 1e-12 * max(np.linalg.norm(face_vector_areas(mesh, f), axis=1).max(), 1e-300)
    up = _checked_area(mesh, f + step * direction, sig, floor)
    down = _checked_area(mesh, f - step * direction, sig, floor)
    return (up - down) / (2 * step)


@dataclass
class FamilyAreaReport:
    thetas: np.ndarray
    deviation: np.ndarray  # per dual face, max over theta of |A^theta - A^0|
    sin_angle: np.ndarray  # per dual face, |sin angle(A^0, N_i)|
    scale: float

    def max_deviation(self):
        return float(self.deviation.max(initial=0.0))

    def max_sin_angle(self):
        return float(self.sin_angle.max(initial=0.0))


def vector_area_family_check(mesh, F, N, thetas):
    """Variation of dual-face vector areas along the associated family of ``F``."""
    N = np.asarray(N, dtype=float)
    A0 = dual_vector_areas(mesh, associated_surface(F, 0.0))
    dev = np.zeros(len(A0))
    for t in thetas:
        At = dual_vector_areas(mesh, associated_surface(F, t))
        dev = np.maximum(dev, np.linalg.norm(At - A0, axis=1))
    n0 = np.linalg.norm(A0, axis=1)
    cr = np.linalg.norm(np.cross(A0, N[mesh.interior_vertices]), axis=1)
    sin_angle = np.where(n0 > 0, cr / np.where(n0 > 0, n0, 1.0), 1.0)
    return FamilyAreaReport(
        np.asarray(thetas), dev, sin_angle, surface_scale(mesh, associated_surface(F, 0.0))
    )


@dataclass
class CurvatureReport:
    """Everything :mod:`dminimal.curv` knows about one family member.

    Edge arrays align with ``mesh.int_edges``; vertex arrays with
    ``mesh.interior_vertices``.
    """

    alpha: np.ndarray
    k: np.ndarray
    edge_length: np.ndarray
    scalar_mean_curvature: np.ndarray
    h_theta: np.ndarray
    dot_sum: np.ndarray
    vector_area: np.ndarray
    sigma: np.ndarray
    mean_curvature_vector: np.ndarray


def curvature_report(mesh, f, N):
    """Collect per-edge and per-vertex curvature data of a dual surface ``f``."""
    dih = dihedral_and_k(mesh, f, N)
    H = _vertex_sum(mesh, dih.term)
    h_theta, dot_sum = theta_curvatures(mesh, f, N)
    A = dual_vector_areas(mesh, f)
    sigma = gauss_signs(mesh, f, N)
    dual = mesh.dual()
    Hvec = mean_curvature_vector(dual, np.asarray(f)[dual.ids], sigma)
    return CurvatureReport(
        alpha=dih.alpha,
        k=dih.k,
        edge_length=dih.length,
        scalar_mean_curvature=H,
        h_theta=h_theta,
        dot_sum=dot_sum,
        vector_area=A,
        sigma=sigma,
        mean_curvature_vector=Hvec,
    )
