"""Small test geometries: the cube, a tent, and a cubic Schwarz-P patch.

The Schwarz-P-style polyhedron is the boundary between solid and empty unit
cubes of the integer lattice, where cube ``(a, b, c)`` is solid iff at most
one of ``a, b, c`` is odd.  Every lattice edge then bends the surface by a
right angle, every vertex carries six squares, and each square has two
convex and two concave edges.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .io import NetDocument
from .mesh import build_mesh

SCHWARZ_P_RESOURCE = "schwarz_p_patch.json"


def octahedron():
    """Closed octahedron with vertices ``+-e_k`` (ids 0..5 = +x, -x, +y, -y, +z, -z).

    Returns ``(mesh, N)``.  As a Gauss map its dual faces are the faces of a
    cube.
    """
    N = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    faces = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                tri = [0 if sx > 0 else 1, 2 if sy > 0 else 3, 4 if sz > 0 else 5]
                # counterclockwise seen from outside iff the octant is positively oriented
                if sx * sy * sz < 0:
                    tri = tri[::-1]
                faces.append(tri)
    return build_mesh(range(6), faces), N


def cube_example(edge=1.0):
    """``(mesh, f, N, Nhat)`` for the cube as a surface with octahedral Gauss map.

    ``f`` places the corner of each octant at ``edge/2 * (sx, sy, sz)``;
    ``Nhat`` are the poles of the octahedron's faces, ``(sx, sy, sz)``.
    """
    mesh, N = octahedron()
    corners = np.array([N[list(face)].sum(axis=0) for face in mesh.faces])
    return mesh, 0.5 * edge * corners, N, corners


def tent(n=6, height=1.0, radius=1.0):
    """Triangulated fan over a regular planar ``n``-gon with the apex lifted.

    Returns ``(mesh, f)``; the apex has id 0 and is the only interior vertex.
    """
    t = 2 * np.pi * np.arange(n) / n
    f = np.vstack([[0.0, 0.0, height], np.stack([radius * np.cos(t), radius * np.sin(t), np.zeros(n)], 1)])
    faces = [[0, 1 + k, 1 + (k + 1) % n] for k in range(n)]
    return build_mesh(range(n + 1), faces), f


def _solid(a, b, c):
    return (a % 2) + (b % 2) + (c % 2) <= 1


def schwarz_p_polyhedron(size=4):
    """Square faces of the solid/empty interface inside the cube block ``[0, size)^3``.

    Returns ``(mesh, p)`` with lattice points as vertices and oriented unit
    squares as faces; square normals point from solid to empty cubes.
    """
    squares = []
    rng = range(size)
    for a in rng:
        for b in rng:
            for c in rng:
                for axis in range(3):
                    nb = [a, b, c]
                    nb[axis] += 1
                    if nb[axis] >= size or _solid(a, b, c) == _solid(*nb):
                        continue
                    # the shared square lies in the plane x_axis = nb[axis]
                    u, v = (axis + 1) % 3, (axis + 2) % 3
                    base = np.array(nb)
                    du, dv = np.eye(3, dtype=int)[u], np.eye(3, dtype=int)[v]
                    quad = [base, base + du, base + du + dv, base + dv]
                    # (du, dv, e_axis) is right-handed: counterclockwise about +e_axis
                    if not _solid(a, b, c):
                        quad = quad[::-1]
                    squares.append([tuple(x) for x in quad])
    points = sorted({x for sq in squares for x in sq})
    index = {x: k for k, x in enumerate(points)}
    mesh = build_mesh(range(len(points)), [[index[x] for x in sq] for sq in squares])
    return mesh, np.array(points, dtype=float)


def polyhedron_as_cminimal(poly, p):
    """View a polyhedral surface as a dual realization.

    Returns ``(mesh, f, N)``: ``mesh`` is the dual of ``poly`` (one vertex per
    face of ``poly``), ``N`` the unit face normals, and ``f`` the polyhedron's
    interior vertices, one per face of ``mesh``.
    """
    p = np.asarray(p, dtype=float)
    P = p[poly.face_array]
    A = 0.5 * np.cross(P, np.roll(P, -1, axis=1)).sum(axis=1)
    N = A / np.linalg.norm(A, axis=1)[:, None]
    mesh = poly.dual()
    # mesh.ids are face indices of poly; mesh.faces follow poly.interior_vertices
    return mesh, p[poly.interior_vertices], N[mesh.ids]


def schwarz_p_document(size=4):
    mesh, p = schwarz_p_polyhedron(size)
    return NetDocument.from_polyhedron(
        mesh, p, meta={"kind": "polyhedral_surface", "name": "schwarz_p_patch", "size": size}
    )


def load_schwarz_p():
    """The bundled patch as ``(mesh, f, N)`` ready for :func:`dminimal.curv.verify_cminimal`."""
    text = resources.files("dminimal.data").joinpath(SCHWARZ_P_RESOURCE).read_text()
    doc = NetDocument.loads(text)
    poly = doc.mesh()
    return polyhedron_as_cminimal(poly, doc.positions(poly))
