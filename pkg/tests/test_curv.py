import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dminimal import assets, curv, stress, weier
from dminimal.errors import AdmissibilityError, DegenerateError
from dminimal.holo import grid_mesh
from dminimal.mesh import build_mesh

from conftest import exp_net, grid_net, random_patch, tri_grid


def family(net):
    mesh, z, q = net
    F = weier.weierstrass_surface(mesh, z, q)
    return mesh, z, q, F, weier.stereographic_lift(z, mesh)


def brute_area(mesh, f, sigma=None):
    # sum of |vector area| using triangle fans from the first vertex
    total = 0.0
    for k, face in enumerate(mesh.faces):
        P = f[list(face)]
        A = sum(np.cross(P[i] - P[0], P[i + 1] - P[0]) for i in range(1, len(P) - 1)) / 2
        total += (1 if sigma is None else sigma[k]) * np.linalg.norm(A)
    return total


# -- vector area ----------------------------------------------------------------------


def test_unit_square_vector_area():
    sq = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]
    np.testing.assert_array_equal(curv.vector_area(sq), (0, 0, 1))


def test_back_and_forth_polygon():
    P = [(0, 0, 0), (1, 0, 0), (1, 1, 1), (1, 0, 0)]
    np.testing.assert_array_equal(curv.vector_area(P), (0, 0, 0))


def test_skew_quad():
    P = [(0, 0, 0), (1, 0, 0), (1, 1, 1), (0, 1, 1)]
    np.testing.assert_array_equal(curv.vector_area(P), (0, -1, 1))


def test_short_polygon_rejected():
    with pytest.raises(ValueError):
        curv.vector_area([(0, 0, 0), (1, 0, 0)])


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, (6, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, (3,), elements=st.floats(-10, 10)),
)
def test_vector_area_translation_invariant(P, t):
    np.testing.assert_allclose(curv.vector_area(P + t), curv.vector_area(P), atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 12), st.floats(0.1, 5), st.floats(-3, 3))
def test_planar_polygon_area(n, r, tilt):
    # regular n-gon in a tilted plane: magnitude is the enclosed area, direction the normal
    t = 2 * np.pi * np.arange(n) / n
    P = np.stack([r * np.cos(t), r * np.sin(t), np.zeros(n)], 1)
    c, s = math.cos(tilt), math.sin(tilt)
    R = np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    A = curv.vector_area(P @ R.T)
    assert np.linalg.norm(A) == pytest.approx(0.5 * n * r * r * math.sin(2 * math.pi / n))
    np.testing.assert_allclose(A / np.linalg.norm(A), R[:, 2], atol=1e-12)


# -- total area -------------------------------------------------------------------------


def test_unit_square_area_signs():
    m = build_mesh(range(4), [[0, 1, 2, 3]])
    f = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], float)
    assert curv.total_area(m, f) == 1
    assert curv.total_area(m, f, [-1]) == -1


def test_total_area_brute_force(rng):
    mesh = grid_mesh(4, 5)
    f = rng.standard_normal((mesh.n_vertices, 3))
    sigma = rng.choice([-1.0, 1.0], mesh.n_faces)
    assert curv.total_area(mesh, f, sigma) == pytest.approx(brute_area(mesh, f, sigma))


def test_zero_area_faces_flagged():
    m = build_mesh(range(4), [[0, 1, 2, 3]])
    f = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 1), (1, 0, 0)], float)
    assert list(curv.zero_area_faces(m, f)) == [0]


def test_family_area_stable():
    mesh, z, q, F, N = family(grid_net())
    d = mesh.dual()
    areas = []
    for t in weier.theta_samples(8):
        f = weier.associated_surface(F, t)
        sigma = curv.gauss_signs(mesh, f, N)
        areas.append(curv.total_area(d, f[d.ids], sigma))
    assert areas[0] > 0
    np.testing.assert_allclose(areas, areas[0], rtol=1e-12)


# -- A- and C-minimality -------------------------------------------------------------------


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_aminimal_and_cminimal(make):
    mesh, z, q, F, N = family(make())
    f, ft = weier.associated_surface(F, 0), weier.associated_surface(F, math.pi / 2)
    scale = curv.surface_scale(mesh, f)
    cross, dot = curv.verify_aminimal(mesh, f, N)
    assert max(cross.max(), dot.max()) <= 1e-10 * scale
    rep = curv.verify_cminimal(mesh, ft, N)
    assert rep.passed
    # the conjugate is generically not A-minimal
    cross, _ = curv.verify_aminimal(mesh, ft, N)
    assert cross.max() > 1e-3 * scale
    assert not curv.is_aminimal(mesh, ft, N)


def test_constant_is_aminimal():
    mesh, z, q, F, N = family(grid_net())
    cross, dot = curv.verify_aminimal(mesh, np.ones((mesh.n_faces, 3)), N)
    assert np.all(cross == 0) and np.all(dot == 0)


def test_planarity_residual_detects_bump():
    mesh, z, q, F, N = family(grid_net())
    ft = weier.associated_surface(F, math.pi / 2).copy()
    i = mesh.interior_vertices[0]
    ft[mesh.dual_face(i)[0]] += 1e-3 * N[i]
    rep = curv.verify_cminimal(mesh, ft, N)
    assert not rep.passed and rep.max_planarity > 1e-4


def test_cminimal_edge_term_identity():
    mesh, z, q, F, N = family(exp_net())
    ft = weier.associated_surface(F, math.pi / 2)
    d = curv.dihedral_and_k(mesh, ft, N)
    a, b = mesh.int_edges.T
    rhs = d.k * (1 - np.einsum("ij,ij->i", N[a], N[b]))
    scale = curv.surface_scale(mesh, ft)
    assert np.abs(d.term - rhs).max() <= 1e-10 * scale
    assert d.k_residual.max() <= 1e-10 * scale
    assert np.all(np.abs(d.alpha) < math.pi)


def test_cube():
    mesh, f, N, Nhat = assets.cube_example()
    d = curv.dihedral_and_k(mesh, f, N)
    np.testing.assert_allclose(np.cos(d.alpha), 0, atol=1e-15)
    np.testing.assert_allclose(np.abs(np.tan(d.alpha / 2)), 1)
    H = curv.scalar_mean_curvature(mesh, f, N)
    np.testing.assert_allclose(np.abs(H), 4)
    assert not curv.verify_cminimal(mesh, f, N).passed


def test_degenerate_and_coplanar_edges():
    # two coplanar unit squares side by side over a tiny mesh: N equal across the edge
    mesh = build_mesh(range(4), [[0, 1, 2], [0, 2, 3]])
    N = np.array([(0, 0, 1)] * 4, float)
    f = np.array([(0, 0, 0), (1, 0, 0)], float)
    d = curv.dihedral_and_k(mesh, f, N)
    assert d.term[0] == 0 and d.alpha[0] == 0 and np.isnan(d.k[0])
    d = curv.dihedral_and_k(mesh, np.zeros((2, 3)), N)
    assert d.term[0] == 0 and d.k[0] == 0 and np.isnan(d.alpha[0])


def test_antipodal_normals_rejected():
    mesh = build_mesh(range(4), [[0, 1, 2], [0, 2, 3]])
    N = np.array([(0, 0, 1), (1, 0, 0), (0, 0, -1), (0, 1, 0)], float)
    with pytest.raises(AdmissibilityError):
        curv.dihedral_and_k(mesh, np.zeros((2, 3)), N)
    with pytest.raises(AdmissibilityError):
        curv.theta_curvatures(mesh, np.zeros((2, 3)), N)
    assert not curv.verify_cminimal(mesh, np.zeros((2, 3)), N).admissible


def test_schwarz_p_asset():
    mesh, f, N = assets.load_schwarz_p()
    H = curv.scalar_mean_curvature(mesh, f, N)
    assert len(H) > 0 and np.all(H == 0)
    d = curv.dihedral_and_k(mesh, f, N)
    assert np.all(d.length == 1)
    assert set(np.round(d.alpha / (math.pi / 2)).astype(int)) <= {-1, 0, 1}
    np.testing.assert_allclose(np.abs(d.alpha), math.pi / 2, atol=1e-15)
    # each square carries two convex and two concave edges
    for k, i in enumerate(mesh.interior_vertices):
        sign = []
        for j in mesh.rotation(i):
            e = mesh.int_edge_index[(min(i, j), max(i, j))]
            sign.append(np.sign(d.alpha[e]))
        assert sorted(sign) == [-1, -1, 1, 1]
    assert curv.verify_cminimal(mesh, f, N).passed


def test_schwarz_p_asset_matches_generator():
    mesh, f, N = assets.load_schwarz_p()
    poly, p = assets.schwarz_p_polyhedron(4)
    m2, f2, N2 = assets.polyhedron_as_cminimal(poly, p)
    np.testing.assert_array_equal(f, f2)
    np.testing.assert_array_equal(N, N2)


# -- theta curvatures and family identities ---------------------------------------------------


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_theta_curvatures_vanish(make):
    mesh, z, q, F, N = family(make())
    scale = curv.surface_scale(mesh, weier.associated_surface(F, 0))
    for t in weier.theta_samples(16):
        f = weier.associated_surface(F, t)
        h, dots = curv.theta_curvatures(mesh, f, N)
        assert np.abs(h).max() <= 1e-10 * scale
        assert np.abs(dots).max() <= 1e-10 * scale
        c, d = curv.family_edge_identities(mesh, 0.5 * f, N, q, t)
        assert c.max() <= 1e-10 * scale and d.max() <= 1e-10 * scale


def test_theta_half_pi_is_scalar_mean_curvature(rng):
    # per edge, for any df~ = k N_i x N_j the two summands agree
    mesh, z, q, F, N = family(exp_net())
    a, b = mesh.int_edges.T
    k = rng.uniform(0.5, 1.5, len(a))
    eta = k[:, None] * np.cross(N[a], N[b])
    s = N[a] + N[b]
    h_edge = np.einsum("ij,ij->i", np.cross(N[b] - N[a], eta), s) / np.einsum("ij,ij->i", s, s)
    np.testing.assert_allclose(h_edge, k * (1 - np.einsum("ij,ij->i", N[a], N[b])), atol=1e-12)
    ft = weier.associated_surface(F, math.pi / 2)
    h, _ = curv.theta_curvatures(mesh, ft, N)
    H = curv.scalar_mean_curvature(mesh, ft, N)
    np.testing.assert_allclose(h, H, atol=1e-10 * curv.surface_scale(mesh, ft))


def test_theta_half_pi_matches_on_cube():
    mesh, f, N, _ = assets.cube_example()
    h, _ = curv.theta_curvatures(mesh, f, N)
    np.testing.assert_allclose(h, curv.scalar_mean_curvature(mesh, f, N), atol=1e-14)


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_vector_area_family(make):
    mesh, z, q, F, N = family(make())
    rep = curv.vector_area_family_check(mesh, F, N, weier.theta_samples(16))
    assert rep.max_deviation() <= 1e-10 * rep.scale
    assert rep.max_sin_angle() <= 1e-10


def test_gauss_signs_positive_on_pnet_family():
    mesh, z, q, F, N = family(exp_net())
    for t in weier.theta_samples(4):
        s = curv.gauss_signs(mesh, weier.associated_surface(F, t), N)
        assert set(s) <= {-1.0, 1.0}
        assert np.all(s == 1)


# -- mixed area -----------------------------------------------------------------------------


def test_mixed_area_cube():
    mesh, f, N, Nhat = assets.cube_example()
    np.testing.assert_allclose(stress.polar_mesh(mesh, N), Nhat)
    M = curv.mixed_area_conical(mesh, f, N, Nhat)
    np.testing.assert_allclose(M, curv.scalar_mean_curvature(mesh, f, N), atol=1e-12)
    np.testing.assert_allclose(M, 4)
    np.testing.assert_allclose(curv.mixed_area_conical(mesh, 2.5 * f, N, Nhat), 2.5 * M)


def test_mixed_area_requires_polar():
    mesh, f, N, Nhat = assets.cube_example()
    with pytest.raises(DegenerateError):
        curv.mixed_area_conical(mesh, f, N, 1.1 * Nhat)


# -- mean curvature vector, cotangent formula and the area gradient --------------------------


def test_planar_grid_mean_curvature_zero():
    mesh, z, _, _ = tri_grid(5, 5)
    f = np.stack([z.real, z.imag, np.zeros(len(z))], 1)
    assert np.abs(curv.mean_curvature_vector(mesh, f)).max() < 1e-15
    assert np.abs(curv.cotan_balance(mesh, f)).max() < 1e-14
    assert np.abs(curv.area_gradient_fd(mesh, f)).max() <= 1e-6


def test_tent():
    mesh, f = assets.tent(6)
    H = curv.mean_curvature_vector(mesh, f)[0]
    assert abs(H[0]) < 1e-14 and abs(H[1]) < 1e-14 and H[2] < 0
    g = curv.area_gradient_fd(mesh, f)[0]
    # moving the apex along H lowers the area
    np.testing.assert_allclose(-g, H, rtol=1e-6, atol=1e-9)
    c = curv.cotan_balance(mesh, f)[0]
    assert abs(c[0]) < 1e-14 and abs(c[1]) < 1e-14
    np.testing.assert_allclose(c, 2 * H, atol=1e-12)


def test_tent_matches_closed_form():
    # apex over a regular n-gon: |grad area| = n * h * r * sin(2 pi/n) / (4 * sqrt(h^2 + r^2 cos^2(pi/n)))
    n, h, r = 6, 1.0, 1.0
    mesh, f = assets.tent(n, h, r)
    rho = r * math.cos(math.pi / n)
    side = 2 * r * math.sin(math.pi / n)
    expected = n * side / 2 * h / math.hypot(h, rho)
    H = curv.mean_curvature_vector(mesh, f)[0]
    assert H[2] == pytest.approx(-expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_cotan_equals_twice_mean_curvature(seed):
    mesh, f = random_patch(np.random.default_rng(seed))
    H = curv.mean_curvature_vector(mesh, f)
    scale = np.linalg.norm(f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]], axis=1).max()
    assert np.abs(curv.cotan_balance(mesh, f) - 2 * H).max() <= 1e-10 * scale


def test_cotan_requires_triangles():
    mesh = grid_mesh(3, 3)
    with pytest.raises(ValueError):
        curv.cotan_balance(mesh, np.zeros((9, 3)))


def test_mean_curvature_degenerate_face():
    mesh, f = assets.tent(4)
    f = f.copy()
    f[1] = f[0]
    with pytest.raises(DegenerateError):
        curv.mean_curvature_vector(mesh, f)


@pytest.mark.parametrize("seed", range(3))
def test_gradient_identity_random_patch(seed):
    r = np.random.default_rng(seed)
    mesh, f = random_patch(r)
    H = curv.mean_curvature_vector(mesh, f)
    g = curv.area_gradient_fd(mesh, f)
    np.testing.assert_allclose(g, -H, atol=1e-8)
    for _ in range(10):
        fdot = np.zeros_like(f)
        fdot[mesh.interior_vertices] = r.standard_normal((len(mesh.interior_vertices), 3))
        dA = curv.area_directional_derivative_fd(mesh, f, fdot)
        assert abs(np.sum(H * fdot[mesh.interior_vertices]) + dA) <= 1e-6 * np.linalg.norm(fdot)


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_family_is_area_critical(make):
    mesh, z, q, F, N = family(make())
    d = mesh.dual()
    for t in weier.theta_samples(4):
        full = weier.associated_surface(F, t)
        sigma = curv.gauss_signs(mesh, full, N)
        f = full[d.ids]
        scale = curv.surface_scale(mesh, full)
        H = curv.mean_curvature_vector(d, f, sigma)
        assert np.abs(H).max() <= 1e-10 * scale
        assert np.abs(curv.area_gradient_fd(d, f, sigma)).max() <= 1e-6 * scale


def test_fd_refuses_vanishing_area():
    # a step of 1e-5 along the direction flattens the sliver triangle exactly
    mesh = build_mesh(range(3), [[0, 1, 2]])
    f = np.array([(0, 0, 0), (1, 0, 0), (0, 1e-5, 0)], float)
    direction = np.array([(0, 0, 0), (0, 0, 0), (0, -1, 0)], float)
    with pytest.raises(DegenerateError):
        curv.area_directional_derivative_fd(mesh, f, direction, step=1e-5)


def test_curvature_report_shapes():
    mesh, z, q, F, N = family(grid_net())
    rep = curv.curvature_report(mesh, weier.associated_surface(F, math.pi / 2), N)
    n_e, n_v = len(mesh.int_edges), len(mesh.interior_vertices)
    assert rep.alpha.shape == rep.k.shape == rep.edge_length.shape == (n_e,)
    assert rep.scalar_mean_curvature.shape == rep.h_theta.shape == (n_v,)
    assert rep.vector_area.shape == (n_v, 3)
    assert set(rep.sigma) <= {-1.0, 1.0}
