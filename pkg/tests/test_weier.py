import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dminimal import curv, holo, weier
from dminimal.errors import AdmissibilityError, MobiusError, NotClosedError, NotHolomorphicError
from dminimal.holo import MobiusCoeffs
from dminimal.mesh import closedness_residuals

from conftest import exp_net, grid_net


def surface(net):
    mesh, z, q = net
    return mesh, z, q, weier.weierstrass_surface(mesh, z, q), weier.stereographic_lift(z, mesh)


@pytest.mark.parametrize(
    "z,expected",
    [(0, (0, 0, -1)), (1, (1, 0, 0)), (1 + 1j, (2 / 3, 2 / 3, 1 / 3))],
)
def test_lift_examples(z, expected):
    np.testing.assert_allclose(weier.stereographic_lift(np.array([z]))[0], expected, atol=1e-15)


def test_lift_is_unit_and_inverts(rng):
    z = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    N = weier.stereographic_lift(z)
    np.testing.assert_allclose(np.linalg.norm(N, axis=1), 1, atol=1e-12)
    np.testing.assert_allclose(weier.stereographic_projection(N), z, rtol=1e-12)


def test_antipodal_edge_flagged():
    mesh, z, _ = grid_net(m=3, n=3, origin=0, spacing=1)
    z = z.copy()
    a, b = mesh.edges[0]
    z[b] = -1 / np.conj(z[a]) if z[a] != 0 else z[b]
    if z[a] == 0:
        z[a] = 0.5
        z[b] = -2.0
    with pytest.raises(AdmissibilityError) as info:
        weier.stereographic_lift(z, mesh)
    assert set(info.value.edge) == {mesh.vertex_id(a), mesh.vertex_id(b)}


def test_edge_vectors_worked_examples():
    z = np.array([0, 1, 1j])
    np.testing.assert_allclose(1 * weier.weierstrass_vectors(z[0], z[1]), (1, 1j, 1))
    np.testing.assert_allclose(-1 * weier.weierstrass_vectors(z[0], z[2]), (1j, -1, -1))


def test_grid_interior_vertex_closed():
    mesh, z = holo.generate_net("grid", m=3, n=3)
    q = holo.p_labeling(mesh)
    eta = weier.weierstrass_form(mesh, z, q)
    assert np.all(closedness_residuals(mesh, eta) == 0)


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_form_closed_and_trees_agree(make):
    mesh, z, q = make()
    eta = weier.weierstrass_form(mesh, z, q)
    scale = np.abs(eta).max()
    assert np.abs(closedness_residuals(mesh, eta)).max() <= 1e-11 * scale
    F1 = weier.integrate_surface(mesh, eta, tree="bfs")
    F2 = weier.integrate_surface(mesh, eta, tree="dfs")
    assert np.abs(F1 - F2).max() <= 1e-13 * np.abs(F1).max()
    np.testing.assert_allclose(weier.edge_differences(mesh, F1), eta, atol=1e-12 * scale)
    assert np.all(F1[0] == 0)


def test_non_holomorphic_refused():
    mesh, z, q = grid_net()
    q = q.copy()
    q[5] = 0
    with pytest.raises(NotHolomorphicError) as info:
        weier.weierstrass_form(mesh, z, q)
    assert info.value.vertex is not None


def test_closedness_iff_holomorphic(rng):
    # perturbing q breaks the qhd sums and closedness at the same vertices
    mesh, z, q = exp_net()
    for _ in range(20):
        p = q.copy()
        k = rng.integers(len(p))
        p[k] += rng.uniform(0.1, 1)
        s0, s1 = holo.verify_qhd(mesh, z, p)
        bad_q = (np.abs(s0) > 1e-9) | (np.abs(s1) > 1e-9)
        res = closedness_residuals(mesh, weier.weierstrass_form(mesh, z, p, check=False))
        bad_eta = np.linalg.norm(res, axis=1) > 1e-9
        np.testing.assert_array_equal(bad_q, bad_eta)
        assert bad_q.any() or not set(mesh.int_edges[k]) & set(mesh.interior_vertices)


def test_zero_q_constant_surface():
    mesh, z, q = grid_net()
    F = weier.weierstrass_surface(mesh, z, np.zeros_like(q))
    assert np.all(F == 0)


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_real_and_imaginary_edge_identities(make):
    mesh, z, q = make()
    eta = weier.weierstrass_form(mesh, z, q)
    N = weier.stereographic_lift(z, mesh)
    a, b = mesh.int_edges.T
    s = q * (1 + abs(z[a]) ** 2) * (1 + abs(z[b]) ** 2) / (2 * abs(z[b] - z[a]) ** 2)
    scale = np.abs(eta).max()
    np.testing.assert_allclose(eta.real, s[:, None] * (N[b] - N[a]), atol=1e-10 * scale)
    np.testing.assert_allclose((1j * eta).real, s[:, None] * np.cross(N[a], N[b]), atol=1e-10 * scale)
    plan = np.einsum("ij,ij->i", N[a], (1j * eta).real)
    assert np.abs(plan).max() <= 1e-10 * scale


def test_associated_examples(grid):
    mesh, z, q = grid
    F = weier.weierstrass_surface(mesh, z, q)
    np.testing.assert_array_equal(weier.associated_surface(F, 0), F.real)
    tol = 1e-15 * np.abs(F).max()
    np.testing.assert_allclose(weier.associated_surface(F, math.pi), -F.real, atol=tol)
    np.testing.assert_allclose(weier.associated_surface(F, math.pi / 2), -F.imag, atol=tol)


def test_theta_samples():
    t = weier.theta_samples(16)
    assert len(t) == 16 and t[0] == 0 and t[-1] < 2 * math.pi


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_conjugate_from_aminimal(make):
    mesh, z, q, F, N = surface(make())
    f = weier.associated_surface(F, 0)
    g = weier.conjugate_from_aminimal(mesh, f, N)
    ref = weier.associated_surface(F, math.pi / 2)
    scale = curv.surface_scale(mesh, f)
    shift = (g - ref).mean(axis=0)
    assert np.abs(g - ref - shift).max() <= 1e-10 * scale


def test_conjugate_of_constant():
    mesh, z, q, F, N = surface(grid_net())
    g = weier.conjugate_from_aminimal(mesh, np.ones((mesh.n_faces, 3)), N)
    assert np.all(g == 0)


def test_conjugate_rejects_non_aminimal(grid):
    mesh, z, q, F, N = surface(grid)
    f = weier.associated_surface(F, 0).copy()
    f[mesh.int_left[7]] += (0.3, -0.2, 0.1)
    with pytest.raises(NotClosedError):
        weier.conjugate_from_aminimal(mesh, f, N)


# -- Goursat ------------------------------------------------------------------------------


def test_goursat_identity():
    np.testing.assert_array_equal(weier.goursat_matrix(MobiusCoeffs.identity()), np.eye(3))


def test_goursat_dilation():
    s = 0.37
    A = weier.goursat_matrix(MobiusCoeffs(math.exp(s), 0, 0, math.exp(-s)))
    c, h = math.cosh(2 * s), math.sinh(2 * s)
    np.testing.assert_allclose(A, [[c, 1j * h, 0], [-1j * h, c, 0], [0, 0, 1]], atol=1e-14)


def test_goursat_rotation():
    phi = 0.8
    A = weier.goursat_matrix(MobiusCoeffs(np.exp(0.5j * phi), 0, 0, np.exp(-0.5j * phi)))
    R = [[math.cos(phi), -math.sin(phi), 0], [math.sin(phi), math.cos(phi), 0], [0, 0, 1]]
    np.testing.assert_allclose(A, R, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_goursat_orthogonal(seed):
    phi = holo.random_mobius(np.random.default_rng(seed))
    A = weier.goursat_matrix(phi)
    assert np.abs(A @ A.T - np.eye(3)).max() <= 1e-12 * max(1.0, np.abs(A).max() ** 2)


def test_goursat_composition(rng):
    for _ in range(20):
        p, s = holo.random_mobius(rng), holo.random_mobius(rng)
        lhs = weier.goursat_matrix(p.compose(s))
        rhs = weier.goursat_matrix(p) @ weier.goursat_matrix(s)
        np.testing.assert_allclose(lhs, rhs, atol=1e-11 * np.abs(rhs).max())
        # the sign of the normalized coefficients does not matter
        neg = MobiusCoeffs(-p.a, -p.b, -p.c, -p.d)
        np.testing.assert_allclose(weier.goursat_matrix(neg), weier.goursat_matrix(p))


@pytest.mark.parametrize("make", [grid_net, exp_net])
def test_goursat_transform_matches_form(make, rng):
    mesh, z, q, F, N = surface(make())
    for _ in range(5):
        phi = holo.random_mobius(rng, spread=0.5)
        phi = MobiusCoeffs.normalized(1 + 0.3 * phi.a, 0.3 * phi.b, 0.3 * phi.c, 1 + 0.3 * phi.d)
        Fp, zp, Np = weier.goursat_transform(mesh, z, F, phi)
        eta = weier.weierstrass_form(mesh, zp, q)
        scale = np.abs(eta).max()
        assert np.abs(weier.edge_differences(mesh, Fp) - eta).max() <= 1e-10 * scale
        fa = weier.associated_surface(Fp, 0)
        assert curv.is_aminimal(mesh, fa, Np)
        assert curv.verify_cminimal(mesh, weier.associated_surface(Fp, math.pi / 2), Np).passed


def test_goursat_rotation_is_rigid(grid):
    mesh, z, q, F, N = surface(grid)
    phi = MobiusCoeffs(np.exp(0.35j), 0, 0, np.exp(-0.35j))
    Fp, zp, Np = weier.goursat_transform(mesh, z, F, phi)
    R = weier.goursat_matrix(phi).real
    np.testing.assert_allclose(Fp, F @ R.T, atol=1e-13)
    ft, fpt = weier.associated_surface(F, math.pi / 2), weier.associated_surface(Fp, math.pi / 2)
    np.testing.assert_allclose(
        curv.scalar_mean_curvature(mesh, ft, N), curv.scalar_mean_curvature(mesh, fpt, Np), atol=1e-13
    )
    np.testing.assert_allclose(
        np.linalg.norm(curv.dual_vector_areas(mesh, ft), axis=1),
        np.linalg.norm(curv.dual_vector_areas(mesh, fpt), axis=1),
        atol=1e-13,
    )


def test_goursat_vertex_at_infinity(grid):
    mesh, z, q, F, N = surface(grid)
    with pytest.raises(MobiusError):
        weier.goursat_transform(mesh, z, F, MobiusCoeffs.normalized(1, 0, 1, -z[3]))


def test_goursat_inadmissible(grid):
    mesh, z, q, F, N = surface(grid)
    a, b = mesh.edges[0]
    # choose phi with phi(z_a) = 1, phi(z_b) = -1, whose lifts are antipodal
    za, zb = z[a], z[b]
    m = (za + zb) / 2
    phi = MobiusCoeffs.normalized(1, -m, 0, (za - zb) / 2)
    assert abs(phi(za) - 1) < 1e-12 and abs(phi(zb) + 1) < 1e-12
    with pytest.raises(AdmissibilityError):
        weier.goursat_transform(mesh, z, F, phi)
