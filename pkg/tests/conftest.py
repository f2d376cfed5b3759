import numpy as np
import pytest

from dminimal import holo
from dminimal.mesh import build_mesh


def grid_net(m=5, n=5, origin=-0.8 - 0.8j, spacing=0.4):
    mesh, z = holo.generate_net("grid", m=m, n=n, origin=origin, spacing=spacing)
    return mesh, z, holo.p_labeling(mesh)


def exp_net(a=0.3, b=0.4, m=6, n=6):
    mesh, z = holo.generate_net("exp", a=a, b=b, m=m, n=n)
    return mesh, z, holo.p_labeling(mesh)


def isothermic_exp_net(b=0.4, m=7, n=7):
    # quad cross-ratio -sinh(a/2)^2 / sin(b/2)^2 equals -1 for this a
    a = 2 * np.arcsinh(np.sin(b / 2))
    mesh, z = holo.generate_net("exp", a=a, b=b, m=m, n=n)
    return mesh, z


def dual_sublattice_net(parity=0, b=0.4, m=7, n=7, shift=0.2 + 0.1j):
    """A P-net from one sublattice of the isothermic dual of an exp net.

    The shift keeps the Gauss map away from the pole at infinity and from the
    origin's antipode.
    """
    mesh, z = isothermic_exp_net(b, m, n)
    zs = holo.isothermic_dual(mesh, z)
    sub, w = holo.sublattice_pnet(mesh, zs, parity)
    w = (w - w.mean()) / np.abs(w - w.mean()).max() + shift
    return sub, w, holo.p_labeling(sub)


def tri_grid(m, n, z=None, heights=None):
    """Unit grid triangulated with all diagonals from (r, s) to (r+1, s+1)."""
    faces = []
    for r in range(m - 1):
        for s in range(n - 1):
            v0, v1, v2, v3 = r * n + s, (r + 1) * n + s, (r + 1) * n + s + 1, r * n + s + 1
            faces += [[v0, v1, v2], [v0, v2, v3]]
    mesh = build_mesh(range(m * n), faces)
    rr, ss = np.divmod(np.arange(m * n), n)
    if z is None:
        z = rr + 1j * ss
    return mesh, np.asarray(z, dtype=complex), rr, ss


def random_patch(rng, m=5, n=5, jitter=0.2, height=0.5):
    """Non-flat triangulated patch in R^3 with jittered planar shadow."""
    mesh, z, rr, ss = tri_grid(m, n)
    z = z + jitter * (rng.uniform(-1, 1, len(z)) + 1j * rng.uniform(-1, 1, len(z)))
    f = np.stack([z.real, z.imag, height * rng.standard_normal(len(z))], axis=1)
    return mesh, f


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid():
    return grid_net()


@pytest.fixture
def expnet():
    return exp_net()


NETS = {
    "grid": grid_net,
    "exp": exp_net,
    "dual_even": lambda: dual_sublattice_net(0),
    "dual_odd": lambda: dual_sublattice_net(1),
}


@pytest.fixture(params=sorted(NETS))
def pnet(request):
    return NETS[request.param]()
