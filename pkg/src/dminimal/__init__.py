"""Discrete minimal surfaces from discrete holomorphic quadratic differentials.

Modules
-------
mesh    oriented cell decompositions, duals, discrete 1-forms
holo    P-nets, quadratic differentials, Moebius maps, isothermic duals
weier   Weierstrass form, associated family, conjugation, Goursat transform
curv    A-/C-minimality, scalar and vector mean curvature, area
stress  self-stresses on the Gauss map and the polar mesh
cli     ``dminimal`` command line tool
"""

from .mesh import Mesh, build_mesh
from .holo import MobiusCoeffs, generate_net, p_labeling, verify_qhd
from .weier import associated_surface, stereographic_lift, weierstrass_form, weierstrass_surface

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "MobiusCoeffs",
    "associated_surface",
    "build_mesh",
    "generate_net",
    "p_labeling",
    "stereographic_lift",
    "verify_qhd",
    "weierstrass_form",
    "weierstrass_surface",
]
