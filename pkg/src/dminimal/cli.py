"""Command line interface: ``dminimal gen | verify | build``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import assets, curv, holo, stress, weier
from .errors import (
    AdmissibilityError,
    DegenerateError,
    LabelingError,
    MeshError,
    MobiusError,
    NotClosedError,
    NotHolomorphicError,
)
from .io import DocumentError, NetDocument, read_net, read_obj, read_surface, write_net, write_obj, write_surface

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# -- reports ----------------------------------------------------------------------


class Report:
    def __init__(self, command, source):
        self.command = command
        self.source = source
        self.checks = {}

    def add(self, name, residual, tol, element=None, informational=False):
        if name in self.checks:
            raise KeyError(f"check {name} reported twice")
        residual = float(residual)
        passed = bool(np.isfinite(residual) and residual <= tol)
        self.checks[name] = {
            "max_residual": residual if np.isfinite(residual) else None,
            "element": element,
            "passed": passed,
            "tol": float(tol),
        }
        if informational:
            self.checks[name]["informational"] = True

    def fail(self, name, message, element=None):
        self.checks[name] = {
            "max_residual": None,
            "element": element,
            "passed": False,
            "tol": None,
            "error": message,
        }

    @property
    def passed(self):
        return all(c["passed"] or c.get("informational") for c in self.checks.values())

    def to_dict(self):
        return {
            "command": self.command,
            "input": self.source,
            "passed": self.passed,
            "checks": self.checks,
        }

    def summary(self):
        lines = []
        for name, c in self.checks.items():
            tag = "PASS" if c["passed"] else ("INFO" if c.get("informational") else "FAIL")
            if "error" in c:
                lines.append(f"{tag} {name}: {c['error']}")
                continue
            where = "" if c["element"] is None else f" at {c['element']}"
            res = "nan" if c["max_residual"] is None else f"{c['max_residual']:.3e}"
            lines.append(f"{tag} {name}: max residual {res} (tol {c['tol']:.1e}){where}")
        lines.append(f"{self.command}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _worst(values, names):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0, None
    bad = ~np.isfinite(values)
    k = int(np.argmax(bad)) if bad.any() else int(np.argmax(values))
    return float(values[k]) if not bad.any() else math.inf, names(k)


def _edge_name(mesh):
    return lambda k: f"{mesh.vertex_id(mesh.int_edges[k][0])}:{mesh.vertex_id(mesh.int_edges[k][1])}"


def _vertex_name(mesh):
    return lambda k: mesh.vertex_id(mesh.interior_vertices[k])


# -- input helpers ----------------------------------------------------------------


def _load_net(path, planar=True):
    try:
        doc = read_net(path)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except DocumentError as exc:
        raise InputError(f"{path}: {exc}") from None
    if planar and not doc.planar:
        raise InputError(f"{path}: expected a planar net with 'z' positions")
    try:
        mesh = doc.mesh()
    except (MeshError, DocumentError) as exc:
        raise InputError(f"{path}: {exc}") from None
    return doc, mesh


def _net_with_q(path):
    doc, mesh = _load_net(path)
    try:
        q = doc.edge_values(mesh)
    except DocumentError as exc:
        raise InputError(f"{path}: {exc}") from None
    return doc, mesh, doc.positions(mesh), q


def _lift(mesh, z):
    try:
        return weier.stereographic_lift(z, mesh)
    except AdmissibilityError as exc:
        raise InputError(str(exc)) from None


def _load_surface(path, mesh, theta):
    p = Path(path)
    try:
        if p.suffix.lower() == ".obj":
            f, _ = read_obj(p)
        else:
            F, _, _ = read_surface(p)
            f = weier.associated_surface(F, theta)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except DocumentError as exc:
        raise InputError(f"{path}: {exc}") from None
    if f.shape != (mesh.n_faces, 3):
        raise InputError(
            f"{path}: surface has {len(f)} points but the net has {mesh.n_faces} faces"
        )
    return f


def parse_angle(text):
    """``"0.3"``, ``"pi"``, ``"-pi/2"``, ``"3pi/4"``, ``"3*pi/4"``."""
    s = text.strip().replace(" ", "")
    num, _, den = s.partition("/")
    try:
        if "pi" in num:
            coef = num.replace("*", "").replace("pi", "")
            coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef, None) or float(coef)
            value = coef * math.pi
        else:
            value = float(num)
        if den:
            value /= float(den)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None
    return value


def parse_angles(text):
    return [parse_angle(t) for t in text.split(",") if t.strip()]


def parse_complex4(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated coefficients a,b,c,d")
    try:
        return [complex(p.replace("i", "j")) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse coefficients {text!r}") from None


def parse_point(text):
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return complex(x, y)


# -- gen ------------------------------------------------------------------------------


def cmd_gen(args):
    params = {"m": args.m, "n": args.n}
    if args.m < 2 or args.n < 2:
        raise InputError(f"grid size must be at least 2x2, got {args.m}x{args.n}")
    if args.kind == "grid":
        params.update(origin=args.origin, spacing=args.spacing)
    elif args.kind == "exp":
        if args.a is None or args.b is None:
            raise InputError("exp nets need --a and --b")
        params.update(a=args.a, b=args.b)
    else:
        params.update(radius=args.radius)
    try:
        mesh, z = holo.generate_net(args.kind, **params)
        mu = holo.p_labeling(mesh)
    except (ValueError, MeshError) as exc:
        raise InputError(str(exc)) from None
    meta = {"kind": args.kind, "labels": "p_labeling"}
    meta.update({k: ([v.real, v.imag] if isinstance(v, complex) else v) for k, v in params.items()})
    doc = NetDocument.from_net(mesh, z, mu, meta=meta)
    if args.out:
        write_net(args.out, doc)
        print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_faces} faces, "
              f"{len(mesh.int_edges)} labeled edges")
    else:
        sys.stdout.write(doc.dumps())
    return EXIT_OK


# -- verify ------------------------------------------------------------------------------


def _qhd_checks(report, mesh, z, q, tol):
    r0, r1 = holo.verify_qhd(mesh, z, q)
    s0, s1 = holo.qhd_scales(mesh, z, q)
    name = _vertex_name(mesh)
    res, el = _worst(np.abs(r0) / (s0 or 1.0), name)
    report.add("sum_q", res, tol, el)
    res, el = _worst(np.abs(r1) / (s1 or 1.0), name)
    report.add("sum_q_over_dz", res, tol, el)
    return report.checks["sum_q"]["passed"] and report.checks["sum_q_over_dz"]["passed"]


def verify_qhd(args, report):
    _, mesh, z, q = _net_with_q(args.net)
    try:
        _qhd_checks(report, mesh, z, q, args.tol_qhd)
    except DegenerateError as exc:
        raise InputError(str(exc)) from None


def verify_pnet(args, report):
    doc, mesh = _load_net(args.net)
    z = doc.positions(mesh)
    try:
        res = holo.pnet_residuals(mesh, z)
    except LabelingError as exc:
        report.fail("pnet", str(exc))
        return
    except DegenerateError as exc:
        raise InputError(str(exc)) from None
    a, b = mesh.int_edges.T
    inv = np.zeros(mesh.n_vertices)
    np.add.at(inv, a, 1 / np.abs(z[b] - z[a]))
    np.add.at(inv, b, 1 / np.abs(z[b] - z[a]))
    rel = np.abs(res) / inv[mesh.interior_vertices]
    r, el = _worst(rel, _vertex_name(mesh))
    report.add("pnet", r, args.tol_pnet, el)
    try:
        mu = holo.p_labeling(mesh)
    except LabelingError as exc:
        report.fail("p_labeling", str(exc))
        return
    _qhd_checks(report, mesh, z, mu, args.tol_qhd)


def verify_aminimal(args, report):
    doc, mesh = _load_net(args.net)
    N = _lift(mesh, doc.positions(mesh))
    f = _load_surface(args.surface, mesh, args.theta)
    scale = curv.surface_scale(mesh, f)
    cross, dot = curv.verify_aminimal(mesh, f, N)
    name = _edge_name(mesh)
    res, el = _worst(cross / scale, name)
    report.add("parallel", res, args.tol_aminimal, el)
    res, el = _worst(dot / scale, name)
    report.add("orthogonal", res, args.tol_aminimal, el)


def _cminimal_input(args):
    doc, mesh = _load_net(args.net, planar=False)
    if doc.planar:
        N = _lift(mesh, doc.positions(mesh))
        if args.surface is None:
            raise InputError("verify cminimal on a planar net needs a SURFACE argument")
        return mesh, _load_surface(args.surface, mesh, args.theta), N
    if args.surface is not None:
        raise InputError("a polyhedral document carries its own surface; drop SURFACE")
    try:
        return assets.polyhedron_as_cminimal(mesh, doc.positions(mesh))
    except MeshError as exc:
        raise InputError(str(exc)) from None


def verify_cminimal(args, report):
    mesh, f, N = _cminimal_input(args)
    rep = curv.verify_cminimal(mesh, f, N, args.tol_planarity, args.tol_curvature)
    plan = curv.planarity_residuals(mesh, f, N)
    name = _vertex_name(mesh)
    res, el = _worst(plan / rep.scale, name)
    report.add("planarity", res, args.tol_planarity, el)
    if not rep.admissible:
        report.fail("scalar_mean_curvature", "Gauss map has antipodal values on an edge")
        return
    res, el = _worst(np.abs(rep.mean_curvature) / rep.scale, name)
    report.add("scalar_mean_curvature", res, args.tol_curvature, el)


def _build_F(report, mesh, z, q, tol_qhd):
    """Weierstrass data or ``None`` (with a failing check) if ``q`` is not holomorphic."""
    try:
        if not _qhd_checks(report, mesh, z, q, tol_qhd):
            return None, None
    except DegenerateError as exc:
        raise InputError(str(exc)) from None
    N = _lift(mesh, z)
    return weier.weierstrass_surface(mesh, z, q), N


def _is_plabeling(mesh, q):
    try:
        mu = holo.p_labeling(mesh)
    except LabelingError:
        return False
    return bool(len(q) and (np.all(q == q[0] * mu * mu[0]) if q[0] else False))


def verify_family(args, report):
    _, mesh, z, q = _net_with_q(args.net)
    F, N = _build_F(report, mesh, z, q, args.tol_qhd)
    if F is None:
        return
    thetas = weier.theta_samples(args.samples)
    scale = curv.surface_scale(mesh, weier.associated_surface(F, 0.0))
    vname, ename = _vertex_name(mesh), _edge_name(mesh)
    worst = {k: (0.0, None) for k in ("h_theta", "dot_sum", "edge_cross", "edge_dot")}
    for t in thetas:
        f = weier.associated_surface(F, t)
        h, dots = curv.theta_curvatures(mesh, f, N)
        c, d = curv.family_edge_identities(mesh, 0.5 * f, N, q, t)
        for key, vals, nm in (
            ("h_theta", np.abs(h), vname),
            ("dot_sum", np.abs(dots), vname),
            ("edge_cross", c, ename),
            ("edge_dot", d, ename),
        ):
            r, el = _worst(vals / scale, nm)
            if r > worst[key][0] or not np.isfinite(r):
                worst[key] = (r, el)
    for key, (r, el) in worst.items():
        report.add(key, r, args.tol_family, el)
    fam = curv.vector_area_family_check(mesh, F, N, thetas)
    info = not _is_plabeling(mesh, q)
    r, el = _worst(fam.deviation / scale, vname)
    report.add("vector_area_constancy", r, args.tol_family, el, informational=info)
    r, el = _worst(fam.sin_angle, vname)
    report.add("vector_area_parallel", r, args.tol_family, el, informational=info)


def verify_stress(args, report):
    _, mesh, z, q = _net_with_q(args.net)
    F, N = _build_F(report, mesh, z, q, args.tol_qhd)
    if F is None:
        return
    f = weier.associated_surface(F, 0.0)
    scale = curv.surface_scale(mesh, f)
    ename, vname = _edge_name(mesh), _vertex_name(mesh)
    try:
        k = stress.stress_from_aminimal(mesh, f, N)
    except DegenerateError as exc:
        report.fail("stress_fit", str(exc))
        return
    kq = stress.stress_from_qhd(mesh, z, q)
    r, el = _worst(k.residual / scale, ename)
    report.add("stress_fit", r, args.tol_stress, el)
    kscale = max(float(np.abs(kq.k).max(initial=0.0)), 1e-300)
    r, el = _worst(np.abs(k.k - kq.k) / kscale, ename)
    report.add("stress_formula", r, args.tol_stress, el)
    eq = np.linalg.norm(stress.equilibrium_residuals(mesh, N, k), axis=1)
    r, el = _worst(eq / scale, vname)
    report.add("equilibrium", r, args.tol_stress, el)
    try:
        force, torque = stress.force_torque_balance(mesh, N, k)
    except (AdmissibilityError, DegenerateError) as exc:
        report.fail("force", str(exc))
        return
    r, el = _worst(np.linalg.norm(force, axis=1) / scale, vname)
    report.add("force", r, args.tol_stress, el)
    r, el = _worst(np.linalg.norm(torque, axis=1) / scale, vname)
    report.add("torque", r, args.tol_stress, el)


def verify_area_grad(args, report):
    _, mesh, z, q = _net_with_q(args.net)
    F, N = _build_F(report, mesh, z, q, args.tol_qhd)
    if F is None:
        return
    dual = mesh.dual()
    rng = np.random.default_rng(args.seed)
    dname = lambda k: int(dual.ids[dual.interior_vertices[k]])  # noqa: E731
    worst = {"fd_gradient": (0.0, None), "mean_curvature_vector": (0.0, None), "gradient_identity": (0.0, None)}
    for t in weier.theta_samples(args.samples):
        full = weier.associated_surface(F, t)
        scale = curv.surface_scale(mesh, full)
        sigma = curv.gauss_signs(mesh, full, N)
        f = full[dual.ids]
        try:
            g = curv.area_gradient_fd(dual, f, sigma, args.step)
            H = curv.mean_curvature_vector(dual, f, sigma)
        except DegenerateError as exc:
            report.fail("fd_gradient", f"theta={t:.6g}: {exc}")
            return
        cand = {
            "fd_gradient": _worst(np.linalg.norm(g, axis=1) / scale, dname),
            "mean_curvature_vector": _worst(np.linalg.norm(H, axis=1) / scale, dname),
        }
        for _ in range(args.directions):
            fdot = np.zeros_like(f)
            fdot[dual.interior_vertices] = rng.standard_normal((len(dual.interior_vertices), 3))
            fdot /= np.linalg.norm(fdot)
            dA = curv.area_directional_derivative_fd(dual, f, fdot, sigma, args.step)
            lin = np.sum(H * fdot[dual.interior_vertices])
            r = abs(lin + dA) / scale
            if r >= cand.get("gradient_identity", (0.0, None))[0]:
                cand["gradient_identity"] = (r, f"theta={t:.6g}")
        for key, (r, el) in cand.items():
            if r > worst[key][0]:
                worst[key] = (r, el)
    tols = {"fd_gradient": args.tol_fd, "mean_curvature_vector": args.tol_curvature, "gradient_identity": args.tol_fd}
    for key, (r, el) in worst.items():
        report.add(key, r, tols[key], el)


VERIFIERS = {
    "qhd": verify_qhd,
    "pnet": verify_pnet,
    "aminimal": verify_aminimal,
    "cminimal": verify_cminimal,
    "family": verify_family,
    "stress": verify_stress,
    "area-grad": verify_area_grad,
}


def cmd_verify(args):
    report = Report(f"verify {args.what}", args.net)
    VERIFIERS[args.what](args, report)
    print(report.summary())
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


# -- build ------------------------------------------------------------------------------


def _theta_label(t):
    return f"{t:.6g}".replace("-", "m").replace(".", "p")


def cmd_build(args):
    doc, mesh, z, q = _net_with_q(args.net)
    try:
        holo.check_qhd(mesh, z, q, args.tol_qhd)
        N = weier.stereographic_lift(z, mesh)
        F = weier.weierstrass_surface(mesh, z, q, base_face=args.base_face)
        meta = dict(doc.meta)
        if args.goursat is not None:
            phi = holo.MobiusCoeffs.normalized(*args.goursat)
            F, z, N = weier.goursat_transform(mesh, z, F, phi)
            meta["goursat"] = [[c.real, c.imag] for c in (phi.a, phi.b, phi.c, phi.d)]
    except (NotHolomorphicError, AdmissibilityError, MobiusError, DegenerateError, NotClosedError) as exc:
        raise InputError(str(exc)) from None
    except IndexError:
        raise InputError(f"base face {args.base_face} out of range") from None

    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    if args.conjugate:
        members = [("aminimal", 0.0), ("cminimal", math.pi / 2)]
    else:
        members = [(f"theta_{_theta_label(t)}", t) for t in args.theta]
    written = []
    for label, t in members:
        path = prefix.with_name(f"{prefix.name}_{label}.obj")
        write_obj(path, mesh, weier.associated_surface(F, t), args.triangulate_fan)
        written.append(path)
    net_path = prefix.with_name(f"{prefix.name}_net.json")
    write_net(net_path, NetDocument.from_net(mesh, z, q, meta=meta))
    surf_path = prefix.with_name(f"{prefix.name}_F.json")
    write_surface(surf_path, F, args.base_face, meta={"thetas": [t for _, t in members]})
    for p in written + [net_path, surf_path]:
        print(f"wrote {p}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="dminimal", description="Discrete minimal surfaces from planar nets.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a built-in P-net")
    g.add_argument("kind", choices=["grid", "exp", "regular_circle_pattern"])
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--origin", type=parse_point, default=0j, help="x,y of the first grid vertex")
    g.add_argument("--spacing", type=float, default=1.0)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run checks and report")
    v.add_argument("what", choices=sorted(VERIFIERS))
    v.add_argument("net", help="net document (JSON)")
    v.add_argument("surface", nargs="?", help="surface for aminimal/cminimal: OBJ or F sidecar")
    v.add_argument("--theta", type=parse_angle, default=0.0, help="family member when SURFACE is an F sidecar")
    v.add_argument("--report", help="write the JSON report here")
    v.add_argument("--samples", type=int, default=weier.DEFAULT_THETA_SAMPLES)
    v.add_argument("--directions", type=int, default=10, help="random directions per theta (area-grad)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--step", type=float, default=curv.DEFAULT_FD_STEP)
    v.add_argument("--tol-qhd", type=float, default=holo.DEFAULT_QHD_TOL)
    v.add_argument("--tol-pnet", type=float, default=1e-9)
    v.add_argument("--tol-aminimal", type=float, default=curv.DEFAULT_CURVATURE_TOL)
    v.add_argument("--tol-planarity", type=float, default=curv.DEFAULT_PLANARITY_TOL)
    v.add_argument("--tol-curvature", type=float, default=curv.DEFAULT_CURVATURE_TOL)
    v.add_argument("--tol-family", type=float, default=curv.DEFAULT_CURVATURE_TOL)
    v.add_argument("--tol-stress", type=float, default=curv.DEFAULT_CURVATURE_TOL)
    v.add_argument("--tol-fd", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("build", help="integrate the Weierstrass form and export surfaces")
    b.add_argument("net")
    b.add_argument("--out", required=True, help="output prefix")
    which = b.add_mutually_exclusive_group()
    which.add_argument("--theta", type=parse_angles, default=[0.0], help="comma-separated angles, e.g. 0,pi/2")
    which.add_argument("--conjugate", action="store_true", help="write the A-minimal and C-minimal pair")
    b.add_argument("--goursat", type=parse_complex4, help="Moebius coefficients a,b,c,d (complex allowed, e.g. 1+2j)")
    b.add_argument("--base-face", type=int, default=0)
    b.add_argument("--triangulate-fan", action="store_true")
    b.add_argument("--tol-qhd", type=float, default=holo.DEFAULT_QHD_TOL)
    b.set_defaults(func=cmd_build)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
