"""Net documents (JSON), OBJ export and the complex-surface sidecar.

A net document looks like::

    {"version": 1,
     "vertices": [{"id": 0, "z": [re, im]}, ...],     # or {"id": 0, "p": [x, y, z]}
     "faces": [[0, 1, 5, 4], ...],
     "edges": [{"k": "0:1", "q": 1.0}, ...],           # optional
     "meta": {"kind": "grid", ...}}                     # optional

Floats are written with ``repr`` precision so that reading back reproduces
every value bit for bit; keys are sorted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import build_mesh

FORMAT_VERSION = 1


class DocumentError(ValueError):
    """Malformed net document, OBJ or sidecar."""


def edge_key(i, j):
    i, j = int(i), int(j)
    return f"{min(i, j)}:{max(i, j)}"


def _parse_key(key):
    try:
        a, b = key.split(":")
        return int(a), int(b)
    except (AttributeError, ValueError):
        raise DocumentError(f"bad edge key {key!r}") from None


@dataclass
class NetDocument:
    ids: list
    faces: list
    z: np.ndarray | None = None
    p: np.ndarray | None = None
    edges: dict = field(default_factory=dict)  # "i:j" -> float
    meta: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if (self.z is None) == (self.p is None):
            raise DocumentError("a document carries either planar (z) or spatial (p) positions")
        if len(set(self.ids)) != len(self.ids):
            raise DocumentError("vertex ids are not unique")
        n = len(self.ids)
        pos = self.z if self.z is not None else self.p
        if len(pos) != n:
            raise DocumentError("positions do not match the vertex list")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_net(cls, mesh, z, q=None, meta=None):
        """Planar net with an optional per-interior-edge table ``q``."""
        edges = {}
        if q is not None:
            for (a, b), v in zip(mesh.int_edges, np.asarray(q, dtype=float)):
                edges[edge_key(mesh.vertex_id(a), mesh.vertex_id(b))] = float(v)
        return cls(
            ids=[int(i) for i in mesh.ids],
            faces=[[mesh.vertex_id(v) for v in face] for face in mesh.faces],
            z=np.asarray(z, dtype=complex).copy(),
            edges=edges,
            meta=dict(meta or {}),
        )

    @classmethod
    def from_polyhedron(cls, mesh, p, meta=None):
        return cls(
            ids=[int(i) for i in mesh.ids],
            faces=[[mesh.vertex_id(v) for v in face] for face in mesh.faces],
            p=np.asarray(p, dtype=float).copy(),
            meta=dict(meta or {}),
        )

    # -- access ---------------------------------------------------------------

    @property
    def planar(self):
        return self.z is not None

    def mesh(self, disk=False):
        m = build_mesh(self.ids, self.faces, disk=disk)
        for key in self.edges:
            a, b = _parse_key(key)
            try:
                ia, ib = m.index_of(a), m.index_of(b)
            except KeyError:
                raise DocumentError(f"edge {key} names an unknown vertex") from None
            if (min(ia, ib), max(ia, ib)) not in m.edge_index:
                raise DocumentError(f"edge {key} is not an edge of the net")
        return m

    def positions(self, mesh):
        """Positions reordered to ``mesh`` vertex indices."""
        pos = self.z if self.planar else self.p
        if list(mesh.ids) == list(self.ids):
            return pos
        where = {v: k for k, v in enumerate(self.ids)}
        return pos[[where[int(i)] for i in mesh.ids]]

    def edge_values(self, mesh):
        """Edge table aligned with ``mesh.int_edges``; every interior edge must be present."""
        out = np.empty(len(mesh.int_edges))
        for k, (a, b) in enumerate(mesh.int_edges):
            key = edge_key(mesh.vertex_id(a), mesh.vertex_id(b))
            if key not in self.edges:
                raise DocumentError(f"edge table has no value for interior edge {key}")
            out[k] = self.edges[key]
        return out

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        if self.planar:
            verts = [
                {"id": int(i), "z": [float(w.real), float(w.imag)]}
                for i, w in zip(self.ids, self.z)
            ]
        else:
            verts = [{"id": int(i), "p": [float(c) for c in x]} for i, x in zip(self.ids, self.p)]
        d = {
            "version": self.version,
            "vertices": verts,
            "faces": [[int(v) for v in face] for face in self.faces],
            "meta": self.meta,
        }
        if self.edges:
            d["edges"] = [
                {"k": k, "q": float(v)}
                for k, v in sorted(self.edges.items(), key=lambda kv: _parse_key(kv[0]))
            ]
        return d

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise DocumentError("net document must be a JSON object")
        version = d.get("version")
        if version != FORMAT_VERSION:
            raise DocumentError(f"unsupported document version {version!r}")
        try:
            verts = d["vertices"]
            faces = [[int(v) for v in face] for face in d["faces"]]
            ids = [int(v["id"]) for v in verts]
            kinds = {("z" in v, "p" in v) for v in verts}
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"malformed net document: {exc}") from None
        if kinds == {(True, False)}:
            z = np.array([complex(*v["z"]) for v in verts], dtype=complex)
            p = None
        elif kinds == {(False, True)}:
            z = None
            p = np.array([v["p"] for v in verts], dtype=float).reshape(len(verts), 3)
        else:
            raise DocumentError("every vertex needs exactly one of 'z' or 'p', the same for all")
        edges = {}
        for e in d.get("edges", []):
            a, b = _parse_key(e.get("k"))
            key = edge_key(a, b)
            if key in edges:
                raise DocumentError(f"duplicate edge {key}")
            edges[key] = float(e["q"])
        return cls(ids=ids, faces=faces, z=z, p=p, edges=edges, meta=dict(d.get("meta", {})), version=version)

    @classmethod
    def loads(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)


def write_net(path, doc):
    Path(path).write_text(doc.dumps())


def read_net(path):
    return NetDocument.loads(Path(path).read_text())


# -- OBJ ------------------------------------------------------------------------


def _fan(poly):
    k = poly.index(min(poly))
    poly = poly[k:] + poly[:k]
    return [[poly[0], poly[i], poly[i + 1]] for i in range(1, len(poly) - 1)]


def obj_string(mesh, f, triangulate_fan=False):
    """One ``v`` per primal face, one polygon per interior vertex's dual face."""
    f = np.asarray(f, dtype=float)
    lines = [f"v {x!r} {y!r} {w!r}" for x, y, w in f.tolist()]
    for i in mesh.interior_vertices:
        poly = [int(p) + 1 for p in mesh.dual_face(i)]
        for piece in _fan(poly) if triangulate_fan else [poly]:
            lines.append("f " + " ".join(map(str, piece)))
    return "\n".join(lines) + "\n"


def write_obj(path, mesh, f, triangulate_fan=False):
    Path(path).write_text(obj_string(mesh, f, triangulate_fan))


def read_obj(path):
    """``(positions, polygons)`` with 0-based polygon indices."""
    pts, polys = [], []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                pts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                polys.append([int(x.split("/")[0]) - 1 for x in parts[1:]])
        except ValueError:
            raise DocumentError(f"OBJ line {n}: cannot parse {line!r}") from None
    return np.array(pts, dtype=float).reshape(-1, 3), polys


# -- complex surface sidecar -------------------------------------------------------


def surface_dict(F, base_face=0, meta=None):
    F = np.asarray(F, dtype=complex)
    return {
        "version": FORMAT_VERSION,
        "base_face": int(base_face),
        "F": [[[float(c.real), float(c.imag)] for c in row] for row in F],
        "meta": dict(meta or {}),
    }


def write_surface(path, F, base_face=0, meta=None):
    Path(path).write_text(json.dumps(surface_dict(F, base_face, meta), sort_keys=True) + "\n")


def read_surface(path):
    """``(F, base_face, meta)`` from a sidecar file."""
    try:
        d = json.loads(Path(path).read_text())
        F = np.array([[complex(*c) for c in row] for row in d["F"]], dtype=complex)
        return F.reshape(-1, 3), int(d.get("base_face", 0)), d.get("meta", {})
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed surface file: {exc}") from None
