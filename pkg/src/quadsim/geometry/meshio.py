"""ASCII triangle-mesh loading (v/f records, OBJ-compatible subset).

Only vertex positions and faces are read; `o`/`g` records start a new
scene object, everything else (normals, texture records, materials,
comments) is ignored. Faces may reference `v/vt/vn` tuples; only the
vertex index is used. Faces with more than three vertices are fan
triangulated.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParseError
from .shapes import Scene, SceneObject, TriMesh

_IGNORED = {"vn", "vt", "vp", "s", "usemtl", "mtllib", "l", "p"}


def load_mesh_scene(path) -> Scene:
    """Parse a mesh file into a Scene with one TriMesh object per group."""
    vertices = []
    groups = [[]]  # face lists; group 0 is the implicit default group
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc), path=path) from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            rec = parts[0]
            if rec == "v":
                if len(parts) < 4:
                    raise ParseError("vertex record needs 3 coordinates", path=path, line=lineno)
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError:
                    raise ParseError(f"bad vertex coordinate in {text!r}", path=path, line=lineno) from None
            elif rec == "f":
                if len(parts) < 4:
                    raise ParseError("face record needs at least 3 vertices", path=path, line=lineno)
                idx = []
                for token in parts[1:]:
                    head = token.split("/", 1)[0]
                    try:
                        k = int(head)
                    except ValueError:
                        raise ParseError(f"bad face index {token!r}", path=path, line=lineno) from None
                    if k < 0:
                        k = len(vertices) + 1 + k  # negative indices count from the end
                    if k < 1 or k > len(vertices):
                        raise ParseError(f"face index {token!r} out of range", path=path, line=lineno)
                    idx.append(k - 1)
                for second, third in zip(idx[1:-1], idx[2:]):
                    groups[-1].append((idx[0], second, third))
            elif rec in ("o", "g"):
                if groups[-1]:
                    groups.append([])
            elif rec in _IGNORED:
                continue
            else:
                raise ParseError(f"unknown record type {rec!r}", path=path, line=lineno)

    objects = []
    oid = 1
    verts = np.asarray(vertices, dtype=float) if vertices else None
    for faces in groups:
        if not faces:
            continue
        if verts is None:
            raise ParseError("faces reference vertices but none were defined", path=path)
        objects.append(SceneObject(oid, TriMesh(verts, np.asarray(faces, dtype=int))))
        oid += 1
    if not objects:
        raise ParseError("no triangles found", path=path)
    return Scene(objects)
