"""Triangle mesh container, Wavefront OBJ I/O, normalization, manifold stats.

The OBJ subset understood here: ``v x y z`` vertices, ``f i j k ...`` faces
(polygons fan-triangulated, ``/vt/vn`` attribute suffixes dropped, negative
indices resolved relative to the vertices seen so far), ``#`` comments, and
any other directive silently ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import DegenerateInputError, ObjFormatError

# Longest bounding-box edge of a normalized mesh spans 1 - NORM_EPS, which
# keeps every coordinate strictly below 1.0 (half-open unit cube).
NORM_EPS = 2.0**-20


@dataclass(frozen=True)
class Mesh:
    """Vertices (n, 3) float64 and triangle faces (m, 3) int64."""

    vertices: np.ndarray
    faces: np.ndarray = field(default_factory=lambda: np.empty((0, 3), dtype=np.int64))

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if not np.isfinite(v).all():
            raise ValueError("vertex coordinates must be finite")
        if f.size:
            if f.min() < 0 or f.max() >= len(v):
                raise ValueError("face index out of range")
            degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if degenerate.any():
                raise ValueError("face with repeated vertex index")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.vertices.shape == other.vertices.shape
            and self.faces.shape == other.faces.shape
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.faces, other.faces)
        )


@dataclass(frozen=True)
class ManifoldReport:
    """Edge-usage statistics over all faces of a mesh."""

    edge_count: int
    edges_used_once: int
    edges_used_gt_twice: int
    bad_edge_ratio: float

    def as_dict(self) -> dict:
        return {
            "edge_count": self.edge_count,
            "edges_used_once": self.edges_used_once,
            "edges_used_gt_twice": self.edges_used_gt_twice,
            "bad_edge_ratio": self.bad_edge_ratio,
        }


def _face_entry_index(entry: str, n_vertices_so_far: int, lineno: int) -> int:
    # "3/1/2" -> 3; negative indices count back from the vertices seen so far
    head = entry.split("/")[0]
    try:
        idx = int(head)
    except ValueError:
        raise ObjFormatError(f"line {lineno}: bad face index {entry!r}") from None
    if idx == 0:
        raise ObjFormatError(f"line {lineno}: face index 0 (OBJ indices are 1-based)")
    if idx < 0:
        idx = n_vertices_so_far + idx
        if idx < 0:
            raise ObjFormatError(f"line {lineno}: relative face index out of range")
        return idx
    return idx - 1


def parse_obj(source: str | IO[str] | Iterable[str]) -> Mesh:
    """Parse an OBJ document from a string, file object, or line iterable."""
    lines = source.splitlines() if isinstance(source, str) else source
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjFormatError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                x, y, z = float(parts[1]), float(parts[2]), float(parts[3])
            except ValueError:
                raise ObjFormatError(f"line {lineno}: non-numeric vertex coordinate") from None
            vertices.append((x, y, z))
        elif tag == "f":
            idx = [_face_entry_index(p, len(vertices), lineno) for p in parts[1:]]
            if len(idx) < 3:
                raise ObjFormatError(f"line {lineno}: face needs at least 3 vertices")
            for k in range(1, len(idx) - 1):  # fan around the first vertex
                faces.append((idx[0], idx[k], idx[k + 1]))
        # vn/vt/usemtl/o/g/s/mtllib and anything else: ignored
    n = len(vertices)
    for tri in faces:
        if max(tri) >= n:
            raise ObjFormatError(f"face index {max(tri) + 1} exceeds vertex count {n}")
        if len(set(tri)) < 3:
            raise ObjFormatError(f"degenerate face {tuple(i + 1 for i in tri)}")
    return Mesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
    )


def write_obj(mesh: Mesh) -> str:
    """Serialize to OBJ text. Vertices use shortest exact float repr, so a
    parse of the output reproduces the input bit for bit."""
    out = [f"# {mesh.n_vertices} vertices, {mesh.n_faces} faces"]
    for x, y, z in mesh.vertices:
        out.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for i, j, k in mesh.faces:
        out.append(f"f {i + 1} {j + 1} {k + 1}")
    return "\n".join(out) + "\n"


def load_obj(path) -> Mesh:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_obj(fh)


def save_obj(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_obj(mesh))


def normalize(mesh: Mesh) -> Mesh:
    """Map the bounding box into the half-open unit cube [0, 1)^3.

    The box center goes to (0.5, 0.5, 0.5) and the longest box edge spans
    1 - NORM_EPS; aspect ratio is preserved. Raises DegenerateInputError
    when all vertices coincide.
    """
    if mesh.n_vertices == 0:
        raise DegenerateInputError("cannot normalize an empty mesh")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise DegenerateInputError("degenerate bounding box (all vertices identical)")
    scale = (1.0 - NORM_EPS) / extent
    center = (lo + hi) / 2.0
    return Mesh((mesh.vertices - center) * scale + 0.5, mesh.faces)


def undirected_edges(faces: np.ndarray) -> np.ndarray:
    """All face edges as sorted (i, j) pairs, one row per face slot (3F rows)."""
    f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [0, 2]]], axis=0)
    e.sort(axis=1)
    return e


def manifold_report(mesh: Mesh) -> ManifoldReport:
    """Count how often each undirected edge is used across faces.

    A closed 2-manifold uses every edge exactly twice; the bad-edge ratio is
    the fraction of edges used once or more than twice (0.0 for an edgeless
    mesh).
    """
    if mesh.n_faces == 0:
        return ManifoldReport(0, 0, 0, 0.0)
    edges = undirected_edges(mesh.faces)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    once = int((counts == 1).sum())
    gt_twice = int((counts > 2).sum())
    total = len(counts)
    return ManifoldReport(total, once, gt_twice, (once + gt_twice) / total)
