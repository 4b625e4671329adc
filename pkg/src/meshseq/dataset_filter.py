"""Corpus curation: non-manifold severity, coplanar-surface, and duplicate
rejection.

A mesh survives when every check passes: at most 10% of its edges may break
the used-exactly-twice manifold rule, at most half of its vertices may share
a normal with another vertex (large coplanar regions), its vertex count must
stay under the cap, and its (vertex count, face count) pair must not repeat
an earlier mesh in the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, MeshDataError
from .mesh_io import Mesh, load_obj, manifold_report

MANIFOLD_THRESHOLD = 0.10
COPLANAR_THRESHOLD = 0.50
MAX_VERTICES = 4000
NORMAL_ROUND_DECIMALS = 4


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reasons: tuple[str, ...] = ()
    bad_edge_ratio: float = 0.0
    duplicate_normal_ratio: float = 0.0

    def __post_init__(self):
        if self.accepted != (len(self.reasons) == 0):
            raise ValueError("accepted must match empty reasons")

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "reasons": list(self.reasons),
            "bad_edge_ratio": self.bad_edge_ratio,
            "duplicate_normal_ratio": self.duplicate_normal_ratio,
        }


def check_manifold(mesh: Mesh, threshold: float = MANIFOLD_THRESHOLD) -> tuple[bool, float]:
    """(passes, bad_edge_ratio); fails only when the ratio exceeds threshold."""
    ratio = manifold_report(mesh).bad_edge_ratio
    return ratio <= threshold, ratio


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Unit vertex normals from summed unit face normals.

    Zero-area faces contribute nothing; vertices without any valid incident
    face get a zero normal. Raises DegenerateInputError when every face has
    zero area."""
    if mesh.n_faces == 0:
        raise DegenerateInputError("mesh has no faces")
    a = mesh.vertices[mesh.faces[:, 0]]
    b = mesh.vertices[mesh.faces[:, 1]]
    c = mesh.vertices[mesh.faces[:, 2]]
    fn = np.cross(b - a, c - a)
    norms = np.linalg.norm(fn, axis=1)
    valid = norms > 0.0
    if not valid.any():
        raise DegenerateInputError("all faces are degenerate (zero area)")
    fn[valid] /= norms[valid, None]
    fn[~valid] = 0.0
    vn = np.zeros_like(mesh.vertices)
    for col in range(3):
        np.add.at(vn, mesh.faces[:, col], fn)
    lengths = np.linalg.norm(vn, axis=1)
    nonzero = lengths > 0.0
    vn[nonzero] /= lengths[nonzero, None]
    return vn


def check_coplanar(mesh: Mesh, threshold: float = COPLANAR_THRESHOLD) -> tuple[bool, float]:
    """(passes, duplicate_normal_ratio).

    Vertex normals are bucketed after rounding each component to 1e-4; the
    ratio counts vertices whose bucket holds more than one vertex. Vertices
    without a defined normal never count as duplicates."""
    vn = vertex_normals(mesh)
    defined = np.linalg.norm(vn, axis=1) > 0.0
    rounded = np.round(vn[defined], NORMAL_ROUND_DECIMALS)
    if len(rounded) == 0:
        return True, 0.0
    _, inverse, counts = np.unique(rounded, axis=0, return_inverse=True, return_counts=True)
    duplicated = int((counts[inverse.reshape(-1)] > 1).sum())
    ratio = duplicated / mesh.n_vertices
    return ratio <= threshold, ratio


def dedup(corpus: list[tuple[str, Mesh]]) -> list[str]:
    """Ids surviving duplicate removal: first occurrence of each
    (vertex count, face count) pair wins, in input order."""
    seen: set[tuple[int, int]] = set()
    out = []
    for name, mesh in corpus:
        key = (mesh.n_vertices, mesh.n_faces)
        if key not in seen:
            seen.add(key)
            out.append(name)
    return out


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    verdict: FilterVerdict | None = None
    error: str | None = None
    n_vertices: int = 0
    n_faces: int = 0

    def as_dict(self) -> dict:
        out: dict = {"path": self.path, "n_vertices": self.n_vertices, "n_faces": self.n_faces}
        if self.error is not None:
            out["error"] = self.error
        else:
            out.update(self.verdict.as_dict())
        return out


def evaluate_mesh(mesh: Mesh, max_vertices: int = MAX_VERTICES) -> FilterVerdict:
    """All per-mesh checks (everything except corpus-level dedup)."""
    reasons = []
    bad_ratio = 0.0
    dup_ratio = 0.0
    if mesh.n_vertices >= max_vertices:
        reasons.append("too_many_vertices")
    ok, bad_ratio = check_manifold(mesh)
    if not ok:
        reasons.append("non_manifold")
    try:
        ok, dup_ratio = check_coplanar(mesh)
        if not ok:
            reasons.append("coplanar")
    except DegenerateInputError:
        reasons.append("degenerate")
    return FilterVerdict(not reasons, tuple(reasons), bad_ratio, dup_ratio)


def filter_corpus(manifest: list[str], max_vertices: int = MAX_VERTICES) -> list[CorpusEntry]:
    """Evaluate every file in the manifest; parse failures become error
    entries instead of aborting the batch. Dedup runs over all parsed
    meshes in manifest order."""
    entries: list[CorpusEntry] = []
    parsed: list[tuple[int, Mesh]] = []
    for path in manifest:
        try:
            mesh = load_obj(path)
        except (OSError, MeshDataError, ValueError) as exc:
            entries.append(CorpusEntry(path=str(path), error=str(exc)))
            continue
        verdict = evaluate_mesh(mesh, max_vertices)
        entries.append(
            CorpusEntry(
                path=str(path),
                verdict=verdict,
                n_vertices=mesh.n_vertices,
                n_faces=mesh.n_faces,
            )
        )
        parsed.append((len(entries) - 1, mesh))

    seen: set[tuple[int, int]] = set()
    for idx, mesh in parsed:
        key = (mesh.n_vertices, mesh.n_faces)
        if key in seen:
            old = entries[idx].verdict
            entries[idx] = CorpusEntry(
                path=entries[idx].path,
                verdict=FilterVerdict(
                    False,
                    old.reasons + ("duplicate",),
                    old.bad_edge_ratio,
                    old.duplicate_normal_ratio,
                ),
                n_vertices=entries[idx].n_vertices,
                n_faces=entries[idx].n_faces,
            )
        else:
            seen.add(key)
    return entries
