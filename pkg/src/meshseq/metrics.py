"""Surface sampling and geometric / adjacency metrics.

Chamfer and Hausdorff distances are computed over area-uniform surface
samples and reported as percentages of the normalized-space scale; both use
plain (unsquared) Euclidean distances so they share units. Nearest-neighbor
queries run on the grid kernel for large sets and on blocked brute force
below BRUTE_FORCE_LIMIT points (the brute path doubles as the oracle in
tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .face_builder import AdjacencyMatrix
from .mesh_io import Mesh, normalize

DEFAULT_POINT_COUNT = 5000
BRUTE_FORCE_LIMIT = 2000


@dataclass(frozen=True)
class PointSample:
    """Surface points with the parameters that produced them."""

    points: np.ndarray
    count: int
    seed: int


@dataclass(frozen=True)
class ShapeScores:
    cd: float
    hd: float

    def as_dict(self) -> dict:
        return {"cd": self.cd, "hd": self.hd}


def face_areas(mesh: Mesh) -> np.ndarray:
    a = mesh.vertices[mesh.faces[:, 0]]
    b = mesh.vertices[mesh.faces[:, 1]]
    c = mesh.vertices[mesh.faces[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def _canonical_triangles(mesh: Mesh) -> np.ndarray:
    """Face corner coordinates (F, 3, 3) in a labeling-independent order.

    Corners are sorted within each face and faces sorted by their flattened
    coordinates, so two meshes describing the same surface sample
    identically no matter how vertices are indexed or faces wound."""
    tri = mesh.vertices[mesh.faces]
    for axis in (2, 1, 0):  # stable lexicographic sort of the 3 corners
        order = np.argsort(tri[:, :, axis], axis=1, kind="stable")
        tri = np.take_along_axis(tri, order[:, :, None], axis=1)
    flat = tri.reshape(len(tri), 9)
    face_order = np.lexsort(flat.T[::-1])
    return tri[face_order]


def sample_surface(mesh: Mesh, count: int = DEFAULT_POINT_COUNT, seed: int = 0) -> PointSample:
    """Draw points uniformly by area: faces chosen proportionally to area,
    positions by the square-root barycentric trick. Sampling depends only on
    the geometric face set, not on vertex indexing or face order."""
    if mesh.n_faces == 0:
        raise ValueError("mesh has no surface area to sample")
    tri = _canonical_triangles(mesh)
    areas = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    total = areas.sum()
    if total <= 0.0:
        raise ValueError("mesh has no surface area to sample")
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(tri), size=count, p=areas / total)
    r1 = np.sqrt(rng.random(count))
    r2 = rng.random(count)
    u = 1.0 - r1
    v = r1 * (1.0 - r2)
    w = r1 * r2
    chosen = tri[idx]
    points = u[:, None] * chosen[:, 0] + v[:, None] * chosen[:, 1] + w[:, None] * chosen[:, 2]
    return PointSample(points, count, seed)


def _points(sample) -> np.ndarray:
    pts = sample.points if isinstance(sample, PointSample) else np.asarray(sample, dtype=np.float64)
    pts = pts.reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("empty point sample")
    return pts


def min_dists_brute(query: np.ndarray, ref: np.ndarray, block: int = 1024) -> np.ndarray:
    """Exact nearest distances by blocked full distance matrices."""
    out = np.empty(len(query))
    for s in range(0, len(query), block):
        out[s : s + block] = cdist(query[s : s + block], ref).min(axis=1)
    return out


def nearest_dists(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Nearest-neighbor distances, picking brute force or the grid kernel."""
    if max(len(query), len(ref)) <= BRUTE_FORCE_LIMIT:
        return min_dists_brute(query, ref)
    return _kernels.min_dists(query, ref)


def chamfer(a, b) -> float:
    """Symmetric mean closest-point distance, as a percentage."""
    pa, pb = _points(a), _points(b)
    return 100.0 * 0.5 * (nearest_dists(pa, pb).mean() + nearest_dists(pb, pa).mean())


def hausdorff(a, b) -> float:
    """Worst-case closest-point distance over both directions, as a percentage."""
    pa, pb = _points(a), _points(b)
    return 100.0 * max(nearest_dists(pa, pb).max(), nearest_dists(pb, pa).max())


def shape_scores(
    mesh_a: Mesh,
    mesh_b: Mesh,
    count: int = DEFAULT_POINT_COUNT,
    seed: int = 0,
    renormalize: bool = True,
) -> ShapeScores:
    """Normalize both meshes, sample each with the same seed, score CD and HD."""
    if renormalize:
        mesh_a, mesh_b = normalize(mesh_a), normalize(mesh_b)
    pa = sample_surface(mesh_a, count, seed).points
    pb = sample_surface(mesh_b, count, seed).points
    ab = nearest_dists(pa, pb)
    ba = nearest_dists(pb, pa)
    cd = 100.0 * 0.5 * (ab.mean() + ba.mean())
    hd = 100.0 * max(ab.max(), ba.max())
    return ShapeScores(cd, hd)


def adjacency_f1_recall(pred: AdjacencyMatrix, truth: AdjacencyMatrix) -> tuple[float, float, float]:
    """(f1, recall, precision) over the i<j pair universe.

    Conventions for empty sets: recall is 1 when truth is edgeless,
    precision is 1 when pred is edgeless (no false positives), and f1
    follows from the two.
    """
    if pred.n != truth.n:
        raise ValueError(f"size mismatch: {pred.n} != {truth.n}")
    tp = len(np.intersect1d(pred.edge_keys(), truth.edge_keys(), assume_unique=True))
    precision = tp / pred.n_edges if pred.n_edges else 1.0
    recall = tp / truth.n_edges if truth.n_edges else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return f1, recall, precision
