"""Adjacency matrices and triangle extraction.

Edge logits are thresholded strictly at zero into a symmetric adjacency;
faces are the mutually-connected vertex triples, listed once each as
ascending (i, j, k).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .mesh_io import Mesh, undirected_edges


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric boolean vertex connectivity: n plus sorted unique (i, j), i < j."""

    n: int
    edges: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= self.n:
                raise ValueError("edge index out of range")
            if (e[:, 0] >= e[:, 1]).any():
                raise ValueError("edges must satisfy i < j")
            e = np.unique(e, axis=0)
        object.__setattr__(self, "edges", e)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def edge_keys(self) -> np.ndarray:
        """Edges encoded as i * n + j (sorted ascending); handy for set ops."""
        return self.edges[:, 0] * self.n + self.edges[:, 1]

    def reindex(self, perm: np.ndarray) -> "AdjacencyMatrix":
        """Relabel vertices: old index v becomes perm[v]."""
        perm = np.asarray(perm, dtype=np.int64)
        e = perm[self.edges]
        e.sort(axis=1)
        return AdjacencyMatrix(self.n, e)

    def neighbor_lists(self) -> list[np.ndarray]:
        """Sorted neighbor array per vertex (both directions)."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(int(j))
            nbrs[j].append(int(i))
        return [np.array(sorted(v), dtype=np.int64) for v in nbrs]

    def to_text(self) -> str:
        lines = [str(self.n)]
        lines += [f"{i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AdjacencyMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n = int(lines[0])
        pairs = [tuple(map(int, ln.split())) for ln in lines[1:]]
        return cls(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def threshold(logit_map: tuple[np.ndarray, np.ndarray], n: int) -> AdjacencyMatrix:
    """Edges where the logit is strictly positive; exact zeros are excluded."""
    pairs, logits = logit_map
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    return AdjacencyMatrix(n, pairs[logits > 0.0])


def extract_faces(adj: AdjacencyMatrix) -> np.ndarray:
    """Every mutually-connected triple (i < j < k), lexicographically sorted."""
    return _kernels.triangles(adj.n, adj.edges)


def adjacency_of(mesh: Mesh) -> AdjacencyMatrix:
    """Ground-truth connectivity: (i, j) linked iff some face contains both."""
    if mesh.n_faces == 0:
        return AdjacencyMatrix(mesh.n_vertices)
    return AdjacencyMatrix(mesh.n_vertices, np.unique(undirected_edges(mesh.faces), axis=0))


def mesh_from_adjacency(adj: AdjacencyMatrix, vertices: np.ndarray) -> Mesh:
    """Materialize the faces implied by an adjacency over given vertices."""
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    if len(vertices) != adj.n:
        raise ValueError(f"vertex count {len(vertices)} != adjacency size {adj.n}")
    return Mesh(vertices, extract_faces(adj))
