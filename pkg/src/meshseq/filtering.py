"""Iterative edge-prediction filtering: BFS reordering plus shrinking
candidate masks.

An adjacency's bandwidth is the largest |i - j| over its edges, so it
depends on vertex ordering. The pipeline predicts once unmasked, reorders
vertices by breadth-first search to compress bandwidth, then re-predicts
twice under a bandwidth mask and twice under a tighter per-vertex
candidate-distance mask, shrinking the candidate set as edges disappear.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .edge_model import score_pairs
from .face_builder import AdjacencyMatrix, extract_faces, threshold


@dataclass(frozen=True)
class Ordering:
    """Vertex relabeling: perm[old_index] = new_index."""

    perm: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.perm, dtype=np.int64).reshape(-1)
        if not np.array_equal(np.sort(p), np.arange(len(p))):
            raise ValueError("perm is not a permutation")
        object.__setattr__(self, "perm", p)

    def inverse(self) -> "Ordering":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(len(self.perm))
        return Ordering(inv)

    def apply(self, adj: AdjacencyMatrix) -> AdjacencyMatrix:
        return adj.reindex(self.perm)


@dataclass(frozen=True)
class CandidateMask:
    """Allowed candidate pairs (i, j), i < j, in the current index space."""

    n: int
    allowed: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))

    def __post_init__(self):
        a = np.asarray(self.allowed, dtype=np.int64).reshape(-1, 2)
        if a.size:
            if a.min() < 0 or a.max() >= self.n:
                raise ValueError("mask pair out of range")
            if (a[:, 0] >= a[:, 1]).any():
                raise ValueError("mask pairs must satisfy i < j")
            a = np.unique(a, axis=0)
        object.__setattr__(self, "allowed", a)

    @property
    def n_allowed(self) -> int:
        return len(self.allowed)

    def contains(self, pairs: np.ndarray) -> np.ndarray:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        keys = pairs[:, 0] * self.n + pairs[:, 1]
        own = self.allowed[:, 0] * self.n + self.allowed[:, 1]
        return np.isin(keys, own)


def bandwidth(adj: AdjacencyMatrix) -> int:
    """Largest |i - j| over present edges; 0 for an edgeless graph."""
    if adj.n_edges == 0:
        return 0
    return int((adj.edges[:, 1] - adj.edges[:, 0]).max())


def bfs_order(adj: AdjacencyMatrix) -> Ordering:
    """Breadth-first visit order: start at the lowest-index unvisited vertex,
    expand neighbors in ascending old-index order, components in sequence."""
    nbrs = adj.neighbor_lists()
    perm = np.full(adj.n, -1, dtype=np.int64)
    nxt = 0
    for start in range(adj.n):
        if perm[start] != -1:
            continue
        queue = deque([start])
        perm[start] = nxt
        nxt += 1
        while queue:
            v = queue.popleft()
            for w in nbrs[v]:
                if perm[w] == -1:
                    perm[w] = nxt
                    nxt += 1
                    queue.append(int(w))
    return Ordering(perm)


def _span_pairs(n: int, reach: np.ndarray) -> np.ndarray:
    """Pairs (i, j), i < j <= i + reach[i], clipped to the index range."""
    reach = np.minimum(reach, n - 1 - np.arange(n))
    reach = np.maximum(reach, 0)
    total = int(reach.sum())
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)
    i = np.repeat(np.arange(n), reach)
    steps = np.arange(total) - np.repeat(np.cumsum(reach) - reach, reach)
    return np.column_stack([i, i + 1 + steps])


def bandwidth_mask(adj: AdjacencyMatrix, margin: int = 0) -> CandidateMask:
    """All pairs within the adjacency's bandwidth plus margin.

    Every present edge is inside the mask by construction (the bandwidth is
    their maximum span)."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    b = bandwidth(adj) + margin
    return CandidateMask(adj.n, _span_pairs(adj.n, np.full(adj.n, b, dtype=np.int64)))


def candidate_mask(adj: AdjacencyMatrix, margin: int = 0) -> CandidateMask:
    """Per-vertex reach mask: r_i = max |i - j| over i's current neighbors
    (0 when isolated) plus margin; (i, j) allowed iff the span fits both
    endpoints' reaches. Current edges always satisfy both bounds."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    r = np.zeros(adj.n, dtype=np.int64)
    if adj.n_edges:
        span = adj.edges[:, 1] - adj.edges[:, 0]
        np.maximum.at(r, adj.edges[:, 0], span)
        np.maximum.at(r, adj.edges[:, 1], span)
    r += margin  # isolated vertices keep reach = margin (none at margin 0)
    pairs = _span_pairs(adj.n, r)
    if pairs.size:
        span = pairs[:, 1] - pairs[:, 0]
        pairs = pairs[span <= r[pairs[:, 1]]]
    return CandidateMask(adj.n, pairs)


@dataclass(frozen=True)
class FilterStep:
    """Snapshot after one pipeline step (adjacency in original indices;
    bandwidth measured in the pipeline's reordered space)."""

    step: int
    mask_kind: str
    n_edges: int
    n_faces: int
    bandwidth: int
    adjacency: AdjacencyMatrix

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "mask_kind": self.mask_kind,
            "n_edges": self.n_edges,
            "n_faces": self.n_faces,
            "bandwidth": self.bandwidth,
        }


def filter_pipeline(
    scorer,
    n: int,
    margin: int = 0,
    bandwidth_steps: int = 2,
    candidate_steps: int = 2,
) -> tuple[AdjacencyMatrix, list[FilterStep]]:
    """Run the masked re-prediction schedule (default five steps total).

    Step 1 predicts unmasked and fixes the BFS reorder; the next
    ``bandwidth_steps`` re-predict under the current bandwidth mask and the
    final ``candidate_steps`` under the per-vertex candidate mask. The mask
    is handed to the scorer, so mask-aware scorers can re-decide under it.
    Returns the final adjacency in the original index space plus per-step
    stats."""
    steps: list[FilterStep] = []

    adj = threshold(score_pairs(scorer, n), n)
    order = bfs_order(adj)
    inverse = order.inverse()
    current = order.apply(adj)  # reordered space from here on

    def record(step_no: int, kind: str):
        original = inverse.apply(current)
        steps.append(
            FilterStep(
                step=step_no,
                mask_kind=kind,
                n_edges=current.n_edges,
                n_faces=len(extract_faces(current)),
                bandwidth=bandwidth(current),
                adjacency=original,
            )
        )

    record(1, "none")
    step_no = 1
    schedule = [("bandwidth", bandwidth_mask)] * bandwidth_steps
    schedule += [("candidate", candidate_mask)] * candidate_steps
    for kind, make_mask in schedule:
        step_no += 1
        mask = make_mask(current, margin)
        # scorers live in the original index space; translate the candidates
        original_pairs = inverse.perm[mask.allowed] if mask.n_allowed else mask.allowed
        original_pairs = np.sort(original_pairs, axis=1) if original_pairs.size else original_pairs
        original_mask = CandidateMask(n, original_pairs)
        logits = (
            scorer.score_pairs(original_mask.allowed, mask=original_mask)
            if original_mask.n_allowed
            else np.empty(0)
        )
        predicted = threshold((original_mask.allowed, logits), n)
        current = order.apply(predicted)
        record(step_no, kind)

    return inverse.apply(current), steps
