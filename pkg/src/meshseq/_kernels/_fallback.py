"""Pure-Python implementations of the hot kernels.

Same contracts as the compiled module (meshseq._kernels._core); used when
the extension is unavailable. Correct at any size, just slower.
"""

from __future__ import annotations

import numpy as np


def _grid_cells(ref: np.ndarray):
    """Bucket reference points into a uniform cubic grid.

    Returns (origin, cell_size, ncells, cell -> point-index array dict).
    cell_size is 0 for a single point or fully coincident cloud.
    """
    k = len(ref)
    ncells = max(1, min(128, int(np.ceil((k / 2.0) ** (1.0 / 3.0)))))
    origin = ref.min(axis=0)
    extent = float((ref.max(axis=0) - origin).max())
    if extent <= 0.0 or ncells == 1:
        return origin, 0.0, 1, {(0, 0, 0): np.arange(k)}
    cell_size = extent / ncells
    coords = np.clip((ref - origin) / cell_size, 0, ncells - 1).astype(np.int64)
    buckets: dict[tuple[int, int, int], list[int]] = {}
    for idx, c in enumerate(map(tuple, coords)):
        buckets.setdefault(c, []).append(idx)
    return origin, cell_size, ncells, {c: np.asarray(ix) for c, ix in buckets.items()}


def _shell(cx: int, cy: int, cz: int, r: int, ncells: int):
    """In-range cells at Chebyshev distance exactly r from (cx, cy, cz)."""
    for dx in range(-r, r + 1):
        x = cx + dx
        if not 0 <= x < ncells:
            continue
        on_face = abs(dx) == r
        for dy in range(-r, r + 1):
            y = cy + dy
            if not 0 <= y < ncells:
                continue
            if on_face or abs(dy) == r:
                zs = range(-r, r + 1)
            elif r > 0:
                zs = (-r, r)
            else:
                zs = (0,)
            for dz in zs:
                z = cz + dz
                if 0 <= z < ncells:
                    yield (x, y, z)


def min_dists(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Euclidean distance from each query point to its nearest ref point."""
    query = np.ascontiguousarray(query, dtype=np.float64).reshape(-1, 3)
    ref = np.ascontiguousarray(ref, dtype=np.float64).reshape(-1, 3)
    if len(ref) == 0:
        raise ValueError("reference point set is empty")
    origin, cell_size, ncells, buckets = _grid_cells(ref)
    out = np.empty(len(query))
    if cell_size == 0.0:
        for qi, q in enumerate(query):
            d = ref - q
            out[qi] = np.sqrt((d * d).sum(axis=1).min())
        return out
    qcells = np.floor((query - origin) / cell_size).astype(np.int64)
    for qi, (q, (cx, cy, cz)) in enumerate(zip(query, qcells)):
        best = np.inf
        # furthest useful shell: everything in range is within ncells rings
        # of any (possibly out-of-grid) center cell
        max_r = ncells + int(max(abs(cx), abs(cy), abs(cz)))
        for r in range(max_r + 1):
            if best < np.inf and (r - 1) * cell_size > np.sqrt(best):
                break
            for cell in _shell(int(cx), int(cy), int(cz), r, ncells):
                ix = buckets.get(cell)
                if ix is None:
                    continue
                d = ref[ix] - q
                m = (d * d).sum(axis=1).min()
                if m < best:
                    best = m
        out[qi] = np.sqrt(best)
    return out


def triangles(n: int, edges: np.ndarray) -> np.ndarray:
    """All triangles (i < j < k) of an undirected graph, lexicographic.

    Edges must be (m, 2) with i < j, unique. Each edge intersects the
    higher-index neighbor lists of its endpoints, so the cost is bounded by
    the smaller forward degree per edge rather than n^3.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    fwd: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        fwd[i].add(int(j))
    out = []
    for i, j in edges:
        i, j = int(i), int(j)
        a, b = fwd[i], fwd[j]
        if len(b) < len(a):
            a, b = b, a
        # members of fwd[j] already exceed j, so every common w closes (i,j,w)
        for w in sorted(w for w in a if w in b):
            out.append((i, j, w))
    if not out:
        return np.empty((0, 3), dtype=np.int64)
    tri = np.array(out, dtype=np.int64)
    return tri[np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0]))]
