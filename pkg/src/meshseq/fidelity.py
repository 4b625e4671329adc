"""Quantization-damage measurement and vertex refinement back to continuous space.

An enhancer maps each lattice vertex to a continuous point inside its own
cell (cells are half-open, [l/128, (l+1)/128) per axis). Two implementations
ship here: the cell-center baseline and a snap oracle that recovers the
centroid of the original points falling in each cell — the deterministic
stand-in for a trained refinement model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import metrics
from .mesh_io import Mesh
from .tokenizer import LATTICE, lattice_to_points, quantize


class FidelityEnhancer(Protocol):
    def enhance(self, lattice: np.ndarray) -> np.ndarray:
        """Continuous coordinates, one row per lattice vertex, inside the cell."""


@dataclass(frozen=True)
class FidelityReport:
    cd_quantized: float
    cd_enhanced: float
    hd_quantized: float
    hd_enhanced: float
    n_vertices_before: int
    n_vertices_after: int

    def as_dict(self) -> dict:
        return {
            "cd_quantized": self.cd_quantized,
            "cd_enhanced": self.cd_enhanced,
            "hd_quantized": self.hd_quantized,
            "hd_enhanced": self.hd_enhanced,
            "n_vertices_before": self.n_vertices_before,
            "n_vertices_after": self.n_vertices_after,
        }


class CellCenterEnhancer:
    """Baseline: the middle of each cell, (l + 0.5) / 128."""

    def enhance(self, lattice: np.ndarray) -> np.ndarray:
        return lattice_to_points(lattice)


class SnapOracleEnhancer:
    """Centroid of the original points quantizing into each cell.

    Plays the trained enhancer's role deterministically: with access to the
    pre-quantization vertices it returns, per cell, their centroid (the
    exact original point when the cell holds just one), falling back to the
    cell center for cells no original occupies.
    """

    def __init__(self, originals: np.ndarray):
        originals = np.asarray(originals, dtype=np.float64).reshape(-1, 3)
        cells = np.minimum(np.floor(originals * LATTICE).astype(np.int64), LATTICE - 1)
        keys = (cells[:, 0] * LATTICE + cells[:, 1]) * LATTICE + cells[:, 2]
        order = np.argsort(keys, kind="stable")
        self._keys, starts = np.unique(keys[order], return_index=True)
        sums = np.add.reduceat(originals[order], starts, axis=0)
        counts = np.diff(np.append(starts, len(keys)))
        self._centroids = sums / counts[:, None]

    def enhance(self, lattice: np.ndarray) -> np.ndarray:
        lattice = np.asarray(lattice, dtype=np.int64).reshape(-1, 3)
        out = lattice_to_points(lattice)
        if len(self._keys):
            keys = (lattice[:, 0] * LATTICE + lattice[:, 1]) * LATTICE + lattice[:, 2]
            pos = np.searchsorted(self._keys, keys).clip(max=len(self._keys) - 1)
            found = self._keys[pos] == keys
            out[found] = self._centroids[pos[found]]
        return out


def clamp_to_cells(lattice: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Force points into their cells' half-open boxes (enhancer contract)."""
    lo = np.asarray(lattice, dtype=np.float64) / LATTICE
    hi = np.nextafter((np.asarray(lattice, dtype=np.float64) + 1.0) / LATTICE, -np.inf)
    return np.clip(points, lo, hi)


def apply_enhancer(enhancer: FidelityEnhancer, lattice: np.ndarray) -> np.ndarray:
    """Run an enhancer and enforce cell containment on its output."""
    return clamp_to_cells(lattice, enhancer.enhance(lattice))


def fidelity_report(
    mesh: Mesh,
    enhancer: FidelityEnhancer,
    count: int = metrics.DEFAULT_POINT_COUNT,
    seed: int = 0,
) -> FidelityReport:
    """CD/HD of the quantized and the enhanced mesh against the original.

    The input must already be normalized; all three meshes share that frame,
    so the scores isolate quantization damage rather than scale differences.
    """
    q = quantize(mesh)
    quantized = Mesh(lattice_to_points(q.lattice), q.faces)
    enhanced = Mesh(apply_enhancer(enhancer, q.lattice), q.faces)
    orig = metrics.sample_surface(mesh, count, seed).points
    qs = metrics.sample_surface(quantized, count, seed).points
    es = metrics.sample_surface(enhanced, count, seed).points
    oq = metrics.nearest_dists(orig, qs)
    qo = metrics.nearest_dists(qs, orig)
    oe = metrics.nearest_dists(orig, es)
    eo = metrics.nearest_dists(es, orig)
    return FidelityReport(
        cd_quantized=100.0 * 0.5 * (oq.mean() + qo.mean()),
        cd_enhanced=100.0 * 0.5 * (oe.mean() + eo.mean()),
        hd_quantized=100.0 * max(oq.max(), qo.max()),
        hd_enhanced=100.0 * max(oe.max(), eo.max()),
        n_vertices_before=mesh.n_vertices,
        n_vertices_after=q.n_vertices,
    )
