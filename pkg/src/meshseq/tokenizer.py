"""Block-wise vertex tokenization over a 7-bit lattice.

Each axis is quantized into 128 levels = 8 coarse blocks x 16 fine offsets.
A vertex (x, y, z) splits into a block triple (each >> 4) and an offset
triple (each & 15); vertices are grouped by block and each block id is
emitted once, followed by the offset ids of its vertices. Token id layout:

    [0, 4096)      offset ids   (ox*256 + oy*16 + oz)
    [4096, 4608)   block ids    (bx*64 + by*8 + bz, shifted by OFFSET_VOCAB)
    4608           START
    4609           END

so the vocabulary has 8^3 + 16^3 + 2 = 4610 entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedSequenceError, OutOfRangeError
from .mesh_io import Mesh

LATTICE = 128  # 7-bit per axis
BLOCK_GRID = 8
OFFSET_GRID = 16
OFFSET_VOCAB = OFFSET_GRID**3  # 4096
BLOCK_VOCAB = BLOCK_GRID**3  # 512
START_ID = OFFSET_VOCAB + BLOCK_VOCAB  # 4608
END_ID = START_ID + 1  # 4609
VOCAB_SIZE = END_ID + 1  # 4610


@dataclass(frozen=True)
class QuantizedMesh:
    """Deduplicated lattice vertices plus the face remap of a quantization.

    ``lattice`` rows are unique and sorted by (block id, offset id) — the
    canonical order shared with tokenize/detokenize. ``merge_map`` sends each
    original vertex index to its surviving lattice row; ``faces`` are the
    original faces remapped, with collapsed (repeated-index) faces dropped.
    """

    lattice: np.ndarray
    faces: np.ndarray
    merge_map: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.lattice)


@dataclass(frozen=True)
class TokenStats:
    n_vertices: int
    n_blocks: int
    n_tokens: int
    vanilla_estimate: int
    bpt_estimate: int
    ratio_vs_bpt: float | None

    def as_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "n_blocks": self.n_blocks,
            "n_tokens": self.n_tokens,
            "vanilla_estimate": self.vanilla_estimate,
            "bpt_estimate": self.bpt_estimate,
            "ratio_vs_bpt": self.ratio_vs_bpt,
        }


def block_offset_ids(lattice: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linearized (block id, offset id) per lattice row, x-major."""
    lat = np.asarray(lattice, dtype=np.int64).reshape(-1, 3)
    block = lat >> 4
    offset = lat & 15
    block_id = (block[:, 0] << 6) + (block[:, 1] << 3) + block[:, 2]
    offset_id = (offset[:, 0] << 8) + (offset[:, 1] << 4) + offset[:, 2]
    return block_id, offset_id


def canonical_order(lattice: np.ndarray) -> np.ndarray:
    """Indices sorting lattice rows by (block id, offset id) ascending."""
    block_id, offset_id = block_offset_ids(lattice)
    return np.lexsort((offset_id, block_id))


def quantize(mesh: Mesh) -> QuantizedMesh:
    """Snap a normalized mesh to the 7-bit lattice, merging duplicates.

    Every coordinate must lie in [0, 1); each maps to floor(c * 128). The
    surviving vertices come out in canonical (block, offset) order.
    """
    v = mesh.vertices
    if v.size and (v.min() < 0.0 or v.max() >= 1.0):
        raise OutOfRangeError("mesh is not normalized to [0, 1)^3")
    lattice = np.minimum(np.floor(v * LATTICE).astype(np.int64), LATTICE - 1)
    uniq, inverse = np.unique(lattice, axis=0, return_inverse=True)
    order = canonical_order(uniq)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    merge_map = rank[inverse.reshape(-1)]
    faces = merge_map[mesh.faces] if mesh.n_faces else mesh.faces
    if len(faces):
        ok = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
        faces = faces[ok]
    return QuantizedMesh(uniq[order], faces, merge_map)


def lattice_to_points(lattice: np.ndarray) -> np.ndarray:
    """Continuous cell-center coordinates of lattice vertices."""
    return (np.asarray(lattice, dtype=np.float64) + 0.5) / LATTICE


def tokenize(lattice: np.ndarray) -> np.ndarray:
    """Encode deduplicated lattice vertices as a token sequence.

    Vertices are sorted by (block id, offset id); each distinct block emits
    one block token followed by its offset tokens, wrapped in START/END.
    Raises ValueError on duplicate lattice points.
    """
    lat = np.asarray(lattice, dtype=np.int64).reshape(-1, 3)
    if lat.size and (lat.min() < 0 or lat.max() >= LATTICE):
        raise OutOfRangeError("lattice coordinate outside [0, 128)")
    n = len(lat)
    if n == 0:
        return np.array([START_ID, END_ID], dtype=np.int64)
    block_id, offset_id = block_offset_ids(lat)
    order = np.lexsort((offset_id, block_id))
    block_id, offset_id = block_id[order], offset_id[order]
    same = (block_id[1:] == block_id[:-1]) & (offset_id[1:] == offset_id[:-1])
    if same.any():
        raise ValueError("duplicate lattice points (quantize merges them first)")
    new_block = np.empty(n, dtype=bool)
    new_block[0] = True
    new_block[1:] = block_id[1:] != block_id[:-1]
    n_blocks = int(new_block.sum())
    tokens = np.empty(1 + n_blocks + n + 1, dtype=np.int64)
    tokens[0] = START_ID
    tokens[-1] = END_ID
    # position of the i-th offset token: 1 + (block tokens emitted so far) + i
    pos = 1 + np.cumsum(new_block) + np.arange(n)
    tokens[pos] = offset_id
    tokens[pos[new_block] - 1] = block_id[new_block] + OFFSET_VOCAB
    return tokens


def detokenize(tokens: np.ndarray) -> np.ndarray:
    """Decode a token sequence back to lattice vertices (canonical order).

    Exact inverse of tokenize on its outputs. Raises MalformedSequenceError
    for ids outside the vocabulary, missing or misplaced START/END, an offset
    before any block, or non-increasing block tokens.
    """
    toks = np.asarray(tokens, dtype=np.int64).reshape(-1)
    if len(toks) < 2:
        raise MalformedSequenceError("sequence shorter than START+END")
    if toks.min() < 0 or toks.max() >= VOCAB_SIZE:
        raise MalformedSequenceError("token id outside vocabulary")
    if toks[0] != START_ID or toks[-1] != END_ID:
        raise MalformedSequenceError("sequence must start with START and end with END")
    body = toks[1:-1]
    if ((body == START_ID) | (body == END_ID)).any():
        raise MalformedSequenceError("START/END inside the sequence body")
    is_block = body >= OFFSET_VOCAB
    if len(body) and not is_block[0]:
        raise MalformedSequenceError("offset token before any block token")
    block_ids = body[is_block] - OFFSET_VOCAB
    if len(block_ids) > 1 and (np.diff(block_ids) <= 0).any():
        raise MalformedSequenceError("block tokens must strictly increase")
    # map each offset token to the latest block token before it
    group = np.cumsum(is_block) - 1
    offs = body[~is_block]
    blks = block_ids[group[~is_block]]
    lattice = np.empty((len(offs), 3), dtype=np.int64)
    lattice[:, 0] = ((blks >> 6) << 4) + (offs >> 8)
    lattice[:, 1] = (((blks >> 3) & 7) << 4) + ((offs >> 4) & 15)
    lattice[:, 2] = ((blks & 7) << 4) + (offs & 15)
    return lattice[canonical_order(lattice)]


def token_stats(mesh: Mesh) -> TokenStats:
    """Sequence-length bookkeeping for a normalized mesh.

    ``vanilla_estimate`` is the 9-tokens-per-face cost (18 per vertex when
    the mesh carries no faces); ``bpt_estimate`` applies the prior
    tokenizer's ~75% compression to that. ``ratio_vs_bpt`` is None when the
    estimate is zero (empty mesh).
    """
    q = quantize(mesh)
    tokens = tokenize(q.lattice)
    n_vertices = q.n_vertices
    n_tokens = len(tokens)
    n_blocks = n_tokens - n_vertices - 2
    if mesh.n_faces > 0:
        vanilla = 9 * mesh.n_faces
    else:
        vanilla = 18 * mesh.n_vertices
    bpt = round(0.25 * vanilla)
    ratio = n_tokens / bpt if bpt > 0 else None
    return TokenStats(n_vertices, n_blocks, n_tokens, vanilla, bpt, ratio)


def sample_next(
    logits: np.ndarray,
    temperature: float = 1.2,
    top_k: int = 100,
    top_p: float = 0.9,
    rng: np.random.Generator | int | None = None,
) -> int:
    """Draw one token index with temperature / top-k / top-p truncation.

    Logits are divided by temperature, restricted to the top_k largest, then
    to the smallest descending-probability prefix whose cumulative mass
    reaches top_p, renormalized, and sampled. Ties resolve to the lower
    index; the draw is deterministic for a given generator state.
    """
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    if logits.size == 0 or not np.isfinite(logits).all():
        raise ValueError("logits must be non-empty and finite")
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if top_k <= 0:
        raise ValueError("top_k must be positive")
    if not 0.0 < top_p <= 1.0:
        raise ValueError("top_p must be in (0, 1]")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    scaled = logits / temperature
    order = np.argsort(-scaled, kind="stable")[: min(top_k, len(scaled))]
    shifted = scaled[order] - scaled[order[0]]
    probs = np.exp(shifted)
    probs /= probs.sum()
    cum = np.cumsum(probs)
    keep = int(np.searchsorted(cum, top_p, side="left")) + 1
    order, probs = order[:keep], probs[:keep]
    probs /= probs.sum()
    draw = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return int(order[min(draw, keep - 1)])
