import numpy as np
import pytest

from meshseq.creation import corpus_meshes, tetrahedron
from meshseq.mesh_io import normalize


@pytest.fixture(scope="session")
def corpus():
    """Twenty closed-manifold meshes (V in [500, 2000]), raw coordinates."""
    return corpus_meshes()


@pytest.fixture(scope="session")
def normalized_corpus(corpus):
    return [(name, normalize(mesh)) for name, mesh in corpus]


@pytest.fixture()
def tetra():
    return tetrahedron()


def random_lattice_set(rng: np.random.Generator, size: int) -> np.ndarray:
    """Distinct random lattice points, arbitrary order."""
    pts = rng.integers(0, 128, size=(size, 3))
    pts = np.unique(pts, axis=0)
    rng.shuffle(pts)
    return pts
