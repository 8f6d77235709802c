import pytest

from backend.block_data import BlockData
from backend.exact_linalg import to_matrix
from backend.link_patterns import from_multiplicities
from backend.quiver_reps import Decomposition


@pytest.fixture
def borel3():
    return BlockData.borel(3)


@pytest.fixture
def blocks21():
    return BlockData.of([2, 1])


@pytest.fixture
def pattern():
    """Build a pattern from a decomposition string such as ``"U21 + V1"``."""
    def build(text, blocks):
        return from_multiplicities(Decomposition.parse(text), blocks)
    return build


@pytest.fixture
def mat():
    return to_matrix


@pytest.fixture
def random_blocks():
    """Draw a random block composition of some n in 1..max_n from a numpy generator."""
    def draw(rng, max_n=6):
        n = int(rng.integers(1, max_n + 1))
        cuts = [c for c in range(1, n) if rng.random() < 0.5]
        edges = [0, *cuts, n]
        return BlockData.of([edges[i + 1] - edges[i] for i in range(len(edges) - 1)])
    return draw
