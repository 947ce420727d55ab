import numpy as np
import pytest

from uncerseg import BBox, BinaryMask, ImageRaster
from uncerseg.harness import gen_synthetic, load_dataset


@pytest.fixture
def gt4():
    """4x4 ground truth: the left two columns are foreground."""
    return BinaryMask(np.array([[1, 1, 0, 0]] * 4, dtype=np.uint8))


@pytest.fixture
def img4():
    return ImageRaster(np.full((4, 4), 100, dtype=np.uint8))


@pytest.fixture
def box_left():
    """Box over the left column only; half the foreground."""
    return BBox(0.0, 0.0, 1.0, 4.0)


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Eight 64x64 synthetic image/mask pairs, shared across test files."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    manifest = gen_synthetic(out, 8, 42, (64, 64))
    return manifest, load_dataset(manifest)
