"""Shared fixtures: a seeded random-weight extractor and tiny test images."""

import numpy as np
import pytest
from PIL import Image

from vlink_embedder import FeatureExtractor


@pytest.fixture(scope="session")
def extractor():
    # random weights: format and determinism tests don't need ImageNet,
    # and the test environment has no weight download access
    return FeatureExtractor(weights="random", init_seed=7)


def save_image(path, size=(32, 24), color=(120, 30, 200), mode="RGB"):
    img = Image.new(mode, size, color if mode == "RGB" else color[0])
    img.save(path)
    return path


def save_noise_image(path, seed, size=(48, 36)):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(arr, "RGB").save(path)
    return path


@pytest.fixture
def art_dir(tmp_path):
    """Two artists x two images, plus a factory for more."""
    root = tmp_path / "paintings"
    for artist, seeds in [("Claude Monet", (1, 2)), ("Piet Mondrian", (3, 4))]:
        adir = root / artist
        adir.mkdir(parents=True)
        for s in seeds:
            save_noise_image(adir / f"work_{s}.png", seed=s)
    return root
