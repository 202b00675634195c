"""Preprocessing contract and feature-extraction behavior."""

import numpy as np
import pytest
from PIL import Image

from vlink_embedder import FEATURE_DIM, PreprocessedImage, preprocess

from conftest import save_image


def test_all_black_becomes_zero_tensor(tmp_path):
    path = save_image(tmp_path / "black.png", color=(0, 0, 0))
    out = preprocess(path)
    assert out.tensor.shape == (224, 224, 3)
    assert out.tensor.dtype == np.float32
    assert np.all(out.tensor == 0.0)


def test_all_white_becomes_ones_tensor(tmp_path):
    path = save_image(tmp_path / "white.png", color=(255, 255, 255))
    out = preprocess(path)
    assert np.all(out.tensor == 1.0)


def test_checkerboard_downscale_mean():
    # 448x448 one-pixel checkerboard: bilinear halving averages 2x2 blocks
    board = np.indices((448, 448)).sum(axis=0) % 2
    img = Image.fromarray((board * 255).astype(np.uint8)).convert("RGB")
    path = "/tmp/_checker.png"
    img.save(path)
    out = preprocess(path)
    assert abs(float(out.tensor.mean()) - 0.5) <= 0.01


def test_grayscale_replicated_to_three_channels(tmp_path):
    path = save_image(tmp_path / "gray.png", color=(77, 0, 0), mode="L")
    out = preprocess(path)
    assert out.tensor.shape == (224, 224, 3)
    assert np.array_equal(out.tensor[..., 0], out.tensor[..., 1])
    assert np.array_equal(out.tensor[..., 0], out.tensor[..., 2])
    assert out.tensor[0, 0, 0] == np.float32(77 / 255)


def test_values_stay_in_unit_range(tmp_path):
    path = save_image(tmp_path / "c.png", size=(300, 150), color=(255, 0, 128))
    out = preprocess(path)
    assert out.tensor.min() >= 0.0
    assert out.tensor.max() <= 1.0


def test_undecodable_file_raises_oserror(tmp_path):
    bad = tmp_path / "fake.jpg"
    bad.write_bytes(b"this is not an image")
    with pytest.raises(OSError):
        preprocess(bad)


def test_preprocessed_image_validates_shape_and_range():
    with pytest.raises(ValueError):
        PreprocessedImage(np.zeros((100, 100, 3), dtype=np.float32))
    with pytest.raises(ValueError):
        PreprocessedImage(np.full((224, 224, 3), 2.0, dtype=np.float32))


# feature extraction: each forward pass is slow on CPU, so the cases below
# share images where they can


def test_embed_batch_shape_and_value_contract(extractor, tmp_path):
    imgs = [
        preprocess(save_image(tmp_path / "a.png", color=(200, 10, 10))),
        preprocess(save_image(tmp_path / "b.png", color=(10, 200, 10))),
    ]
    out = extractor.embed_batch(imgs)
    assert out.shape == (2, FEATURE_DIM)
    assert out.shape[1] == 25088
    assert out.dtype == np.float32
    assert np.isfinite(out).all()
    assert out.min() >= 0.0  # final activation is rectified
    assert out.max() > 0.0  # and not degenerate


def test_identical_images_give_identical_rows(extractor, tmp_path):
    img = preprocess(save_image(tmp_path / "same.png", color=(33, 66, 99)))
    out = extractor.embed_batch([img, img])
    assert np.array_equal(out[0], out[1])


def test_batch_split_does_not_change_results(extractor, tmp_path):
    imgs = [
        preprocess(save_image(tmp_path / "x.png", color=(5, 5, 250))),
        preprocess(save_image(tmp_path / "y.png", color=(250, 5, 5))),
    ]
    together = extractor.embed_batch(imgs)
    apart = np.vstack([extractor.embed_batch([imgs[0]]), extractor.embed_batch([imgs[1]])])
    assert np.array_equal(together, apart)


def test_empty_batch_rejected(extractor):
    with pytest.raises(ValueError):
        extractor.embed_batch([])


def test_bad_weights_choice_rejected():
    from vlink_embedder import FeatureExtractor

    with pytest.raises(ValueError):
        FeatureExtractor(weights="imagenet21k")
