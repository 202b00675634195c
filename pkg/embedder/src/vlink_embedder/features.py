"""Image preprocessing and VGG16 feature extraction.

Images are stretched to 224x224 (bilinear, no aspect-ratio preservation so
the whole canvas stays visible) and scaled into [0, 1] — no mean
subtraction, so consumers never need to know about ImageNet statistics.
Features are the final max-pool output of VGG16's convolutional stack,
flattened in height-width-channel order to 7 * 7 * 512 = 25,088 values.
The fully-connected head is discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from PIL import Image
from torchvision.models import vgg16

INPUT_SIZE = 224
FEATURE_DIM = 7 * 7 * 512  # 25,088
WEIGHT_CHOICES = ("pretrained", "random")


@dataclass(frozen=True)
class PreprocessedImage:
    """A 224x224x3 float32 array with every value in [0, 1]."""

    tensor: np.ndarray

    def __post_init__(self):
        t = self.tensor
        if t.shape != (INPUT_SIZE, INPUT_SIZE, 3):
            raise ValueError(f"expected {INPUT_SIZE}x{INPUT_SIZE}x3, got {t.shape}")
        if t.min() < 0.0 or t.max() > 1.0:
            raise ValueError("channel values must lie in [0, 1]")


def preprocess(image_path) -> PreprocessedImage:
    """Decode, stretch to 224x224 with bilinear filtering, scale by 1/255.

    Grayscale images are replicated to three channels. Undecodable files
    raise ``OSError`` (PIL's failure modes all derive from it).
    """
    with Image.open(image_path) as img:
        rgb = img.convert("RGB").resize((INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    return PreprocessedImage(arr)


class FeatureExtractor:
    """Frozen VGG16 convolutional stack ending at the last max-pool.

    ``weights="pretrained"`` loads the published ImageNet weights (network
    access required on first use); ``weights="random"`` draws a fresh
    initialization from ``init_seed``, which is enough for format-level
    and pipeline testing where feature quality is irrelevant.
    """

    def __init__(self, weights: str = "pretrained", init_seed: int = 0):
        if weights not in WEIGHT_CHOICES:
            raise ValueError(f"weights must be one of {WEIGHT_CHOICES}, got {weights!r}")
        if weights == "pretrained":
            from torchvision.models import VGG16_Weights

            net = vgg16(weights=VGG16_Weights.IMAGENET1K_V1)
        else:
            torch.manual_seed(init_seed)
            net = vgg16(weights=None)
        self._features = net.features.eval()
        for p in self._features.parameters():
            p.requires_grad_(False)

    def embed_batch(self, images: Sequence[PreprocessedImage]) -> np.ndarray:
        """(len(images), 25088) float32 feature matrix.

        Row order follows the input order; results do not depend on how
        a sequence of images is split into batches.
        """
        if len(images) == 0:
            raise ValueError("batch must be non-empty")
        stack = np.stack([im.tensor for im in images])
        x = torch.from_numpy(stack).permute(0, 3, 1, 2).contiguous()
        with torch.no_grad():
            out = self._features(x)  # (B, 512, 7, 7)
        flat = out.permute(0, 2, 3, 1).reshape(len(images), FEATURE_DIM)
        return np.ascontiguousarray(flat.numpy(), dtype=np.float32)
