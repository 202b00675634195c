"""Principal component analysis for embedding matrices.

Fits the reduction from the raw CNN feature space (D = 25,088 in
production) down to a small number of principal components (50 by
default). The decomposition is a thin SVD of the mean-centered matrix:
with N of a few thousand rows and D in the tens of thousands, forming the
D x D covariance is infeasible, while the SVD works on the N x D matrix
directly. All arithmetic runs in float64 regardless of the float32
storage precision of the inputs.

Model file format (all values little-endian):
    magic    4 bytes  b"VPCA"
    version  u32      currently 1
    d        u32      input dimensionality
    k        u32      number of retained components
    mean     d float64
    components k*d float64, row-major (one component per row)
    explained_variance k float64
    total_variance     1 float64

The trailing total variance is what makes the explained-variance *ratios*
recoverable on load without access to the training data.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import EmbeddingMatrix
from .errors import ModelFileError

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"VPCA"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sIII")

DEFAULT_COMPONENTS = 50
ORTHONORMALITY_TOL = 1e-6


@dataclass(frozen=True)
class PcaModel:
    """Fitted PCA basis: column mean, orthonormal components, variances.

    ``components`` has one principal axis per row (k x d). Arrays are
    float64 and read-only.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    total_variance: float

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def k(self) -> int:
        return self.components.shape[0]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-absolute entry is positive.

    Breaks the SVD sign ambiguity deterministically; all-zero rows are
    left untouched.
    """
    out = components.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return out


def _check_orthonormal(components: np.ndarray, tol: float = ORTHONORMALITY_TOL) -> float:
    gram = components @ components.T
    dev = float(np.max(np.abs(gram - np.eye(components.shape[0]))))
    return dev


def fit(matrix: EmbeddingMatrix, k: int = DEFAULT_COMPONENTS) -> PcaModel:
    """Fit a PCA model on the rows of ``matrix``.

    The effective component count is ``min(k, n - 1, d)``; a silent clamp
    is logged. Explained variances are the squared singular values divided
    by ``n - 1`` (sample convention).
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    n, d = matrix.n, matrix.d
    if n < 2:
        raise ValueError(f"PCA needs at least 2 rows, got {n}")
    x = matrix.values.astype(np.float64)
    if not np.isfinite(x).all():
        raise ValueError("input matrix contains non-finite values")

    k_eff = min(k, n - 1, d)
    if k_eff < k:
        logger.info("clamping k from %d to %d (n=%d, d=%d)", k, k_eff, n, d)

    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)

    variances = (s**2) / (n - 1)
    total_variance = float(variances.sum())
    explained = variances[:k_eff]
    if total_variance > 0.0:
        ratio = explained / total_variance
    else:
        ratio = np.zeros_like(explained)
    components = _fix_signs(vt[:k_eff])

    return PcaModel(
        mean=_freeze(mean),
        components=_freeze(components),
        explained_variance=_freeze(explained.copy()),
        explained_variance_ratio=_freeze(ratio.copy()),
        total_variance=total_variance,
    )


def transform(model: PcaModel, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Project ``matrix`` onto the model's components (center, then rotate)."""
    if matrix.d != model.d:
        raise ValueError(f"matrix has d={matrix.d} but model expects d={model.d}")
    x = matrix.values.astype(np.float64)
    projected = (x - model.mean) @ model.components.T
    return EmbeddingMatrix(projected)


def inverse_transform(model: PcaModel, reduced) -> np.ndarray:
    """Map reduced coordinates back to the original space (float64).

    ``reduced`` may be an :class:`EmbeddingMatrix` or any (n, k) array.
    """
    y = np.asarray(getattr(reduced, "values", reduced), dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != model.k:
        raise ValueError(f"reduced matrix has shape {y.shape} but model has k={model.k}")
    return model.mean + y @ model.components


def save_model(model: PcaModel, path) -> None:
    """Write the model in the binary format above (deterministic bytes)."""
    header = _MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, model.d, model.k)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(model.mean.astype("<f8").tobytes())
        fh.write(model.components.astype("<f8").tobytes(order="C"))
        fh.write(model.explained_variance.astype("<f8").tobytes())
        fh.write(struct.pack("<d", model.total_variance))


def load_model(path) -> PcaModel:
    """Read and validate a model file.

    Validation covers the header, exact payload size, finiteness,
    component orthonormality (within 1e-6), and non-increasing explained
    variances; any violation raises :class:`ModelFileError`.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _MODEL_HEADER.size:
        raise ModelFileError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, d, k = _MODEL_HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelFileError(f"{path}: bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    if version != MODEL_VERSION:
        raise ModelFileError(f"{path}: unsupported version {version}")
    if d == 0 or k == 0 or k > d:
        raise ModelFileError(f"{path}: implausible shape in header (d={d}, k={k})")
    expected = _MODEL_HEADER.size + 8 * (d + k * d + k + 1)
    if len(data) != expected:
        raise ModelFileError(f"{path}: file is {len(data)} bytes, expected {expected}")

    offset = _MODEL_HEADER.size
    mean = np.frombuffer(data, dtype="<f8", count=d, offset=offset).astype(np.float64)
    offset += 8 * d
    components = (
        np.frombuffer(data, dtype="<f8", count=k * d, offset=offset)
        .astype(np.float64)
        .reshape(k, d)
    )
    offset += 8 * k * d
    explained = np.frombuffer(data, dtype="<f8", count=k, offset=offset).astype(np.float64)
    offset += 8 * k
    (total_variance,) = struct.unpack_from("<d", data, offset)

    for name, arr in (("mean", mean), ("components", components), ("explained_variance", explained)):
        if not np.isfinite(arr).all():
            raise ModelFileError(f"{path}: non-finite value in {name}")
    if not np.isfinite(total_variance):
        raise ModelFileError(f"{path}: non-finite total_variance")
    dev = _check_orthonormal(components)
    if dev > ORTHONORMALITY_TOL:
        raise ModelFileError(
            f"{path}: component rows are not orthonormal (max deviation {dev:.3g})"
        )
    if np.any(np.diff(explained) > 0):
        raise ModelFileError(f"{path}: explained variances are not non-increasing")
    if np.any(explained < 0):
        raise ModelFileError(f"{path}: negative explained variance")

    if total_variance > 0.0:
        ratio = explained / total_variance
    else:
        ratio = np.zeros_like(explained)
    if float(ratio.sum()) > 1.0 + 1e-9:
        raise ModelFileError(f"{path}: explained variance exceeds total variance")

    return PcaModel(
        mean=_freeze(mean),
        components=_freeze(components),
        explained_variance=_freeze(explained),
        explained_variance_ratio=_freeze(ratio),
        total_variance=float(total_variance),
    )
