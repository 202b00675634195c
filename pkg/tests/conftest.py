"""Shared fixture builders for the test suite."""

from __future__ import annotations

import json

import numpy as np
import pytest

from vlink.corpus import Corpus, EmbeddingMatrix, PaintingRecord


def make_corpus(spec: dict[str, int]) -> Corpus:
    """Corpus with ``count`` paintings per artist, ids like ``a0_p3``.

    ``spec`` maps artist_id -> painting count. Rows are laid out artist by
    artist in the given dict order.
    """
    records = []
    for artist_id, count in spec.items():
        for i in range(count):
            records.append(
                PaintingRecord(
                    painting_id=f"{artist_id}_p{i}",
                    artist_id=artist_id,
                    artist_name=artist_id.upper(),
                    source_path=f"img/{artist_id}/{i}.png",
                    row_index=len(records),
                )
            )
    return Corpus.from_records(records)


def write_manifest(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def manifest_rows(spec: dict[str, int]):
    rows = []
    for artist_id, count in spec.items():
        for i in range(count):
            rows.append(
                {
                    "painting_id": f"{artist_id}_p{i}",
                    "artist_id": artist_id,
                    "artist_name": artist_id.upper(),
                    "source_path": f"img/{artist_id}/{i}.png",
                }
            )
    return rows


def blob_points(spec: dict[str, int], centers, d: int, seed: int, scale: float = 1.0):
    """Gaussian blob per artist around the given center points."""
    rng = np.random.default_rng(seed)
    rows = []
    for (artist, count), center in zip(spec.items(), centers):
        mu = np.asarray(center, dtype=np.float64)
        if mu.shape == ():  # scalar center: same value in every dim
            mu = np.full(d, float(mu))
        rows.append(rng.normal(loc=mu, scale=scale, size=(count, d)))
    return EmbeddingMatrix(np.vstack(rows).astype(np.float32))


@pytest.fixture
def two_artist_corpus():
    return make_corpus({"alba": 2, "brun": 2})


@pytest.fixture
def tmp_manifest(tmp_path):
    path = tmp_path / "manifest.jsonl"
    write_manifest(path, manifest_rows({"alba": 2, "brun": 2}))
    return path
