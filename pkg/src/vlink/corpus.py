"""Painting corpus data model and on-disk formats.

A corpus couples a JSON Lines manifest (one painting per line) with a
binary embedding matrix whose rows follow manifest line order. Row order
is the *only* alignment between the two files; the binary file carries no
per-row identifiers.

Manifest format (UTF-8 JSON Lines), required keys per line:
    painting_id, artist_id, artist_name, source_path
Unknown keys are ignored.

Embedding file format (all integers little-endian):
    magic   4 bytes  b"VLNK"
    version u32      currently 1
    n       u64      row count
    d       u32      column count
    reserved u32     must be 0
    payload n*d little-endian float32 values, row-major
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmbeddingFileError, ManifestError

MAGIC = b"VLNK"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQII")

MANIFEST_KEYS = ("painting_id", "artist_id", "artist_name", "source_path")


@dataclass(frozen=True)
class PaintingRecord:
    """One painting: identity, authorship, and its row in the embedding matrix."""

    painting_id: str
    artist_id: str
    artist_name: str
    source_path: str
    row_index: int


@dataclass(frozen=True)
class Corpus:
    """Ordered painting records plus the artist id -> display name mapping.

    Immutable after construction. Structural invariants (contiguous row
    indices, unique painting ids, consistent artist names) are enforced by
    :meth:`from_records`; the at-least-two-artists rule is enforced only
    when loading a manifest, so degenerate single-artist corpora remain
    constructible for index edge cases.
    """

    paintings: tuple[PaintingRecord, ...]
    artists: Mapping[str, str]

    @classmethod
    def from_records(cls, records: Iterable[PaintingRecord]) -> "Corpus":
        paintings = tuple(records)
        seen: dict[str, int] = {}
        artists: dict[str, str] = {}
        for i, rec in enumerate(paintings):
            if rec.row_index != i:
                raise ValueError(
                    f"row_index must be contiguous from 0: record {i} has row_index {rec.row_index}"
                )
            if not rec.painting_id:
                raise ValueError(f"record {i}: empty painting_id")
            if rec.painting_id in seen:
                raise ValueError(
                    f"duplicate painting_id {rec.painting_id!r} "
                    f"(rows {seen[rec.painting_id]} and {i})"
                )
            seen[rec.painting_id] = i
            if not rec.artist_id:
                raise ValueError(f"record {i}: empty artist_id")
            known = artists.get(rec.artist_id)
            if known is None:
                artists[rec.artist_id] = rec.artist_name
            elif known != rec.artist_name:
                raise ValueError(
                    f"artist_id {rec.artist_id!r} maps to conflicting names "
                    f"{known!r} and {rec.artist_name!r}"
                )
        return cls(paintings=paintings, artists=MappingProxyType(artists))

    @property
    def n(self) -> int:
        return len(self.paintings)

    @cached_property
    def _by_id(self) -> Mapping[str, PaintingRecord]:
        return {rec.painting_id: rec for rec in self.paintings}

    @cached_property
    def artist_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.artists))

    def record(self, painting_id: str) -> PaintingRecord:
        try:
            return self._by_id[painting_id]
        except KeyError:
            raise KeyError(f"unknown painting_id {painting_id!r}") from None

    def artist_of(self, painting_id: str) -> str:
        return self.record(painting_id).artist_id

    def rows_of_artist(self, artist_id: str) -> tuple[int, ...]:
        return tuple(r.row_index for r in self.paintings if r.artist_id == artist_id)


class EmbeddingMatrix:
    """Dense N x D float32 feature matrix, row-aligned with a manifest.

    Values are held in 32-bit precision to match the on-disk format;
    numerical consumers (PCA, distance search) promote to float64
    internally. Instances are immutable; the constructor copies its input,
    so non-finite values can be *held* (validation reports them) but are
    rejected at the file I/O boundary.
    """

    __slots__ = ("_values",)

    def __init__(self, values) -> None:
        arr = np.array(values, dtype=np.float32, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self._values.shape[0]

    @property
    def d(self) -> int:
        return self._values.shape[1]

    def __repr__(self) -> str:
        return f"EmbeddingMatrix(n={self.n}, d={self.d})"


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    row: int | None = None
    col: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def load_manifest(path) -> Corpus:
    """Parse a JSON Lines manifest into a validated :class:`Corpus`.

    Row indices are assigned by line order starting at 0; blank lines are
    skipped. Raises :class:`ManifestError` for malformed lines (with line
    number), duplicate painting ids, conflicting artist names, or fewer
    than two artists.
    """
    records: list[PaintingRecord] = []
    first_line: dict[str, int] = {}
    artist_names: dict[str, tuple[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ManifestError(f"{path}: line {lineno}: expected a JSON object")
            for key in MANIFEST_KEYS:
                if key not in obj:
                    raise ManifestError(f"{path}: line {lineno}: missing key {key!r}")
                if not isinstance(obj[key], str):
                    raise ManifestError(f"{path}: line {lineno}: key {key!r} must be a string")
            pid = obj["painting_id"]
            artist_id = obj["artist_id"]
            if not pid or not artist_id or not obj["source_path"]:
                raise ManifestError(
                    f"{path}: line {lineno}: painting_id, artist_id and source_path must be non-empty"
                )
            if pid in first_line:
                raise ManifestError(
                    f"{path}: line {lineno}: duplicate painting_id {pid!r} "
                    f"(first seen on line {first_line[pid]})"
                )
            first_line[pid] = lineno
            known = artist_names.get(artist_id)
            if known is None:
                artist_names[artist_id] = (obj["artist_name"], lineno)
            elif known[0] != obj["artist_name"]:
                raise ManifestError(
                    f"{path}: line {lineno}: artist_id {artist_id!r} has name "
                    f"{obj['artist_name']!r} but line {known[1]} says {known[0]!r}"
                )
            records.append(
                PaintingRecord(
                    painting_id=pid,
                    artist_id=artist_id,
                    artist_name=obj["artist_name"],
                    source_path=obj["source_path"],
                    row_index=len(records),
                )
            )
    corpus = Corpus.from_records(records)
    if len(corpus.artists) < 2:
        raise ManifestError(
            f"{path}: corpus must contain at least 2 artists, found {len(corpus.artists)}"
        )
    return corpus


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Write a matrix in the binary embedding format (deterministic bytes)."""
    if matrix.n == 0 or matrix.d == 0:
        raise EmbeddingFileError(
            f"refusing to write a degenerate matrix (n={matrix.n}, d={matrix.d})"
        )
    if not np.isfinite(matrix.values).all():
        raise EmbeddingFileError("refusing to write a matrix with non-finite values")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, matrix.n, matrix.d, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.values.tobytes(order="C"))


def read_embeddings(
    path,
    expected_n: int | None = None,
    expected_d: int | None = None,
    check_finite: bool = True,
) -> EmbeddingMatrix:
    """Read a binary embedding file, verifying header and payload size.

    ``check_finite=False`` lets callers load a corrupt file in order to
    report the offending cells through :func:`validate` instead of failing
    at the read boundary.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise EmbeddingFileError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, n, d, reserved = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise EmbeddingFileError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise EmbeddingFileError(f"{path}: unsupported version {version}")
    if reserved != 0:
        raise EmbeddingFileError(f"{path}: reserved header field must be 0, got {reserved}")
    if n == 0 or d == 0:
        raise EmbeddingFileError(f"{path}: degenerate shape in header (n={n}, d={d})")
    if expected_n is not None and n != expected_n:
        raise EmbeddingFileError(f"{path}: header says n={n}, expected {expected_n}")
    if expected_d is not None and d != expected_d:
        raise EmbeddingFileError(f"{path}: header says d={d}, expected {expected_d}")
    payload = data[_HEADER.size :]
    expected_bytes = n * d * 4
    if len(payload) != expected_bytes:
        kind = "truncated" if len(payload) < expected_bytes else "oversized"
        raise EmbeddingFileError(
            f"{path}: {kind} payload ({len(payload)} bytes, expected {expected_bytes})"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    if check_finite and not np.isfinite(arr).all():
        row, col = np.argwhere(~np.isfinite(arr))[0]
        raise EmbeddingFileError(f"{path}: non-finite value at row {row}, column {col}")
    return EmbeddingMatrix(arr)


def validate(corpus: Corpus, matrix: EmbeddingMatrix) -> ValidationReport:
    """Check that a corpus and a matrix form a consistent pair.

    Violations are report entries, never exceptions. The report is empty
    iff the row counts match and every matrix value is finite.
    """
    issues: list[ValidationIssue] = []
    if corpus.n != matrix.n:
        issues.append(
            ValidationIssue(
                code="count-mismatch",
                message=f"corpus has {corpus.n} paintings but matrix has {matrix.n} rows",
            )
        )
    bad = np.argwhere(~np.isfinite(matrix.values))
    for row, col in bad:
        issues.append(
            ValidationIssue(
                code="non-finite",
                message=f"non-finite value at row {row}, column {col}",
                row=int(row),
                col=int(col),
            )
        )
    return ValidationReport(issues=tuple(issues))
