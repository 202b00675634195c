"""Corpus export: walk an image directory, write manifest + embedding file.

Expected layout is one sub-directory per artist::

    image_root/
        Claude Monet/
            water-lilies.jpg
            haystacks.png
        Piet Mondrian/
            composition-ii.jpg

Output rows are ordered lexicographically by (artist directory name, file
name), so re-running on unchanged inputs produces byte-identical files.
The embedding file is written in the consumer's binary layout: a 24-byte
little-endian header (magic ``VLNK``, version 1, row count u64, column
count u32, reserved u32) followed by row-major float32 data. The row
count is patched into the header after the streaming pass, since
unreadable images are only discovered during decoding.
"""

from __future__ import annotations

import json
import logging
import re
import struct
from pathlib import Path

from .features import FEATURE_DIM, FeatureExtractor, preprocess

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sIQII")
_MAGIC = b"VLNK"
_VERSION = 1


def slugify(name: str) -> str:
    """Directory name to artist_id: lowercase, non-alphanumerics to '_'."""
    slug = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
    if not slug:
        raise ValueError(f"artist directory name {name!r} slugifies to nothing")
    return slug


def _collect(image_root: Path) -> list[tuple[str, str, Path]]:
    """(artist_name, artist_id, file) triples in deterministic order."""
    artist_dirs = sorted((p for p in image_root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not artist_dirs:
        raise ValueError(f"{image_root}: no artist sub-directories")
    slugs: dict[str, str] = {}
    out = []
    for adir in artist_dirs:
        artist_id = slugify(adir.name)
        if artist_id in slugs and slugs[artist_id] != adir.name:
            raise ValueError(
                f"artist directories {slugs[artist_id]!r} and {adir.name!r} "
                f"collide on id {artist_id!r}"
            )
        slugs[artist_id] = adir.name
        for f in sorted((p for p in adir.iterdir() if p.is_file()), key=lambda p: p.name):
            out.append((adir.name, artist_id, f))
    if not out:
        raise ValueError(f"{image_root}: no image files under any artist directory")
    return out


def export_corpus(
    image_root,
    out_manifest,
    out_embeddings,
    extractor: FeatureExtractor,
    batch_size: int = 16,
) -> dict:
    """Embed every readable image and write the two output files.

    Unreadable files are skipped with a warning and appear in neither
    output. Returns summary counts: images written, artists represented,
    files skipped.
    """
    root = Path(image_root)
    if not root.is_dir():
        raise ValueError(f"{root}: not a directory")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size}")
    entries = _collect(root)

    manifest_rows: list[str] = []
    artists_seen: set[str] = set()
    skipped = 0
    pending: list[tuple[str, str, Path]] = []
    buffer = []

    with open(out_embeddings, "wb") as emb:
        emb.write(_HEADER.pack(_MAGIC, _VERSION, 0, FEATURE_DIM, 0))

        def flush():
            nonlocal buffer, pending
            if not buffer:
                return
            matrix = extractor.embed_batch(buffer)
            emb.write(matrix.astype("<f4", copy=False).tobytes(order="C"))
            for artist_name, artist_id, path in pending:
                row = {
                    "painting_id": f"{artist_id}/{path.name}",
                    "artist_id": artist_id,
                    "artist_name": artist_name,
                    "source_path": str(path.relative_to(root)),
                }
                manifest_rows.append(json.dumps(row, ensure_ascii=False))
                artists_seen.add(artist_id)
            buffer, pending = [], []

        for artist_name, artist_id, path in entries:
            try:
                image = preprocess(path)
            except OSError as exc:
                logger.warning("skipping unreadable image %s: %s", path, exc)
                skipped += 1
                continue
            buffer.append(image)
            pending.append((artist_name, artist_id, path))
            if len(buffer) == batch_size:
                flush()
        flush()

        n = len(manifest_rows)
        if n == 0:
            raise ValueError(f"{root}: no readable images")
        emb.seek(0)
        emb.write(_HEADER.pack(_MAGIC, _VERSION, n, FEATURE_DIM, 0))

    with open(out_manifest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(manifest_rows) + "\n")

    if len(artists_seen) < 2:
        logger.warning(
            "only %d artist has readable images; downstream corpus checks require 2+",
            len(artists_seen),
        )
    return {"images": n, "artists": len(artists_seen), "skipped": skipped}
