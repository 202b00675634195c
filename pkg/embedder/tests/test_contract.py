"""Acceptance contract for the embedder, checked through the consumer.

The exported files must be readable by the ``vlink`` package exactly as
written — the two packages share no code, only the file formats — and the
feature matrix must satisfy the published contract: 25,088 columns, all
values finite and non-negative, identical images giving identical rows.
"""

import shutil

import numpy as np

from vlink_embedder import export_corpus
from vlink_embedder.cli import main as embed_main

from conftest import save_noise_image


def _criterion(name, problems):
    status = "PASS" if not problems else "FAIL"
    line = f"[ACCEPTANCE] {name}: {status}"
    print(line)
    assert not problems, line + " :: " + "; ".join(problems[:5])


def test_criterion_embedder_contract(art_dir, extractor, tmp_path):
    problems = []
    # duplicate an existing painting under a new name: identical pixels
    src = art_dir / "Claude Monet" / "work_1.png"
    shutil.copyfile(src, art_dir / "Piet Mondrian" / "copy_of_work_1.png")

    manifest = tmp_path / "manifest.jsonl"
    emb = tmp_path / "embeddings.vlnk"
    export_corpus(art_dir, manifest, emb, extractor, batch_size=2)

    from vlink.corpus import load_manifest, read_embeddings, validate

    corpus = load_manifest(manifest)
    matrix = read_embeddings(emb)

    if matrix.d != 25088:
        problems.append(f"column count {matrix.d} != 25088")
    if not np.isfinite(matrix.values).all():
        problems.append("non-finite values")
    if matrix.values.min() < 0.0:
        problems.append("negative values")

    dup_row = corpus.record("piet_mondrian/copy_of_work_1.png").row_index
    orig_row = corpus.record("claude_monet/work_1.png").row_index
    if not np.array_equal(matrix.values[dup_row], matrix.values[orig_row]):
        problems.append("identical images produced different rows")

    report = validate(corpus, matrix)
    if not report.ok:
        problems.append(f"corpus validate reported: {[i.message for i in report.issues]}")
    _criterion("embedder-contract", problems)


def test_cli_output_feeds_the_full_pipeline(tmp_path):
    # build a corpus through the `embed` CLI, then run every stage of the
    # consumer CLI on its outputs; only files cross the package boundary
    root = tmp_path / "paintings"
    for artist, seeds in [("Artist One", (11, 12, 13)), ("Artist Two", (21, 22, 23))]:
        adir = root / artist
        adir.mkdir(parents=True)
        for s in seeds:
            save_noise_image(adir / f"p{s}.png", seed=s)

    manifest = tmp_path / "manifest.jsonl"
    emb = tmp_path / "raw.vlnk"
    code = embed_main(
        [
            "--images", str(root),
            "--manifest", str(manifest),
            "--embeddings", str(emb),
            "--weights", "random",
            "--init-seed", "7",
            "--batch-size", "4",
        ]
    )
    assert code == 0

    from vlink.cli import main as vlink_main

    config = tmp_path / "vlink.toml"
    config.write_text(
        f'manifest = "{manifest}"\nembeddings = "{emb}"\n'
        f'pca_k = 5\nnn_k = 2\nseed = 3\noutput_dir = "{tmp_path / "out"}"\n'
    )
    for step in (
        ["validate"],
        ["fit-pca"],
        ["transform"],
        ["links"],
        ["graph"],
        ["eval-sample", "--m", "4"],
    ):
        assert vlink_main(["--config", str(config), *step]) == 0, step

    out = tmp_path / "out"
    assert (out / "reduced.vlnk").exists()
    assert (out / "influence.graphml").exists()
    # two artists: the graph is the single possible edge
    edges = (out / "edges.csv").read_text().splitlines()
    assert edges[0] == "source,target,support_count"
    assert len(edges) == 2
    assert edges[1].startswith("artist_one,artist_two")
