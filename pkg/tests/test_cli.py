"""End-to-end CLI behavior: the full pipeline, exit codes, determinism."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from vlink.cli import main
from vlink.corpus import EmbeddingMatrix, write_embeddings
from vlink.nnindex import read_neighbor_lines

from conftest import blob_points, manifest_rows, write_manifest


SPEC = {"alba": 6, "brun": 6, "cora": 5}


@pytest.fixture
def workspace(tmp_path):
    """Manifest + raw embeddings + config file, out dir under tmp."""
    manifest = tmp_path / "manifest.jsonl"
    write_manifest(manifest, manifest_rows(SPEC))
    matrix = blob_points(SPEC, centers=[0.0, 6.0, 13.0], d=9, seed=70)
    raw = tmp_path / "raw.vlnk"
    write_embeddings(matrix, raw)
    config = tmp_path / "vlink.toml"
    config.write_text(
        "\n".join(
            [
                f'manifest = "{manifest}"',
                f'embeddings = "{raw}"',
                "pca_k = 4",
                "nn_k = 3",
                'strategy = "brute"',
                "seed = 13",
                f'output_dir = "{tmp_path / "out"}"',
            ]
        )
        + "\n"
    )
    return tmp_path, config, matrix


def run(config, *argv):
    return main(["--config", str(config), *argv])


def test_full_pipeline(workspace, capsys):
    tmp, config, matrix = workspace
    out = tmp / "out"
    assert run(config, "validate") == 0
    assert run(config, "fit-pca") == 0
    assert run(config, "transform") == 0
    assert run(config, "build-index") == 0
    assert run(config, "query", "--painting", "alba_p0") == 0
    assert run(config, "links") == 0
    assert run(config, "graph") == 0
    assert run(config, "eval-sample", "--m", "8") == 0

    # every artifact and summary exists
    for name in (
        "validate.summary.json",
        "pca.vpca",
        "reduced.vlnk",
        "query.jsonl",
        "links.jsonl",
        "influence.graphml",
        "edges.csv",
        "influence.dot",
        "centrality.csv",
        "sample.csv",
    ):
        assert (out / name).exists(), name

    # links.jsonl: one line per painting, all cross-artist
    links = read_neighbor_lines(out / "links.jsonl")
    assert len(links) == sum(SPEC.values())

    summary = json.loads((out / "graph.summary.json").read_text())
    assert summary["nodes"] == 3


def test_query_output_matches_library(workspace):
    tmp, config, matrix = workspace
    run(config, "fit-pca")
    run(config, "transform")
    assert run(config, "query", "--painting", "brun_p3", "--k", "2") == 0
    (result,) = read_neighbor_lines(tmp / "out" / "query.jsonl")
    assert result.query_id == "brun_p3"
    assert len(result.hits) == 2
    assert all(not h.painting_id.startswith("brun") for h in result.hits)
    # independent check through the library on the same artifacts
    from vlink.corpus import load_manifest, read_embeddings
    from vlink.nnindex import build

    corpus = load_manifest(tmp / "manifest.jsonl")
    reduced = read_embeddings(tmp / "out" / "reduced.vlnk")
    idx = build(reduced, corpus)
    expected = idx.query("brun_p3", k=2)
    # the file stores distances at 9 significant digits; compare in that form
    assert result.to_json_line() == expected.to_json_line()


def test_two_artist_graph_has_single_edge(tmp_path):
    spec = {"alba": 3, "brun": 3}
    manifest = tmp_path / "m.jsonl"
    write_manifest(manifest, manifest_rows(spec))
    write_embeddings(blob_points(spec, centers=[0.0, 5.0], d=4, seed=71), tmp_path / "raw.vlnk")
    config = tmp_path / "c.toml"
    config.write_text(
        f'manifest = "{manifest}"\nembeddings = "{tmp_path / "raw.vlnk"}"\n'
        f'pca_k = 3\noutput_dir = "{tmp_path / "out"}"\n'
    )
    for cmd in (["fit-pca"], ["transform"], ["links"], ["graph"]):
        assert run(config, *cmd) == 0
    with open(tmp_path / "out" / "edges.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["source", "target", "support_count"]
    assert len(rows) == 2
    assert rows[1][:2] == ["alba", "brun"]
    assert int(rows[1][2]) == 6  # every painting points across


def test_eval_score_prints_072(tmp_path, capsys):
    judg = tmp_path / "judgments"
    judg.mkdir()
    # five experts; exactly 72 of 100 pairs get a majority of 1
    for e in range(5):
        with open(judg / f"expert_{e}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair_index", "verdict"])
            for i in range(100):
                if i < 72:
                    verdict = 1 if e < 3 else 0  # 3-2 majority yes
                else:
                    verdict = 1 if e < 2 else 0  # 2-3 majority no
                w.writerow([i, verdict])
    code = main(["--output", str(tmp_path / "out"), "eval-score", "--judgments", str(judg)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "0.72"
    summary = json.loads((tmp_path / "out" / "eval-score.summary.json").read_text())
    assert summary["precision"] == 0.72
    assert summary["meaningful"] == 72


def test_flag_overrides_config(workspace):
    tmp, config, _ = workspace
    other = tmp / "elsewhere"
    assert run(config, "--output", str(other), "validate") == 0
    assert (other / "validate.summary.json").exists()


def test_exit_code_missing_input(workspace):
    tmp, config, _ = workspace
    assert run(config, "validate", "--manifest", str(tmp / "nope.jsonl")) == 4


def test_exit_code_bad_config(tmp_path):
    config = tmp_path / "bad.toml"
    config.write_text("pca_k = -3\n")
    assert main(["--config", str(config), "validate"]) == 3
    config.write_text("unknown_key = 1\n")
    assert main(["--config", str(config), "validate"]) == 3
    config.write_text("pca_k = [not toml")
    assert main(["--config", str(config), "validate"]) == 3


def test_exit_code_malformed_embeddings(workspace):
    tmp, config, _ = workspace
    bad = tmp / "bad.vlnk"
    bad.write_bytes(b"garbage!")
    assert run(config, "validate", "--embeddings", str(bad)) == 5


def test_exit_code_unknown_painting(workspace):
    tmp, config, _ = workspace
    run(config, "fit-pca")
    run(config, "transform")
    assert run(config, "query", "--painting", "ghost") == 7


def test_exit_code_validation_mismatch(workspace, tmp_path):
    tmp, config, matrix = workspace
    short = EmbeddingMatrix(matrix.values[:-1])
    write_embeddings(short, tmp / "short.vlnk")
    assert run(config, "validate", "--embeddings", str(tmp / "short.vlnk")) == 6
    # and the summary still records the issue
    summary = json.loads((tmp / "out" / "validate.summary.json").read_text())
    assert summary["ok"] is False
    assert summary["issues"]


def test_usage_error_is_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_pipeline_reruns_byte_identical(workspace):
    tmp, config, _ = workspace

    def run_all(out_dir):
        for cmd in (
            ["fit-pca"],
            ["transform"],
            ["links"],
            ["graph"],
            ["eval-sample", "--m", "10"],
        ):
            assert run(config, "--output", str(out_dir), *cmd) == 0

    run_all(tmp / "run1")
    run_all(tmp / "run2")
    for name in (
        "pca.vpca",
        "reduced.vlnk",
        "links.jsonl",
        "influence.graphml",
        "edges.csv",
        "influence.dot",
        "centrality.csv",
        "sample.csv",
    ):
        a = (tmp / "run1" / name).read_bytes()
        b = (tmp / "run2" / name).read_bytes()
        assert a == b, name


def test_console_script_entrypoint(workspace):
    tmp, config, _ = workspace
    proc = subprocess.run(
        [sys.executable, "-m", "vlink.cli", "--config", str(config), "validate"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "consistent" in proc.stderr  # logs go to stderr, stdout stays clean
    assert proc.stdout == ""
