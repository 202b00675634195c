"""``vlink`` command-line pipeline driver.

Subcommands cover the pipeline end to end: validate, fit-pca, transform,
build-index, query, links, graph, eval-sample, eval-score. A TOML config
file supplies defaults; command-line flags win over config values. All
randomness funnels through the configured seed. Logs go to stderr,
artifacts to files under the output directory; every subcommand also
writes a deterministic ``<name>.summary.json``.

Exit codes:
    0  success, all artifacts written and validations clean
    2  usage error (argparse)
    3  invalid configuration
    4  missing input file
    5  malformed data file (manifest, embedding file, or model file)
    6  validation failure
    7  bad reference or argument (unknown painting id, bad k, ...)
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import corpus as corpus_mod
from . import evalkit, linkgraph, nnindex, pca
from .errors import (
    ConfigError,
    EmbeddingFileError,
    ManifestError,
    ModelFileError,
    ValidationFailure,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_MISSING_INPUT = 4
EXIT_BAD_DATA = 5
EXIT_VALIDATION = 6
EXIT_BAD_REFERENCE = 7


@dataclass
class PipelineConfig:
    manifest: str = ""
    embeddings: str = ""
    pca_model: str = ""
    pca_k: int = 50
    nn_k: int = 3
    strategy: str = "brute"
    seed: int = 0
    output_dir: str = "out"

    def check(self) -> None:
        if self.pca_k < 1 or self.nn_k < 1:
            raise ConfigError(f"k values must be positive (pca_k={self.pca_k}, nn_k={self.nn_k})")
        if self.strategy not in nnindex.STRATEGIES:
            raise ConfigError(
                f"strategy must be one of {nnindex.STRATEGIES}, got {self.strategy!r}"
            )
        if not self.output_dir:
            raise ConfigError("output_dir must be non-empty")


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    known = {f.name: f.type for f in fields(PipelineConfig)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {', '.join(unknown)}")
    for key, value in raw.items():
        expected = int if known[key] in ("int", int) else str
        if not isinstance(value, expected) or isinstance(value, bool):
            raise ConfigError(f"{path}: key {key!r} must be {expected.__name__}")
    return PipelineConfig(**raw)


def _resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in ("manifest", "embeddings", "pca_model", "pca_k", "nn_k", "strategy", "seed", "output_dir"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    cfg = replace(cfg, **overrides)
    cfg.check()
    return cfg


def _require_path(label: str, value: str) -> Path:
    if not value:
        raise ConfigError(f"no {label} path configured (set it in the config file or pass the flag)")
    path = Path(value)
    if not path.exists():
        raise FileNotFoundError(f"{label} file not found: {path}")
    return path


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_summary(cfg: PipelineConfig, name: str, payload: dict) -> None:
    path = _out_dir(cfg) / f"{name}.summary.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)


def _model_path(cfg: PipelineConfig) -> Path:
    return Path(cfg.pca_model) if cfg.pca_model else _out_dir(cfg) / "pca.vpca"


def _reduced_path(cfg: PipelineConfig, args) -> Path:
    if getattr(args, "reduced", None):
        return Path(args.reduced)
    return _out_dir(cfg) / "reduced.vlnk"


def _load_index(cfg: PipelineConfig, args) -> nnindex.Index:
    corpus = corpus_mod.load_manifest(_require_path("manifest", cfg.manifest))
    reduced = corpus_mod.read_embeddings(_require_path("reduced embeddings", str(_reduced_path(cfg, args))))
    return nnindex.build(reduced, corpus, strategy=cfg.strategy)


def cmd_validate(cfg: PipelineConfig, args) -> int:
    corpus = corpus_mod.load_manifest(_require_path("manifest", cfg.manifest))
    matrix = corpus_mod.read_embeddings(
        _require_path("embeddings", cfg.embeddings), check_finite=False
    )
    report = corpus_mod.validate(corpus, matrix)
    _write_summary(
        cfg,
        "validate",
        {
            "command": "validate",
            "manifest": cfg.manifest,
            "embeddings": cfg.embeddings,
            "paintings": corpus.n,
            "artists": len(corpus.artists),
            "matrix_rows": matrix.n,
            "matrix_cols": matrix.d,
            "issues": [issue.message for issue in report.issues],
            "ok": report.ok,
        },
    )
    if not report.ok:
        for issue in report.issues:
            logger.error("validation: %s", issue.message)
        return EXIT_VALIDATION
    logger.info("corpus and embeddings are consistent (%d paintings)", corpus.n)
    return EXIT_OK


def cmd_fit_pca(cfg: PipelineConfig, args) -> int:
    matrix = corpus_mod.read_embeddings(_require_path("embeddings", cfg.embeddings))
    model = pca.fit(matrix, k=cfg.pca_k)
    model_path = _model_path(cfg)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    pca.save_model(model, model_path)
    _write_summary(
        cfg,
        "fit-pca",
        {
            "command": "fit-pca",
            "embeddings": cfg.embeddings,
            "model": str(model_path),
            "k_requested": cfg.pca_k,
            "k_effective": model.k,
            "explained_variance_ratio_sum": float(model.explained_variance_ratio.sum()),
        },
    )
    return EXIT_OK


def cmd_transform(cfg: PipelineConfig, args) -> int:
    matrix = corpus_mod.read_embeddings(_require_path("embeddings", cfg.embeddings))
    model = pca.load_model(_require_path("pca model", str(_model_path(cfg))))
    reduced = pca.transform(model, matrix)
    out_path = _reduced_path(cfg, args)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_embeddings(reduced, out_path)
    _write_summary(
        cfg,
        "transform",
        {
            "command": "transform",
            "embeddings": cfg.embeddings,
            "model": str(_model_path(cfg)),
            "output": str(out_path),
            "rows": reduced.n,
            "cols": reduced.d,
        },
    )
    return EXIT_OK


def cmd_build_index(cfg: PipelineConfig, args) -> int:
    index = _load_index(cfg, args)
    _write_summary(
        cfg,
        "build-index",
        {
            "command": "build-index",
            "manifest": cfg.manifest,
            "reduced": str(_reduced_path(cfg, args)),
            "strategy": cfg.strategy,
            "points": index.n,
            "dims": index.points.d,
            "artists": len(index.corpus.artists),
        },
    )
    return EXIT_OK


def cmd_query(cfg: PipelineConfig, args) -> int:
    index = _load_index(cfg, args)
    k = args.k if args.k is not None else cfg.nn_k
    result = index.query(args.painting, k=k, exclude_same_artist=not args.include_same_artist)
    out_path = _out_dir(cfg) / "query.jsonl"
    out_path.write_text(result.to_json_line() + "\n", encoding="utf-8")
    _write_summary(
        cfg,
        "query",
        {
            "command": "query",
            "painting": args.painting,
            "k": k,
            "exclude_same_artist": not args.include_same_artist,
            "hits": len(result.hits),
            "output": str(out_path),
        },
    )
    return EXIT_OK


def cmd_links(cfg: PipelineConfig, args) -> int:
    index = _load_index(cfg, args)
    links = index.batch_top1_cross_artist()
    out_path = _out_dir(cfg) / "links.jsonl"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for link in links:
            line = nnindex.NeighborList(
                query_id=link.query_id,
                hits=(nnindex.Neighbor(link.match_id, link.distance),),
            ).to_json_line()
            fh.write(line + "\n")
    _write_summary(
        cfg,
        "links",
        {
            "command": "links",
            "strategy": cfg.strategy,
            "links": len(links),
            "output": str(out_path),
        },
    )
    return EXIT_OK


def cmd_graph(cfg: PipelineConfig, args) -> int:
    corpus = corpus_mod.load_manifest(_require_path("manifest", cfg.manifest))
    links_path = Path(args.links) if args.links else _out_dir(cfg) / "links.jsonl"
    if not links_path.exists():
        raise FileNotFoundError(f"links file not found: {links_path} (run `vlink links` first)")
    top1 = []
    for entry in nnindex.read_neighbor_lines(links_path):
        if entry.hits:
            top1.append(
                nnindex.Top1Link(entry.query_id, entry.hits[0].painting_id, entry.hits[0].distance)
            )
    ranked = linkgraph.rank_linked_artists(top1, corpus)
    graph = linkgraph.build_graph(ranked)
    report = linkgraph.build_report(graph)
    out = _out_dir(cfg)
    outputs = {
        "graphml": out / "influence.graphml",
        "edge_csv": out / "edges.csv",
        "dot": out / "influence.dot",
        "report_csv": out / "centrality.csv",
    }
    linkgraph.export_graph(graph, report, "graphml", outputs["graphml"])
    linkgraph.export_graph(graph, report, "edge-csv", outputs["edge_csv"])
    linkgraph.export_graph(graph, report, "dot", outputs["dot"])
    linkgraph.write_report_csv(report, outputs["report_csv"])
    components = linkgraph.connected_components(graph)
    _write_summary(
        cfg,
        "graph",
        {
            "command": "graph",
            "links": str(links_path),
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "components": len(components),
            "outputs": {name: str(path) for name, path in outputs.items()},
        },
    )
    return EXIT_OK


def cmd_eval_sample(cfg: PipelineConfig, args) -> int:
    index = _load_index(cfg, args)
    sample = evalkit.sample_pairs(index, m=args.m, k_pool=args.k_pool, seed=cfg.seed)
    out_path = _out_dir(cfg) / "sample.csv"
    evalkit.write_sample_csv(sample, index.corpus, out_path)
    _write_summary(
        cfg,
        "eval-sample",
        {
            "command": "eval-sample",
            "m": args.m,
            "k_pool": args.k_pool,
            "seed": cfg.seed,
            "output": str(out_path),
        },
    )
    return EXIT_OK


def cmd_eval_score(cfg: PipelineConfig, args) -> int:
    judgment_paths: list[Path] = []
    for raw in args.judgments:
        path = Path(raw)
        if path.is_dir():
            judgment_paths.extend(sorted(path.glob("*.csv")))
        elif path.exists():
            judgment_paths.append(path)
        else:
            raise FileNotFoundError(f"judgment file not found: {path}")
    if not judgment_paths:
        raise FileNotFoundError("no judgment files found")
    judgments = [evalkit.read_judgments_csv(p) for p in judgment_paths]
    sample_path = Path(args.sample) if args.sample else _out_dir(cfg) / "sample.csv"
    if sample_path.exists():
        pairs = evalkit.read_sample_csv(sample_path)
        expected = {p.pair_index for p in pairs}
        covered = set(judgments[0].verdicts)
        if covered != expected:
            raise ValueError(
                f"judgments cover {len(covered)} pairs but sample {sample_path} has {len(expected)}"
            )
    verdicts = evalkit.aggregate(judgments)
    score = evalkit.precision(verdicts)
    _write_summary(
        cfg,
        "eval-score",
        {
            "command": "eval-score",
            "experts": len(judgments),
            "pairs": len(verdicts),
            "meaningful": sum(verdicts.values()),
            "precision": score,
        },
    )
    print(repr(score))
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "manifest": ("--manifest", str, "corpus manifest (JSON Lines)"),
        "embeddings": ("--embeddings", str, "raw embedding file"),
        "pca_model": ("--pca-model", str, "PCA model file"),
        "pca_k": ("--pca-k", int, "number of principal components"),
        "nn_k": ("--nn-k", int, "default neighbor count"),
        "strategy": ("--strategy", str, "index strategy: brute or tree"),
        "seed": ("--seed", int, "seed for all sampling"),
        "reduced": ("--reduced", str, "reduced embedding file"),
    }
    for name in names:
        flag, typ, help_text = flags[name]
        sub.add_argument(flag, dest=name, type=typ, default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlink",
        description="Visual link retrieval and artist influence-graph analysis.",
    )
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--output", dest="output_dir", default=None, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("validate", help="check manifest/embedding consistency")
    _add_common(sub, "manifest", "embeddings")
    sub.set_defaults(func=cmd_validate)

    sub = subs.add_parser("fit-pca", help="fit the dimensionality reduction")
    _add_common(sub, "embeddings", "pca_model", "pca_k")
    sub.set_defaults(func=cmd_fit_pca)

    sub = subs.add_parser("transform", help="project embeddings onto the PCA basis")
    _add_common(sub, "embeddings", "pca_model", "reduced")
    sub.set_defaults(func=cmd_transform)

    sub = subs.add_parser("build-index", help="build and validate the NN index")
    _add_common(sub, "manifest", "reduced", "strategy")
    sub.set_defaults(func=cmd_build_index)

    sub = subs.add_parser("query", help="retrieve visual links for one painting")
    _add_common(sub, "manifest", "reduced", "strategy", "nn_k")
    sub.add_argument("--painting", required=True, help="query painting_id")
    sub.add_argument("--k", type=int, default=None, help="neighbors to retrieve")
    sub.add_argument(
        "--include-same-artist",
        action="store_true",
        help="keep paintings by the query's artist in the candidate set",
    )
    sub.set_defaults(func=cmd_query)

    sub = subs.add_parser("links", help="top-1 cross-artist link for every painting")
    _add_common(sub, "manifest", "reduced", "strategy")
    sub.set_defaults(func=cmd_links)

    sub = subs.add_parser("graph", help="build the influence graph and exports")
    _add_common(sub, "manifest")
    sub.add_argument("--links", default=None, help="links.jsonl from `vlink links`")
    sub.set_defaults(func=cmd_graph)

    sub = subs.add_parser("eval-sample", help="draw query/hit pairs for expert review")
    _add_common(sub, "manifest", "reduced", "strategy", "seed")
    sub.add_argument("--m", type=int, default=100, help="number of pairs")
    sub.add_argument("--k-pool", type=int, default=3, help="pool of top hits to draw from")
    sub.set_defaults(func=cmd_eval_sample)

    sub = subs.add_parser("eval-score", help="aggregate expert judgments into precision")
    sub.add_argument("--sample", default=None, help="sample.csv to check coverage against")
    sub.add_argument("--judgments", nargs="+", required=True, help="judgment CSV files or a directory")
    sub.set_defaults(func=cmd_eval_score)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _resolve_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        logger.error("missing input: %s", exc)
        return EXIT_MISSING_INPUT
    except (ManifestError, EmbeddingFileError, ModelFileError) as exc:
        logger.error("bad data file: %s", exc)
        return EXIT_BAD_DATA
    except ValidationFailure as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION
    except (KeyError, ValueError) as exc:
        message = exc.args[0] if exc.args else exc
        logger.error("%s", message)
        return EXIT_BAD_REFERENCE


if __name__ == "__main__":
    sys.exit(main())
