"""``embed``: directory of paintings in, manifest + embedding file out."""

from __future__ import annotations

import argparse
import logging
import sys

from .export import export_corpus
from .features import WEIGHT_CHOICES, FeatureExtractor

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed",
        description="Extract VGG16 features for every painting under an artist-per-directory tree.",
    )
    parser.add_argument("--images", required=True, help="root directory: one sub-directory per artist")
    parser.add_argument("--manifest", required=True, help="output manifest path (JSON Lines)")
    parser.add_argument("--embeddings", required=True, help="output embedding file path")
    parser.add_argument("--batch-size", type=int, default=16, help="images per forward pass")
    parser.add_argument(
        "--weights",
        choices=WEIGHT_CHOICES,
        default="pretrained",
        help="'pretrained' ImageNet weights or a seeded 'random' initialization",
    )
    parser.add_argument("--init-seed", type=int, default=0, help="seed for --weights random")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        extractor = FeatureExtractor(weights=args.weights, init_seed=args.init_seed)
        summary = export_corpus(
            args.images,
            args.manifest,
            args.embeddings,
            extractor,
            batch_size=args.batch_size,
        )
    except (ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1
    logger.info(
        "wrote %d rows (%d artists, %d skipped) to %s / %s",
        summary["images"],
        summary["artists"],
        summary["skipped"],
        args.manifest,
        args.embeddings,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
