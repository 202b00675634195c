"""Precision-evaluation protocol: pair sampling, expert judgments, scoring.

Queries are drawn uniformly without replacement from the paintings that
have at least one cross-artist candidate; for each query one hit is drawn
uniformly from its top-k_pool exclusion-filtered results. The sample is
fully determined by (corpus, seed, m, k_pool).

Judgments travel as plain CSV (one file per expert) so non-technical
experts can fill them in a spreadsheet; experts see only image paths.
An odd panel is required so the per-pair majority is always defined.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .corpus import Corpus
from .nnindex import Index
from .rng import Xoshiro256StarStar

MEANINGFUL = "meaningful"
NOT_MEANINGFUL = "not-meaningful"

SAMPLE_HEADER = ("pair_index", "query_id", "query_path", "hit_id", "hit_path")
JUDGMENT_HEADER = ("pair_index", "verdict")


@dataclass(frozen=True)
class Pair:
    pair_index: int
    query_id: str
    hit_id: str


@dataclass(frozen=True)
class PairSample:
    pairs: tuple[Pair, ...]
    seed: int
    k_pool: int


@dataclass(frozen=True)
class JudgmentSet:
    expert_id: str
    verdicts: dict[int, bool]  # pair_index -> meaningful?


def sample_pairs(index: Index, m: int, k_pool: int = 3, seed: int = 0) -> PairSample:
    """Draw ``m`` (query, retrieved) pairs for blind expert review.

    Eligible queries are enumerated in corpus row order; the portable
    generator picks m of them without replacement, then one hit from each
    query's top-``k_pool`` cross-artist results (fewer than k_pool hits is
    fine, the draw is over what exists).
    """
    if m < 1:
        raise ValueError(f"pair count must be positive, got {m}")
    if k_pool < 1:
        raise ValueError(f"k_pool must be positive, got {k_pool}")
    corpus = index.corpus
    per_artist = {a: len(corpus.rows_of_artist(a)) for a in corpus.artist_ids}
    eligible = [
        rec.painting_id
        for rec in corpus.paintings
        if corpus.n - per_artist[rec.artist_id] > 0
    ]
    if m > len(eligible):
        raise ValueError(f"requested {m} pairs but only {len(eligible)} eligible queries")
    rng = Xoshiro256StarStar(seed)
    picks = rng.sample_without_replacement(m, len(eligible))
    pairs = []
    for pair_index, pick in enumerate(picks):
        query_id = eligible[pick]
        hits = index.query(query_id, k=k_pool, exclude_same_artist=True).hits
        hit = hits[rng.bounded(len(hits))]
        pairs.append(Pair(pair_index=pair_index, query_id=query_id, hit_id=hit.painting_id))
    return PairSample(pairs=tuple(pairs), seed=seed, k_pool=k_pool)


def write_sample_csv(sample: PairSample, corpus: Corpus, path) -> None:
    """Sample export with image paths: pair_index,query_id,query_path,hit_id,hit_path."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SAMPLE_HEADER)
        for pair in sample.pairs:
            writer.writerow(
                [
                    pair.pair_index,
                    pair.query_id,
                    corpus.record(pair.query_id).source_path,
                    pair.hit_id,
                    corpus.record(pair.hit_id).source_path,
                ]
            )


def read_sample_csv(path) -> tuple[Pair, ...]:
    pairs = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            pairs.append(
                Pair(
                    pair_index=int(row["pair_index"]),
                    query_id=row["query_id"],
                    hit_id=row["hit_id"],
                )
            )
    return tuple(pairs)


def read_judgments_csv(path, expert_id: str | None = None) -> JudgmentSet:
    """One expert's verdicts: CSV with columns pair_index,verdict (1 or 0)."""
    if expert_id is None:
        expert_id = os.path.splitext(os.path.basename(path))[0]
    verdicts: dict[int, bool] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(JUDGMENT_HEADER) - set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {JUDGMENT_HEADER}")
        for row in reader:
            idx = int(row["pair_index"])
            raw = row["verdict"].strip()
            if raw not in ("0", "1"):
                raise ValueError(f"{path}: pair {idx}: verdict must be 0 or 1, got {raw!r}")
            if idx in verdicts:
                raise ValueError(f"{path}: duplicate verdict for pair {idx}")
            verdicts[idx] = raw == "1"
    return JudgmentSet(expert_id=expert_id, verdicts=verdicts)


def aggregate(judgments: list[JudgmentSet] | tuple[JudgmentSet, ...]) -> dict[int, bool]:
    """Per-pair majority verdict over an odd number of expert judgment sets."""
    if not judgments:
        raise ValueError("no judgment sets given")
    if len(judgments) % 2 == 0:
        raise ValueError(f"expert count must be odd, got {len(judgments)}")
    reference = set(judgments[0].verdicts)
    for js in judgments[1:]:
        if set(js.verdicts) != reference:
            raise ValueError(
                f"judgment sets cover different pairs "
                f"({judgments[0].expert_id!r} vs {js.expert_id!r})"
            )
    majority = len(judgments) // 2 + 1
    return {
        idx: sum(js.verdicts[idx] for js in judgments) >= majority
        for idx in sorted(reference)
    }


def precision(verdicts: dict[int, bool]) -> float:
    """Fraction of pairs judged meaningful."""
    if not verdicts:
        raise ValueError("no verdicts to score")
    return sum(verdicts.values()) / len(verdicts)
