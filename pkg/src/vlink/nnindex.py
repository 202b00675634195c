"""Exact L2 nearest-neighbor search with same-artist exclusion.

Two interchangeable strategies back the index: a vectorized brute-force
scan and a k-d tree with bounding-box pruning. Both are exact and must
return element-for-element identical results; the tree exists purely as a
performance option. Candidate ordering is (distance, painting_id), which
pins down ties and makes downstream graphs reproducible.

Distances are computed in float64 from the float32 stored coordinates,
and both strategies share one squared-distance kernel so their values are
bitwise identical.
"""

from __future__ import annotations

import json
import math
from bisect import insort
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, EmbeddingMatrix, validate
from .errors import ValidationFailure

DEFAULT_LEAF_SIZE = 32
STRATEGIES = ("brute", "tree")


def l2(q, p) -> float:
    """Euclidean distance between two equal-length vectors, in float64."""
    qa = np.asarray(q, dtype=np.float64)
    pa = np.asarray(p, dtype=np.float64)
    if qa.shape != pa.shape or qa.ndim != 1:
        raise ValueError(f"dimension mismatch: {qa.shape} vs {pa.shape}")
    diff = qa - pa
    return float(np.sqrt(np.dot(diff, diff)))


@dataclass(frozen=True)
class Neighbor:
    painting_id: str
    distance: float


@dataclass(frozen=True)
class NeighborList:
    """Ranked hits for one query, distances ascending."""

    query_id: str
    hits: tuple[Neighbor, ...]

    def to_json_line(self) -> str:
        """One JSON Lines record; distances printed to 9 significant digits."""
        parts = ", ".join(
            f'{{"id": {json.dumps(h.painting_id)}, "distance": {format(h.distance, ".9g")}}}'
            for h in self.hits
        )
        return f'{{"query": {json.dumps(self.query_id)}, "hits": [{parts}]}}'


@dataclass(frozen=True)
class Top1Link:
    """A painting's single nearest cross-artist painting."""

    query_id: str
    match_id: str
    distance: float


def read_neighbor_lines(path) -> list[NeighborList]:
    """Parse a JSON Lines query-results file written by :meth:`NeighborList.to_json_line`."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            hits = tuple(Neighbor(h["id"], float(h["distance"])) for h in obj["hits"])
            out.append(NeighborList(query_id=obj["query"], hits=hits))
    return out


class _Node:
    """k-d tree node; leaves carry row indices, inner nodes carry children.

    Every node keeps its bounding box so the search can prune a subtree
    when the box's minimum possible distance exceeds the current k-th
    best. Pruning is strict (>), so boundary ties are still visited and
    the lexicographic tie-break stays exact.
    """

    __slots__ = ("lo", "hi", "rows", "left", "right")

    def __init__(self, lo, hi, rows=None, left=None, right=None):
        self.lo = lo
        self.hi = hi
        self.rows = rows
        self.left = left
        self.right = right


def _build_tree(points: np.ndarray, rows: np.ndarray, leaf_size: int) -> _Node:
    pts = points[rows]
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    if len(rows) <= leaf_size:
        return _Node(lo, hi, rows=rows)
    # Split on the widest box dimension at the positional median; splitting
    # by position (not value) guarantees progress even with duplicates.
    dim = int(np.argmax(hi - lo))
    order = np.argsort(pts[:, dim], kind="stable")
    ordered = rows[order]
    mid = len(ordered) // 2
    left = _build_tree(points, ordered[:mid], leaf_size)
    right = _build_tree(points, ordered[mid:], leaf_size)
    return _Node(lo, hi, left=left, right=right)


def _sq_dists(block: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise squared distances; the one kernel shared by both strategies."""
    diff = block - q
    return np.einsum("ij,ij->i", diff, diff)


def _min_sq_dist(lo: np.ndarray, hi: np.ndarray, q: np.ndarray) -> float:
    gap = np.maximum(np.maximum(lo - q, q - hi), 0.0)
    return float(np.dot(gap, gap))


class Index:
    """Immutable exact-NN index over the reduced feature space.

    Build through :func:`build`, which validates the corpus/matrix pair
    first. Queries are pure reads and safe to run concurrently.
    """

    def __init__(self, points: EmbeddingMatrix, corpus: Corpus, strategy: str, leaf_size: int):
        self.corpus = corpus
        self.points = points
        self.strategy = strategy
        self._points64 = points.values.astype(np.float64)
        self._points64.setflags(write=False)
        self._ids = np.array([r.painting_id for r in corpus.paintings])
        artist_order = {a: i for i, a in enumerate(corpus.artist_ids)}
        self._artist_codes = np.array(
            [artist_order[r.artist_id] for r in corpus.paintings], dtype=np.int64
        )
        self._root = (
            _build_tree(self._points64, np.arange(points.n, dtype=np.int64), leaf_size)
            if strategy == "tree"
            else None
        )

    @property
    def n(self) -> int:
        return self.points.n

    def _eligible_mask(self, query_row: int, exclude_same_artist: bool) -> np.ndarray:
        if exclude_same_artist:
            mask = self._artist_codes != self._artist_codes[query_row]
        else:
            mask = np.ones(self.n, dtype=bool)
            mask[query_row] = False
        return mask

    def _brute_smallest(self, rows: np.ndarray, q: np.ndarray, k: int) -> list[tuple]:
        """k smallest (squared distance, painting_id, row) among ``rows``."""
        d2 = _sq_dists(self._points64[rows], q)
        ids = self._ids[rows]
        if k < len(rows):
            part = np.argpartition(d2, k - 1)[:k]
            thresh = d2[part].max()
            cand = np.flatnonzero(d2 <= thresh)
        else:
            cand = np.arange(len(rows))
        ranked = sorted(((d2[i], ids[i], int(rows[i])) for i in cand), key=lambda t: (t[0], t[1]))
        return ranked[:k]

    def _tree_smallest(
        self, q: np.ndarray, k: int, eligible: np.ndarray
    ) -> list[tuple]:
        best: list[tuple] = []  # (d2, painting_id, row), ascending, len <= k

        def visit(node: _Node) -> None:
            if len(best) == k and _min_sq_dist(node.lo, node.hi, q) > best[-1][0]:
                return
            if node.rows is not None:
                rows = node.rows[eligible[node.rows]]
                if len(rows) == 0:
                    return
                d2 = _sq_dists(self._points64[rows], q)
                ids = self._ids[rows]
                if len(best) == k:
                    worst_d2, worst_id = best[-1][0], best[-1][1]
                    take = d2 < worst_d2
                    at_worst = d2 == worst_d2
                    if at_worst.any():
                        take |= at_worst & (ids < worst_id)
                    candidates = np.flatnonzero(take)
                else:
                    candidates = np.arange(len(rows))
                for i in candidates:
                    entry = (d2[i], ids[i], int(rows[i]))
                    if len(best) < k:
                        insort(best, entry)
                    elif (entry[0], entry[1]) < (best[-1][0], best[-1][1]):
                        insort(best, entry)
                        best.pop()
                return
            d_left = _min_sq_dist(node.left.lo, node.left.hi, q)
            d_right = _min_sq_dist(node.right.lo, node.right.hi, q)
            if d_left <= d_right:
                visit(node.left)
                visit(node.right)
            else:
                visit(node.right)
                visit(node.left)

        visit(self._root)
        return best

    def query(self, painting_id: str, k: int, exclude_same_artist: bool = True) -> NeighborList:
        """The k closest eligible paintings, ascending by (distance, id).

        The query painting itself is always excluded; with exclusion on,
        every painting by the query's artist is filtered from the
        candidate set before truncation to k. Fewer than k hits is a
        valid outcome, not an error.
        """
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        query_row = self.corpus.record(painting_id).row_index
        q = self._points64[query_row]
        eligible = self._eligible_mask(query_row, exclude_same_artist)
        if self.strategy == "tree":
            ranked = self._tree_smallest(q, k, eligible)
        else:
            rows = np.flatnonzero(eligible)
            ranked = self._brute_smallest(rows, q, k) if len(rows) else []
        hits = tuple(Neighbor(str(pid), math.sqrt(d2)) for d2, pid, _ in ranked)
        return NeighborList(query_id=painting_id, hits=hits)

    def batch_top1_cross_artist(self) -> tuple[Top1Link, ...]:
        """Top-1 cross-artist match for every painting, in corpus row order.

        Paintings with no cross-artist candidate (single-artist corpus)
        are skipped rather than reported as errors.
        """
        links = []
        for rec in self.corpus.paintings:
            result = self.query(rec.painting_id, k=1, exclude_same_artist=True)
            if result.hits:
                hit = result.hits[0]
                links.append(Top1Link(rec.painting_id, hit.painting_id, hit.distance))
        return tuple(links)


def build(
    points: EmbeddingMatrix,
    corpus: Corpus,
    strategy: str = "brute",
    leaf_size: int = DEFAULT_LEAF_SIZE,
) -> Index:
    """Validate the corpus/matrix pair and build a queryable index."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be positive, got {leaf_size}")
    report = validate(corpus, points)
    if not report.ok:
        raise ValidationFailure(report)
    return Index(points, corpus, strategy, leaf_size)
