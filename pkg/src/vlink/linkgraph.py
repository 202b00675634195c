"""Artist influence graph: construction, centrality, and exports.

Each artist is joined to the artist whose paintings most often appear as
the top-1 cross-artist match of their own paintings. The graph is
undirected; reciprocal selections merge into a single edge, and every
edge keeps the per-direction top-1 counts as provenance.

Centrality conventions (the source formulas leave these open, so they
are fixed here):

* Closeness uses the component-restricted formula scaled by
  (r - 1)/(n - 1) where r is the node's component size and n the total
  node count. On a connected graph this reduces to (n - 1) / sum of
  shortest-path distances; isolated nodes score 0.
* Betweenness is computed with Brandes' accumulation algorithm over
  unordered pairs, endpoints excluded, normalized by (n - 1)(n - 2)/2
  for n >= 3 and defined as 0 otherwise.
"""

from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence
from xml.etree import ElementTree as ET

from .corpus import Corpus
from .nnindex import Top1Link

logger = logging.getLogger(__name__)

EXPORT_FORMATS = ("graphml", "edge-csv", "dot")


@dataclass(frozen=True)
class RankedLink:
    """One entry of an artist's ranked list of visually linked artists."""

    artist_id: str
    count: int
    mean_distance: float


@dataclass(frozen=True)
class RankedLinkList:
    """Per-artist ranked links, ordered by count desc, then mean distance, then id."""

    per_artist: Mapping[str, tuple[RankedLink, ...]]


@dataclass(frozen=True)
class EdgeEvidence:
    """Provenance for one undirected edge: top-1 counts from each direction.

    ``chosen_by`` lists the endpoints whose ranked list put the other
    endpoint first (one entry, or both when the selection is reciprocal).
    """

    a: str
    b: str
    count_a_to_b: int
    count_b_to_a: int
    chosen_by: tuple[str, ...]

    @property
    def support_count(self) -> int:
        return self.count_a_to_b + self.count_b_to_a


@dataclass(frozen=True)
class InfluenceGraph:
    """Undirected artist graph; nodes sorted, edge keys as (a, b) with a < b."""

    nodes: tuple[str, ...]
    edges: Mapping[tuple[str, str], EdgeEvidence]

    @cached_property
    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return MappingProxyType({v: tuple(sorted(ws)) for v, ws in adj.items()})

    def _require(self, v: str) -> None:
        if v not in self.adjacency:
            raise KeyError(f"unknown artist {v!r}")


@dataclass(frozen=True)
class CentralityRow:
    artist_id: str
    degree: int
    closeness: float
    betweenness: float
    component_id: int


@dataclass(frozen=True)
class CentralityReport:
    """Per-node centralities, ordered by degree descending then artist id."""

    rows: tuple[CentralityRow, ...]

    @cached_property
    def by_artist(self) -> Mapping[str, CentralityRow]:
        return MappingProxyType({row.artist_id: row for row in self.rows})


def rank_linked_artists(top1: Sequence[Top1Link], corpus: Corpus) -> RankedLinkList:
    """Count, per artist, how often each other artist is the top-1 match.

    Entries are ordered by count descending, then smallest mean distance
    over the contributing links, then artist id; the distance signal is
    the only non-arbitrary tie-breaker available.
    """
    tallies: dict[str, dict[str, list]] = {a: {} for a in corpus.artist_ids}
    for link in top1:
        v = corpus.artist_of(link.query_id)
        u = corpus.artist_of(link.match_id)
        if u == v:
            raise ValueError(
                f"top-1 link {link.query_id!r} -> {link.match_id!r} is not cross-artist"
            )
        acc = tallies[v].setdefault(u, [0, 0.0])
        acc[0] += 1
        acc[1] += link.distance
    ranked: dict[str, tuple[RankedLink, ...]] = {}
    for v, counts in tallies.items():
        entries = [
            RankedLink(artist_id=u, count=c, mean_distance=total / c)
            for u, (c, total) in counts.items()
        ]
        entries.sort(key=lambda e: (-e.count, e.mean_distance, e.artist_id))
        ranked[v] = tuple(entries)
    return RankedLinkList(per_artist=MappingProxyType(ranked))


def build_graph(ranked: RankedLinkList) -> InfluenceGraph:
    """One edge per artist, to the head of its ranked list.

    An artist with an empty ranked list is reported and kept as an
    isolated node. Reciprocal selections produce a single edge whose
    evidence records both directions.
    """
    nodes = tuple(sorted(ranked.per_artist))
    chosen_by: dict[tuple[str, str], list[str]] = {}
    for v in nodes:
        entries = ranked.per_artist[v]
        if not entries:
            logger.warning("artist %s has no cross-artist links; keeping it isolated", v)
            continue
        u = entries[0].artist_id
        key = (v, u) if v < u else (u, v)
        chosen_by.setdefault(key, []).append(v)

    def count_from(v: str, u: str) -> int:
        for entry in ranked.per_artist.get(v, ()):
            if entry.artist_id == u:
                return entry.count
        return 0

    edges = {
        (a, b): EdgeEvidence(
            a=a,
            b=b,
            count_a_to_b=count_from(a, b),
            count_b_to_a=count_from(b, a),
            chosen_by=tuple(sorted(selectors)),
        )
        for (a, b), selectors in sorted(chosen_by.items())
    }
    return InfluenceGraph(nodes=nodes, edges=MappingProxyType(edges))


def degree(graph: InfluenceGraph, v: str) -> int:
    """Number of edges incident to ``v``."""
    graph._require(v)
    return len(graph.adjacency[v])


def _bfs_lengths(graph: InfluenceGraph, source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in graph.adjacency[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def closeness(graph: InfluenceGraph, v: str) -> float:
    """Component-restricted closeness with the (r - 1)/(n - 1) size correction."""
    graph._require(v)
    n = len(graph.nodes)
    dist = _bfs_lengths(graph, v)
    total = sum(dist.values())
    if total == 0 or n < 2:
        return 0.0
    r = len(dist)
    return ((r - 1) / total) * ((r - 1) / (n - 1))


def betweenness(graph: InfluenceGraph) -> dict[str, float]:
    """Brandes betweenness for every node, normalized into [0, 1].

    Single-source BFS plus dependency accumulation; the per-source
    dependencies count each unordered pair twice, so the raw sums are
    halved before dividing by the (n - 1)(n - 2)/2 pair count.
    """
    nodes = graph.nodes
    n = len(nodes)
    raw = dict.fromkeys(nodes, 0.0)
    if n < 3:
        return raw
    for s in nodes:
        stack: list[str] = []
        pred: dict[str, list[str]] = {v: [] for v in nodes}
        sigma = dict.fromkeys(nodes, 0.0)
        sigma[s] = 1.0
        dist = dict.fromkeys(nodes, -1)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in graph.adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        delta = dict.fromkeys(nodes, 0.0)
        while stack:
            w = stack.pop()
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                raw[w] += delta[w]
    scale = float((n - 1) * (n - 2))
    return {v: raw[v] / scale for v in nodes}


def connected_components(graph: InfluenceGraph) -> tuple[tuple[str, ...], ...]:
    """Maximal connected node sets, largest first, ties by smallest member."""
    seen: set[str] = set()
    components: list[tuple[str, ...]] = []
    for v in graph.nodes:
        if v in seen:
            continue
        members = sorted(_bfs_lengths(graph, v))
        seen.update(members)
        components.append(tuple(members))
    components.sort(key=lambda c: (-len(c), c[0]))
    return tuple(components)


def build_report(graph: InfluenceGraph) -> CentralityReport:
    """Assemble per-node degree, closeness, betweenness, and component ids."""
    comps = connected_components(graph)
    comp_of = {v: i for i, comp in enumerate(comps) for v in comp}
    btw = betweenness(graph)
    rows = [
        CentralityRow(
            artist_id=v,
            degree=degree(graph, v),
            closeness=closeness(graph, v),
            betweenness=btw[v],
            component_id=comp_of[v],
        )
        for v in graph.nodes
    ]
    rows.sort(key=lambda r: (-r.degree, r.artist_id))
    return CentralityReport(rows=tuple(rows))


def _graphml_tree(graph: InfluenceGraph, report: CentralityReport) -> ET.ElementTree:
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    keys = [
        ("d_degree", "node", "degree", "int"),
        ("d_closeness", "node", "closeness", "double"),
        ("d_betweenness", "node", "betweenness", "double"),
        ("d_component", "node", "component", "int"),
        ("d_support", "edge", "support_count", "int"),
    ]
    for key_id, domain, name, typ in keys:
        ET.SubElement(
            root,
            "key",
            attrib={"id": key_id, "for": domain, "attr.name": name, "attr.type": typ},
        )
    g = ET.SubElement(root, "graph", id="influence", edgedefault="undirected")
    for v in graph.nodes:
        row = report.by_artist[v]
        node = ET.SubElement(g, "node", id=v)
        for key_id, value in (
            ("d_degree", str(row.degree)),
            ("d_closeness", repr(row.closeness)),
            ("d_betweenness", repr(row.betweenness)),
            ("d_component", str(row.component_id)),
        ):
            data = ET.SubElement(node, "data", key=key_id)
            data.text = value
    for a, b in sorted(graph.edges):
        evidence = graph.edges[(a, b)]
        edge = ET.SubElement(g, "edge", source=a, target=b)
        data = ET.SubElement(edge, "data", key="d_support")
        data.text = str(evidence.support_count)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    return tree


def export_graph(graph: InfluenceGraph, report: CentralityReport, format: str, path) -> None:
    """Write the graph with centrality attributes; ordering is deterministic.

    Supported formats: ``graphml`` (node attributes degree/closeness/
    betweenness/component, edge attribute support_count), ``edge-csv``
    (source,target,support_count), and ``dot``.
    """
    if format not in EXPORT_FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {EXPORT_FORMATS}")
    missing = [v for v in graph.nodes if v not in report.by_artist]
    if missing:
        raise ValueError(f"report does not cover nodes: {missing}")

    if format == "graphml":
        _graphml_tree(graph, report).write(path, encoding="utf-8", xml_declaration=True)
    elif format == "edge-csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["source", "target", "support_count"])
            for a, b in sorted(graph.edges):
                writer.writerow([a, b, graph.edges[(a, b)].support_count])
    else:
        lines = ["graph influence {"]
        for v in graph.nodes:
            row = report.by_artist[v]
            lines.append(
                f'  "{v}" [degree={row.degree}, closeness={repr(row.closeness)}, '
                f"betweenness={repr(row.betweenness)}, component={row.component_id}];"
            )
        for a, b in sorted(graph.edges):
            lines.append(f'  "{a}" -- "{b}" [support_count={graph.edges[(a, b)].support_count}];')
        lines.append("}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def write_report_csv(report: CentralityReport, path) -> None:
    """Centrality table as CSV: artist,degree,closeness,betweenness."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["artist", "degree", "closeness", "betweenness"])
        for row in report.rows:
            writer.writerow([row.artist_id, row.degree, repr(row.closeness), repr(row.betweenness)])
