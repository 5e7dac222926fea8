"""Weighted undirected graphs, their matrices, generators and edge-list I/O."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import (
    Disconnected,
    DuplicateEdge,
    InvalidParams,
    NonPositiveWeight,
    ParseError,
    SelfLoop,
)

__all__ = [
    "WeightedGraph",
    "GraphMatrices",
    "build_graph",
    "derive_matrices",
    "generate_barabasi_albert",
    "generate_clique_clusters",
    "chain_bridges",
    "generate_erdos_renyi",
    "read_edge_list",
    "write_edge_list",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraphMatrices:
    """Dense adjacency ``A``, degree vector ``d`` and Laplacian ``L = D - A``.

    ``degree`` is computed as ``A @ 1`` so that it is rounded exactly like
    ``A @ x`` in the update map; this keeps every update a floating-point
    convex combination.
    """

    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degree_matrix(self) -> np.ndarray:
        return np.diag(self.degree)


@dataclass(frozen=True)
class WeightedGraph:
    """Simple connected undirected graph with positive edge weights.

    Edges are stored canonically as ``(i, j, w)`` with ``i < j``, sorted.
    Construction validates everything; an instance is always usable by the
    dynamics.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    _index: dict = field(init=False, repr=False, compare=False)
    _adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        canon = []
        seen = set()
        for e in self.edges:
            if len(e) != 3:
                raise ParseError(f"edge {e!r} is not an (i, j, w) triple")
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParams(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise SelfLoop(f"self-loop at vertex {i}")
            if not (w > 0.0) or not math.isfinite(w):
                raise NonPositiveWeight(f"edge ({i}, {j}) has weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DuplicateEdge(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        if n < 2:
            raise InvalidParams(f"a graph needs at least 2 agents, got n={n}")
        canon.sort()
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "_index", {(i, j): w for i, j, w in canon})
        adj = [[] for _ in range(n)]
        for i, j, w in canon:
            adj[i].append((j, w))
            adj[j].append((i, w))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        if _n_components(n, canon) != 1:
            raise Disconnected("graph is not connected")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def weight(self, i: int, j: int) -> float:
        """Edge weight, 0.0 when ``{i, j}`` is not an edge."""
        return self._index.get((min(i, j), max(i, j)), 0.0)

    def neighbors(self, i: int) -> tuple[tuple[int, float], ...]:
        """``(j, w_ij)`` pairs sorted by ``j``."""
        return self._adj[i]

    @cached_property
    def matrices(self) -> GraphMatrices:
        return derive_matrices(self)


def _n_components(n: int, edges: Sequence[tuple[int, int, float]]) -> int:
    if not edges:
        return n
    rows = [e[0] for e in edges]
    cols = [e[1] for e in edges]
    graph = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
    count, _ = connected_components(graph, directed=False)
    return int(count)


def build_graph(n: int, weighted_edges: Iterable[Sequence]) -> WeightedGraph:
    """Validate and build a graph from ``(i, j, w)`` triples."""
    return WeightedGraph(n, tuple(tuple(e) for e in weighted_edges))


def derive_matrices(g: WeightedGraph) -> GraphMatrices:
    A = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        A[i, j] = w
        A[j, i] = w
    d = A @ np.ones(g.n)
    L = np.diag(d) - A
    return GraphMatrices(_frozen(A), _frozen(d), _frozen(L))


# ---------------------------------------------------------------------------
# generators

def generate_barabasi_albert(n: int, m: int, seed=None) -> WeightedGraph:
    """Preferential-attachment graph with unit weights.

    Starts from a path on ``m`` vertices; every later vertex attaches to
    ``m`` distinct existing vertices drawn with probability proportional to
    their current degree. The result has ``(m - 1) + m * (n - m)`` edges.
    """
    n, m = int(n), int(m)
    if m < 1 or n <= m:
        raise InvalidParams(f"need n > m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    degree = np.zeros(n)
    edges = []
    for v in range(1, m):
        edges.append((v - 1, v, 1.0))
        degree[v - 1] += 1
        degree[v] += 1
    for v in range(m, n):
        d = degree[:v]
        total = d.sum()
        # the single-vertex seed (m=1) has no degree mass yet
        p = None if total == 0 else d / total
        targets = rng.choice(v, size=m, replace=False, p=p)
        for t in sorted(int(t) for t in targets):
            edges.append((t, v, 1.0))
            degree[t] += 1
            degree[v] += 1
    return build_graph(n, edges)


def chain_bridges(sizes: Sequence[int], weight: float = 1.0) -> list[tuple[int, int, float]]:
    """Bridges joining the last vertex of each clique to the first of the next."""
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    return [(int(starts[c + 1] - 1), int(starts[c + 1]), float(weight))
            for c in range(len(sizes) - 1)]


def generate_clique_clusters(sizes: Sequence[int], intra_w: float = 1.0,
                             bridge_edges: Iterable[Sequence] = ()) -> WeightedGraph:
    """Disjoint cliques (vertices numbered clique by clique) plus bridges."""
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise InvalidParams(f"clique sizes must be >= 1, got {sizes}")
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    n = int(starts[-1])
    label = np.repeat(np.arange(len(sizes)), sizes)
    edges = []
    for c, size in enumerate(sizes):
        base = int(starts[c])
        for a in range(size):
            for b in range(a + 1, size):
                edges.append((base + a, base + b, float(intra_w)))
    for e in bridge_edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidParams(f"bridge ({i}, {j}) out of range for n={n}")
        if label[i] == label[j]:
            raise InvalidParams(f"bridge ({i}, {j}) lies inside one clique")
        edges.append((i, j, w))
    if n < 2:
        raise InvalidParams("clique clusters need at least 2 vertices in total")
    return build_graph(n, edges)


def generate_erdos_renyi(n: int, p: float, seed=None, weight_range=(0.0, 2.0),
                         max_tries: int = 1000) -> WeightedGraph:
    """G(n, p) conditioned on connectivity, weights uniform on ``(lo, hi]``."""
    n = int(n)
    lo, hi = map(float, weight_range)
    if n < 2 or not (0.0 < p <= 1.0) or not (0.0 <= lo < hi):
        raise InvalidParams(f"bad G(n, p) parameters n={n}, p={p}, weights={weight_range}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    for _ in range(max_tries):
        keep = rng.random(iu.size) < p
        w = hi - (hi - lo) * rng.random(int(keep.sum()))
        edges = list(zip(iu[keep].tolist(), ju[keep].tolist(), w.tolist()))
        if _n_components(n, edges) == 1:
            return build_graph(n, edges)
    raise InvalidParams(f"no connected G({n}, {p}) sample in {max_tries} tries")


# ---------------------------------------------------------------------------
# edge-list CSV

def read_edge_list(path) -> WeightedGraph:
    """Read ``i,j[,w]`` CSV; ``n`` is one more than the largest vertex id."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if header not in (["i", "j"], ["i", "j", "w"]):
            raise ParseError(f"{path}: expected header 'i,j,w', got {','.join(header)!r}")
        edges = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) not in (2, 3):
                raise ParseError(f"{path}:{lineno}: expected 2 or 3 fields")
            try:
                i, j = int(row[0]), int(row[1])
                w = float(row[2]) if len(row) == 3 and row[2].strip() else 1.0
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if i < 0 or j < 0:
                raise ParseError(f"{path}:{lineno}: negative vertex id")
            edges.append((i, j, w))
    if not edges:
        raise ParseError(f"{path}: no edges")
    n = 1 + max(max(i, j) for i, j, _ in edges)
    return build_graph(n, edges)


def write_edge_list(g: WeightedGraph, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "w"])
        for i, j, w in g.edges:
            writer.writerow([i, j, repr(w)])
