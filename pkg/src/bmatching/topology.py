"""Fixed network and its shortest-path metric.

Nodes are dense integers ``0..n-1``.  A node pair is a plain ``(lo, hi)``
tuple with ``lo < hi``; :func:`make_pair` canonicalizes.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .exceptions import (
    BadNodeId,
    Disconnected,
    DuplicateEdge,
    NonPositiveLength,
    ParseError,
    SelfLoop,
    SelfPair,
    TopologyError,
    TopologyTooLarge,
)

Pair = tuple[int, int]

DEFAULT_MAX_NODES = 2000


def make_pair(u: int, v: int) -> Pair:
    """Return the canonical unordered pair for ``u`` and ``v``."""
    u, v = int(u), int(v)
    if u == v:
        raise SelfPair(f"self-pair ({u}, {v})")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable weighted connected graph with precomputed distances.

    ``dist`` is a dense ``n x n`` matrix; ``dist[u, v]`` is the shortest-path
    length between ``u`` and ``v`` on the fixed edges.
    """

    n: int
    edges: tuple[tuple[Pair, float], ...]
    dist: np.ndarray = field(repr=False)
    ell_max: float

    @property
    def n_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def check_node(self, w) -> int:
        w = int(w)
        if not 0 <= w < self.n:
            raise BadNodeId(f"node {w} outside 0..{self.n - 1}")
        return w

    def distance(self, p: Pair) -> float:
        u, v = p
        u, v = self.check_node(u), self.check_node(v)
        if u == v:
            raise SelfPair(f"self-pair ({u}, {v})")
        return float(self.dist[u, v])

    def pairs(self) -> Iterator[Pair]:
        """All node pairs in canonical (lexicographic) order."""
        for u in range(self.n):
            for v in range(u + 1, self.n):
                yield (u, v)

    def edge_dict(self) -> dict[Pair, float]:
        return dict(self.edges)

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"n {self.n}\n")
        for (u, v), length in self.edges:
            buf.write(f"e {u} {v} {_fmt_length(length)}\n")
        return buf.getvalue()


def _fmt_length(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def build(
    n: int,
    edges: Iterable[tuple[Pair, float]],
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Topology:
    """Validate ``edges`` and compute all-pairs shortest paths.

    Raises one of the :class:`~bmatching.exceptions.TopologyError`
    subclasses (or :class:`BadNodeId`) on invalid input.
    """
    n = int(n)
    if n < 2:
        raise TopologyError(f"need at least 2 nodes, got {n}")
    if n > max_nodes:
        raise TopologyTooLarge(f"{n} nodes exceeds cap of {max_nodes}")

    seen: dict[Pair, float] = {}
    for (u, v), length in edges:
        u, v = int(u), int(v)
        for w in (u, v):
            if not 0 <= w < n:
                raise BadNodeId(f"edge endpoint {w} outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at node {u}")
        length = float(length)
        if not length > 0 or not math.isfinite(length):
            raise NonPositiveLength(f"edge ({u}, {v}) has length {length}")
        p = make_pair(u, v)
        if p in seen:
            raise DuplicateEdge(f"duplicate edge {p}")
        seen[p] = length

    if not seen:
        raise Disconnected("no edges")
    rows = np.fromiter((p[0] for p in seen), dtype=np.int64, count=len(seen))
    cols = np.fromiter((p[1] for p in seen), dtype=np.int64, count=len(seen))
    vals = np.fromiter(seen.values(), dtype=np.float64, count=len(seen))
    graph = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    n_comp, _ = connected_components(graph, directed=False)
    if n_comp != 1:
        raise Disconnected(f"graph has {n_comp} connected components")

    dist = shortest_path(graph, method="D", directed=False)
    dist.setflags(write=False)
    iu = np.triu_indices(n, k=1)
    ell_max = float(dist[iu].max())
    return Topology(n=n, edges=tuple(sorted(seen.items())), dist=dist, ell_max=ell_max)


def gen_star(leaves: int) -> Topology:
    """Star with center 0 and leaves ``1..leaves``; unit spokes."""
    if leaves < 1:
        raise ValueError("leaves must be >= 1")
    return build(leaves + 1, [((0, i), 1.0) for i in range(1, leaves + 1)])


def gen_leaf_spine(leaves: int, spines: int | None = None) -> Topology:
    """Two-tier leaf/spine fabric with unit links.

    Leaves are nodes ``0..leaves-1`` and spines follow.  Every leaf connects
    to every spine, so any two leaves are at distance 2.  ``spines`` defaults
    to ``ceil(leaves / 10)``.
    """
    if spines is None:
        spines = math.ceil(leaves / 10)
    if leaves < 2 or spines < 1:
        raise ValueError("need leaves >= 2 and spines >= 1")
    edges = [
        ((leaf, leaves + s), 1.0) for leaf in range(leaves) for s in range(spines)
    ]
    return build(leaves + spines, edges)


def gen_complete(n: int, length: float = 1.0) -> Topology:
    if n < 2:
        raise ValueError("n must be >= 2")
    return build(n, [((u, v), length) for u in range(n) for v in range(u + 1, n)])


def gen_random_connected(
    n: int,
    rng: np.random.Generator,
    extra_edge_prob: float = 0.3,
    max_length: int = 1,
) -> Topology:
    """Random spanning tree plus independent extra edges, integer lengths.

    Used for property tests and randomized oracle instances.
    """
    order = rng.permutation(n)
    edges: dict[Pair, float] = {}
    for i in range(1, n):
        parent = order[int(rng.integers(0, i))]
        edges[make_pair(order[i], parent)] = float(rng.integers(1, max_length + 1))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges[(u, v)] = float(rng.integers(1, max_length + 1))
    return build(n, sorted(edges.items()))


def parse_topology(text: str | io.TextIOBase) -> Topology:
    """Parse the line format ``n <count>`` followed by ``e <u> <v> <length>``."""
    lines = text.splitlines() if isinstance(text, str) else text
    n = None
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "n" and len(tok) == 2 and n is None:
                n = int(tok[1])
            elif tok[0] == "e" and len(tok) == 4 and n is not None:
                edges.append(((int(tok[1]), int(tok[2])), float(tok[3])))
            else:
                raise ParseError(f"unexpected record {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad number in {line!r}", lineno) from exc
    if n is None:
        raise ParseError("missing 'n <count>' header")
    return build(n, edges)


def read_topology(path: str | os.PathLike) -> Topology:
    with open(path) as fh:
        return parse_topology(fh)


def write_topology(topology: Topology, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(topology.to_text())
