"""Request traces: parsing, seeded generators, and the adaptive star adversary.

Traces are ``(n_requests, 2)`` int64 arrays of canonical pairs.

All randomness comes from numpy's PCG64 bit generator seeded with a 64-bit
integer.  Samplers only consume ``Generator.permutation`` and
``Generator.random`` (uniform doubles) and invert the cumulative weight
table with ``searchsorted``, so a seed yields the same trace on every
platform.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import clone

from .exceptions import BadNodeId, DegenerateMatrix, ParseError, SelfPair
from .oracle import belady_off_cost
from .topology import Pair, gen_star, make_pair


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for ``(seed, stream)``; streams separate repetitions."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def parse_trace(text, n_nodes: int | None = None) -> np.ndarray:
    """Parse ``u v`` or ``u,v`` lines; extra columns are ignored, ``#`` starts a comment."""
    lines = text.splitlines() if isinstance(text, str) else text
    out: list[Pair] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.replace(",", " ").split()
        if len(tok) < 2:
            raise ParseError(f"expected two node ids, got {line!r}", lineno)
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise ParseError(f"node ids must be integers: {line!r}", lineno) from None
        if u == v:
            raise SelfPair(f"self-pair {u}", lineno)
        if min(u, v) < 0 or (n_nodes is not None and max(u, v) >= n_nodes):
            raise BadNodeId(f"line {lineno}: node id out of range in {line!r}")
        out.append(make_pair(u, v))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def read_trace(path, n_nodes: int | None = None, offset: int = 0, length: int | None = None) -> np.ndarray:
    with open(path) as fh:
        trace = parse_trace(fh, n_nodes)
    stop = None if length is None else offset + length
    return trace[offset:stop]


def format_trace(trace: Iterable[Pair]) -> str:
    buf = io.StringIO()
    for u, v in np.asarray(trace).reshape(-1, 2).tolist():
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def write_trace(trace, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(format_trace(trace))


@dataclass
class TrafficMatrix:
    """Non-negative weight per node pair; sampled proportionally."""

    weights: dict[Pair, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for p, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight for {p}")
            clean[make_pair(*p)] = clean.get(make_pair(*p), 0.0) + float(w)
        self.weights = clean

    @classmethod
    def parse(cls, text) -> TrafficMatrix:
        """``u v weight`` lines (comma or whitespace separated)."""
        lines = text.splitlines() if isinstance(text, str) else text
        weights: dict[Pair, float] = {}
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.replace(",", " ").split()
            if len(tok) != 3:
                raise ParseError(f"expected 'u v weight', got {line!r}", lineno)
            try:
                p = make_pair(int(tok[0]), int(tok[1]))
                weights[p] = weights.get(p, 0.0) + float(tok[2])
            except SelfPair:
                raise SelfPair(f"self-pair in {line!r}", lineno) from None
            except ValueError:
                raise ParseError(f"bad number in {line!r}", lineno) from None
        return cls(weights)

    @classmethod
    def read(cls, path) -> TrafficMatrix:
        with open(path) as fh:
            return cls.parse(fh)


def _sample(pairs: list[Pair], weights: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    total = weights.sum()
    if not total > 0:
        raise DegenerateMatrix("traffic matrix has no positive weight")
    cdf = np.cumsum(weights / total)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    table = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return table[np.minimum(idx, len(pairs) - 1)]


def gen_iid(matrix: TrafficMatrix | Mapping[Pair, float], count: int, seed: int, stream: int = 0) -> np.ndarray:
    """``count`` independent draws proportional to the matrix weights."""
    if not isinstance(matrix, TrafficMatrix):
        matrix = TrafficMatrix(dict(matrix))
    pairs = sorted(matrix.weights)
    if not pairs:
        raise DegenerateMatrix("empty traffic matrix")
    w = np.array([matrix.weights[p] for p in pairs], dtype=np.float64)
    return _sample(pairs, w, count, make_rng(seed, stream))


def zipf_weights(n_leaves: int, s: float, rng: np.random.Generator) -> tuple[list[Pair], np.ndarray]:
    """Leaf pairs in a random rank order and their weights ``rank ** -s``."""
    if n_leaves < 2 or not s > 0:
        raise ValueError("need n_leaves >= 2 and s > 0")
    pairs = [(u, v) for u in range(n_leaves) for v in range(u + 1, n_leaves)]
    ranked = [pairs[i] for i in rng.permutation(len(pairs))]
    weights = np.arange(1, len(ranked) + 1, dtype=np.float64) ** -float(s)
    return ranked, weights


def gen_zipf(n_leaves: int, s: float, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """Skewed i.i.d. trace over pairs of nodes ``0..n_leaves-1``."""
    rng = make_rng(seed, stream)
    ranked, weights = zipf_weights(n_leaves, s, rng)
    return _sample(ranked, weights, count, rng)


def gen_uniform(n_nodes: int, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """Uniform i.i.d. requests over all pairs of ``n_nodes`` nodes."""
    rng = make_rng(seed, stream)
    u = rng.integers(0, n_nodes, size=count)
    v = (u + rng.integers(1, n_nodes, size=count)) % n_nodes
    return np.sort(np.stack([u, v], axis=1), axis=1).astype(np.int64)


@dataclass(frozen=True)
class AdversaryConfig:
    """Lower-bound construction: ``k`` chunks of ``alpha`` requests on a star.

    ``leaves`` defaults to ``b + 1`` so that at least one spoke is always
    outside any b-matching at the center.
    """

    b: int
    alpha: int
    k: int
    leaves: int | None = None

    def __post_init__(self):
        if self.b < 1 or self.k < 0 or self.alpha < 1 or int(self.alpha) != self.alpha:
            raise ValueError("need b >= 1, k >= 0 and a positive integer alpha")
        if self.leaves is not None and self.leaves < self.b + 1:
            raise ValueError("star needs at least b + 1 leaves")


@dataclass
class AdversaryResult:
    config: AdversaryConfig
    realized_trace: np.ndarray = field(repr=False)
    det_cost: float
    off_cost: float

    @property
    def ratio(self) -> float | None:
        return self.det_cost / self.off_cost if self.off_cost > 0 else None

    def to_dict(self) -> dict:
        return {
            "k": self.config.k,
            "b": self.config.b,
            "alpha": self.config.alpha,
            "det_cost": self.det_cost,
            "off_cost": self.off_cost,
            "ratio": self.ratio,
        }


def run_adversary(cfg: AdversaryConfig, algorithm=None) -> AdversaryResult:
    """Drive ``algorithm`` with the adaptive chunk adversary on a star.

    Before each chunk the adversary looks at the algorithm's current
    matching and picks the lowest-indexed leaf whose spoke is unmatched.
    ``algorithm`` is an unfitted scheduler estimator (default:
    :class:`~bmatching.estimators.OnlineBMA`); it is cloned and its
    ``topology``, ``b`` and ``alpha`` are overridden.
    """
    from .estimators import OnlineBMA

    leaves = cfg.leaves or cfg.b + 1
    star = gen_star(leaves)
    est = OnlineBMA() if algorithm is None else clone(algorithm)
    wanted = {"topology": star, "b": cfg.b, "alpha": cfg.alpha}
    est.set_params(**{k: v for k, v in wanted.items() if k in est.get_params()})
    est.partial_fit(np.empty((0, 2), dtype=np.int64))

    trace: list[Pair] = []
    for _ in range(cfg.k):
        matched = est.current_matching().edges
        leaf = next(i for i in range(1, leaves + 1) if (0, i) not in matched)
        spoke = (0, leaf)
        if spoke in est.current_matching().edges:
            raise AssertionError(f"adversary picked matched spoke {spoke}")
        for _ in range(int(cfg.alpha)):
            est.serve(spoke)
            trace.append(spoke)

    realized = np.array(trace, dtype=np.int64).reshape(-1, 2)
    off = belady_off_cost(cfg.b, int(cfg.alpha), trace) if trace else 0.0
    return AdversaryResult(cfg, realized, det_cost=est.ledger_.total_cost, off_cost=off)
