"""Brute-force ground truth for small instances.

Matchings are encoded as integer bitmasks over the canonical pair order of
the node set (pair ``i`` of ``Topology.pairs()`` is bit ``i``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .exceptions import MalformedChunkTrace, StateSpaceTooLarge
from .matching import BMatching
from .topology import Pair, Topology

DEFAULT_STATE_CAP = 100_000


def _all_pairs(n: int) -> list[Pair]:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def _enumerate_masks(n: int, b: int, cap: int | None) -> list[int]:
    """Depth-first include/exclude over pairs; exclude branch first."""
    pairs = _all_pairs(n)
    out: list[int] = []
    deg = [0] * n

    def rec(i: int, mask: int) -> None:
        if i == len(pairs):
            out.append(mask)
            if cap is not None and len(out) > cap:
                raise StateSpaceTooLarge(f"more than {cap} b-matchings on {n} nodes with b={b}")
            return
        rec(i + 1, mask)
        u, v = pairs[i]
        if deg[u] < b and deg[v] < b:
            deg[u] += 1
            deg[v] += 1
            rec(i + 1, mask | (1 << i))
            deg[u] -= 1
            deg[v] -= 1

    rec(0, 0)
    return out


def _masks_to_pairs(mask: int, pairs: list[Pair]) -> tuple[Pair, ...]:
    return tuple(p for i, p in enumerate(pairs) if mask >> i & 1)


def enumerate_b_matchings(
    n: int, b: int, cap: int = DEFAULT_STATE_CAP
) -> Iterator[tuple[Pair, ...]]:
    """Yield every b-matching on ``n`` nodes exactly once, empty first.

    The full state count is checked against ``cap`` before anything is
    yielded.
    """
    pairs = _all_pairs(n)
    for mask in _enumerate_masks(n, b, cap):
        yield _masks_to_pairs(mask, pairs)


class _StateSpace:
    """Indexed b-matching states plus per-pair flip tables for the DP."""

    def __init__(self, n: int, b: int, cap: int):
        self.pairs = _all_pairs(n)
        self.index = {p: i for i, p in enumerate(self.pairs)}
        masks = _enumerate_masks(n, b, cap)
        pos = {m: k for k, m in enumerate(masks)}
        # for pair i: states lacking bit i whose flip-in is feasible, and the result
        self.flip_from: list[np.ndarray] = []
        self.flip_to: list[np.ndarray] = []
        for i in range(len(self.pairs)):
            bit = 1 << i
            src, dst = [], []
            for k, m in enumerate(masks):
                if not m & bit:
                    j = pos.get(m | bit)
                    if j is not None:
                        src.append(k)
                        dst.append(j)
            self.flip_from.append(np.array(src, dtype=np.int64))
            self.flip_to.append(np.array(dst, dtype=np.int64))
        self.contains = np.array(
            [[(m >> i) & 1 for i in range(len(self.pairs))] for m in masks], dtype=bool
        )

    def __len__(self) -> int:
        return len(self.contains)


def dp_opt(
    topology: Topology,
    b: int,
    alpha: float,
    trace: Sequence[Pair],
    cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Exact offline optimum over all b-matching schedules.

    Each step serves the request against the current matching, then may
    reconfigure at ``alpha`` per pair in the symmetric difference.  The
    schedule starts from the empty matching.

    The reconfiguration step is a min-plus transform with cost
    ``alpha * |M xor M'|``.  Feasible states are closed under removal, so
    the cheapest route is "remove, then add"; one removal sweep followed by
    one addition sweep over all pairs computes it exactly.
    """
    if not trace:
        return 0.0
    space = _StateSpace(topology.n, b, cap)
    cost = np.full(len(space), np.inf)
    cost[0] = 0.0  # empty matching comes first in enumeration order
    for tau in trace:
        i = space.index[tuple(tau)]
        cost = cost + np.where(space.contains[:, i], 0.0, topology.distance(tau))
        for src, dst in zip(space.flip_from, space.flip_to):
            np.minimum.at(cost, src, cost[dst] + alpha)
        for src, dst in zip(space.flip_from, space.flip_to):
            np.minimum.at(cost, dst, cost[src] + alpha)
    return float(cost.min())


def exact_static(
    topology: Topology,
    freq: Mapping[Pair, int],
    b: int,
    cap: int = DEFAULT_STATE_CAP,
) -> tuple[BMatching, float]:
    """b-matching maximizing ``sum(count * ell)``; first in enumeration order on ties."""
    pairs = _all_pairs(topology.n)
    weights = [freq.get(p, 0) * topology.distance(p) for p in pairs]
    best_mask, best = 0, 0.0
    for mask in _enumerate_masks(topology.n, b, cap):
        w = sum(weights[i] for i in range(len(pairs)) if mask >> i & 1)
        if w > best:
            best_mask, best = mask, w
    return BMatching(b, topology.n, _masks_to_pairs(best_mask, pairs)), float(best)


def exact_static_schedule(
    topology: Topology,
    trace: Sequence[Pair],
    b: int,
    alpha: float,
    cap: int = DEFAULT_STATE_CAP,
) -> tuple[BMatching, float]:
    """Best static matching when installation is paid after the first request.

    Minimizes :func:`~bmatching.baselines.static_schedule_cost` over all
    b-matchings.  The empty matching is a candidate, so the result never
    exceeds the oblivious cost.
    """
    pairs = _all_pairs(topology.n)
    if not trace:
        return BMatching(b, topology.n), 0.0
    first = topology.distance(trace[0])
    tail: dict[Pair, int] = {}
    for p in trace[1:]:
        tail[tuple(p)] = tail.get(tuple(p), 0) + 1
    base = first + sum(c * topology.distance(p) for p, c in tail.items())
    gain = [tail.get(p, 0) * topology.distance(p) - alpha for p in pairs]
    best_mask, best = 0, base
    for mask in _enumerate_masks(topology.n, b, cap):
        c = base - sum(gain[i] for i in range(len(pairs)) if mask >> i & 1)
        if c < best:
            best_mask, best = mask, c
    return BMatching(b, topology.n, _masks_to_pairs(best_mask, pairs)), float(best)


def belady_off_cost(b: int, alpha: int, trace: Sequence[Pair], center: int = 0) -> float:
    """Cost of the foresighted offline strategy on a chunked star trace.

    The trace must consist of chunks of ``alpha`` identical requests to a
    spoke ``(center, leaf)``.  On a request to an unmatched spoke the
    strategy pays 1 for routing, then installs the spoke; if ``b`` spokes
    are already matched it first evicts the one whose next chunk is farthest
    away (never-again counts as infinitely far, ties to the lower leaf).
    Installing costs ``alpha``, a swap ``2 * alpha``.
    """
    if alpha != int(alpha) or alpha < 1:
        raise MalformedChunkTrace("alpha must be a positive integer for chunked traces")
    alpha = int(alpha)
    if len(trace) % alpha:
        raise MalformedChunkTrace(f"trace length {len(trace)} not a multiple of {alpha}")
    chunks = []
    for start in range(0, len(trace), alpha):
        chunk = {tuple(p) for p in trace[start:start + alpha]}
        if len(chunk) != 1:
            raise MalformedChunkTrace(f"chunk at request {start} mixes pairs")
        (p,) = chunk
        if center not in p:
            raise MalformedChunkTrace(f"pair {p} is not a spoke of center {center}")
        chunks.append(p[0] + p[1] - center)

    # next_use[i] = index of the next chunk after i with the same leaf
    next_use = [math.inf] * len(chunks)
    last: dict[int, int] = {}
    for i in range(len(chunks) - 1, -1, -1):
        next_use[i] = last.get(chunks[i], math.inf)
        last[chunks[i]] = i

    cached: dict[int, float] = {}  # leaf -> index of its next request
    cost = 0.0
    for i, leaf in enumerate(chunks):
        if leaf not in cached:
            cost += 1.0
            if len(cached) >= b:
                victim = max(cached, key=lambda x: (cached[x], -x))
                del cached[victim]
                cost += 2 * alpha
            else:
                cost += alpha
        cached[leaf] = next_use[i]
    return cost


@dataclass
class OracleComparison:
    alg_cost: float
    opt_cost: float
    additive_beta: float
    bound_factor: float
    bound_satisfied: bool
    empirical_ratio: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def bound_constants(topology: Topology, b: int, alpha: float) -> tuple[float, float]:
    """``(factor, beta)`` of the guarantee ``ALG <= factor * OPT + beta``."""
    factor = 12 * (b + 1) * (1 + topology.ell_max / alpha)
    beta = 4 * topology.n_pairs * (alpha + topology.ell_max)
    return factor, beta


def verify_bound(
    topology: Topology,
    b: int,
    alpha: float,
    trace: Sequence[Pair],
    alg_run_cost: float,
    cap: int = DEFAULT_STATE_CAP,
) -> OracleComparison:
    opt = dp_opt(topology, b, alpha, trace, cap=cap)
    factor, beta = bound_constants(topology, b, alpha)
    ratio = max(alg_run_cost - beta, 0.0) / opt if opt > 0 else None
    return OracleComparison(
        alg_cost=float(alg_run_cost),
        opt_cost=opt,
        additive_beta=beta,
        bound_factor=factor,
        bound_satisfied=bool(alg_run_cost <= factor * opt + beta),
        empirical_ratio=ratio,
    )
