"""Demand-oblivious routing and static b-matching baselines."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Mapping

from .matching import BMatching
from .topology import Pair, Topology


def pair_frequency(trace: Iterable[Pair]) -> Counter:
    """Request count per pair."""
    return Counter(tuple(p) for p in trace)


def oblivious_cost(topology: Topology, trace: Iterable[Pair]) -> float:
    return float(sum(topology.distance(p) for p in trace))


def saved_weight(topology: Topology, freq: Mapping[Pair, int], pairs: Iterable[Pair]) -> float:
    """Routing cost removed by matching ``pairs``: sum of ``count * ell``."""
    return float(sum(freq.get(p, 0) * topology.distance(p) for p in pairs))


def static_matching_greedy(topology: Topology, freq: Mapping[Pair, int], b: int) -> BMatching:
    """Greedy b-matching by decreasing ``count * ell``.

    Ties go to the smaller canonical pair.  Gives at least half of the
    optimal saved weight.
    """
    weighted = [(c * topology.distance(p), p) for p, c in freq.items() if c > 0]
    weighted.sort(key=lambda wp: (-wp[0], wp[1]))
    m = BMatching(b, topology.n)
    for w, p in weighted:
        if w > 0 and m.can_add(p):
            m.add(p)
    return m


def static_cost(
    topology: Topology,
    trace_or_freq: Iterable[Pair] | Mapping[Pair, int],
    matching: BMatching,
    include_setup: bool = False,
    alpha: float = 0.0,
) -> float:
    """Cost of serving requests against a fixed matching.

    Unmatched requests pay their distance.  With ``include_setup`` the
    matching's installation cost ``alpha * |matching|`` is added.
    """
    if isinstance(trace_or_freq, Mapping):
        freq = trace_or_freq
    else:
        freq = pair_frequency(trace_or_freq)
    cost = sum(c * topology.distance(p) for p, c in freq.items() if p not in matching)
    if include_setup:
        cost += alpha * len(matching)
    return float(cost)


def static_schedule_cost(
    topology: Topology, trace: list[Pair], pairs: Iterable[Pair], alpha: float
) -> float:
    """Cost of a static matching played as a schedule from an empty start.

    The first request is served on the empty network, the matching is then
    installed at ``alpha`` per pair and kept for the rest of the trace.  This
    is a feasible schedule for the offline optimum, so it upper-bounds it.
    """
    pairs = set(pairs)
    if not trace:
        return 0.0
    cost = topology.distance(trace[0]) + alpha * len(pairs)
    cost += sum(topology.distance(p) for p in trace[1:] if p not in pairs)
    return float(cost)
