"""Online b-matching algorithm (BMA) with counter-based admission.

Every node pair keeps a counter of paid requests.  When a counter reaches
``thresh(e) = 2 * ceil(alpha / ell_e)`` the pair becomes *saturated* and is
added to the matching, unless one of its endpoints already carries ``b``
other saturated pairs, in which case all counters at that endpoint are reset
(a desaturation event).  Making room for a new matching edge evicts an
incident matching edge whose counter is zero.

The state keeps these four properties after every request:

* counter: ``0 <= cnt(e) <= thresh(e)``
* saturation: ``cnt(e) == thresh(e)`` implies ``e`` is matched
* matching: matched ``e`` has ``cnt(e)`` equal to ``0`` or ``thresh(e)``
* saturation degree: every node has at most ``b`` saturated pairs
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .exceptions import InvariantViolation
from .matching import BMatching
from .topology import Pair, Topology

MIN_PAIR = "min-pair"
LRU = "lru"
EVICTION_POLICIES = (MIN_PAIR, LRU)


def threshold(alpha: float, ell: float) -> int:
    """Counter value at which a pair saturates: ``2 * ceil(alpha / ell)``."""
    if not (alpha > 0 and ell > 0):
        raise ValueError("alpha and ell must be positive")
    return 2 * math.ceil(alpha / ell)


@dataclass
class StepOutcome:
    """What one request did to the state."""

    hit: bool
    routing_cost: float = 0.0
    desaturated_at: tuple[int, ...] = ()
    evicted: list[Pair] = field(default_factory=list)
    added: Pair | None = None

    @property
    def reconfig_events(self) -> int:
        return len(self.evicted) + (self.added is not None)


class BmaState:
    """Mutable state of one BMA run over a fixed topology.

    Parameters
    ----------
    topology : Topology
    b : int
        Degree cap of the matching.
    alpha : float
        Reconfiguration cost per added or removed pair.
    eviction : {"min-pair", "lru"}
        How :meth:`fix_matching` picks among eligible (zero-counter)
        matching edges.  ``"min-pair"`` takes the lexicographically smallest
        pair; ``"lru"`` takes the one requested least recently.
    """

    def __init__(self, topology: Topology, b: int, alpha: float, eviction: str = MIN_PAIR):
        if eviction not in EVICTION_POLICIES:
            raise ValueError(f"unknown eviction policy {eviction!r}")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.topology = topology
        self.b = int(b)
        self.alpha = float(alpha)
        self.eviction = eviction
        self.matching = BMatching(self.b, topology.n)
        # sparse counters: absent means 0
        self.cnt: dict[Pair, int] = {}
        self._thresh: dict[Pair, int] = {}
        # pairs with nonzero counter, per node; keeps resets proportional to touched pairs
        self._nonzero: defaultdict[int, set[Pair]] = defaultdict(set)
        self._saturated: defaultdict[int, int] = defaultdict(int)
        self.recency: dict[Pair, int] = {}
        self.step = 0

    def thresh(self, p: Pair) -> int:
        t = self._thresh.get(p)
        if t is None:
            t = self._thresh[p] = threshold(self.alpha, self.topology.dist[p[0], p[1]])
        return t

    def counter(self, p: Pair) -> int:
        return self.cnt.get(p, 0)

    def is_saturated(self, p: Pair) -> bool:
        return self.cnt.get(p, 0) == self.thresh(p)

    def saturated_degree(self, w: int) -> int:
        return self._saturated.get(w, 0)

    def serve(self, tau: Pair) -> StepOutcome:
        """Serve one request ``tau`` (a canonical pair) and update the state."""
        self.step += 1
        if self.eviction == LRU:
            self.recency[tau] = self.step
        if tau in self.matching.edges:
            return StepOutcome(hit=True)

        u, v = tau
        out = StepOutcome(hit=False, routing_cost=float(self.topology.dist[u, v]))
        c = self.cnt.get(tau, 0) + 1
        self.cnt[tau] = c
        if c == 1:
            self._nonzero[u].add(tau)
            self._nonzero[v].add(tau)
        thr = self.thresh(tau)
        if c > thr:
            raise InvariantViolation(f"counter of unmatched {tau} exceeded threshold")
        if c < thr:
            return out

        self._saturated[u] += 1
        self._saturated[v] += 1
        desat = [w for w in (u, v) if self.fix_saturation(w, tau)]
        out.desaturated_at = tuple(desat)
        if self.cnt.get(tau, 0) == thr:
            for w in (u, v):
                e = self.fix_matching(w)
                if e is not None:
                    out.evicted.append(e)
            self.matching.add(tau)
            out.added = tau
        return out

    def fix_saturation(self, w: int, tau: Pair) -> bool:
        """Reset every counter at ``w`` if ``w`` has ``b`` saturated pairs besides ``tau``.

        Returns True when a desaturation event happened.
        """
        others = self._saturated.get(w, 0) - self.is_saturated(tau)
        if others < self.b:
            return False
        for e in list(self._nonzero.get(w, ())):
            self._reset(e)
        return True

    def _reset(self, e: Pair) -> None:
        if self.cnt[e] == self.thresh(e):
            self._saturated[e[0]] -= 1
            self._saturated[e[1]] -= 1
        del self.cnt[e]
        self._nonzero[e[0]].discard(e)
        self._nonzero[e[1]].discard(e)

    def fix_matching(self, w: int) -> Pair | None:
        """Evict one non-saturated matching edge at ``w`` if ``w`` is full."""
        incident = self.matching._incident.get(w, ())
        if len(incident) < self.b:
            return None
        eligible = [e for e in incident if self.cnt.get(e, 0) < self.thresh(e)]
        if not eligible:
            raise InvariantViolation(f"no evictable matching edge at node {w}")
        if self.eviction == LRU:
            victim = min(eligible, key=lambda e: (self.recency.get(e, 0), e))
        else:
            victim = min(eligible)
        if self.cnt.get(victim, 0) != 0:
            raise InvariantViolation(f"evicting {victim} with nonzero counter")
        self.matching.remove(victim)
        return victim

    def check_invariants(self) -> list[str]:
        """Return a description of every violated invariant (empty if healthy)."""
        problems = []
        sat_per_node: defaultdict[int, int] = defaultdict(int)
        for e, c in self.cnt.items():
            t = self.thresh(e)
            if not 0 <= c <= t:
                problems.append(f"counter invariant: cnt{e}={c} outside [0, {t}]")
            if c == t:
                sat_per_node[e[0]] += 1
                sat_per_node[e[1]] += 1
                if e not in self.matching.edges:
                    problems.append(f"saturation invariant: {e} saturated but unmatched")
        for e in self.matching.edges:
            c = self.cnt.get(e, 0)
            if c not in (0, self.thresh(e)):
                problems.append(f"matching invariant: matched {e} has cnt={c}")
        for w, k in sat_per_node.items():
            if k > self.b:
                problems.append(f"saturation degree invariant: node {w} has {k} saturated pairs")
        for w in set(sat_per_node) | set(self._saturated):
            if sat_per_node.get(w, 0) != self._saturated.get(w, 0):
                problems.append(f"bookkeeping: saturated count at node {w} is stale")
        for w, k in self.matching.degrees().items():
            if k > self.b:
                problems.append(f"degree cap: node {w} has {k} matching edges")
        return problems

    def assert_invariants(self) -> None:
        problems = self.check_invariants()
        if problems:
            raise InvariantViolation("; ".join(problems))
