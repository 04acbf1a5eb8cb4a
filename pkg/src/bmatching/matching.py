"""Dynamic b-matching with per-node degree enforcement."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from .exceptions import AlreadyMatched, BadNodeId, DegreeCapViolation, NotMatched
from .topology import Pair, make_pair


class BMatching:
    """A set of node pairs in which every node has at most ``b`` pairs.

    Degrees and per-node incidence sets are maintained incrementally.
    ``n`` is optional; when given, node ids are range-checked.
    """

    def __init__(self, b: int, n: int | None = None, pairs: Iterable[Pair] = ()):
        if int(b) < 1:
            raise ValueError(f"b must be >= 1, got {b}")
        self.b = int(b)
        self.n = n
        self.edges: set[Pair] = set()
        self._incident: defaultdict[int, set[Pair]] = defaultdict(set)
        for p in pairs:
            self.add(p)

    def _check(self, w: int) -> int:
        if w < 0 or (self.n is not None and w >= self.n):
            raise BadNodeId(f"node {w} out of range")
        return w

    def add(self, p: Pair) -> None:
        p = make_pair(*p)
        u, v = self._check(p[0]), self._check(p[1])
        if p in self.edges:
            raise AlreadyMatched(f"{p} already matched")
        for w in (u, v):
            if len(self._incident[w]) >= self.b:
                raise DegreeCapViolation(f"node {w} already has degree {self.b}")
        self.edges.add(p)
        self._incident[u].add(p)
        self._incident[v].add(p)

    def remove(self, p: Pair) -> None:
        p = make_pair(*p)
        if p not in self.edges:
            raise NotMatched(f"{p} is not matched")
        self.edges.remove(p)
        self._incident[p[0]].discard(p)
        self._incident[p[1]].discard(p)

    def contains(self, p: Pair) -> bool:
        return p in self.edges

    __contains__ = contains

    def incident(self, w: int) -> set[Pair]:
        return set(self._incident.get(self._check(w), ()))

    def degree(self, w: int) -> int:
        return len(self._incident.get(self._check(w), ()))

    def can_add(self, p: Pair) -> bool:
        return (
            p not in self.edges
            and self.degree(p[0]) < self.b
            and self.degree(p[1]) < self.b
        )

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BMatching):
            return NotImplemented
        return self.b == other.b and self.edges == other.edges

    def __repr__(self) -> str:
        return f"BMatching(b={self.b}, edges={sorted(self.edges)})"

    def copy(self) -> BMatching:
        return BMatching(self.b, self.n, self.edges)

    def degrees(self) -> dict[int, int]:
        return {w: len(s) for w, s in self._incident.items() if s}

    def snapshot(self) -> str:
        """Sorted ``u,v`` lines, one matched pair per line."""
        return "".join(f"{u},{v}\n" for u, v in sorted(self.edges))
