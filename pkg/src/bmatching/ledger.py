"""Per-run cost accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bma import StepOutcome


@dataclass
class CostLedger:
    """Routing and reconfiguration cost of one run.

    ``hits`` records per-step hit flags (always kept; one byte per
    request).  ``track_steps`` additionally keeps per-step routing and
    reconfiguration increments for series output.
    """

    alpha: float
    track_steps: bool = False
    routing_cost: float = 0.0
    reconfig_count: int = 0
    n_hits: int = 0
    n_misses: int = 0
    additions: int = 0
    evictions: int = 0
    hit_flags: bytearray = field(default_factory=bytearray, repr=False)
    step_routing: list[float] = field(default_factory=list, repr=False)
    step_reconfig: list[int] = field(default_factory=list, repr=False)

    @property
    def reconfig_cost(self) -> float:
        return self.alpha * self.reconfig_count

    @property
    def total_cost(self) -> float:
        return self.routing_cost + self.reconfig_cost

    @property
    def n_requests(self) -> int:
        return self.n_hits + self.n_misses

    @property
    def hit_ratio(self) -> float:
        return self.n_hits / self.n_requests if self.n_requests else 0.0

    def record(self, out: StepOutcome) -> None:
        if out.hit:
            self.n_hits += 1
        else:
            self.n_misses += 1
            self.routing_cost += out.routing_cost
        events = out.reconfig_events
        self.reconfig_count += events
        self.evictions += len(out.evicted)
        self.additions += out.added is not None
        self.hit_flags.append(1 if out.hit else 0)
        if self.track_steps:
            self.step_routing.append(out.routing_cost)
            self.step_reconfig.append(events)

    def add_setup(self, n_pairs: int) -> None:
        """Charge installation of ``n_pairs`` before the first request."""
        self.reconfig_count += n_pairs
        self.additions += n_pairs

    def hits_array(self) -> np.ndarray:
        return np.frombuffer(bytes(self.hit_flags), dtype=np.uint8).astype(bool)

    def totals(self) -> dict:
        return {
            "routing_cost": self.routing_cost,
            "reconfig_count": self.reconfig_count,
            "reconfig_cost": self.reconfig_cost,
            "total_cost": self.total_cost,
            "hits": self.n_hits,
            "misses": self.n_misses,
            "hit_ratio": self.hit_ratio,
        }


def hit_ratio(source, window: int | None = None):
    """Cumulative hit ratio, or the trailing-window series when ``window`` is set.

    ``source`` is a :class:`CostLedger` or a sequence of per-request hit
    flags.  With no requests the cumulative ratio is 0.0.  Entry ``i`` of the
    windowed series covers requests ``max(0, i + 1 - window) .. i``.
    """
    if window is not None and window < 1:
        raise ValueError("window must be >= 1")
    hits = source.hits_array() if isinstance(source, CostLedger) else np.asarray(source, dtype=bool)
    if window is None:
        return float(hits.mean()) if hits.size else 0.0
    csum = np.concatenate(([0], np.cumsum(hits, dtype=np.int64)))
    idx = np.arange(1, hits.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)
