"""Scenario runner: realize topology and workload, drive a policy, report costs."""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .estimators import ObliviousRouting, OnlineBMA, StaticBMatching
from .exceptions import IncompatibleConfigs
from .ledger import CostLedger, hit_ratio
from .topology import (
    Topology,
    gen_complete,
    gen_leaf_spine,
    gen_star,
    read_topology,
)
from .workloads import TrafficMatrix, gen_iid, gen_uniform, gen_zipf, parse_trace, read_trace

__all__ = [
    "ALGORITHMS",
    "CostLedger",
    "RunReport",
    "SimConfig",
    "compare",
    "hit_ratio",
    "make_estimator",
    "realize_topology",
    "realize_workload",
    "run",
    "run_on_trace",
]

ALGORITHMS = ("oblivious", "static-greedy", "static-exact", "bma", "bma-lru")
ALIASES = {"static": "static-greedy", "lru": "bma-lru", "lru-bma": "bma-lru"}
NEEDS_B = {"static-greedy", "static-exact", "bma", "bma-lru"}


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    """One scenario.

    ``topology`` and ``workload`` are JSON-style dicts with a ``kind`` key:

    topology kinds: ``complete`` (n, length), ``star`` (leaves),
    ``leaf-spine`` (leaves, spines), ``file`` (path).

    workload kinds: ``inline`` (requests), ``file`` (path, offset, length),
    ``zipf`` (n, s, count), ``iid`` (matrix path or weights, count),
    ``uniform`` (count).
    """

    algorithm: str
    topology: dict
    workload: dict
    alpha: float = 6.0
    b: int | None = None
    seed: int = 0
    repetitions: int = 1
    window: int = 1000
    warmup: int = 0
    series_stride: int = 0
    check: bool = False
    include_setup: bool = False

    def __post_init__(self):
        self.algorithm = ALIASES.get(self.algorithm, self.algorithm)

    def validate(self) -> SimConfig:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.algorithm in NEEDS_B and self.b is None:
            raise ConfigError(f"algorithm {self.algorithm!r} needs b")
        if self.b is not None and (int(self.b) != self.b or self.b < 1):
            raise ConfigError("b must be a positive integer")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.window < 1 or self.repetitions < 1 or self.warmup < 0 or self.series_stride < 0:
            raise ConfigError("window and repetitions must be >= 1; warmup and stride >= 0")
        for name, spec in (("topology", self.topology), ("workload", self.workload)):
            if not isinstance(spec, dict) or "kind" not in spec:
                raise ConfigError(f"{name} must be a mapping with a 'kind' key")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def realize_topology(spec: dict) -> Topology:
    kind = spec.get("kind")
    try:
        if kind == "complete":
            return gen_complete(int(spec["n"]), float(spec.get("length", 1.0)))
        if kind == "star":
            return gen_star(int(spec["leaves"]))
        if kind == "leaf-spine":
            spines = spec.get("spines")
            return gen_leaf_spine(int(spec["leaves"]), None if spines is None else int(spines))
        if kind == "file":
            return read_topology(spec["path"])
    except KeyError as exc:
        raise ConfigError(f"topology {kind!r} missing field {exc}") from None
    raise ConfigError(f"unknown topology kind {kind!r}")


def realize_workload(spec: dict, topology: Topology, seed: int, rep: int = 0) -> np.ndarray:
    """Materialize the request sequence for repetition ``rep``.

    Synthetic workloads draw from stream ``rep`` of ``seed``.  File traces
    with a ``length`` take the ``rep``-th consecutive slice after ``offset``.
    """
    kind = spec.get("kind")
    n = topology.n
    try:
        if kind == "inline":
            reqs = spec["requests"]
            if isinstance(reqs, str):
                return parse_trace(reqs.replace(";", "\n"), n)
            return parse_trace("\n".join(f"{u} {v}" for u, v in reqs), n)
        if kind == "file":
            offset = int(spec.get("offset", 0))
            length = spec.get("length")
            if length is not None:
                offset += rep * int(length)
            return read_trace(spec["path"], n, offset, None if length is None else int(length))
        if kind == "zipf":
            leaves = int(spec["n"])
            if leaves > n:
                raise ConfigError(f"zipf over {leaves} nodes but topology has {n}")
            return gen_zipf(leaves, float(spec["s"]), int(spec["count"]), seed, rep)
        if kind == "iid":
            matrix = spec["matrix"]
            if isinstance(matrix, str):
                tm = TrafficMatrix.read(matrix)
            else:
                tm = TrafficMatrix({(int(u), int(v)): float(w) for u, v, w in matrix})
            trace = gen_iid(tm, int(spec["count"]), seed, rep)
            if trace.size and trace.max() >= n:
                raise ConfigError("traffic matrix references nodes outside the topology")
            return trace
        if kind == "uniform":
            return gen_uniform(n, int(spec["count"]), seed, rep)
    except KeyError as exc:
        raise ConfigError(f"workload {kind!r} missing field {exc}") from None
    raise ConfigError(f"unknown workload kind {kind!r}")


def make_estimator(config: SimConfig, topology: Topology, track_steps: bool = False):
    alg = config.algorithm
    if alg == "oblivious":
        return ObliviousRouting(topology, track_steps=track_steps)
    if alg in ("static-greedy", "static-exact"):
        return StaticBMatching(
            topology, b=config.b, alpha=config.alpha, method=alg.split("-")[1],
            include_setup=config.include_setup, track_steps=track_steps,
        )
    return OnlineBMA(
        topology, b=config.b, alpha=config.alpha,
        eviction="lru" if alg == "bma-lru" else "min-pair",
        check=config.check, track_steps=track_steps,
    )


def run_on_trace(config: SimConfig, topology: Topology, trace: np.ndarray):
    """Fit the configured policy on ``trace``; returns the fitted estimator."""
    est = make_estimator(config, topology, track_steps=config.series_stride > 0)
    return est.fit(trace)


def _summary(config: SimConfig, ledger: CostLedger) -> dict:
    out = ledger.totals()
    if config.warmup:
        hits = ledger.hits_array()
        series = hit_ratio(hits, config.window)[config.warmup:]
        out["warm_hit_ratio"] = float(series.mean()) if series.size else 0.0
    return out


def series_rows(ledger: CostLedger, window: int, stride: int) -> list[tuple]:
    """``(step, cum_routing, cum_reconfig, window_hit_ratio)`` every ``stride`` steps."""
    n = ledger.n_requests
    if n == 0 or stride < 1:
        return []
    cum_routing = np.cumsum(ledger.step_routing)
    cum_reconfig = np.cumsum(ledger.step_reconfig) * ledger.alpha
    win = hit_ratio(ledger, window)
    steps = list(range(stride, n + 1, stride))
    if steps[-1] != n:
        steps.append(n)
    return [(s, float(cum_routing[s - 1]), float(cum_reconfig[s - 1]), float(win[s - 1])) for s in steps]


def write_series(rows: Sequence[tuple], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "cum_routing", "cum_reconfig", "window_hit_ratio"])
        w.writerows(rows)


AGG_FIELDS = ("routing_cost", "reconfig_count", "reconfig_cost", "total_cost", "hits", "misses", "hit_ratio", "warm_hit_ratio")


def aggregate(rows: Sequence[dict]) -> dict:
    """Mean/min/max over repetitions for every numeric field present."""
    out = {}
    for key in AGG_FIELDS:
        vals = [r[key] for r in rows if key in r]
        if vals:
            out[key] = {"mean": float(np.mean(vals)), "min": float(min(vals)), "max": float(max(vals))}
    return out


@dataclass
class RunReport:
    config: dict
    totals: dict
    repetitions: list[dict]
    stats: dict
    matching: list[list[int]]
    static_method: str | None = None
    series_file: str | list[str] | None = None
    wall_time: float = 0.0
    series: list[list[tuple]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("series")
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def _one_rep(args) -> tuple[dict, list, list[tuple]]:
    config, rep = args
    topology = realize_topology(config.topology)
    trace = realize_workload(config.workload, topology, config.seed, rep)
    est = run_on_trace(config, topology, trace)
    rows = series_rows(est.ledger_, config.window, config.series_stride) if config.series_stride else []
    matching = [list(p) for p in sorted(est.current_matching().edges)]
    return _summary(config, est.ledger_), matching, rows


def _map(fn: Callable, items: list, jobs: int | None) -> list:
    jobs = jobs or os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def run(config: SimConfig, jobs: int | None = 1, series_path: str | None = None) -> RunReport:
    """Run every repetition of ``config`` and assemble the report.

    ``totals`` holds the per-field mean over repetitions (identical to the
    single ledger when ``repetitions == 1``).  Deterministic in ``config``
    apart from ``wall_time``.
    """
    config.validate()
    start = time.perf_counter()
    results = _map(_one_rep, [(config, r) for r in range(config.repetitions)], jobs)
    reps = [r[0] for r in results]
    stats = aggregate(reps)
    totals = dict(reps[0]) if len(reps) == 1 else {k: v["mean"] for k, v in stats.items()}
    series_file = None
    if series_path and config.series_stride:
        if config.repetitions == 1:
            write_series(results[0][2], series_path)
            series_file = str(series_path)
        else:
            root, ext = os.path.splitext(str(series_path))
            series_file = []
            for r, res in enumerate(results):
                path = f"{root}.rep{r}{ext or '.csv'}"
                write_series(res[2], path)
                series_file.append(path)
    static_method = config.algorithm.split("-")[1] if config.algorithm.startswith("static") else None
    return RunReport(
        config=config.to_dict(),
        totals=totals,
        repetitions=reps,
        stats=stats,
        matching=results[0][1],
        static_method=static_method,
        series_file=series_file,
        wall_time=time.perf_counter() - start,
        series=[r[2] for r in results],
    )


TABLE_FIELDS = ("algorithm", "b", "alpha", "rep", "total_cost", "routing_cost", "reconfig_cost", "hit_ratio")


def _shared_key(c: SimConfig):
    return (json.dumps(c.topology, sort_keys=True), json.dumps(c.workload, sort_keys=True), c.seed, c.repetitions)


def _compare_rep(args) -> list[dict]:
    configs, rep = args
    topology = realize_topology(configs[0].topology)
    trace = realize_workload(configs[0].workload, topology, configs[0].seed, rep)
    rows = []
    for c in configs:
        est = run_on_trace(c, topology, trace)
        row = {"algorithm": c.algorithm, "b": c.b, "alpha": c.alpha, "rep": rep}
        row.update(_summary(c, est.ledger_))
        rows.append(row)
    return rows


def compare(configs: Iterable[SimConfig], jobs: int | None = 1) -> list[dict]:
    """Run several scenarios on one shared realized trace per repetition.

    Returns per-repetition rows followed by ``mean``, ``min`` and ``max``
    rows per scenario (in the ``rep`` column).
    """
    configs = [c.validate() for c in configs]
    if not configs:
        return []
    if len({_shared_key(c) for c in configs}) != 1:
        raise IncompatibleConfigs("scenarios must share topology, workload, seed and repetitions")
    per_rep = _map(_compare_rep, [(configs, r) for r in range(configs[0].repetitions)], jobs)
    rows = [row for rep_rows in per_rep for row in rep_rows]
    summary = []
    for i, c in enumerate(configs):
        mine = [rep_rows[i] for rep_rows in per_rep]
        stats = aggregate(mine)
        for agg in ("mean", "min", "max"):
            row: dict[str, Any] = {"algorithm": c.algorithm, "b": c.b, "alpha": c.alpha, "rep": agg}
            row.update({k: v[agg] for k, v in stats.items()})
            summary.append(row)
    return rows + summary
