import csv
import json

import numpy as np
import pytest

from bmatching.bma import BmaState
from bmatching.engine import (
    ConfigError,
    RunReport,
    SimConfig,
    compare,
    realize_topology,
    realize_workload,
    run,
)
from bmatching.exceptions import IncompatibleConfigs
from bmatching.ledger import CostLedger, hit_ratio
from bmatching.topology import gen_complete

K2 = {"kind": "complete", "n": 2}
K2_TRACE = {"kind": "inline", "requests": [[0, 1]] * 5}


def cfg(alg, b=1, **kw):
    base = dict(topology=K2, workload=K2_TRACE, alpha=2.0)
    base.update(kw)
    return SimConfig(alg, b=b, **base)


def test_ledger_examples():
    bma = run(cfg("bma")).totals
    assert bma["routing_cost"] == 4 and bma["reconfig_count"] == 1
    assert bma["reconfig_cost"] == 2 and bma["total_cost"] == 6
    assert bma["hits"] == 1 and bma["hit_ratio"] == pytest.approx(0.2)
    assert run(cfg("oblivious", b=None)).totals["total_cost"] == 5
    st = run(cfg("static")).totals
    assert st["routing_cost"] == 0 and st["hits"] == 5


def test_hit_ratio_function():
    assert hit_ratio([True] * 4) == 1.0
    assert hit_ratio([]) == 0.0
    assert hit_ratio(CostLedger(alpha=1.0)) == 0.0
    assert hit_ratio([0, 0, 0, 0, 1]) == pytest.approx(0.2)
    assert hit_ratio([1, 0, 1, 1], window=2).tolist() == [1.0, 0.5, 0.5, 1.0]
    with pytest.raises(ValueError):
        hit_ratio([1], window=0)


def test_reconfig_count_is_additions_plus_evictions():
    t = gen_complete(6)
    from bmatching.estimators import OnlineBMA
    from bmatching.workloads import gen_uniform

    est = OnlineBMA(t, b=2, alpha=1).fit(gen_uniform(6, 3000, seed=1))
    led = est.ledger_
    assert led.reconfig_count == led.additions + led.evictions
    assert led.evictions > 0
    assert led.additions - led.evictions == len(est.current_matching())


def test_ledger_conservation_by_replay():
    c = SimConfig("bma", topology={"kind": "complete", "n": 6}, workload={"kind": "uniform", "count": 2000},
                  alpha=2.0, b=2, seed=4)
    rep = run(c).totals
    topo = realize_topology(c.topology)
    trace = realize_workload(c.workload, topo, c.seed, 0)
    s = BmaState(topo, 2, 2.0)
    routing = events = hits = 0
    for u, v in trace.tolist():
        out = s.serve((u, v))
        routing += out.routing_cost
        events += out.reconfig_events
        hits += out.hit
    assert rep["routing_cost"] == routing
    assert rep["total_cost"] == routing + 2.0 * events
    assert rep["hits"] + rep["misses"] == len(trace) and rep["hits"] == hits


def test_run_deterministic_and_json_roundtrip():
    c = SimConfig("bma-lru", topology={"kind": "leaf-spine", "leaves": 8}, alpha=3.0, b=2, seed=7,
                  workload={"kind": "zipf", "n": 8, "s": 1.1, "count": 500}, repetitions=2, warmup=50, window=20)
    a, b = run(c).to_dict(), run(c).to_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b
    assert "warm_hit_ratio" in a["totals"]
    back = RunReport.from_dict(json.loads(run(c).to_json()))
    assert back.totals == a["totals"] and back.config == c.to_dict()
    assert SimConfig.from_dict(back.config) == c


def test_run_multi_rep_totals_are_means():
    c = SimConfig("bma", topology={"kind": "complete", "n": 5}, workload={"kind": "uniform", "count": 300},
                  alpha=1.0, b=1, repetitions=3)
    rep = run(c)
    assert len(rep.repetitions) == 3
    mean = np.mean([r["total_cost"] for r in rep.repetitions])
    assert rep.totals["total_cost"] == pytest.approx(mean)
    assert rep.stats["total_cost"]["min"] <= mean <= rep.stats["total_cost"]["max"]


def test_parallel_matches_serial():
    c = SimConfig("bma", topology={"kind": "complete", "n": 5}, workload={"kind": "uniform", "count": 300},
                  alpha=1.0, b=1, repetitions=3)
    assert run(c, jobs=1).repetitions == run(c, jobs=2).repetitions


def test_series_csv(tmp_path):
    c = SimConfig("bma", topology={"kind": "complete", "n": 4}, workload={"kind": "uniform", "count": 250},
                  alpha=1.0, b=1, series_stride=100, window=50)
    path = tmp_path / "s.csv"
    rep = run(c, series_path=str(path))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["step", "cum_routing", "cum_reconfig", "window_hit_ratio"]
    assert [int(r[0]) for r in rows[1:]] == [100, 200, 250]
    last = rows[-1]
    assert float(last[1]) == pytest.approx(rep.totals["routing_cost"])
    assert float(last[2]) == pytest.approx(rep.totals["reconfig_cost"])


def test_file_workload_slices_per_rep(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("".join(f"0 {1 + i % 3}\n" for i in range(30)))
    topo = realize_topology({"kind": "star", "leaves": 3})
    spec = {"kind": "file", "path": str(path), "offset": 2, "length": 5}
    r0 = realize_workload(spec, topo, 0, 0)
    r1 = realize_workload(spec, topo, 0, 1)
    assert r0[:, 1].tolist() == [3, 1, 2, 3, 1]
    assert r1[:, 1].tolist() == [2, 3, 1, 2, 3]


def test_compare_rows_and_static_below_oblivious():
    shared = dict(topology={"kind": "complete", "n": 5}, workload={"kind": "uniform", "count": 400},
                  alpha=2.0, repetitions=2)
    rows = compare([SimConfig("oblivious", **shared), SimConfig("static", b=1, **shared),
                    SimConfig("bma", b=1, **shared)])
    per_rep = [r for r in rows if isinstance(r["rep"], int)]
    assert len(per_rep) == 6 and len(rows) == 6 + 9
    for rep in (0, 1):
        by = {r["algorithm"]: r for r in per_rep if r["rep"] == rep}
        assert by["static-greedy"]["total_cost"] <= by["oblivious"]["total_cost"]


def test_compare_single_and_incompatible():
    rows = compare([cfg("bma")])
    assert rows[0]["total_cost"] == 6 and rows[0]["rep"] == 0
    with pytest.raises(IncompatibleConfigs):
        compare([cfg("bma"), cfg("bma", seed=1)])
    assert compare([]) == []


@pytest.mark.parametrize("kw", [
    dict(algorithm="nope"),
    dict(algorithm="bma", b=None),
    dict(algorithm="bma", b=0),
    dict(algorithm="bma", alpha=0),
    dict(algorithm="bma", window=0),
    dict(algorithm="bma", topology="complete"),
])
def test_config_validation(kw):
    base = dict(algorithm="bma", b=1, topology=K2, workload=K2_TRACE)
    base.update(kw)
    with pytest.raises(ConfigError):
        SimConfig(**base).validate()


def test_config_unknown_keys_and_kinds():
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"algorithm": "bma", "topology": K2, "workload": K2_TRACE, "bogus": 1})
    with pytest.raises(ConfigError):
        realize_topology({"kind": "ring"})
    with pytest.raises(ConfigError):
        realize_topology({"kind": "star"})
    with pytest.raises(ConfigError):
        realize_workload({"kind": "zipf", "n": 9, "s": 1, "count": 3}, gen_complete(4), 0)


def test_bma_and_lru_identical_without_eviction_choice():
    shared = dict(topology={"kind": "star", "leaves": 3}, alpha=2.0,
                  workload={"kind": "inline", "requests": [[0, 1]] * 10 + [[0, 2]] * 10 + [[0, 1]] * 10})
    rows = compare([SimConfig("bma", b=1, **shared), SimConfig("bma-lru", b=1, **shared)])
    a, b = rows[0], rows[1]
    a.pop("algorithm"), b.pop("algorithm")
    assert a == b and a["reconfig_count"] > 1


def test_additions_never_below_evictions_at_any_prefix():
    from bmatching.workloads import gen_uniform

    s = BmaState(gen_complete(7), 2, 1.0)
    adds = evicts = 0
    for u, v in gen_uniform(7, 5000, seed=12).tolist():
        out = s.serve((u, v))
        evicts += len(out.evicted)
        adds += out.added is not None
        assert adds >= evicts
