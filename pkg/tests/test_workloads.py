import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmatching.estimators import OnlineBMA
from bmatching.exceptions import BadNodeId, DegenerateMatrix, ParseError, SelfPair
from bmatching.workloads import (
    AdversaryConfig,
    TrafficMatrix,
    format_trace,
    gen_iid,
    gen_uniform,
    gen_zipf,
    parse_trace,
    read_trace,
    run_adversary,
    write_trace,
)


def test_parse_trace_examples():
    assert parse_trace("0 1\n1 0").tolist() == [[0, 1], [0, 1]]
    assert parse_trace("0,1,1588000000").tolist() == [[0, 1]]
    assert parse_trace("# header\n\n2 5  # trailing\n").tolist() == [[2, 5]]
    assert parse_trace("").shape == (0, 2)


@pytest.mark.parametrize("text, exc", [
    ("3 3", SelfPair),
    ("0", ParseError),
    ("a b", ParseError),
    ("0 9", BadNodeId),
    ("-1 2", BadNodeId),
])
def test_parse_trace_errors(text, exc):
    with pytest.raises(exc):
        parse_trace(text, n_nodes=4)


def test_parse_error_reports_line():
    with pytest.raises(SelfPair) as info:
        parse_trace("0 1\n1 2\n3 3")
    assert info.value.line == 3


def test_trace_file_roundtrip_and_slicing(tmp_path):
    trace = gen_uniform(6, 50, seed=3)
    path = tmp_path / "t.txt"
    write_trace(trace, path)
    assert np.array_equal(read_trace(path, 6), trace)
    assert np.array_equal(read_trace(path, 6, offset=10, length=5), trace[10:15])
    assert format_trace([(0, 1)]) == "0 1\n"


def test_gen_iid_single_entry():
    trace = gen_iid({(0, 1): 1.0}, 10, seed=7)
    assert trace.tolist() == [[0, 1]] * 10


def test_gen_iid_degenerate():
    with pytest.raises(DegenerateMatrix):
        gen_iid({(0, 1): 0.0}, 5, seed=0)
    with pytest.raises(DegenerateMatrix):
        gen_iid({}, 5, seed=0)
    with pytest.raises(ValueError):
        TrafficMatrix({(0, 1): -1.0})


def test_traffic_matrix_parse():
    tm = TrafficMatrix.parse("0 1 2.5\n1,0,0.5\n# c\n2 3 1")
    assert tm.weights == {(0, 1): 3.0, (2, 3): 1.0}
    with pytest.raises(ParseError):
        TrafficMatrix.parse("0 1")
    with pytest.raises(SelfPair):
        TrafficMatrix.parse("1 1 3")


def test_gen_iid_uniform_frequencies_within_3_sigma():
    pairs = [(0, 1), (0, 2), (1, 2), (2, 3)]
    count = 40_000
    trace = gen_iid({p: 1.0 for p in pairs}, count, seed=11)
    p = 1 / len(pairs)
    sigma = np.sqrt(count * p * (1 - p))
    for pair in pairs:
        c = int(np.all(trace == pair, axis=1).sum())
        assert abs(c - count * p) < 3 * sigma


def test_gen_iid_proportional():
    trace = gen_iid({(0, 1): 3.0, (1, 2): 1.0}, 20_000, seed=5)
    frac = np.all(trace == (0, 1), axis=1).mean()
    assert abs(frac - 0.75) < 3 * np.sqrt(0.75 * 0.25 / 20_000)


@given(st.integers(0, 2**63 - 1), st.integers(0, 5))
def test_generators_deterministic(seed, stream):
    a = gen_zipf(8, 1.2, 30, seed, stream)
    assert np.array_equal(a, gen_zipf(8, 1.2, 30, seed, stream))
    assert np.array_equal(gen_uniform(5, 30, seed, stream), gen_uniform(5, 30, seed, stream))
    assert np.array_equal(gen_iid({(0, 1): 1, (2, 3): 2}, 30, seed, stream),
                          gen_iid({(0, 1): 1, (2, 3): 2}, 30, seed, stream))
    assert np.all(a[:, 0] < a[:, 1]) and a.max() < 8


def test_streams_differ():
    assert not np.array_equal(gen_uniform(10, 100, 1, 0), gen_uniform(10, 100, 1, 1))


def test_gen_uniform_covers_all_pairs():
    trace = gen_uniform(5, 5000, seed=2)
    assert np.all(trace[:, 0] < trace[:, 1])
    assert len({tuple(r) for r in trace.tolist()}) == 10


def test_zipf_top_pair_frequency():
    n, s, count = 10, 1.2, 50_000
    trace = gen_zipf(n, s, count, seed=4)
    m = n * (n - 1) // 2
    h = np.sum(np.arange(1, m + 1, dtype=float) ** -s)
    _, counts = np.unique(trace, axis=0, return_counts=True)
    p = 1 / h
    assert abs(counts.max() - count * p) < 4 * np.sqrt(count * p * (1 - p))


def test_adversary_shape():
    res = run_adversary(AdversaryConfig(b=2, alpha=3, k=20))
    trace = res.realized_trace
    assert trace.shape == (60, 2)
    assert np.all(trace[:, 0] == 0)
    assert set(trace[:, 1].tolist()) <= {1, 2, 3}
    for start in range(0, 60, 3):
        assert len({tuple(r) for r in trace[start:start + 3].tolist()}) == 1


def test_adversary_small_cases():
    res = run_adversary(AdversaryConfig(b=1, alpha=3, k=1))
    assert res.det_cost == 3
    assert res.off_cost == 4
    res = run_adversary(AdversaryConfig(b=1, alpha=3, k=0))
    assert res.det_cost == 0 and res.off_cost == 0 and res.ratio is None
    d = run_adversary(AdversaryConfig(b=1, alpha=2, k=4)).to_dict()
    assert set(d) == {"k", "b", "alpha", "det_cost", "off_cost", "ratio"}


def test_adversary_uses_given_policy_and_leaves():
    res = run_adversary(AdversaryConfig(b=1, alpha=2, k=30, leaves=4), OnlineBMA(eviction="lru"))
    assert res.realized_trace[:, 1].max() <= 4
    assert res.ratio > 1


@pytest.mark.parametrize("kw", [dict(b=0, alpha=1, k=1), dict(b=1, alpha=1.5, k=1),
                                dict(b=1, alpha=1, k=-1), dict(b=2, alpha=1, k=1, leaves=2)])
def test_adversary_config_rejects(kw):
    with pytest.raises(ValueError):
        AdversaryConfig(**kw)
