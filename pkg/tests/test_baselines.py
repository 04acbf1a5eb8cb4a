import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmatching.baselines import (
    oblivious_cost,
    pair_frequency,
    saved_weight,
    static_cost,
    static_matching_greedy,
    static_schedule_cost,
)
from bmatching.matching import BMatching
from bmatching.oracle import exact_static
from bmatching.topology import build, gen_complete, gen_random_connected, gen_star


def test_oblivious(k2, star2):
    assert oblivious_cost(k2, [(0, 1)] * 5) == 5
    assert oblivious_cost(k2, []) == 0
    assert oblivious_cost(star2, [(1, 2)] * 3) == 6


def test_greedy_triangle():
    t = gen_complete(3)
    freq = {(0, 1): 5, (0, 2): 4, (1, 2): 3}
    m = static_matching_greedy(t, freq, 1)
    assert m.edges == {(0, 1)}
    # brute force: any two triangle pairs share a node
    best = max(freq, key=freq.get)
    assert m.edges == {best}


def test_greedy_empty_frequencies():
    assert len(static_matching_greedy(gen_complete(4), {}, 2)) == 0
    assert len(static_matching_greedy(gen_complete(4), {(0, 1): 0}, 2)) == 0


def test_static_cost(k2, star2):
    m = BMatching(1, pairs=[(0, 1)])
    assert static_cost(k2, [(0, 1)] * 5, m) == 0
    assert static_cost(k2, [(0, 1)] * 5, m, include_setup=True, alpha=2) == 2
    assert static_cost(star2, [(0, 1), (0, 2)], m) == 1
    assert static_cost(star2, pair_frequency([(0, 1), (0, 2)]), m) == 1


def test_static_schedule_cost(k2):
    # first request routed, then the pair is installed for alpha
    assert static_schedule_cost(k2, [(0, 1)] * 5, [(0, 1)], alpha=2) == 3
    assert static_schedule_cost(k2, [(0, 1)] * 5, [], alpha=2) == 5
    assert static_schedule_cost(k2, [], [(0, 1)], alpha=2) == 0


def test_path_two_disjoint_pairs():
    t = build(4, [((0, 1), 1), ((1, 2), 1), ((2, 3), 1)])
    freq = {(0, 1): 3, (1, 2): 5, (2, 3): 3}
    greedy = static_matching_greedy(t, freq, 1)
    exact, w = exact_static(t, freq, 1)
    assert exact.edges == {(0, 1), (2, 3)} and w == 6
    assert greedy.edges == {(1, 2)}
    assert saved_weight(t, freq, greedy) >= 0.5 * w


@given(st.integers(2, 6), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_greedy_half_approx_and_below_oblivious(n, b, seed):
    rng = np.random.default_rng(seed)
    t = gen_random_connected(n, rng, max_length=3)
    pairs = list(t.pairs())
    trace = [pairs[i] for i in rng.integers(0, len(pairs), size=int(rng.integers(0, 40)))]
    freq = pair_frequency(trace)
    g = static_matching_greedy(t, freq, b)
    assert all(g.degree(w) <= b for w in range(n))
    exact, w = exact_static(t, freq, b)
    assert saved_weight(t, freq, g) >= 0.5 * w - 1e-9
    assert saved_weight(t, freq, g) <= w + 1e-9
    assert static_cost(t, trace, g) <= oblivious_cost(t, trace) + 1e-9


def test_greedy_large_b_is_maximal():
    t = gen_complete(5)
    freq = {p: 1 + i for i, p in enumerate(t.pairs())}
    m = static_matching_greedy(t, freq, 4)
    assert m.edges == set(t.pairs())
    m = static_matching_greedy(t, freq, 2)
    # greedy stops only when no remaining positive pair fits
    assert not any(m.can_add(p) for p in t.pairs())
