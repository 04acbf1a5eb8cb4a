from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmatching.exceptions import AlreadyMatched, DegreeCapViolation, NotMatched
from bmatching.matching import BMatching


def test_add_sets_degrees():
    m = BMatching(1)
    m.add((0, 1))
    assert m.degree(0) == m.degree(1) == 1


def test_degree_cap():
    m = BMatching(1, pairs=[(0, 1)])
    with pytest.raises(DegreeCapViolation):
        m.add((0, 2))
    m2 = BMatching(2, pairs=[(0, 1)])
    m2.add((0, 2))
    assert m2.degree(0) == 2


def test_add_twice():
    m = BMatching(2, pairs=[(0, 1)])
    with pytest.raises(AlreadyMatched):
        m.add((1, 0))


def test_remove():
    m = BMatching(1, pairs=[(0, 1)])
    m.remove((0, 1))
    assert len(m) == 0
    with pytest.raises(NotMatched):
        m.remove((0, 1))
    m = BMatching(2, pairs=[(0, 1), (0, 2)])
    m.remove((0, 1))
    assert m.degree(0) == 1


def test_queries():
    m = BMatching(2, pairs=[(0, 1), (0, 2)])
    assert m.incident(0) == {(0, 1), (0, 2)}
    assert m.degree(1) == 1
    assert not m.contains((1, 2))
    assert m.snapshot() == "0,1\n0,2\n"


ops = st.lists(st.tuples(st.booleans(), st.integers(0, 6), st.integers(0, 6)), max_size=80)


@given(st.integers(1, 3), ops)
def test_degrees_match_recount(b, seq):
    m = BMatching(b, n=7)
    for add, u, v in seq:
        if u == v:
            continue
        p = (min(u, v), max(u, v))
        if add and m.can_add(p):
            before = (set(m.edges), m.degrees())
            m.add(p)
            m.remove(p)
            assert (set(m.edges), m.degrees()) == before
            m.add(p)
        elif not add and p in m:
            m.remove(p)
        recount = Counter(w for e in m.edges for w in e)
        assert m.degrees() == dict(recount)
        assert all(k <= b for k in recount.values())
