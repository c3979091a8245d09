import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coxfock.fock import QSpec, build_scene, from_q
from coxfock.wick import (
    MomentQuery, PairPartition, compare, crossings, double_factorial, moment, moment_matrix,
    pair_partitions, q_weight, traciality_check,
)
from conftest import rand_q


def brute_pairings(m):
    out = set()
    for p in itertools.permutations(range(1, m + 1)):
        pairs = tuple(sorted(tuple(sorted(p[k:k + 2])) for k in range(0, m, 2)))
        out.add(pairs)
    return out


def test_partition_validation():
    with pytest.raises(ValueError):
        PairPartition(((1, 4), (2, 4)))
    with pytest.raises(ValueError):
        PairPartition(((2, 1),))
    with pytest.raises(ValueError):
        pair_partitions(3)


@pytest.mark.parametrize("m,count", [(2, 1), (4, 3), (6, 15)])
def test_partition_counts(m, count):
    ps = pair_partitions(m)
    assert len(ps) == count
    assert {p.pairs for p in ps} == brute_pairings(m)


@pytest.mark.parametrize("r", range(1, 9))
def test_double_factorial_counts(r):
    n = len(pair_partitions(2 * r)) if r <= 6 else None
    if n is not None:
        assert n == double_factorial(2 * r - 1)
    assert double_factorial(2 * r - 1) == np.prod(np.arange(2 * r - 1, 0, -2))


def test_crossing_examples():
    assert crossings(PairPartition(((1, 2), (3, 4)))) == []
    assert crossings(PairPartition(((1, 3), (2, 4)))) == [(1, 2)]
    assert len(crossings(PairPartition(((1, 4), (2, 5), (3, 6))))) == 3


@pytest.mark.parametrize("r", range(1, 9))
def test_rainbow_and_parallel(r):
    rainbow = PairPartition(tuple((k, 2 * r + 1 - k) for k in range(1, r + 1)))
    parallel = PairPartition(tuple((k, r + k) for k in range(1, r + 1)))
    assert crossings(rainbow) == []
    assert len(crossings(parallel)) == r * (r - 1) // 2


def test_q_weight_examples():
    q = np.array([[0.4, 0.2j], [-0.2j, -0.3]])
    assert q_weight(PairPartition(((1, 2),)), (1, 1), q) == 1
    assert q_weight(PairPartition(((1, 3), (2, 4))), (1, 1, 1, 1), q) == 0.4
    assert q_weight(PairPartition(((1, 3), (2, 4))), (1, 2, 2, 1), q) == 0
    # nested pairing {(1,4),(2,3)}: delta_{i1,i4} delta_{i2,i3}, no crossing
    v = PairPartition(((1, 4), (2, 3)))
    assert q_weight(v, (1, 2, 2, 1), q) == 1
    assert q_weight(v, (1, 2, 1, 2), q) == 0


def test_moment_examples():
    q = rand_q(0, 3, 0.9)
    spec = QSpec(q)
    for i, j in itertools.product(range(1, 4), repeat=2):
        assert moment(MomentQuery((i, j), spec)) == (i == j)
    assert moment(MomentQuery((1, 1, 1, 1), spec)) == pytest.approx(2 + q[0, 0])
    assert moment(MomentQuery((1, 2, 1), spec)) == 0
    for i in range(1, 4):
        assert moment(MomentQuery((i, i), spec)) == 1


def test_moment_equals_full_enumeration():
    q = rand_q(1, 2, 0.9)
    for m in (2, 4, 6):
        for w in itertools.product((1, 2), repeat=m):
            full = sum(q_weight(v, w, q) for v in pair_partitions(m))
            assert abs(moment(MomentQuery(w, QSpec(q))) - full) < 1e-14


def test_compare_examples():
    spec = QSpec(np.array([[0.3]]))
    assert moment_matrix(MomentQuery((1, 1), spec)) == pytest.approx(1)
    c = compare(MomentQuery((1, 1, 1, 1), spec))
    assert c.passed
    assert c.context["diagram"] == pytest.approx(2.3)
    assert c.context["matrix"] == pytest.approx(2.3)


def test_compare_exhaustive_complex_q():
    q = rand_q(2, 2, 0.9)
    spec = QSpec(q)
    assert np.abs(q - q.T).max() > 0.01
    scene = build_scene(from_q(spec), 3)
    for m in range(1, 7):
        for w in itertools.product((1, 2), repeat=m):
            assert compare(MomentQuery(w, spec), scene, 1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(1, 3), min_size=2, max_size=6))
def test_compare_random(seed, word):
    spec = QSpec(rand_q(seed, 3, 1.0))
    assert compare(MomentQuery(tuple(word), spec), tol=1e-10)


def test_odd_letter_count_vanishes():
    spec = QSpec(rand_q(3, 2, 0.8))
    assert moment(MomentQuery((1, 2, 1, 1), spec)) == 0


def test_traciality():
    sym = rand_q(4, 2, 0.8, symmetric=True)
    structural, empirical = traciality_check(sym, max_degree=6)
    assert structural.value == 0 and empirical.value <= 1e-10
    herm = np.array([[0, 1j], [-1j, 0]])
    structural, empirical = traciality_check(herm, max_degree=6)
    assert not structural.passed
    assert empirical.value > 1e-6
    assert all(traciality_check(np.zeros((2, 2)), max_degree=4))


def test_word_limits():
    spec = QSpec(np.zeros((1, 1)))
    with pytest.raises(ValueError):
        MomentQuery((2,), spec)
    with pytest.raises(ValueError):
        moment(MomentQuery((1,) * 18, spec))
