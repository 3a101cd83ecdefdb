import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from gnlearn.hypothesis import (
    HypothesisClass,
    HypothesisError,
    IndexOutOfRange,
    LabelCountMismatch,
    SizeTooLarge,
    evaluate,
    project_class,
    projection_origins,
    random_class,
)
from gnlearn.losscore import LossMatrix, quotient, random_loss, validate_loss


def test_duplicates_merged_in_order():
    H = HypothesisClass(2, 2, ((1, 0), (0, 0), (1, 0)))
    assert H.table == ((1, 0), (0, 0))


def test_rejects_bad_labels():
    with pytest.raises(HypothesisError):
        HypothesisClass(2, 2, ((0, 2),))
    with pytest.raises(HypothesisError):
        HypothesisClass(2, 2, ())


def test_evaluate():
    H = HypothesisClass(3, 3, ((2, 0, 1), (1, 1, 1)))
    assert evaluate(H, 0, 0) == 2
    assert {evaluate(H, 1, x) for x in range(3)} == {1}
    with pytest.raises(IndexOutOfRange):
        evaluate(H, 2, 0)


def test_project_identity_unchanged():
    H = random_class(3, 3, 3, 10)
    assert project_class(H, quotient(LossMatrix.identity(3))) == H


def test_project_merged_pair_collapses():
    q = quotient(validate_loss([[0, 0], [0, 0]]))
    Hc = project_class(HypothesisClass.full(2, 2), q)
    assert Hc.table == ((0, 0),) and Hc.k == 1


def test_project_mismatch():
    with pytest.raises(LabelCountMismatch):
        project_class(HypothesisClass.full(2, 2), quotient(LossMatrix.identity(3)))


@given(st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_project_against_bruteforce_dedup(seed):
    rng = random.Random(seed)
    # k=4 with labels 1 and 3 sharing a sigma-set
    L = validate_loss([[0, 1, 1, 1], [1, 0, 1, 0], [1, 1, 0, 1], [1, 0, 1, 0]])
    q = quotient(L)
    assert q.class_of[1] == q.class_of[3]
    H = random_class(rng.random(), 3, 4, rng.randint(1, 64))
    Hc = project_class(H, q)
    expected = set()
    for row in H.table:
        expected.add(tuple(q.class_of[y] for y in row))
    assert set(Hc.table) == expected and len(Hc) == len(expected) <= len(H)
    for i, row in zip(projection_origins(H, q), Hc.table):
        assert tuple(q.class_of[y] for y in H.table[i]) == row
        for x in range(3):
            assert evaluate(Hc, Hc.table.index(row), x) == q.class_of[evaluate(H, i, x)]


@given(st.integers(0, 2**32))
@settings(max_examples=100, deadline=None)
def test_projection_properties(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 6)
    L = random_loss(rng, k, rng.randint(1, k))
    q = quotient(L)
    n = rng.randint(1, 3)
    H = random_class(seed, n, k, rng.randint(1, min(20, k ** n)))
    Hc = project_class(H, q)
    assert len(Hc) <= len(H) and Hc.k <= H.k
    assert project_class(Hc, quotient(LossMatrix.identity(Hc.k))) == Hc
    full_c = project_class(HypothesisClass.full(n, k), q)
    assert set(full_c.table) == set(product(range(q.num_classes), repeat=n))


def test_random_class_deterministic_and_full():
    assert random_class(7, 3, 3, 9) == random_class(7, 3, 3, 9)
    assert set(random_class(1, 2, 3, 9).table) == set(product(range(3), repeat=2))
    assert set(random_class(0, 2, 2, 4).table) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    with pytest.raises(SizeTooLarge):
        random_class(0, 2, 2, 5)


def test_json_round_trip():
    H = random_class(5, 4, 3, 12)
    assert HypothesisClass.from_json(H.to_json()) == H
