import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gnlearn.hypothesis import HypothesisClass, LabelCountMismatch, project_class, random_class
from gnlearn.losscore import LossMatrix, quotient, random_loss, set_learning_loss, validate_loss
from gnlearn.riskdist import (
    DiscreteDistribution,
    DistributionError,
    EmptySample,
    IndexOutOfRange,
    Sample,
    SigmaIndexing,
    empirical_risk,
    empirical_zero_one_risk,
    erm,
    pushforward,
    pushforward_sample,
    random_distribution,
    sample,
    sup_deviations,
    true_risk,
    uc_experiment,
    zero_one_risk,
)

F = Fraction


def test_distribution_invariants():
    with pytest.raises(DistributionError):
        DiscreteDistribution(((0, 0, F(1, 2)), (0, 0, F(1, 2))))
    with pytest.raises(DistributionError):
        DiscreteDistribution(((0, 0, F(1, 2)),))
    with pytest.raises(DistributionError):
        DiscreteDistribution(((0, 0, F(1)), (0, 1, F(0))))
    D = DiscreteDistribution.from_masses([(0, 1, F(1, 3)), (0, 1, F(1, 3)), (1, 0, F(1, 3))])
    assert D.atoms == ((0, 1, F(2, 3)), (1, 0, F(1, 3)))
    assert DiscreteDistribution.from_json(D.to_json()) == D


def test_true_risk_examples():
    L = set_learning_loss(3)
    H = HypothesisClass(1, 7, ((3,),))
    # h(x0) = {1,2} is in sigma({1})
    assert true_risk(DiscreteDistribution(((0, 0, F(1)),)), H, 0, L) == 0
    H2 = HypothesisClass(2, 2, ((0, 0),))
    D = DiscreteDistribution.uniform([(0, 0), (1, 1)])
    assert true_risk(D, H2, 0, LossMatrix.identity(2)) == F(1, 2)
    with pytest.raises(LabelCountMismatch):
        true_risk(D, H2, 0, LossMatrix.identity(3))


def test_empirical_risk_examples():
    L = LossMatrix.identity(3)
    H = HypothesisClass(2, 3, ((0, 1),))
    assert empirical_risk(Sample(((0, 0), (1, 1))), H, 0, L) == 0
    assert empirical_risk(Sample(((0, 0), (1, 1), (0, 0), (1, 2))), H, 0, L) == F(1, 4)
    with pytest.raises(EmptySample):
        empirical_risk(Sample(()), H, 0, L)
    support = [(0, 0), (0, 2), (1, 1), (1, 0)]
    assert empirical_risk(Sample(tuple(support)), H, 0, L) == true_risk(
        DiscreteDistribution.uniform(support), H, 0, L
    )


def test_erm_examples():
    L = LossMatrix.identity(2)
    H = HypothesisClass.full(2, 2)
    S = Sample(((0, 1), (1, 0)))
    r = erm(H, S, L)
    assert empirical_risk(S, H, r, L) == 0 and H.table[r] == (1, 0)
    # every row misses exactly one of these
    H3 = HypothesisClass(1, 2, ((1,), (0,)))
    assert erm(H3, Sample(((0, 0), (0, 1))), L) == 0
    with pytest.raises(EmptySample):
        erm(H, Sample(()), L)


def test_forgiving_erm_beats_identity_erm():
    L = set_learning_loss(3)
    H = HypothesisClass(2, 7, ((0, 0), (6, 6), (3, 3)))
    # labels {1} and {2}: identity ERM picks {1} everywhere; {1,2} covers both
    S = Sample(((0, 0), (0, 1), (1, 0), (1, 1)))
    forgiving = erm(H, S, L)
    ident = erm(H, S, LossMatrix.identity(7))
    risks = [empirical_risk(S, H, r, L) for r in range(len(H))]
    assert empirical_risk(S, H, forgiving, L) == min(risks) == 0
    assert empirical_risk(S, H, forgiving, L) <= empirical_risk(S, H, ident, L)
    assert forgiving != ident


def test_sigma_indexing():
    L = set_learning_loss(3)
    idx = SigmaIndexing.from_loss(L)
    assert idx.sentinel == 7
    assert [idx(i, 0) for i in range(1, 6)] == [0, 3, 4, 6, 7]
    assert idx(3, 7) == 7


def test_pushforward_examples():
    L = LossMatrix.identity(3)
    D = DiscreteDistribution.uniform([(0, 0), (1, 2), (2, 1)])
    assert pushforward(D, 1, L).atoms == D.atoms
    pf = pushforward(D, 2, L)
    assert all(y == 3 for _, y, _ in pf.atoms) and pf.padding_allowed
    assert sum(p for *_, p in pf.atoms) == 1
    with pytest.raises(IndexOutOfRange):
        pushforward(D, 4, L)


def test_zero_one_risk_examples():
    H = HypothesisClass(2, 2, ((0, 1),))
    assert zero_one_risk(DiscreteDistribution(((0, 2, F(1)),), True), H, 0) == 1
    assert zero_one_risk(DiscreteDistribution(((1, 1, F(1)),)), H, 0) == 0
    assert zero_one_risk(DiscreteDistribution.uniform([(0, 0), (0, 1)]), H, 0) == F(1, 2)


def _instance(seed, max_k=8, max_n=4):
    rng = random.Random(seed)
    k, n = rng.randint(1, max_k), rng.randint(1, max_n)
    L = random_loss(rng, k, rng.randint(1, k))
    H = random_class(seed, n, k, rng.randint(1, min(20, k ** n)))
    D = random_distribution(rng, n, k)
    return rng, L, H, D


@given(st.integers(0, 2**32))
@settings(max_examples=200, deadline=None)
def test_quotient_preserves_risk(seed):
    rng, L, H, D = _instance(seed)
    q = quotient(L)
    Hc, Dc = project_class(H, q), D.quotient(q)
    for h, row in enumerate(H.table):
        hc = Hc.table.index(tuple(q.class_of[y] for y in row))
        assert true_risk(D, H, h, L) == true_risk(Dc, Hc, hc, q.quotient_loss)


@given(st.integers(0, 2**32))
@settings(max_examples=200, deadline=None)
def test_decomposition_identity(seed):
    rng, L, H, D = _instance(seed)
    S = sample(D, rng.randint(1, 30), seed)
    for h in range(len(H)):
        lhs = 1 - true_risk(D, H, h, L)
        rhs = sum(1 - zero_one_risk(pushforward(D, i, L), H, h) for i in range(1, L.k + 1))
        assert lhs == rhs
        lhs = 1 - empirical_risk(S, H, h, L)
        rhs = sum(1 - empirical_zero_one_risk(pushforward_sample(S, i, L), H, h) for i in range(1, L.k + 1))
        assert lhs == rhs


@given(st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_erm_argmin_is_permutation_equivariant(seed):
    rng, L, H, D = _instance(seed)
    S = sample(D, 10, seed)
    risks = [empirical_risk(S, H, h, L) for h in range(len(H))]
    best = min(risks)
    assert erm(H, S, L) == risks.index(best)
    perm = list(range(len(H)))
    rng.shuffle(perm)
    Hp = HypothesisClass(H.domain_size, H.k, tuple(H.table[p] for p in perm))
    assert empirical_risk(S, Hp, erm(Hp, S, L), L) == best
    assert {H.table[h] for h in range(len(H)) if risks[h] == best} == {
        Hp.table[h] for h in range(len(Hp)) if empirical_risk(S, Hp, h, L) == best
    }


def test_sample_point_mass_and_determinism():
    D = DiscreteDistribution(((2, 1, F(1)),))
    assert sample(D, 5, 0).pairs == ((2, 1),) * 5
    D = random_distribution(3, 3, 3)
    assert sample(D, 50, 9) == sample(D, 50, 9)


def test_sample_frequencies_converge():
    D = DiscreteDistribution.from_masses({(0, 0): F(1, 2), (0, 1): F(1, 3), (1, 0): F(1, 6)})
    m = 10**5
    S = sample(D, m, 2024)
    for x, y, p in D.atoms:
        count = sum(1 for pr in S.pairs if pr == (x, y))
        sd = math.sqrt(m * float(p) * (1 - float(p)))
        assert abs(count - m * float(p)) <= 3 * sd


def test_uc_single_hypothesis_and_point_mass():
    L = LossMatrix.identity(2)
    H = HypothesisClass(2, 2, ((0, 1),))
    D = DiscreteDistribution.uniform([(0, 0), (1, 0)])
    rep = uc_experiment(H, L, D, [16, 64, 256], 400, 1)
    meds = [r.median for r in rep.rows]
    assert meds[0] > meds[1] > meds[2] and rep.monotone
    # single-h deviation is |Bin(m, 1/2)/m - 1/2|; its mean scales like m^-1/2
    ratio = rep.rows[0].mean / rep.rows[2].mean
    assert 4 * 0.7 < ratio < 4 * 1.3
    D0 = DiscreteDistribution(((0, 1, F(1)),))
    rep0 = uc_experiment(random_class(0, 2, 2, 4), L, D0, [1, 10, 100], 20, 3)
    assert all(r.mean == r.median == r.quantile == 0 for r in rep0.rows)


def test_uc_doubling_shrinks_by_sqrt2():
    rng = random.Random(5)
    L = random_loss(rng, 4, 3)
    H = random_class(5, 6, 4, 16)
    D = random_distribution(rng, 6, 4, support=14)
    a = np.median(sup_deviations(D, H, L, 256, 1000, 11))
    b = np.median(sup_deviations(D, H, L, 512, 1000, 12))
    assert math.sqrt(2) * 0.7 <= a / b <= math.sqrt(2) * 1.3


def test_uc_deterministic_and_trial_independent():
    rng = random.Random(1)
    L = random_loss(rng, 3)
    H = random_class(1, 4, 3, 8)
    D = random_distribution(rng, 4, 3)
    r1 = uc_experiment(H, L, D, [10, 40], 50, 7, epsilon=0.1)
    assert r1 == uc_experiment(H, L, D, [10, 40], 50, 7, epsilon=0.1)
    # trial t depends only on its own spawned seed
    full = sup_deviations(D, H, L, 30, 20, 99)
    again = sup_deviations(D, H, L, 30, 20, 99)
    assert np.array_equal(full, again)
    assert r1.rows[0].exceed_rate is not None
