"""Adversarial distribution families and the 1/(2k) risk lower bound.

From a shattered set of ``2m`` points, one target function is built for every
subset pattern of the witness pair, and with it a realizable distribution:
uniform over the points, and given ``x``, uniform over the sigma-set of the
target's label.  Everything happens in the quotient label space.  A learner
sees ``m`` i.i.d. draws and returns a labeling of the ``2m`` points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .dimension import ShatteringWitness, verify_witness
from .hypothesis import HypothesisClass, project_class
from .losscore import InternalInconsistency, LossMatrix, QuotientMap, quotient
from .riskdist import DiscreteDistribution, Sample, erm, predictor_risk

DEFAULT_BUDGET = 10**6

Predictor = Mapping[int, int]


class NFLError(ValueError):
    pass


class OddWitnessSize(NFLError):
    pass


class UnverifiedWitness(NFLError):
    pass


class EnumerationBudgetExceeded(NFLError):
    pass


@dataclass(frozen=True)
class AdversarialFamily:
    """Targets and their distributions, indexed by selector mask.

    ``functions[i][j]`` is the class id target ``i`` assigns to ``points[j]``.
    ``loss`` and ``hypotheses`` are the quotiented loss and class.
    """

    points: tuple[int, ...]
    functions: tuple[tuple[int, ...], ...]
    distributions: tuple[DiscreteDistribution, ...]
    m: int
    loss: LossMatrix
    hypotheses: HypothesisClass
    quotient: QuotientMap

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def num_classes(self) -> int:
        return self.loss.k

    @property
    def bound(self) -> Fraction:
        return Fraction(1, 2 * self.num_classes)

    def target(self, i: int) -> dict[int, int]:
        return dict(zip(self.points, self.functions[i]))


def adversarial_distribution(points: Sequence[int], labels: Sequence[int], L: LossMatrix) -> DiscreteDistribution:
    """Uniform over ``points``; given a point, uniform over sigma of its label."""
    masses = {}
    for x, f in zip(points, labels):
        members = [y for y in range(L.k) if L.entries[f][y] == 0]
        for y in members:
            masses[(x, y)] = Fraction(1, len(points) * len(members))
    return DiscreteDistribution.from_masses(masses)


def build_family(H: HypothesisClass, L: LossMatrix, witness: ShatteringWitness) -> AdversarialFamily:
    if witness.size % 2:
        raise OddWitnessSize(f"need an even number of points, got {witness.size}")
    if not verify_witness(H, witness, L):
        raise UnverifiedWitness("witness fails the generalized shattering conditions")
    q = quotient(L)
    ql = q.quotient_loss
    functions = tuple(
        tuple(q.class_of[H.table[r][p]] for p in witness.points) for r in witness.selectors
    )
    distributions = tuple(adversarial_distribution(witness.points, f, ql) for f in functions)
    for f, D in zip(functions, distributions):
        if predictor_risk(D, dict(zip(witness.points, f)), ql) != 0:
            raise InternalInconsistency(f"target {f} is not realizable under its own distribution")
    return AdversarialFamily(
        witness.points, functions, distributions, witness.size // 2, ql, project_class(H, q), q
    )


@dataclass(frozen=True)
class Learner:
    """A deterministic map from a sample to a labeling of the family's points."""

    fit: Callable[[Sample], Predictor]
    description: str

    def __call__(self, S: Sample) -> Predictor:
        return self.fit(S)


def erm_learner(family: AdversarialFamily, hypotheses: HypothesisClass | None = None) -> Learner:
    """ERM over the quotiented class (or ``hypotheses``), lowest row on ties."""
    Hc = hypotheses if hypotheses is not None else family.hypotheses
    pts = family.points

    def fit(S):
        row = Hc.table[erm(Hc, S, family.loss)]
        return {p: row[p] for p in pts}

    return Learner(fit, f"erm({len(Hc)} hypotheses)")


def constant_learner(family: AdversarialFamily, label: int) -> Learner:
    if not 0 <= label < family.num_classes:
        raise NFLError(f"class id {label} outside [0, {family.num_classes})")
    out = {p: label for p in family.points}
    return Learner(lambda S: out, f"constant:{label}")


def memorizing_learner(family: AdversarialFamily, default: int = 0) -> Learner:
    """Repeat the first label seen at each point; ``default`` elsewhere."""

    def fit(S):
        out = {p: default for p in family.points}
        seen = set()
        for x, y in S.pairs:
            if x not in seen:
                out[x] = y
                seen.add(x)
        return out

    return Learner(fit, f"memorize(default={default})")


def oracle_learners(family: AdversarialFamily) -> list[Learner]:
    """One learner per target that ignores the sample and outputs that target."""
    return [Learner(lambda S, t=family.target(i): t, f"oracle:{i}") for i in range(len(family))]


def exact_expected_risk(
    A: Learner, D: DiscreteDistribution, m: int, L: LossMatrix, budget: int = DEFAULT_BUDGET
) -> Fraction:
    """``E_{S ~ D^m} L_D(A(S))`` by enumerating every ordered sample."""
    n = len(D.atoms)
    if n ** m > budget:
        raise EnumerationBudgetExceeded(f"{n}^{m} samples exceed budget {budget}")
    pairs = [(x, y) for x, y, _ in D.atoms]
    probs = [p for *_, p in D.atoms]
    risk_cache: dict[tuple, Fraction] = {}
    total = Fraction(0)
    for seq in product(range(n), repeat=m):
        S = Sample(tuple(pairs[j] for j in seq))
        pred = A(S)
        key = tuple(sorted(pred.items()))
        if key not in risk_cache:
            risk_cache[key] = predictor_risk(D, pred, L)
        prob = Fraction(1)
        for j in seq:
            prob *= probs[j]
        total += prob * risk_cache[key]
    return total


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    trials: int


def monte_carlo_expected_risk(
    A: Learner, D: DiscreteDistribution, m: int, L: LossMatrix, trials: int, seed
) -> MCEstimate:
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    pairs = [(x, y) for x, y, _ in D.atoms]
    p = np.array([float(a[2]) for a in D.atoms])
    draws = rng.choice(len(pairs), size=(trials, m), p=p / p.sum())
    cache: dict[tuple, float] = {}
    risks = np.empty(trials)
    for t, seq in enumerate(map(tuple, draws)):
        if seq not in cache:
            cache[seq] = float(predictor_risk(D, A(Sample(tuple(pairs[j] for j in seq))), L))
        risks[t] = cache[seq]
    stderr = float(risks.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return MCEstimate(float(risks.mean()), stderr, trials)


@dataclass(frozen=True)
class NFLReport:
    learner: str
    mode: str
    risks: tuple
    stderrs: tuple | None
    max_risk: Fraction | float
    argmax: int
    bound: Fraction
    passed: bool

    def to_json(self) -> dict:
        def fmt(v):
            return str(v) if isinstance(v, Fraction) else v

        out = {
            "learner": self.learner,
            "mode": self.mode,
            "risks": [fmt(r) for r in self.risks],
            "max_risk": fmt(self.max_risk),
            "max_risk_float": float(self.max_risk),
            "argmax": self.argmax,
            "bound": str(self.bound),
            "bound_float": float(self.bound),
            "pass": self.passed,
        }
        if self.stderrs is not None:
            out["stderrs"] = list(self.stderrs)
        return out


def nfl_check(
    A: Learner | Sequence[Learner],
    family: AdversarialFamily,
    mode: str = "exact",
    budget: int = DEFAULT_BUDGET,
    trials: int = 10_000,
    seed: int = 0,
) -> NFLReport:
    """Worst expected risk of ``A`` over the family against ``1/(2k)``.

    ``A`` may be a sequence with one learner per target; that is how the
    oracle baseline gets its side channel.
    """
    learners = list(A) if isinstance(A, Sequence) else [A] * len(family)
    if len(learners) != len(family):
        raise NFLError(f"{len(learners)} learners for {len(family)} targets")
    if mode == "exact":
        risks = tuple(
            exact_expected_risk(a, D, family.m, family.loss, budget)
            for a, D in zip(learners, family.distributions)
        )
        stderrs = None
    elif mode == "mc":
        seeds = np.random.SeedSequence(seed).spawn(len(family))
        ests = [
            monte_carlo_expected_risk(a, D, family.m, family.loss, trials, s)
            for a, D, s in zip(learners, family.distributions, seeds)
        ]
        risks = tuple(e.mean for e in ests)
        stderrs = tuple(e.stderr for e in ests)
    else:
        raise NFLError(f"unknown mode {mode!r}")
    i = max(range(len(risks)), key=lambda j: (risks[j], -j))
    desc = learners[0].description if isinstance(A, Learner) else "per-target learners"
    return NFLReport(desc, mode, risks, stderrs, risks[i], i, family.bound, risks[i] >= family.bound)
