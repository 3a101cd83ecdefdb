"""Exact discrete distributions, risks, pushforwards and ERM.

Probabilities are :class:`fractions.Fraction` everywhere an identity is meant
to hold exactly.  Floats appear only in the Monte Carlo summaries of
:func:`uc_experiment`.
"""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hypothesis import HypothesisClass, LabelCountMismatch
from .losscore import LossMatrix, QuotientMap


class DistributionError(ValueError):
    pass


class EmptySample(ValueError):
    pass


class IndexOutOfRange(ValueError, IndexError):
    pass


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely many ``(x, y)`` atoms with exact positive masses summing to 1.

    ``padding_allowed`` marks distributions produced by :func:`pushforward`,
    whose labels may include the sentinel one past the last real label.
    """

    atoms: tuple[tuple[int, int, Fraction], ...]
    padding_allowed: bool = False

    def __post_init__(self):
        atoms = tuple((int(x), int(y), Fraction(p)) for x, y, p in self.atoms)
        keys = [(x, y) for x, y, _ in atoms]
        if len(set(keys)) != len(keys):
            raise DistributionError("atoms must be keyed uniquely by (x, y)")
        if any(p <= 0 for *_, p in atoms):
            raise DistributionError("atom masses must be positive")
        if sum(p for *_, p in atoms) != 1:
            raise DistributionError("atom masses must sum to exactly 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_masses(cls, masses: Mapping[tuple[int, int], Fraction] | Iterable, padding_allowed: bool = False):
        """Build from ``(x, y) -> mass`` or ``(x, y, mass)`` triples, adding repeats
        and dropping zero masses.  Atoms are sorted by ``(x, y)``."""
        acc: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
        items = masses.items() if isinstance(masses, Mapping) else (((x, y), p) for x, y, p in masses)
        for (x, y), p in items:
            acc[(x, y)] += Fraction(p)
        return cls(tuple((x, y, p) for (x, y), p in sorted(acc.items()) if p != 0), padding_allowed)

    @classmethod
    def uniform(cls, pairs: Sequence[tuple[int, int]]) -> "DiscreteDistribution":
        return cls.from_masses({(x, y): Fraction(1, len(pairs)) for x, y in pairs})

    def quotient(self, q: QuotientMap) -> "DiscreteDistribution":
        """The image of this distribution under the label projection."""
        return DiscreteDistribution.from_masses((x, q.class_of[y], p) for x, y, p in self.atoms)

    def max_label(self) -> int:
        return max(y for _, y, _ in self.atoms)

    def to_json(self) -> dict:
        return {
            "atoms": [
                {"x": x, "y": y, "num": p.numerator, "den": p.denominator} for x, y, p in self.atoms
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteDistribution":
        try:
            return cls(tuple((a["x"], a["y"], Fraction(a["num"], a["den"])) for a in obj["atoms"]))
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise DistributionError(f"malformed distribution file: {exc}") from exc


@dataclass(frozen=True)
class Sample:
    pairs: tuple[tuple[int, int], ...]
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "seed": self.seed}

    @classmethod
    def from_json(cls, obj: dict) -> "Sample":
        try:
            return cls(tuple((int(x), int(y)) for x, y in obj["pairs"]), obj.get("seed"))
        except (KeyError, TypeError, ValueError) as exc:
            raise DistributionError(f"malformed sample file: {exc}") from exc


@dataclass(frozen=True)
class SigmaIndexing:
    """Ascending enumeration of each sigma-set, padded with a sentinel label."""

    order: tuple[tuple[int, ...], ...]
    sentinel: int

    @classmethod
    def from_loss(cls, L: LossMatrix) -> "SigmaIndexing":
        return cls(
            tuple(tuple(j for j in range(L.k) if L.entries[y][j] == 0) for y in range(L.k)), L.k
        )

    def __call__(self, i: int, y: int) -> int:
        """The ``i``-th (1-based) element of ``sigma(y)``, or the sentinel."""
        if y == self.sentinel:
            return y
        members = self.order[y]
        return members[i - 1] if i <= len(members) else self.sentinel


def _check_compat(H: HypothesisClass, L: LossMatrix) -> None:
    if H.k != L.k:
        raise LabelCountMismatch(f"hypothesis class has k={H.k}, loss has k={L.k}")


def _check_labels(D: DiscreteDistribution, L: LossMatrix) -> None:
    if D.max_label() >= L.k or min(y for _, y, _ in D.atoms) < 0:
        raise LabelCountMismatch(f"distribution uses labels outside [0, {L.k})")


def predictor_risk(D: DiscreteDistribution, predict: Sequence[int] | Mapping[int, int], L: LossMatrix) -> Fraction:
    """Expected loss of the function ``x -> predict[x]`` under ``D``."""
    _check_labels(D, L)
    return sum((p for x, y, p in D.atoms if L.entries[predict[x]][y]), Fraction(0))


def true_risk(D: DiscreteDistribution, H: HypothesisClass, h: int, L: LossMatrix) -> Fraction:
    _check_compat(H, L)
    return predictor_risk(D, H.table[h], L)


def zero_one_risk(D: DiscreteDistribution, H: HypothesisClass, h: int) -> Fraction:
    """Probability that ``h(x) != y``; sentinel labels always count as errors."""
    f = H.table[h]
    return sum((p for x, y, p in D.atoms if f[x] != y), Fraction(0))


def empirical_risk(S: Sample, H: HypothesisClass, h: int, L: LossMatrix) -> Fraction:
    if not S.pairs:
        raise EmptySample("empirical risk of an empty sample")
    _check_compat(H, L)
    f = H.table[h]
    return Fraction(sum(L.entries[f[x]][y] for x, y in S.pairs), len(S.pairs))


def empirical_zero_one_risk(S: Sample, H: HypothesisClass, h: int) -> Fraction:
    if not S.pairs:
        raise EmptySample("empirical risk of an empty sample")
    f = H.table[h]
    return Fraction(sum(f[x] != y for x, y in S.pairs), len(S.pairs))


def erm(H: HypothesisClass, S: Sample, L: LossMatrix) -> int:
    """Row minimising empirical risk; the lowest row index wins ties."""
    if not S.pairs:
        raise EmptySample("ERM needs at least one example")
    _check_compat(H, L)
    loss = L.entries
    best, best_row = None, 0
    for r, f in enumerate(H.table):
        misses = sum(loss[f[x]][y] for x, y in S.pairs)
        if best is None or misses < best:
            best, best_row = misses, r
            if misses == 0:
                break
    return best_row


def pushforward(D: DiscreteDistribution, i: int, L: LossMatrix) -> DiscreteDistribution:
    """Relabel every atom ``(x, y)`` as ``(x, sigma_i(y))``."""
    if not 1 <= i <= L.k:
        raise IndexOutOfRange(f"index {i} outside [1, {L.k}]")
    idx = SigmaIndexing.from_loss(L)
    return DiscreteDistribution.from_masses(((x, idx(i, y), p) for x, y, p in D.atoms), padding_allowed=True)


def pushforward_sample(S: Sample, i: int, L: LossMatrix) -> Sample:
    if not 1 <= i <= L.k:
        raise IndexOutOfRange(f"index {i} outside [1, {L.k}]")
    idx = SigmaIndexing.from_loss(L)
    return Sample(tuple((x, idx(i, y)) for x, y in S.pairs), S.seed)


def sample(D: DiscreteDistribution, m: int, seed) -> Sample:
    """``m`` i.i.d. draws from ``D``."""
    if m < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    p = np.array([float(a[2]) for a in D.atoms])
    idx = rng.choice(len(D.atoms), size=m, p=p / p.sum())
    return Sample(tuple((D.atoms[j][0], D.atoms[j][1]) for j in idx), seed if isinstance(seed, int) else None)


def loss_table(D: DiscreteDistribution, H: HypothesisClass, L: LossMatrix) -> np.ndarray:
    """``out[h, a]`` = loss of hypothesis ``h`` on atom ``a``."""
    _check_compat(H, L)
    loss = np.asarray(L.entries, dtype=np.int8)
    table = np.asarray(H.table)
    xs = np.array([a[0] for a in D.atoms])
    ys = np.array([a[1] for a in D.atoms])
    return loss[table[:, xs], ys[None, :]]


@dataclass(frozen=True)
class UCRow:
    m: int
    mean: float
    median: float
    quantile: float
    stderr: float
    exceed_rate: float | None


@dataclass(frozen=True)
class UCReport:
    rows: tuple[UCRow, ...]
    trials: int
    seed: int
    delta: float
    epsilon: float | None
    monotone: bool

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "monotone": self.monotone,
            "rows": [asdict(r) for r in self.rows],
        }


def sup_deviations(
    D: DiscreteDistribution, H: HypothesisClass, L: LossMatrix, m: int, trials: int, seed
) -> np.ndarray:
    """``sup_h |L_D(h) - L_S(h)|`` for ``trials`` independent samples of size ``m``.

    Trial ``t`` draws with its own generator spawned from ``seed``, so any
    subset of trials can be recomputed in isolation.
    """
    losses = loss_table(D, H, L).astype(float)
    p = np.array([float(a[2]) for a in D.atoms])
    p /= p.sum()
    true = np.array([float(true_risk(D, H, h, L)) for h in range(len(H))])
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(trials)
    counts = np.stack([np.random.default_rng(c).multinomial(m, p) for c in children])
    emp = counts @ losses.T / m
    return np.abs(emp - true[None, :]).max(axis=1)


def uc_experiment(
    H: HypothesisClass,
    L: LossMatrix,
    D: DiscreteDistribution,
    sizes: Sequence[int],
    trials: int,
    seed: int,
    delta: float = 0.05,
    epsilon: float | None = None,
) -> UCReport:
    """Monte Carlo picture of uniform convergence over sample sizes.

    For each ``m`` reports the mean, median and ``1 - delta`` quantile of the
    supremum deviation; with ``epsilon`` also the fraction of trials whose
    deviation exceeds it.  ``monotone`` is false if some mean rises by more
    than three combined standard errors from one size to the next.
    """
    if not sizes:
        raise ValueError("need at least one sample size")
    if trials < 1:
        raise ValueError("need at least one trial")
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    rows = []
    for m, ss in zip(sizes, seeds):
        dev = sup_deviations(D, H, L, m, trials, ss)
        rows.append(
            UCRow(
                m=int(m),
                mean=float(dev.mean()),
                median=float(np.median(dev)),
                quantile=float(np.quantile(dev, 1 - delta)),
                stderr=float(dev.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                exceed_rate=float((dev > epsilon).mean()) if epsilon is not None else None,
            )
        )
    monotone = all(
        b.mean <= a.mean + 3 * (a.stderr + b.stderr) for a, b in zip(rows, rows[1:])
    )
    return UCReport(tuple(rows), trials, seed, delta, epsilon, monotone)


def load_distribution(path: str) -> DiscreteDistribution:
    with open(path) as fh:
        return DiscreteDistribution.from_json(json.load(fh))


def random_distribution(rng, n: int, k: int, support: int | None = None, max_weight: int = 6) -> DiscreteDistribution:
    """Random exact distribution on ``support`` distinct ``(x, y)`` atoms."""
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    cells = [(x, y) for x in range(n) for y in range(k)]
    support = support or rng.randint(1, len(cells))
    chosen = rng.sample(cells, min(support, len(cells)))
    weights = [rng.randint(1, max_weight) for _ in chosen]
    total = sum(weights)
    return DiscreteDistribution.from_masses({c: Fraction(w, total) for c, w in zip(chosen, weights)})
