"""Forgiving 0-1 loss functions on a finite label set.

A loss is a symmetric ``k x k`` table with entries in {0, 1} and a zero
diagonal.  Each label ``y`` has a sigma-set, the labels it incurs zero loss
against, stored as a ``k``-bit mask so equality and subset tests are single
integer operations.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .hypothesis import HypothesisClass


class LossError(ValueError):
    """Base class for malformed loss tables."""


class LabelOutOfRange(LossError, IndexError):
    pass


class BaseTooSmall(LossError):
    pass


class InternalInconsistency(RuntimeError):
    """An invariant guaranteed by construction was violated."""


@dataclass(frozen=True)
class Violation:
    """One failed assumption, e.g. ``Asymmetric(0, 1)``."""

    kind: str
    indices: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}({', '.join(map(str, self.indices))})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [{"kind": v.kind, "indices": list(v.indices)} for v in self.violations],
            "notes": list(self.notes),
        }


class InvalidLoss(LossError):
    """Raised with the full :class:`ValidationReport` attached."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("invalid loss: " + ", ".join(map(str, report.violations)))


def _structural_violations(table) -> list[Violation]:
    """Assumptions 1, 2 and 4 plus shape.  Every violation is listed."""
    try:
        rows = [list(r) for r in table]
    except TypeError:
        return [Violation("NonSquare")]
    k = len(rows)
    if k == 0 or any(len(r) != k for r in rows):
        return [Violation("NonSquare")]
    out = []
    for i in range(k):
        for j in range(k):
            v = rows[i][j]
            if isinstance(v, bool) or v not in (0, 1):
                out.append(Violation("NonBinaryEntry", (i, j)))
    for i, j in combinations(range(k), 2):
        if rows[i][j] != rows[j][i]:
            out.append(Violation("Asymmetric", (i, j)))
    for i in range(k):
        if rows[i][i] != 0:
            out.append(Violation("NonzeroDiagonal", (i,)))
    return out


def _masks(entries: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(
        sum(1 << j for j, v in enumerate(row) if v == 0) for row in entries
    )


def _is_strict_subset(a: int, b: int) -> bool:
    return a != b and a & b == a


@dataclass(frozen=True)
class LossMatrix:
    """Binary symmetric loss with zero diagonal.

    Construction enforces assumptions 1, 2 and 4.  The no-strict-subset
    condition (assumption 3) is only guaranteed for matrices returned by
    :func:`validate_loss`; check :attr:`satisfies_no_strict_subset` otherwise.
    """

    entries: tuple[tuple[int, ...], ...]
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        violations = _structural_violations(self.entries)
        if violations:
            raise InvalidLoss(ValidationReport(tuple(violations)))
        object.__setattr__(self, "entries", tuple(tuple(int(v) for v in r) for r in self.entries))
        if self.label_names is not None:
            names = tuple(str(n) for n in self.label_names)
            if len(names) != len(self.entries):
                raise LossError(f"{len(names)} label names for {len(self.entries)} labels")
            object.__setattr__(self, "label_names", names)

    @property
    def k(self) -> int:
        return len(self.entries)

    def __call__(self, y1: int, y2: int) -> int:
        return self.entries[y1][y2]

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Sigma-set of every label as a bitmask (bit j set iff loss(y, j) == 0)."""
        return _masks(self.entries)

    @cached_property
    def strict_subset_pairs(self) -> tuple[tuple[int, int], ...]:
        m = self.masks
        return tuple(
            (i, j) for i in range(self.k) for j in range(self.k) if _is_strict_subset(m[i], m[j])
        )

    @property
    def satisfies_no_strict_subset(self) -> bool:
        return not self.strict_subset_pairs

    def name(self, y: int) -> str:
        return self.label_names[y] if self.label_names else str(y)

    def to_json(self) -> dict:
        out = {"k": self.k}
        if self.label_names is not None:
            out["labels"] = list(self.label_names)
        out["matrix"] = [list(r) for r in self.entries]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LossMatrix":
        return validate_loss(_table_from_json(obj), obj.get("labels"))

    @classmethod
    def identity(cls, k: int) -> "LossMatrix":
        """The ordinary 0-1 loss on ``k`` labels."""
        return cls(tuple(tuple(int(i != j) for j in range(k)) for i in range(k)))


def _table_from_json(obj: dict):
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise LossError("loss file needs a 'matrix' field")
    table = obj["matrix"]
    if "k" in obj and obj["k"] != len(table):
        raise LossError(f"declared k={obj['k']} but matrix has {len(table)} rows")
    return table


def check_loss(table) -> ValidationReport:
    """Check all four assumptions and report every violation found."""
    violations = _structural_violations(table)
    if any(v.kind == "NonSquare" for v in violations):
        return ValidationReport(tuple(violations))
    masks = _masks(table)
    k = len(masks)
    violations += [
        Violation("StrictSigmaSubset", (i, j))
        for i in range(k)
        for j in range(k)
        if _is_strict_subset(masks[i], masks[j])
    ]
    notes = []
    seen: dict[int, int] = {}
    for y, m in enumerate(masks):
        if m in seen:
            notes.append(f"labels {seen[m]} and {y} have equal sigma-sets and will be merged by the quotient")
        else:
            seen[m] = y
    return ValidationReport(tuple(violations), tuple(notes))


def validate_loss(table, label_names: Sequence[str] | None = None) -> LossMatrix:
    """Return a fully validated :class:`LossMatrix` or raise :class:`InvalidLoss`.

    The raised exception carries the :class:`ValidationReport` listing every
    violated assumption with its offending indices.
    """
    report = check_loss(table)
    if not report.valid:
        raise InvalidLoss(report)
    return LossMatrix(tuple(tuple(r) for r in table), tuple(label_names) if label_names else None)


@dataclass(frozen=True)
class SigmaSet:
    label: int
    mask: int

    @property
    def members(self) -> frozenset[int]:
        return frozenset(j for j in range(self.mask.bit_length()) if self.mask >> j & 1)

    def __contains__(self, y: int) -> bool:
        return bool(self.mask >> y & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()


def _check_label(L: LossMatrix, y: int) -> None:
    if not 0 <= y < L.k:
        raise LabelOutOfRange(f"label {y} outside [0, {L.k})")


def sigma(L: LossMatrix, y: int) -> SigmaSet:
    _check_label(L, y)
    return SigmaSet(y, L.masks[y])


@dataclass(frozen=True)
class EqualitySet:
    """All ordered label pairs with zero loss."""

    k: int
    pairs: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def to_loss(self) -> LossMatrix:
        return LossMatrix(
            tuple(tuple(int((i, j) not in self.pairs) for j in range(self.k)) for i in range(self.k))
        )


def equality_set(L: LossMatrix) -> EqualitySet:
    return EqualitySet(
        L.k, frozenset((i, j) for i in range(L.k) for j in range(L.k) if L.entries[i][j] == 0)
    )


def loss_from_sigmas(sigmas: Sequence[SigmaSet]) -> LossMatrix:
    k = len(sigmas)
    by_label = {s.label: s for s in sigmas}
    if set(by_label) != set(range(k)):
        raise LossError("need exactly one sigma-set per label 0..k-1")
    return LossMatrix(tuple(tuple(int(j not in by_label[i]) for j in range(k)) for i in range(k)))


@dataclass(frozen=True)
class QuotientMap:
    """Partition of labels by sigma-set equality and the induced loss."""

    class_of: tuple[int, ...]
    representative: tuple[int, ...]
    quotient_loss: LossMatrix
    classes: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    @property
    def num_classes(self) -> int:
        return len(self.representative)

    @property
    def source_k(self) -> int:
        return len(self.class_of)

    def is_identity(self) -> bool:
        return self.num_classes == self.source_k

    def to_json(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "representatives": list(self.representative),
            "quotient_matrix": [list(r) for r in self.quotient_loss.entries],
        }


def quotient(L: LossMatrix) -> QuotientMap:
    """Merge labels with identical sigma-sets.

    Classes are numbered in order of their smallest member, which is also the
    class representative.
    """
    class_by_mask: dict[int, int] = {}
    class_of = []
    members: list[list[int]] = []
    for y, m in enumerate(L.masks):
        if m not in class_by_mask:
            class_by_mask[m] = len(members)
            members.append([])
        c = class_by_mask[m]
        class_of.append(c)
        members[c].append(y)
    reps = tuple(ms[0] for ms in members)
    qloss = LossMatrix(
        tuple(tuple(L.entries[a][b] for b in reps) for a in reps),
        tuple(L.name(r) for r in reps) if L.label_names else None,
    )
    for y1 in range(L.k):
        for y2 in range(L.k):
            if qloss.entries[class_of[y1]][class_of[y2]] != L.entries[y1][y2]:
                raise InternalInconsistency(
                    f"loss does not respect sigma-equivalence at ({y1}, {y2}); "
                    "was the matrix validated?"
                )
    return QuotientMap(tuple(class_of), reps, qloss, tuple(tuple(ms) for ms in members))


def project_labels(q: QuotientMap, ys: Iterable[int]) -> list[int]:
    out = []
    for y in ys:
        if not 0 <= y < q.source_k:
            raise LabelOutOfRange(f"label {y} outside [0, {q.source_k})")
        out.append(q.class_of[y])
    return out


def subset_labels(n: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of {1..n}, by cardinality then lexicographically."""
    return [c for r in range(1, n + 1) for c in combinations(range(1, n + 1), r)]


def _set_name(s: tuple[int, ...]) -> str:
    return "{" + ",".join(map(str, s)) + "}"


def set_learning_loss(n: int) -> LossMatrix:
    """Loss for set-valued feedback over the nonempty subsets of {1..n}.

    Two subsets incur zero loss iff they are equal or one of them is a
    singleton contained in the other.  For ``n >= 3`` the result passes
    :func:`validate_loss`.  For ``n == 2`` it does not: the sigma-set of each
    singleton is strictly contained in that of ``{1,2}``.
    """
    if n < 2:
        raise BaseTooSmall(f"need n >= 2 base labels, got {n}")
    labels = subset_labels(n)

    def zero(a, b):
        return a == b or (len(a) == 1 and set(a) <= set(b)) or (len(b) == 1 and set(b) <= set(a))

    entries = tuple(tuple(0 if zero(a, b) else 1 for b in labels) for a in labels)
    return LossMatrix(entries, tuple(_set_name(s) for s in labels))


def normalize_subset_violations(
    table, H: "HypothesisClass"
) -> tuple[LossMatrix, "HypothesisClass"]:
    """Remove dominated labels until no sigma-set strictly contains another.

    While some ``sigma(a)`` is a strict subset of ``sigma(b)`` among the
    surviving labels, every prediction of ``a`` in ``H`` is replaced by ``b``
    and ``a`` is dropped.  The smallest dominated label goes first, replaced by
    its smallest dominator.  Surviving labels are renumbered in ascending
    order; label names, when present, follow them.
    """
    from .hypothesis import HypothesisClass

    L = table if isinstance(table, LossMatrix) else LossMatrix(tuple(tuple(r) for r in table))
    if H.k != L.k:
        raise LossError(f"hypothesis class has k={H.k}, loss has k={L.k}")
    alive = list(range(L.k))
    replaced: dict[int, int] = {}
    while True:
        sub = [[L.entries[a][b] for b in alive] for a in alive]
        m = _masks(sub)
        hit = next(
            ((i, j) for i in range(len(alive)) for j in range(len(alive)) if _is_strict_subset(m[i], m[j])),
            None,
        )
        if hit is None:
            break
        a, b = alive[hit[0]], alive[hit[1]]
        replaced[a] = b
        alive.remove(a)

    def resolve(y: int) -> int:
        while y in replaced:
            y = replaced[y]
        return y

    if not replaced:
        return L, H
    new_id = {y: i for i, y in enumerate(alive)}
    names = tuple(L.label_names[y] for y in alive) if L.label_names else None
    out_loss = validate_loss([[L.entries[a][b] for b in alive] for a in alive], names)
    out_h = HypothesisClass(
        H.domain_size, len(alive), tuple(tuple(new_id[resolve(y)] for y in row) for row in H.table)
    )
    return out_loss, out_h


def random_loss(rng: random.Random | int, k: int, num_classes: int | None = None, zero_prob: float = 0.3) -> LossMatrix:
    """Random validated loss on ``k`` labels with ``num_classes`` sigma-classes.

    A valid base loss on ``num_classes`` labels is drawn by rejection, then
    each of the ``k`` labels is assigned to a base class (every class used at
    least once).  Labels sharing a class get identical sigma-sets.
    """
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    c = k if num_classes is None else num_classes
    if not 1 <= c <= k:
        raise LossError(f"num_classes must be in [1, {k}]")
    while True:
        base = [[0] * c for _ in range(c)]
        for i, j in combinations(range(c), 2):
            base[i][j] = base[j][i] = 0 if rng.random() < zero_prob else 1
        if check_loss(base).valid and len(set(_masks(base))) == c:
            break
    assign = list(range(c)) + [rng.randrange(c) for _ in range(k - c)]
    rng.shuffle(assign)
    return validate_loss([[base[assign[i]][assign[j]] for j in range(k)] for i in range(k)])


def load_loss(path: str) -> LossMatrix:
    with open(path) as fh:
        return LossMatrix.from_json(json.load(fh))
