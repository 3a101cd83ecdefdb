"""Finite hypothesis classes stored as explicit lookup tables."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from itertools import product

from .losscore import QuotientMap


class HypothesisError(ValueError):
    pass


class LabelCountMismatch(HypothesisError):
    pass


class SizeTooLarge(HypothesisError):
    pass


class IndexOutOfRange(HypothesisError, IndexError):
    pass


@dataclass(frozen=True)
class HypothesisClass:
    """``|H| x domain_size`` table; row ``h`` is the function ``h``.

    Duplicate rows are merged on construction, keeping first occurrences in
    their original order.
    """

    domain_size: int
    k: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.domain_size < 1 or self.k < 1:
            raise HypothesisError("domain_size and k must be positive")
        rows = tuple(dict.fromkeys(tuple(int(v) for v in r) for r in self.table))
        if not rows:
            raise HypothesisError("a hypothesis class needs at least one function")
        for r in rows:
            if len(r) != self.domain_size:
                raise HypothesisError(f"row of length {len(r)} for domain of size {self.domain_size}")
            if any(not 0 <= v < self.k for v in r):
                raise HypothesisError(f"row {r} has labels outside [0, {self.k})")
        object.__setattr__(self, "table", rows)

    def __len__(self) -> int:
        return len(self.table)

    def to_json(self) -> dict:
        return {"domain_size": self.domain_size, "k": self.k, "hypotheses": [list(r) for r in self.table]}

    @classmethod
    def from_json(cls, obj: dict) -> "HypothesisClass":
        try:
            return cls(int(obj["domain_size"]), int(obj["k"]), tuple(tuple(r) for r in obj["hypotheses"]))
        except (KeyError, TypeError) as exc:
            raise HypothesisError(f"malformed hypothesis file: {exc}") from exc

    @classmethod
    def full(cls, domain_size: int, k: int) -> "HypothesisClass":
        """All ``k ** domain_size`` functions, in lexicographic order."""
        return cls(domain_size, k, tuple(product(range(k), repeat=domain_size)))

    @classmethod
    def constants(cls, domain_size: int, k: int) -> "HypothesisClass":
        return cls(domain_size, k, tuple((c,) * domain_size for c in range(k)))


def evaluate(H: HypothesisClass, h: int, x: int) -> int:
    if not 0 <= h < len(H) or not 0 <= x < H.domain_size:
        raise IndexOutOfRange(f"(h={h}, x={x}) outside {len(H)} x {H.domain_size}")
    return H.table[h][x]


def projection_origins(H: HypothesisClass, q: QuotientMap) -> list[int]:
    """For each row of ``project_class(H, q)``, the first row of ``H`` mapping to it."""
    if H.k != q.source_k:
        raise LabelCountMismatch(f"hypothesis class has k={H.k}, quotient expects {q.source_k}")
    seen: dict[tuple[int, ...], int] = {}
    for i, row in enumerate(H.table):
        seen.setdefault(tuple(q.class_of[y] for y in row), i)
    return list(seen.values())


def project_class(H: HypothesisClass, q: QuotientMap) -> HypothesisClass:
    """Compose every hypothesis with the label projection, merging duplicates."""
    if H.k != q.source_k:
        raise LabelCountMismatch(f"hypothesis class has k={H.k}, quotient expects {q.source_k}")
    return HypothesisClass(
        H.domain_size, q.num_classes, tuple(tuple(q.class_of[y] for y in row) for row in H.table)
    )


def random_class(seed, n: int, k: int, size: int) -> HypothesisClass:
    """``size`` distinct functions drawn uniformly from ``[k]^n``."""
    total = k ** n
    if size > total:
        raise SizeTooLarge(f"cannot draw {size} distinct functions from {total}")
    if size < 1:
        raise HypothesisError("size must be at least 1")
    rng = random.Random(seed)
    codes = rng.sample(range(total), size)

    def decode(c):
        digits = []
        for _ in range(n):
            c, d = divmod(c, k)
            digits.append(d)
        return tuple(digits)

    return HypothesisClass(n, k, tuple(decode(c) for c in codes))


def load_hypotheses(path: str) -> HypothesisClass:
    with open(path) as fh:
        return HypothesisClass.from_json(json.load(fh))
