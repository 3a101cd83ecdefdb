"""Exact Natarajan and generalized Natarajan dimension by shattering search.

Candidate sets are scanned by increasing size in ``itertools.combinations``
order.  Because every nonempty subset of a shattered set is shattered, the
scan stops at the first size with no shattered set.

For a fixed candidate set ``S`` the behaviour of each hypothesis on ``S`` is
packed into one radix-``K`` integer, so the ``2^|S|`` mixed patterns required
by a witness pair are checked by hash lookups.  Mixed codes are built by a
subset DP: each mask differs from ``mask & (mask - 1)`` in one digit.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice, repeat
from typing import Iterable, NamedTuple, Sequence

from .hypothesis import HypothesisClass, LabelCountMismatch, project_class, projection_origins
from .losscore import InternalInconsistency, LossMatrix, quotient


class ShatterError(ValueError):
    pass


class EmptySet(ShatterError):
    pass


class PointOutOfRange(ShatterError, IndexError):
    pass


@dataclass(frozen=True)
class ShatteringWitness:
    """A shattered set with its witness pair and selector rows.

    ``selectors[mask]`` is a row agreeing with ``h1`` on the points whose bit
    is set in ``mask`` (bit ``j`` stands for ``points[j]``) and with ``h2`` on
    the rest.
    """

    points: tuple[int, ...]
    h1: int
    h2: int
    selectors: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"points": list(self.points), "h1": self.h1, "h2": self.h2, "selectors": list(self.selectors)}

    @classmethod
    def from_json(cls, obj: dict) -> "ShatteringWitness":
        return cls(tuple(obj["points"]), int(obj["h1"]), int(obj["h2"]), tuple(obj["selectors"]))


class DimensionResult(NamedTuple):
    dimension: int
    witness: ShatteringWitness | None

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "witness": self.witness.to_json() if self.witness else None}


@dataclass(frozen=True)
class _Search:
    """Hypotheses mapped to dense key ids, plus the condition-1 predicate.

    ``ids[r][x]`` is the key of ``h_r(x)``; equal keys mean "equal" in the
    shattering sense.  ``differ[a][b]`` says whether keys ``a`` and ``b``
    satisfy condition 1.
    """

    ids: tuple[tuple[int, ...], ...]
    radix: int
    differ: tuple[tuple[bool, ...], ...]

    @property
    def domain_size(self) -> int:
        return len(self.ids[0])

    def max_size(self) -> int:
        distinct = len(set(self.ids))
        return min(self.domain_size, distinct.bit_length() - 1)

    def shatters(self, points: Sequence[int]) -> ShatteringWitness | None:
        d = len(points)
        K = self.radix
        weights = [K ** j for j in range(d)]
        first_row: dict[int, int] = {}
        digits: dict[int, tuple[int, ...]] = {}
        for r, row in enumerate(self.ids):
            ds = tuple(row[p] for p in points)
            code = sum(v * w for v, w in zip(ds, weights))
            if code not in first_row:
                first_row[code] = r
                digits[code] = ds
        full = 1 << d
        if len(first_row) < full:
            return None
        reps = list(first_row)  # insertion order == ascending first row
        differ = self.differ
        mix = [0] * full
        for i, ca in enumerate(reps):
            da = digits[ca]
            for cb in reps[i + 1:]:
                db = digits[cb]
                if not all(differ[a][b] for a, b in zip(da, db)):
                    continue
                deltas = [(a - b) * w for a, b, w in zip(da, db, weights)]
                mix[0] = cb
                ok = cb in first_row
                for mask in range(1, full):
                    low = (mask & -mask).bit_length() - 1
                    code = mix[mask & (mask - 1)] + deltas[low]
                    if code not in first_row:
                        ok = False
                        break
                    mix[mask] = code
                if ok:
                    return ShatteringWitness(
                        tuple(points), first_row[ca], first_row[cb], tuple(first_row[c] for c in mix)
                    )
        return None


def _scan(search: _Search, candidates: Sequence[tuple[int, ...]]) -> ShatteringWitness | None:
    for S in candidates:
        w = search.shatters(S)
        if w is not None:
            return w
    return None


def _chunks(it: Iterable, size: int):
    it = iter(it)
    while chunk := list(islice(it, size)):
        yield chunk


def _first_of_size(search: _Search, d: int, workers: int, chunk_size: int) -> ShatteringWitness | None:
    candidates = combinations(range(search.domain_size), d)
    if workers <= 1:
        return _scan(search, candidates)
    # Results are taken in chunk order, so the answer does not depend on the split.
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for w in pool.map(_scan, repeat(search), _chunks(candidates, chunk_size)):
            if w is not None:
                return w
    return None


def _dimension(search: _Search, workers: int = 1, chunk_size: int = 256) -> DimensionResult:
    best = None
    for d in range(1, search.max_size() + 1):
        w = _first_of_size(search, d, workers, chunk_size)
        if w is None:
            break
        best = w
    return DimensionResult(best.size if best else 0, best)


def _natarajan_search(H: HypothesisClass) -> _Search:
    k = H.k
    return _Search(H.table, k, tuple(tuple(a != b for b in range(k)) for a in range(k)))


def _sigma_search(H: HypothesisClass, L: LossMatrix, loss_variant: bool = False) -> _Search:
    if H.k != L.k:
        raise LabelCountMismatch(f"hypothesis class has k={H.k}, loss has k={L.k}")
    key_of_mask: dict[int, int] = {}
    rep_label: list[int] = []
    for y, m in enumerate(L.masks):
        if m not in key_of_mask:
            key_of_mask[m] = len(rep_label)
            rep_label.append(y)
    key = [key_of_mask[m] for m in L.masks]
    K = len(rep_label)
    if loss_variant:
        differ = tuple(tuple(L(rep_label[a], rep_label[b]) == 1 for b in range(K)) for a in range(K))
    else:
        differ = tuple(tuple(a != b for b in range(K)) for a in range(K))
    return _Search(tuple(tuple(key[y] for y in row) for row in H.table), K, differ)


def _check_points(H: HypothesisClass, S: Iterable[int]) -> tuple[int, ...]:
    pts = tuple(sorted(set(S)))
    if not pts:
        raise EmptySet("candidate set is empty")
    if pts[0] < 0 or pts[-1] >= H.domain_size:
        raise PointOutOfRange(f"points {pts} outside domain of size {H.domain_size}")
    return pts


def natarajan_shatters(H: HypothesisClass, S: Iterable[int]) -> ShatteringWitness | None:
    """Witness that ``H`` Natarajan-shatters ``S``, or ``None``."""
    return _natarajan_search(H).shatters(_check_points(H, S))


def natarajan_dim(H: HypothesisClass, workers: int = 1) -> DimensionResult:
    return _dimension(_natarajan_search(H), workers)


def gn_shatters(
    H: HypothesisClass, L: LossMatrix, S: Iterable[int], loss_variant: bool = False
) -> ShatteringWitness | None:
    """Generalized shattering: labels compared by sigma-set equality.

    ``loss_variant`` replaces condition 1 by ``loss(h1(s), h2(s)) == 1``.
    It is experimental.
    """
    pts = _check_points(H, S)
    return _sigma_search(H, L, loss_variant).shatters(pts)


def _lift_witness(w: ShatteringWitness | None, origins: Sequence[int]) -> ShatteringWitness | None:
    if w is None:
        return None
    return ShatteringWitness(w.points, origins[w.h1], origins[w.h2], tuple(origins[s] for s in w.selectors))


def gn_dim(
    H: HypothesisClass,
    L: LossMatrix,
    direct: bool = False,
    cross_check: bool = False,
    loss_variant: bool = False,
    workers: int = 1,
) -> DimensionResult:
    """Generalized Natarajan dimension of ``(H, L)``.

    By default the labels are quotiented first and the ordinary Natarajan
    dimension of the projected class is returned, with witness rows mapped
    back to ``H``.  ``direct`` searches with sigma-set comparisons on ``H``
    itself.  ``cross_check`` runs both and raises on disagreement.
    """
    if H.k != L.k:
        raise LabelCountMismatch(f"hypothesis class has k={H.k}, loss has k={L.k}")
    if loss_variant:
        return _dimension(_sigma_search(H, L, True), workers)
    via_quotient = None
    if not direct or cross_check:
        q = quotient(L)
        Hc = project_class(H, q)
        res = natarajan_dim(Hc, workers)
        via_quotient = DimensionResult(res.dimension, _lift_witness(res.witness, projection_origins(H, q)))
    if not direct and not cross_check:
        return via_quotient
    res = _dimension(_sigma_search(H, L), workers)
    if via_quotient is not None and via_quotient.dimension != res.dimension:
        raise InternalInconsistency(
            f"direct search gives {res.dimension}, quotient path gives {via_quotient.dimension}"
        )
    return res


def find_shattered(H: HypothesisClass, size: int, L: LossMatrix | None = None) -> ShatteringWitness | None:
    """First set of exactly ``size`` points that is (generalized-)shattered."""
    search = _natarajan_search(H) if L is None else _sigma_search(H, L)
    if size < 1 or size > search.domain_size:
        return None
    return _scan(search, combinations(range(search.domain_size), size))


def verify_witness(
    H: HypothesisClass, w: ShatteringWitness, L: LossMatrix | None = None, loss_variant: bool = False
) -> bool:
    """Re-check both shattering conditions straight from the definitions.

    With ``L`` given, "equal" means equal sigma-sets as Python sets.
    """
    n_rows = len(H)
    rows = [w.h1, w.h2, *w.selectors]
    if any(not 0 <= r < n_rows for r in rows) or len(w.selectors) != 1 << w.size:
        return False
    if not w.points or any(not 0 <= p < H.domain_size for p in w.points):
        return False
    if L is None:
        def same(a, b):
            return a == b
    else:
        sig = [frozenset(j for j in range(L.k) if L.entries[y][j] == 0) for y in range(L.k)]

        def same(a, b):
            return sig[a] == sig[b]

    f1, f2 = H.table[w.h1], H.table[w.h2]
    for s in w.points:
        if loss_variant and L is not None:
            if L(f1[s], f2[s]) != 1:
                return False
        elif same(f1[s], f2[s]):
            return False
    for mask, r in enumerate(w.selectors):
        h = H.table[r]
        for j, s in enumerate(w.points):
            target = f1[s] if mask >> j & 1 else f2[s]
            if not same(h[s], target):
                return False
    return True
