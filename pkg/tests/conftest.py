from itertools import combinations

import pytest

# Set-learning loss over
# {1},{2},{3},{1,2},{1,3},{2,3},{1,2,3}, written out by hand.
SET3_TABLE = (
    (0, 1, 1, 0, 0, 1, 0),
    (1, 0, 1, 0, 1, 0, 0),
    (1, 1, 0, 1, 0, 0, 0),
    (0, 0, 1, 0, 1, 1, 1),
    (0, 1, 0, 1, 0, 1, 1),
    (1, 0, 0, 1, 1, 0, 1),
    (0, 0, 0, 1, 1, 1, 0),
)


def identity(k):
    return tuple(tuple(int(i != j) for j in range(k)) for i in range(k))


def brute_shatters(table, S, same):
    """Shattering straight from the definition: every ordered pair, every S'."""
    for f1 in table:
        for f2 in table:
            if any(same(f1[s], f2[s]) for s in S):
                continue
            ok = True
            for r in range(len(S) + 1):
                for sub in combinations(S, r):
                    if not any(
                        all(same(h[s], f1[s]) if s in sub else same(h[s], f2[s]) for s in S)
                        for h in table
                    ):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return True
    return False


def brute_dim(table, n, same):
    """Largest shattered set, checking every size (no pruning)."""
    best = 0
    for d in range(1, n + 1):
        if any(brute_shatters(table, S, same) for S in combinations(range(n), d)):
            best = d
    return best


def sigma_same(matrix):
    sig = [frozenset(j for j, v in enumerate(row) if v == 0) for row in matrix]
    return lambda a, b: sig[a] == sig[b]


@pytest.fixture
def set3_table():
    return SET3_TABLE
