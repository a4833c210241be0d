"""Seeded generators of random characteristic matrices with known structure."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import CharMatrix
from .planner import column_rank


def _random_distribution(rng: random.Random, T: int, high: int = 20) -> list[Fraction]:
    w = [rng.randint(1, high) for _ in range(T)]
    total = sum(w)
    return [Fraction(x, total) for x in w]


def _from_columns(cols) -> CharMatrix:
    T = len(cols[0])
    return CharMatrix(tuple(tuple(c[t] for c in cols) for t in range(T)))


def random_full_rank(rng: random.Random, K: int, T: int) -> CharMatrix:
    """Column-stochastic matrix with rank K (requires T >= K)."""
    if T < K:
        raise ValueError("full column rank needs T >= K")
    while True:
        H = _from_columns([_random_distribution(rng, T) for _ in range(K)])
        if column_rank(H) == K:
            return H


def planted_groups(rng: random.Random, K: int, T: int) -> CharMatrix:
    """Columns repeated in groups; group sizes are drawn at random, order shuffled."""
    sizes = []
    left = K
    while left:
        s = rng.randint(1, left)
        sizes.append(s)
        left -= s
    cols = []
    for s in sizes:
        c = _random_distribution(rng, T)
        cols.extend([c] * s)
    rng.shuffle(cols)
    return _from_columns(cols)


def planted_dependency(rng: random.Random, K: int, T: int) -> CharMatrix:
    """Blocks of distinct columns whose block averages all equal one distribution.

    Each block is a private query set by construction, so the matrix has
    linear dependencies without repeated columns.
    """
    target = _random_distribution(rng, T)
    low = min(target)
    sizes = []
    left = K
    while left:
        s = rng.randint(1, min(left, 4))
        sizes.append(s)
        left -= s
    a = 5
    cols = []
    for m in sizes:
        eps = low / (2 * a * m * T)
        deltas = []
        for _ in range(m - 1):
            d = [rng.randint(-a, a) for _ in range(T - 1)]
            d.append(-sum(d))
            deltas.append(d)
        deltas.append([-sum(d[t] for d in deltas) for t in range(T)])
        cols.extend([[target[t] + eps * d[t] for t in range(T)] for d in deltas])
    rng.shuffle(cols)
    return _from_columns(cols)


def audit_corpus(seed: int = 2024, per_kind: int = 50, max_K: int = 8) -> list[tuple[str, CharMatrix]]:
    """Mixed corpus: planted groups, planted dependencies and random full rank."""
    rng = random.Random(seed)
    out = []
    for i in range(per_kind):
        K = rng.randint(1, max_K)
        out.append(("groups", planted_groups(rng, K, rng.randint(1, 4))))
    for i in range(per_kind):
        K = rng.randint(2, max_K)
        out.append(("dependency", planted_dependency(rng, K, rng.randint(2, 4))))
    for i in range(per_kind):
        K = rng.randint(1, max_K)
        out.append(("full_rank", random_full_rank(rng, K, rng.randint(K, K + 3))))
    return out
