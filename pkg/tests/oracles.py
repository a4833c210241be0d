"""Reference computations that share no code path with the package internals."""

from fractions import Fraction

import sympy

from lvpir.model import QuerySet, posterior_given_query, prior_s


def set_partitions(items):
    """All set partitions of ``items`` (Bell-number many)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def is_private_direct(H, members):
    q = QuerySet.of(H.K, members)
    return posterior_given_query(H, q) == prior_s(H)


def brute_force_es(H):
    """Minimum sum of squared block sizes over all partitions into private blocks."""
    cache = {}

    def ok(block):
        key = tuple(sorted(block))
        if key not in cache:
            cache[key] = is_private_direct(H, key)
        return cache[key]

    best = None
    for part in set_partitions(range(1, H.K + 1)):
        if all(ok(b) for b in part):
            v = sum(len(b) ** 2 for b in part)
            best = v if best is None else min(best, v)
    return best


def brute_force_catalog(H):
    K = H.K
    out = []
    for mask in range(1, 1 << K):
        members = [i + 1 for i in range(K) if mask >> i & 1]
        if is_private_direct(H, members):
            out.append(members)
    return sorted(out, key=lambda m: (len(m), m))


def sympy_rank(H):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row]
                         for row in H.entries]).rank()


class _Scripted:
    """RNG that replays a prefix of choices and records the branching factor."""

    def __init__(self, prefix):
        self.prefix = list(prefix)
        self.pos = 0
        self.branch = None

    def randbelow(self, n):
        if self.pos < len(self.prefix):
            v = self.prefix[self.pos]
            self.pos += 1
            return v
        if self.branch is None:
            self.branch = n
        raise _Branch()

    def sample(self, population, k):
        # same partial Fisher-Yates as lvpir.rng.SplitMix64.sample
        pool = list(population)
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


class _Branch(Exception):
    pass


def enumerate_sampler(fn):
    """Exact output law of ``fn(rng)`` by exploring every sequence of draws.

    Each ``randbelow(n)`` call is treated as uniform on n outcomes. Returns a
    dict output -> Fraction probability.
    """
    dist = {}
    stack = [((), Fraction(1))]
    while stack:
        prefix, p = stack.pop()
        rng = _Scripted(prefix)
        try:
            out = fn(rng)
        except _Branch:
            n = rng.branch
            for v in range(n):
                stack.append((prefix + (v,), p / n))
            continue
        dist[out] = dist.get(out, Fraction(0)) + p
    return dist


def sampler_law(plan, theta):
    from lvpir.protocol import sample_query
    return enumerate_sampler(lambda rng: sample_query(plan, theta, rng))
