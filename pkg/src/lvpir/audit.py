"""Privacy audits for concrete plans.

:func:`audit_exact` enumerates every query a plan can emit, derives the
database's posterior over S from the sampler's own conditional law (it does
not assume theta is uniform on the query), and compares with the prior
exactly. :func:`audit_sampled` is the Monte Carlo fallback for plans with too
many realizable queries.
"""

from __future__ import annotations

import hashlib
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from scipy import stats

from .errors import TooManyQueriesError
from .model import CharMatrix, LatentDistribution, QuerySet, prior_s, rational_to_json
from .planner import SchemePlan
from .protocol import count_realizable_queries, encode_request, query_distribution, sample_query
from .rng import SplitMix64

PASS = "PASS"
FAIL = "FAIL"
DEFAULT_MAX_ENUM = 10**6


@dataclass(frozen=True)
class QueryAudit:
    query: QuerySet
    probability: Fraction
    posterior: LatentDistribution
    exact_match: bool
    tv_distance: Fraction

    def to_json(self) -> dict:
        return {"query": self.query.to_list(),
                "probability": rational_to_json(self.probability),
                "posterior": self.posterior.to_json(),
                "exact_match": self.exact_match,
                "tv_distance": rational_to_json(self.tv_distance)}


@dataclass(frozen=True)
class AuditReport:
    prior: LatentDistribution
    per_query: tuple[QueryAudit, ...]
    verdict: str
    max_tv_distance: Fraction
    mutual_information_bits: float

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        return {"mode": "exact", "verdict": self.verdict,
                "prior": self.prior.to_json(),
                "queries": [q.to_json() for q in self.per_query],
                "max_tv_distance": rational_to_json(self.max_tv_distance),
                "mutual_information_bits": self.mutual_information_bits}


def audit_exact(H: CharMatrix, plan: SchemePlan, max_enum: int = DEFAULT_MAX_ENUM) -> AuditReport:
    K = H.K
    if plan.K != K:
        raise ValueError(f"plan K={plan.K} does not match matrix K={K}")
    n_queries = count_realizable_queries(plan)
    if n_queries > max_enum:
        raise TooManyQueriesError(f"{n_queries} realizable queries exceed max_enum={max_enum}")

    # joint[q][i] = Pr(Q = q | theta = i)
    joint: dict[QuerySet, dict[int, Fraction]] = defaultdict(dict)
    for i in range(1, K + 1):
        for q, p in query_distribution(plan, i).items():
            joint[q][i] = p

    prior = prior_s(H)
    columns = H.columns()
    rows = []
    info = 0.0
    for q in sorted(joint, key=lambda q: q.members):
        given = joint[q]
        mass = sum(given.values(), Fraction(0))
        prob_q = mass / K
        weights = {i: p / mass for i, p in given.items()}  # Pr(theta = i | Q = q)
        post = LatentDistribution(tuple(
            sum((w * columns[i - 1][t] for i, w in weights.items()), Fraction(0))
            for t in range(H.T)))
        tv = post.tv_distance(prior)
        rows.append(QueryAudit(q, prob_q, post, post.probs == prior.probs, tv))
        info += float(prob_q) * sum(float(a) * math.log2(a / b)
                                    for a, b in zip(post.probs, prior.probs) if a)
    total = sum((r.probability for r in rows), Fraction(0))
    if total != 1:
        raise AssertionError(f"query probabilities sum to {total}")
    verdict = PASS if all(r.exact_match for r in rows) else FAIL
    max_tv = max((r.tv_distance for r in rows), default=Fraction(0))
    return AuditReport(prior, tuple(rows), verdict, max_tv, max(info, 0.0))


@dataclass(frozen=True)
class GroupResult:
    key: str
    query: Optional[list[int]]
    counts: tuple[int, ...]
    tested: bool
    p_value: Optional[float]
    rejected: bool

    @property
    def n(self) -> int:
        return sum(self.counts)

    def to_json(self) -> dict:
        return {"key": self.key, "query": self.query, "counts": list(self.counts),
                "n": self.n, "tested": self.tested, "p_value": self.p_value,
                "rejected": self.rejected}


@dataclass(frozen=True)
class SampledAuditReport:
    trials: int
    alpha: float
    threshold: float
    groups: tuple[GroupResult, ...]
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def rejected(self) -> list[GroupResult]:
        return [g for g in self.groups if g.rejected]

    def to_json(self) -> dict:
        return {"mode": "sampled", "verdict": self.verdict, "trials": self.trials,
                "alpha": self.alpha, "bonferroni_threshold": self.threshold,
                "groups": [g.to_json() for g in self.groups]}


def _fingerprint(q: QuerySet, buckets: int) -> str:
    digest = hashlib.sha256(encode_request(q)).digest()
    return f"h:{int.from_bytes(digest[:8], 'big') % buckets}"


def _sample_chunk(H, plan, seed, n, hashed, buckets):
    rng = SplitMix64(seed)
    weights = [[row[k] for row in H.integer_rows] for k in range(H.K)]
    counts: dict[str, list[int]] = {}
    for _ in range(n):
        theta = rng.randbelow(H.K) + 1
        s = rng.choice_weighted(weights[theta - 1])
        q = sample_query(plan, theta, rng)
        key = _fingerprint(q, buckets) if hashed else "q:" + ",".join(map(str, q.members))
        counts.setdefault(key, [0] * H.T)[s] += 1
    return counts


def audit_sampled(H: CharMatrix, plan: SchemePlan, trials: int, rng: SplitMix64,
                  alpha: float = 0.01, min_expected: float = 5.0, max_groups: int = 4096,
                  chunk_size: int = 20000, workers: int = 1) -> SampledAuditReport:
    """Chi-square goodness of fit of S against the prior within each query group.

    Trials are split into chunks seeded by ``rng.spawn(chunk)``; merged counts
    do not depend on ``workers``. When the plan has more realizable queries
    than ``max_groups``, trials are bucketed by a hash of the query frame.
    Groups are tested only when every expected cell count reaches
    ``min_expected``; rejection uses the Bonferroni threshold alpha / tested.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hashed = count_realizable_queries(plan) > max_groups
    jobs = []
    for c, start in enumerate(range(0, trials, chunk_size)):
        jobs.append((H, plan, rng.spawn(c).seed, min(chunk_size, trials - start), hashed, max_groups))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sample_chunk, *zip(*jobs)))
    else:
        parts = [_sample_chunk(*job) for job in jobs]
    merged: dict[str, list[int]] = {}
    for part in parts:
        for key, cnt in part.items():
            acc = merged.setdefault(key, [0] * H.T)
            for t, c in enumerate(cnt):
                acc[t] += c

    prior = [float(p) for p in prior_s(H).probs]
    support = [t for t, p in enumerate(prior) if p > 0]
    pending = []
    for key in sorted(merged):
        cnt = merged[key]
        n = sum(cnt)
        query = [int(x) for x in key[2:].split(",")] if key.startswith("q:") else None
        if any(cnt[t] for t in range(H.T) if prior[t] == 0):
            pending.append((key, query, cnt, True, 0.0))
            continue
        if min(n * prior[t] for t in support) < min_expected:
            pending.append((key, query, cnt, False, None))
            continue
        if len(support) < 2:
            pending.append((key, query, cnt, True, 1.0))
            continue
        obs = [cnt[t] for t in support]
        exp = [n * prior[t] for t in support]
        p_value = float(stats.chisquare(obs, exp).pvalue)
        pending.append((key, query, cnt, True, p_value))
    tested = sum(1 for p in pending if p[3])
    threshold = alpha / max(tested, 1)
    groups = tuple(GroupResult(key, query, tuple(cnt), was_tested, p,
                               bool(was_tested and p is not None and p < threshold))
                   for key, query, cnt, was_tested, p in pending)
    verdict = FAIL if any(g.rejected for g in groups) else PASS
    return SampledAuditReport(trials, alpha, threshold, groups, verdict)
