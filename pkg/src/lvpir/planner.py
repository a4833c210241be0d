"""Query-scheme planning: exhaustive partition search, grouping, full download.

Every plan produced here satisfies the subset-privacy predicate for the matrix
it was planned for. Costs are measured in messages (multiply by L for bits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from .errors import ParseError
from .model import CharMatrix, QuerySet, rational_to_json
from .privacy import DEFAULT_MAX_K, ValidSubsetCatalog, enumerate_valid_subsets, is_private_subset

PARTITION = "partition"
GROUPING = "grouping"
FULL = "full"


@dataclass(frozen=True)
class SchemePlan:
    """A query strategy.

    ``blocks`` is set for partition plans; ``groups``, ``rho`` and ``picks``
    for grouping plans; full-download plans carry only ``K``.
    """

    kind: str
    K: int
    blocks: tuple[QuerySet, ...] = ()
    groups: tuple[QuerySet, ...] = ()
    rho: int = 1
    picks: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in (PARTITION, GROUPING, FULL):
            raise ValueError(f"unknown plan kind {self.kind!r}")
        if self.kind == PARTITION:
            _check_cover(self.blocks, self.K, "blocks")
        elif self.kind == GROUPING:
            _check_cover(self.groups, self.K, "groups")
            if self.rho < 1 or any(len(g) % self.rho for g in self.groups):
                raise ValueError(f"rho={self.rho} must divide every group size")
            if tuple(self.picks) != tuple(len(g) // self.rho for g in self.groups):
                raise ValueError("picks must equal |G_p| / rho for every group")

    @classmethod
    def partition(cls, K: int, blocks) -> SchemePlan:
        qs = [b if isinstance(b, QuerySet) else QuerySet.of(K, b) for b in blocks]
        return cls(PARTITION, K, blocks=tuple(sorted(qs, key=lambda q: q.members[0])))

    @classmethod
    def grouping(cls, K: int, groups) -> SchemePlan:
        qs = [g if isinstance(g, QuerySet) else QuerySet.of(K, g) for g in groups]
        qs.sort(key=lambda q: q.members[0])
        rho = 0
        for g in qs:
            rho = gcd(rho, len(g))
        return cls(GROUPING, K, groups=tuple(qs), rho=rho,
                   picks=tuple(len(g) // rho for g in qs))

    @classmethod
    def full(cls, K: int) -> SchemePlan:
        return cls(FULL, K)

    def query_size(self, theta: int) -> int:
        """Number of messages downloaded when ``theta`` is requested."""
        if not 1 <= theta <= self.K:
            raise IndexError(f"theta={theta} outside [1, {self.K}]")
        if self.kind == PARTITION:
            return next(len(b) for b in self.blocks if theta in b)
        if self.kind == GROUPING:
            return sum(self.picks)
        return self.K

    def cost(self) -> CostReport:
        return CostReport(tuple(Fraction(self.query_size(k)) for k in range(1, self.K + 1)))

    def to_json(self) -> dict:
        if self.kind == PARTITION:
            return {"kind": PARTITION, "K": self.K, "blocks": [b.to_list() for b in self.blocks]}
        if self.kind == GROUPING:
            return {"kind": GROUPING, "K": self.K,
                    "groups": [g.to_list() for g in self.groups],
                    "rho": self.rho, "picks": list(self.picks)}
        return {"kind": FULL, "K": self.K}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict, K: Optional[int] = None) -> SchemePlan:
        kind = obj.get("kind")
        K = int(obj.get("K", K or 0))
        if kind == PARTITION:
            blocks = obj["blocks"]
            K = K or sum(len(b) for b in blocks)
            return cls.partition(K, blocks)
        if kind == GROUPING:
            groups = obj["groups"]
            K = K or sum(len(g) for g in groups)
            plan = cls.grouping(K, groups)
            if "rho" in obj and int(obj["rho"]) != plan.rho:
                raise ParseError(f"rho={obj['rho']} is not the gcd of the group sizes ({plan.rho})")
            return plan
        if kind == FULL:
            if not K:
                raise ParseError("full plan needs K")
            return cls.full(K)
        raise ParseError(f"unknown plan kind {kind!r}")


def _check_cover(parts, K, what):
    seen = 0
    for q in parts:
        if q.K != K:
            raise ValueError(f"{what} use K={q.K}, plan has K={K}")
        if seen & q.mask:
            raise ValueError(f"{what} overlap")
        seen |= q.mask
    if seen != (1 << K) - 1:
        raise ValueError(f"{what} do not cover [1, {K}]")


@dataclass(frozen=True)
class CostReport:
    """Per-message download cost D(k) and its average, in messages."""

    per_message: tuple[Fraction, ...]
    average: Fraction = field(init=False)

    def __post_init__(self):
        K = len(self.per_message)
        object.__setattr__(self, "average", sum(self.per_message, Fraction(0)) / K)

    @property
    def normalized(self) -> Fraction:
        return self.average

    def bits(self, L_bits: int) -> Fraction:
        return self.average * L_bits

    def to_json(self) -> dict:
        return {"per_message": [rational_to_json(c) for c in self.per_message],
                "average": rational_to_json(self.average)}


def validate_plan(H: CharMatrix, plan: SchemePlan) -> bool:
    """True when every query the plan can emit is built from private pieces.

    Partition plans need every block private; grouping plans need identical
    columns inside each group. Full download is always valid.
    """
    if plan.K != H.K:
        return False
    if plan.kind == PARTITION:
        return all(is_private_subset(H, b) for b in plan.blocks)
    if plan.kind == GROUPING:
        return all(len({H.column(i) for i in g}) == 1 for g in plan.groups)
    return True


def solve_exhaustive(H: CharMatrix, catalog: Optional[ValidSubsetCatalog] = None,
                     max_K: int = DEFAULT_MAX_K) -> tuple[SchemePlan, CostReport]:
    """Minimum sum of squared block sizes over partitions into valid subsets.

    Minimum-weight exact cover by DP over the set of still-uncovered messages:
    the block covering the lowest uncovered index is chosen first. Ties go to
    the lexicographically smallest block list (blocks ordered by min element).
    """
    if catalog is None:
        catalog = enumerate_valid_subsets(H, max_K=max_K)
    K = H.K
    by_anchor: list[list[tuple[int, tuple[int, ...], int]]] = [[] for _ in range(K)]
    for m in catalog.masks:
        low = (m & -m).bit_length() - 1
        members = tuple(i for i in range(K) if m >> i & 1)
        by_anchor[low].append((len(members), members, m))
    for lst in by_anchor:
        lst.sort()

    dead = K * K + 1
    best: dict[int, tuple[int, int]] = {0: (0, 0)}

    def solve(mask: int) -> int:
        hit = best.get(mask)
        if hit is not None:
            return hit[0]
        n = mask.bit_count()
        low = (mask & -mask).bit_length() - 1
        choice_cost, choice, choice_members = dead, 0, ()
        for size, members, m in by_anchor[low]:
            # the rest costs at least one per message; sizes only grow from here
            if size * size + n - size > choice_cost:
                break
            if m & ~mask:
                continue
            c = size * size + solve(mask ^ m)
            if c < choice_cost or (c == choice_cost and members < choice_members):
                choice_cost, choice, choice_members = c, m, members
        best[mask] = (choice_cost, choice)
        return choice_cost

    full = (1 << K) - 1
    if solve(full) >= dead:
        raise ValueError("catalog admits no partition of [1..K]; is the full set missing?")
    blocks = []
    mask = full
    while mask:
        m = best[mask][1]
        blocks.append(QuerySet.from_mask(K, m))
        mask ^= m
    plan = SchemePlan.partition(K, blocks)
    return plan, plan.cost()


def detect_groups(H: CharMatrix) -> list[QuerySet]:
    """Classes of exactly equal columns, ordered by smallest member."""
    classes: dict[tuple, list[int]] = {}
    for k in range(1, H.K + 1):
        classes.setdefault(H.column(k), []).append(k)
    return sorted((QuerySet.of(H.K, ks) for ks in classes.values()),
                  key=lambda q: q.members[0])


def plan_grouping(H: CharMatrix) -> tuple[SchemePlan, CostReport]:
    plan = SchemePlan.grouping(H.K, detect_groups(H))
    return plan, plan.cost()


def column_rank(H: CharMatrix) -> int:
    """Exact rank via fraction-free (Bareiss) elimination on the scaled matrix."""
    a = [list(row) for row in H.integer_rows]
    nrows, ncols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = next((r for r in range(rank, nrows) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, nrows):
            f = a[r][col]
            for c in range(col + 1, ncols):
                a[r][c] = (p * a[r][c] - f * a[rank][c]) // prev
            a[r][col] = 0
        prev = p
        rank += 1
    return rank


@dataclass(frozen=True)
class PlannerConfig:
    enum_cap: int = DEFAULT_MAX_K
    workers: int = 1


def plan_best(H: CharMatrix, config: Optional[PlannerConfig] = None
              ) -> tuple[SchemePlan, CostReport]:
    """Pick the cheapest certified plan the budget allows.

    Full column rank means nothing beats downloading everything; otherwise the
    exhaustive search runs when K is within the cap, else grouping is used if
    it is strictly cheaper than full download.
    """
    config = config or PlannerConfig()
    K = H.K
    if column_rank(H) == K:
        plan = SchemePlan.full(K)
        return plan, plan.cost()
    if K <= config.enum_cap:
        catalog = enumerate_valid_subsets(H, max_K=config.enum_cap, workers=config.workers)
        return solve_exhaustive(H, catalog)
    plan, cost = plan_grouping(H)
    if cost.average < K:
        return plan, cost
    plan = SchemePlan.full(K)
    return plan, plan.cost()
