"""Exact-rational data model: characteristic matrix, query sets, distributions.

All probabilities are :class:`fractions.Fraction` values. Message indices are
1-based everywhere in the public surface; bit ``i - 1`` of a mask stands for
message ``i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Iterator, Sequence

from .errors import ParseError, ShapeError, StochasticityError

Rational = Fraction

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")
_FRACTION = re.compile(r"^[+-]?\d+/\d+$")


def parse_rational(token: str) -> Fraction:
    """Convert a decimal ("0.3") or fraction ("3/10") literal exactly."""
    token = token.strip()
    if _DECIMAL.match(token):
        return Fraction(token)
    if _FRACTION.match(token):
        num, den = token.split("/")
        if int(den) == 0:
            raise ParseError(f"zero denominator in {token!r}")
        return Fraction(int(num), int(den))
    raise ParseError(f"not a decimal or fraction literal: {token!r}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_to_json(value: Fraction) -> dict:
    value = Fraction(value)
    return {"num": value.numerator, "den": value.denominator}


def rational_from_json(obj: dict) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


@dataclass(frozen=True)
class CharMatrix:
    """T x K matrix with entry (t, k) = Pr(S = s_t | theta = k).

    ``entries`` is a tuple of T rows, each a tuple of K fractions. The
    constructor checks that every column is a probability distribution.
    """

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        if not rows or not rows[0]:
            raise ShapeError("matrix needs T >= 1 and K >= 1")
        width = len(rows[0])
        for t, row in enumerate(rows):
            if len(row) != width:
                raise ShapeError(f"row {t + 1} has {len(row)} entries, expected {width}")
        for t, row in enumerate(rows):
            for k, x in enumerate(row):
                if x < 0 or x > 1:
                    raise StochasticityError(
                        f"entry ({t + 1},{k + 1}) = {x} outside [0, 1]", column=k + 1
                    )
        for k in range(width):
            total = sum((row[k] for row in rows), Fraction(0))
            if total != 1:
                raise StochasticityError(
                    f"column {k + 1} sums to {total}, expected 1", column=k + 1, total=total
                )

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> CharMatrix:
        return cls(tuple(tuple(Fraction(x) if not isinstance(x, str) else parse_rational(x)
                               for x in row) for row in rows))

    @property
    def T(self) -> int:
        return len(self.entries)

    @property
    def K(self) -> int:
        return len(self.entries[0])

    def column(self, k: int) -> tuple[Fraction, ...]:
        """Column of message ``k`` (1-based)."""
        return tuple(row[k - 1] for row in self.entries)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.column(k) for k in range(1, self.K + 1)]

    def permute_columns(self, order: Sequence[int]) -> CharMatrix:
        """New matrix whose column j is column ``order[j-1]`` of this one."""
        return CharMatrix(tuple(tuple(row[i - 1] for i in order) for row in self.entries))

    @cached_property
    def scale(self) -> int:
        """Least common denominator of all entries."""
        return lcm(*(x.denominator for row in self.entries for x in row))

    @cached_property
    def integer_rows(self) -> tuple[tuple[int, ...], ...]:
        """Entries multiplied by :attr:`scale`; exact integers."""
        s = self.scale
        return tuple(tuple(int(x * s) for x in row) for row in self.entries)

    @cached_property
    def integer_row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.integer_rows)


@dataclass(frozen=True)
class QuerySet:
    """Non-empty set of 1-based message indices out of ``K``."""

    K: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(i) for i in self.members)))
        if len(members) != len(self.members):
            raise ValueError(f"duplicate indices in query {self.members!r}")
        object.__setattr__(self, "members", members)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not members:
            raise ValueError("query set must be non-empty")
        if members[0] < 1 or members[-1] > self.K:
            raise IndexError(f"query indices must lie in [1, {self.K}]: {members!r}")

    @classmethod
    def of(cls, K: int, members: Iterable[int]) -> QuerySet:
        return cls(K, tuple(sorted(set(members))))

    @classmethod
    def full(cls, K: int) -> QuerySet:
        return cls(K, tuple(range(1, K + 1)))

    @classmethod
    def from_mask(cls, K: int, mask: int) -> QuerySet:
        return cls(K, tuple(i + 1 for i in range(K) if mask >> i & 1))

    @classmethod
    def from_indicator(cls, indicator: Sequence[int]) -> QuerySet:
        return cls(len(indicator), tuple(i + 1 for i, b in enumerate(indicator) if b))

    @property
    def mask(self) -> int:
        m = 0
        for i in self.members:
            m |= 1 << (i - 1)
        return m

    @property
    def indicator(self) -> tuple[int, ...]:
        s = set(self.members)
        return tuple(1 if i in s else 0 for i in range(1, self.K + 1))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def to_list(self) -> list[int]:
        return list(self.members)


@dataclass(frozen=True)
class LatentDistribution:
    """Distribution of the latent variable over its T values."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError(f"probabilities outside [0, 1]: {probs}")
        if sum(probs, Fraction(0)) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, expected 1")

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __getitem__(self, t):
        return self.probs[t]

    def tv_distance(self, other: LatentDistribution) -> Fraction:
        return sum((abs(a - b) for a, b in zip(self.probs, other.probs)), Fraction(0)) / 2

    def to_json(self) -> list[dict]:
        return [rational_to_json(p) for p in self.probs]


def parse_matrix(text: str) -> CharMatrix:
    """Parse the text matrix format.

    Lines starting with ``#`` and blank lines are ignored. The first remaining
    line holds ``T K``; then T lines of K entries follow.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty matrix file")
    header = lines[0].split()
    if len(header) == 1 and len(lines) == 1:
        # bare single entry, e.g. "1": a 1x1 matrix
        return CharMatrix(((parse_rational(header[0]),),))
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ParseError(f"header must be 'T K', got {lines[0]!r}")
    T, K = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != T:
        raise ShapeError(f"header declares T={T} rows, found {len(body)}")
    rows = []
    for t, line in enumerate(body):
        tokens = line.split()
        if len(tokens) != K:
            raise ShapeError(f"row {t + 1} has {len(tokens)} entries, header declares K={K}")
        rows.append(tuple(parse_rational(tok) for tok in tokens))
    return CharMatrix(tuple(rows))


def format_matrix(H: CharMatrix) -> str:
    lines = [f"{H.T} {H.K}"]
    lines += [" ".join(format_rational(x) for x in row) for row in H.entries]
    return "\n".join(lines) + "\n"


def load_matrix(path) -> CharMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def prior_s(H: CharMatrix) -> LatentDistribution:
    """Prior of S under a uniform message index: (1/K) H 1."""
    return LatentDistribution(tuple(sum(row, Fraction(0)) / H.K for row in H.entries))


def posterior_given_query(H: CharMatrix, q: QuerySet) -> LatentDistribution:
    """Posterior of S given Q = q when theta is uniform on q: (1/|q|) H b_q."""
    idx = [i - 1 for i in q.members]
    n = len(idx)
    return LatentDistribution(tuple(sum((row[i] for i in idx), Fraction(0)) / n
                                    for row in H.entries))
