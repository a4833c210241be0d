"""Single-database client/server simulation.

The server answers a subset query with the verbatim messages at the queried
indices, in ascending index order. The client samples its query from a
:class:`~lvpir.planner.SchemePlan` and reads the requested message back out
of the answer. Frames for a byte-stream transport are defined at the bottom.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Optional

from .errors import NotInQueryError, ParseError, ShapeError, WireError
from .model import QuerySet
from .planner import FULL, GROUPING, PARTITION, SchemePlan
from .rng import SplitMix64


@dataclass(frozen=True)
class Database:
    """K messages of ``L_bits`` bits each, held as byte strings."""

    messages: tuple[bytes, ...]
    L_bits: int

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(bytes(m) for m in self.messages))
        if not self.messages:
            raise ShapeError("database needs K >= 1 messages")
        if self.L_bits < 8 or self.L_bits % 8:
            raise ShapeError(f"L_bits must be a positive multiple of 8, got {self.L_bits}")
        n = self.L_bits // 8
        for i, m in enumerate(self.messages):
            if len(m) != n:
                raise ShapeError(f"message {i + 1} has {len(m)} bytes, expected {n}")

    @property
    def K(self) -> int:
        return len(self.messages)

    def message(self, k: int) -> bytes:
        if not 1 <= k <= self.K:
            raise IndexError(f"message index {k} outside [1, {self.K}]")
        return self.messages[k - 1]

    @classmethod
    def random(cls, K: int, L_bits: int, seed: int = 0) -> Database:
        rng = SplitMix64(seed)
        return cls(tuple(rng.randbytes(L_bits // 8) for _ in range(K)), L_bits)

    def to_bytes(self) -> bytes:
        return f"{self.K} {self.L_bits}\n".encode("ascii") + b"".join(self.messages)

    @classmethod
    def from_bytes(cls, data: bytes) -> Database:
        head, sep, body = data.partition(b"\n")
        if not sep:
            raise ParseError("database file lacks the 'K L_bits' header line")
        try:
            K, L_bits = (int(x) for x in head.decode("ascii").split())
        except ValueError as exc:
            raise ParseError(f"bad database header {head!r}") from exc
        n = L_bits // 8
        if len(body) != K * n:
            raise ShapeError(f"database body has {len(body)} bytes, expected {K * n}")
        return cls(tuple(body[i * n:(i + 1) * n] for i in range(K)), L_bits)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> Database:
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(frozen=True)
class Answer:
    indices: tuple[int, ...]
    entries: tuple[bytes, ...]
    L_bits: int

    @property
    def total_bits(self) -> int:
        return len(self.entries) * self.L_bits


@dataclass(frozen=True)
class RetrievalTranscript:
    theta: int
    query: QuerySet
    answer_bits: int
    decoded: bytes
    seed: Optional[int]

    def to_json(self) -> dict:
        return {"theta": self.theta, "query": self.query.to_list(),
                "answer_bits": self.answer_bits, "decoded": self.decoded.hex(),
                "seed": self.seed}


def _check_theta(plan: SchemePlan, theta: int) -> None:
    if not 1 <= theta <= plan.K:
        raise IndexError(f"theta={theta} outside [1, {plan.K}]")


def sample_query(plan: SchemePlan, theta: int, rng) -> QuerySet:
    """Draw the query sent when message ``theta`` is wanted.

    Grouping plans pick ``theta`` plus a uniform (g - 1)-subset of the rest of
    its group, and a uniform g-subset of every other group. ``rng`` needs only
    ``sample(population, k)``.
    """
    _check_theta(plan, theta)
    if plan.kind == PARTITION:
        return next(b for b in plan.blocks if theta in b)
    if plan.kind == FULL:
        return QuerySet.full(plan.K)
    chosen = []
    for group, g in zip(plan.groups, plan.picks):
        if theta in group:
            rest = [i for i in group if i != theta]
            chosen.append(theta)
            chosen.extend(rng.sample(rest, g - 1))
        else:
            chosen.extend(rng.sample(list(group), g))
    return QuerySet.of(plan.K, chosen)


def query_distribution(plan: SchemePlan, theta: int) -> dict[QuerySet, Fraction]:
    """Exact law of :func:`sample_query` given ``theta``: query -> probability."""
    _check_theta(plan, theta)
    if plan.kind == PARTITION:
        return {sample_query(plan, theta, None): Fraction(1)}
    if plan.kind == FULL:
        return {QuerySet.full(plan.K): Fraction(1)}
    options = []
    for group, g in zip(plan.groups, plan.picks):
        if theta in group:
            rest = [i for i in group if i != theta]
            options.append([(theta,) + c for c in combinations(rest, g - 1)])
        else:
            options.append(list(combinations(group, g)))
    p = Fraction(1, math.prod(len(o) for o in options))
    return {QuerySet.of(plan.K, [i for part in parts for i in part]): p
            for parts in product(*options)}


def count_realizable_queries(plan: SchemePlan) -> int:
    if plan.kind == PARTITION:
        return len(plan.blocks)
    if plan.kind == FULL:
        return 1
    return math.prod(math.comb(len(g), k) for g, k in zip(plan.groups, plan.picks))


def answer(db: Database, query: QuerySet) -> Answer:
    """Server side: the messages at the queried indices, ascending."""
    return Answer(query.members, tuple(db.message(i) for i in query.members), db.L_bits)


def decode(ans: Answer, query: QuerySet, theta: int) -> bytes:
    if theta not in query:
        raise NotInQueryError(f"theta={theta} is not in query {query.to_list()}")
    return ans.entries[query.members.index(theta)]


def retrieve(db: Database, plan: SchemePlan, theta: int, rng) -> RetrievalTranscript:
    if plan.K != db.K:
        raise ShapeError(f"plan K={plan.K} does not match database K={db.K}")
    q = sample_query(plan, theta, rng)
    ans = answer(db, q)
    data = decode(ans, q, theta)
    return RetrievalTranscript(theta, q, ans.total_bits, data, getattr(rng, "seed", None))


@dataclass(frozen=True)
class CostMeasurement:
    trials: int
    mean_bits: float
    std_error: float
    min_bits: int
    max_bits: int
    expected_bits: Fraction

    def to_json(self) -> dict:
        return {"trials": self.trials, "mean_bits": self.mean_bits,
                "std_error": self.std_error, "min_bits": self.min_bits,
                "max_bits": self.max_bits,
                "expected_bits": {"num": self.expected_bits.numerator,
                                  "den": self.expected_bits.denominator}}


def simulate(db: Database, plan: SchemePlan, trials: int, rng: SplitMix64
             ) -> list[RetrievalTranscript]:
    """Run ``trials`` retrievals with theta uniform on [1..K].

    Trial ``i`` samples its query from ``rng.spawn(i)``, so each transcript
    replays on its own from the recorded seed.
    """
    out = []
    for i in range(trials):
        theta = rng.randbelow(plan.K) + 1
        out.append(retrieve(db, plan, theta, rng.spawn(i)))
    return out


def measure_average_cost(db: Database, plan: SchemePlan, trials: int, rng: SplitMix64
                         ) -> CostMeasurement:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bits = [t.answer_bits for t in simulate(db, plan, trials, rng)]
    mean = sum(bits) / trials
    var = sum((b - mean) ** 2 for b in bits) / (trials - 1) if trials > 1 else 0.0
    return CostMeasurement(trials, mean, math.sqrt(var / trials), min(bits), max(bits),
                           plan.cost().average * db.L_bits)


# wire format, big-endian
REQUEST_MAGIC = 0x4C565049  # "LVPI"
RESPONSE_MAGIC = 0x4C565052  # "LVPR"
VERSION = 1
ERROR_TAG = 0xEE

ERR_BAD_MAGIC = 0x01
ERR_BAD_VERSION = 0x02
ERR_TRUNCATED = 0x03
ERR_NOT_ASCENDING = 0x04
ERR_OUT_OF_RANGE = 0x05
ERR_EMPTY = 0x06

_REQ_HEAD = struct.Struct(">IBH")
_RESP_HEAD = struct.Struct(">IBHI")


def encode_request(query: QuerySet) -> bytes:
    idx = query.members
    return _REQ_HEAD.pack(REQUEST_MAGIC, VERSION, len(idx)) + struct.pack(f">{len(idx)}I", *idx)


def decode_request(frame: bytes, K: int) -> QuerySet:
    """Parse and validate a request frame; raises :class:`WireError`."""
    if len(frame) < _REQ_HEAD.size:
        raise WireError(ERR_TRUNCATED, "request shorter than header")
    magic, version, n = _REQ_HEAD.unpack_from(frame)
    if magic != REQUEST_MAGIC:
        raise WireError(ERR_BAD_MAGIC, f"bad request magic {magic:#x}")
    if version != VERSION:
        raise WireError(ERR_BAD_VERSION, f"unsupported version {version}")
    if len(frame) != _REQ_HEAD.size + 4 * n:
        raise WireError(ERR_TRUNCATED, "request length does not match query count")
    if n == 0:
        raise WireError(ERR_EMPTY, "empty query")
    idx = struct.unpack_from(f">{n}I", frame, _REQ_HEAD.size)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise WireError(ERR_NOT_ASCENDING, "indices not strictly ascending")
    if idx[0] < 1 or idx[-1] > K:
        raise WireError(ERR_OUT_OF_RANGE, f"index outside [1, {K}]")
    return QuerySet(K, tuple(idx))


def encode_response(ans: Answer) -> bytes:
    return (_RESP_HEAD.pack(RESPONSE_MAGIC, VERSION, len(ans.entries), ans.L_bits)
            + b"".join(ans.entries))


def decode_response(frame: bytes, query: QuerySet) -> Answer:
    if len(frame) == 2 and frame[0] == ERROR_TAG:
        raise WireError(frame[1], f"server rejected request, reason {frame[1]:#x}")
    if len(frame) < _RESP_HEAD.size:
        raise WireError(ERR_TRUNCATED, "response shorter than header")
    magic, version, n, L_bits = _RESP_HEAD.unpack_from(frame)
    if magic != RESPONSE_MAGIC:
        raise WireError(ERR_BAD_MAGIC, f"bad response magic {magic:#x}")
    if version != VERSION:
        raise WireError(ERR_BAD_VERSION, f"unsupported version {version}")
    size = L_bits // 8
    body = frame[_RESP_HEAD.size:]
    if n != len(query) or len(body) != n * size:
        raise WireError(ERR_TRUNCATED, "response does not match the query")
    return Answer(query.members, tuple(body[i * size:(i + 1) * size] for i in range(n)), L_bits)


def error_frame(reason: int) -> bytes:
    return bytes([ERROR_TAG, reason])


class Server:
    """Stateless responder over request frames."""

    def __init__(self, db: Database):
        self.db = db

    def handle(self, frame: bytes) -> bytes:
        try:
            q = decode_request(frame, self.db.K)
        except WireError as exc:
            return error_frame(exc.reason)
        return encode_response(answer(self.db, q))


class Client:
    """Client holding a plan; ``transport`` maps a request frame to a response frame."""

    def __init__(self, plan: SchemePlan, transport: Callable[[bytes], bytes]):
        self.plan = plan
        self.transport = transport

    def retrieve(self, theta: int, rng) -> RetrievalTranscript:
        q = sample_query(self.plan, theta, rng)
        ans = decode_response(self.transport(encode_request(q)), q)
        return RetrievalTranscript(theta, q, ans.total_bits, decode(ans, q, theta),
                                   getattr(rng, "seed", None))
