"""Subset-privacy predicate and enumeration of privacy-valid query sets.

A query set q is private when the posterior of S given q (theta uniform on q)
equals the prior, i.e. ``K * H b_q == |q| * H 1`` row by row. The check runs
on the integer-scaled matrix so it is exact without touching Fractions.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import TooLargeError
from .model import CharMatrix, QuerySet

DEFAULT_MAX_K = 24
_CHUNK_BITS = 16


def is_private_subset(H: CharMatrix, q: QuerySet) -> bool:
    if q.K != H.K:
        raise ValueError(f"query over K={q.K} does not match matrix K={H.K}")
    idx = [i - 1 for i in q.members]
    size = len(idx)
    for row, total in zip(H.integer_rows, H.integer_row_totals):
        if H.K * sum(row[i] for i in idx) != size * total:
            return False
    return True


def _canonical_order(masks: list[int], K: int) -> tuple[int, ...]:
    """Sort by size, then lexicographically by member list.

    Among equal-size sets the lexicographically smaller one holds the smaller
    element at the first difference, i.e. it has the larger bit-reversed mask.
    """
    if not masks:
        return ()
    arr = np.asarray(masks, dtype=np.int64)
    size = np.zeros(arr.size, dtype=np.int64)
    rev = np.zeros(arr.size, dtype=np.int64)
    for i in range(K):
        bit = (arr >> i) & 1
        size += bit
        rev |= bit << (K - 1 - i)
    order = np.lexsort((-rev, size))
    return tuple(int(m) for m in arr[order])


@dataclass(frozen=True)
class ValidSubsetCatalog:
    """All non-empty subsets of [1..K] passing :func:`is_private_subset`.

    ``masks`` are stored in canonical order: by size, then lexicographically
    by member list.
    """

    K: int
    masks: tuple[int, ...]

    @cached_property
    def subsets(self) -> list[QuerySet]:
        return [QuerySet.from_mask(self.K, m) for m in self.masks]

    @cached_property
    def mask_set(self) -> frozenset[int]:
        return frozenset(self.masks)

    def __len__(self) -> int:
        return len(self.masks)

    def __contains__(self, q) -> bool:
        mask = q.mask if isinstance(q, QuerySet) else int(q)
        return mask in self.mask_set

    def as_lists(self) -> list[list[int]]:
        return [q.to_list() for q in self.subsets]

    def to_json(self) -> dict:
        return {"K": self.K, "subsets": self.as_lists()}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict) -> ValidSubsetCatalog:
        K = int(obj["K"])
        masks = [QuerySet.of(K, s).mask for s in obj["subsets"]]
        return cls(K, _canonical_order(masks, K))


def _scan_range(rows, totals, K, start, stop):
    """Return masks in [start, stop) that satisfy every row equality."""
    big = K * K * max(max(r) for r in rows) >= 2**62
    dtype = object if big else np.int64
    masks = np.arange(start, stop, dtype=np.int64)
    bits = [((masks >> i) & 1) for i in range(K)]
    sizes = sum(bits)
    keep = masks != 0
    for row, total in zip(rows, totals):
        if not keep.any():
            break
        cand = np.flatnonzero(keep)
        acc = np.zeros(cand.size, dtype=dtype)
        for i, h in enumerate(row):
            if h:
                acc = acc + bits[i][cand].astype(dtype) * h
        ok = K * acc == sizes[cand].astype(dtype) * total
        keep[cand[~np.asarray(ok, dtype=bool)]] = False
    return [int(m) for m in masks[keep]]


def enumerate_valid_subsets(H: CharMatrix, max_K: int = DEFAULT_MAX_K,
                            workers: int = 1) -> ValidSubsetCatalog:
    """Sweep all 2^K - 1 subsets and keep the private ones.

    Raises :class:`TooLargeError` when ``H.K > max_K``. With ``workers > 1``
    the mask range is split across processes; the result does not depend on
    the worker count.
    """
    K = H.K
    if K > max_K:
        raise TooLargeError(f"K={K} exceeds enumeration cap {max_K}; use the grouping scheme")
    rows, totals = H.integer_rows, H.integer_row_totals
    end = 1 << K
    step = 1 << min(K, _CHUNK_BITS)
    ranges = [(s, min(s + step, end)) for s in range(0, end, step)]
    found: list[int] = []
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_range, rows, totals, K, a, b) for a, b in ranges]
            for f in futures:
                found.extend(f.result())
    else:
        for a, b in ranges:
            found.extend(_scan_range(rows, totals, K, a, b))
    return ValidSubsetCatalog(K, _canonical_order(found, K))
