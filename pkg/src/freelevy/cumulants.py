"""Non-crossing partitions and moment <-> cumulant conversions.

The conversions sum over partitions grouped by block type (how many blocks
of each size), which keeps them exact for integer or ``Fraction`` input and
fast for moderate orders. :func:`enumerate_nc` and
:func:`enumerate_set_partitions` list the partitions explicitly and serve as
the brute-force route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import OrderTooLarge, ValidationError
from .triplets import CumulantVector

MAX_NC_ORDER = 14
MAX_CLASSICAL_ORDER = 12


@dataclass(frozen=True)
class Partition:
    """Partition of ``{1..p}``; blocks sorted internally and by their minimum."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        seen = [x for b in blocks for x in b]
        if any(not b for b in blocks) or sorted(seen) != list(range(1, len(seen) + 1)):
            raise ValidationError(f"not a partition of 1..p: {blocks}")

    @property
    def order(self) -> int:
        return sum(len(b) for b in self.blocks)

    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    def is_noncrossing(self) -> bool:
        return is_noncrossing(self.blocks)

    @classmethod
    def _trusted(cls, blocks: tuple) -> "Partition":
        # blocks already sorted and valid; skips the O(p log p) checks
        obj = object.__new__(cls)
        object.__setattr__(obj, "blocks", blocks)
        return obj


@dataclass(frozen=True)
class MomentVector:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def order(self) -> int:
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def is_noncrossing(blocks: Iterable[Sequence[int]]) -> bool:
    """No ``i < j < k < l`` with ``i, k`` in one block and ``j, l`` in another."""
    owner = {}
    for idx, b in enumerate(blocks):
        for x in b:
            owner[x] = idx
    elems = sorted(owner)
    n = len(elems)
    for ii in range(n):
        for jj in range(ii + 1, n):
            for kk in range(jj + 1, n):
                if owner[elems[kk]] != owner[elems[ii]] or owner[elems[jj]] == owner[elems[ii]]:
                    continue
                for ll in range(kk + 1, n):
                    if owner[elems[ll]] == owner[elems[jj]]:
                        return False
    return True


@lru_cache(maxsize=None)
def _nc_blocks(start: int, n: int) -> tuple:
    """All non-crossing partitions of ``start..start+n-1`` as tuples of blocks."""
    if n == 0:
        return ((),)
    out = []
    rest = list(range(start + 1, start + n))
    # choose the other members of the block containing `start`
    for mask in range(1 << len(rest)):
        chosen = [start] + [rest[i] for i in range(len(rest)) if mask >> i & 1]
        bounds = chosen + [start + n]
        gap_options = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            gap_options.append(_nc_blocks(lo + 1, hi - lo - 1))
        _combine(tuple(chosen), gap_options, 0, (), out)
    return tuple(out)


def _combine(first, gap_options, i, acc, out):
    if i == len(gap_options):
        out.append((first,) + acc)
        return
    for option in gap_options[i]:
        _combine(first, gap_options, i + 1, acc + option, out)


def enumerate_nc(p: int) -> list:
    """All non-crossing partitions of ``{1..p}`` in lexicographic block order."""
    if p < 1:
        raise ValidationError("order must be >= 1")
    if p > MAX_NC_ORDER:
        raise OrderTooLarge(f"enumerate_nc supports p <= {MAX_NC_ORDER}")
    return [Partition._trusted(blocks) for blocks in sorted(tuple(sorted(b)) for b in _nc_blocks(1, p))]


def enumerate_set_partitions(p: int) -> Iterator[Partition]:
    """All set partitions of ``{1..p}`` via restricted growth strings (brute force)."""
    if p < 1:
        raise ValidationError("order must be >= 1")
    if p > MAX_CLASSICAL_ORDER:
        raise OrderTooLarge(f"set partitions are enumerated only for p <= {MAX_CLASSICAL_ORDER}")
    codes = [0] * p

    def rec(i, top):
        if i == p:
            blocks: dict[int, list] = {}
            for pos, c in enumerate(codes, start=1):
                blocks.setdefault(c, []).append(pos)
            yield Partition(tuple(tuple(b) for b in blocks.values()))
            return
        for c in range(top + 2):
            codes[i] = c
            yield from rec(i + 1, max(top, c))

    codes[0] = 0
    yield from rec(1, 0) if p > 1 else iter([Partition(((1,),))])


def catalan(p: int) -> int:
    return math.comb(2 * p, p) // (p + 1)


def bell(p: int) -> int:
    row = [1]
    for _ in range(p):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def _integer_partitions(n: int, largest: int | None = None) -> tuple:
    """Integer partitions of n as tuples of part sizes, nonincreasing."""
    if largest is None:
        largest = n
    if n == 0:
        return ((),)
    out = []
    for k in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - k, k):
            out.append((k,) + rest)
    return tuple(out)


def _multiplicities(parts: tuple) -> dict:
    mult: dict[int, int] = {}
    for k in parts:
        mult[k] = mult.get(k, 0) + 1
    return mult


@lru_cache(maxsize=None)
def nc_type_count(parts: tuple) -> int:
    """Number of non-crossing partitions with the given block sizes (Kreweras)."""
    p = sum(parts)
    k = len(parts)
    denom = math.factorial(p - k + 1)
    for m in _multiplicities(parts).values():
        denom *= math.factorial(m)
    return math.factorial(p) // denom


@lru_cache(maxsize=None)
def set_partition_type_count(parts: tuple) -> int:
    """Number of set partitions with the given block sizes."""
    p = sum(parts)
    denom = 1
    for size, m in _multiplicities(parts).items():
        denom *= math.factorial(size) ** m * math.factorial(m)
    return math.factorial(p) // denom


def _values(vec) -> list:
    return list(vec.values if hasattr(vec, "values") and not isinstance(vec, dict) else vec)


def _product(kappa: Sequence, parts: tuple):
    prod = 1
    for k in parts:
        prod = prod * kappa[k - 1]
    return prod


def free_cumulants_to_moments(k) -> MomentVector:
    """``m_p = sum over NC(p) of prod over blocks kappa_{#V}``."""
    kappa = _values(k)
    moments = []
    for p in range(1, len(kappa) + 1):
        total = 0
        for parts in _integer_partitions(p):
            total = total + nc_type_count(parts) * _product(kappa, parts)
        moments.append(total)
    return MomentVector(moments)


def moments_to_free_cumulants(m) -> CumulantVector:
    """Recursive inversion: ``kappa_p = m_p - sum over NC'(p)`` (partitions with >= 2 blocks)."""
    mom = _values(m)
    kappa: list = []
    for p in range(1, len(mom) + 1):
        kappa.append(0)
        correction = 0
        for parts in _integer_partitions(p):
            if len(parts) < 2:
                continue
            correction = correction + nc_type_count(parts) * _product(kappa, parts)
        kappa[-1] = mom[p - 1] - correction
    return CumulantVector(kappa)


def classical_cumulants_to_moments(c) -> MomentVector:
    """``m_p = sum over all set partitions of prod c_{#V}``."""
    cum = _values(c)
    if len(cum) > MAX_CLASSICAL_ORDER:
        raise OrderTooLarge(f"classical conversion supports p <= {MAX_CLASSICAL_ORDER}")
    moments = []
    for p in range(1, len(cum) + 1):
        total = 0
        for parts in _integer_partitions(p):
            total = total + set_partition_type_count(parts) * _product(cum, parts)
        moments.append(total)
    return MomentVector(moments)


def moments_to_classical_cumulants(m) -> CumulantVector:
    mom = _values(m)
    if len(mom) > MAX_CLASSICAL_ORDER:
        raise OrderTooLarge(f"classical conversion supports p <= {MAX_CLASSICAL_ORDER}")
    cum: list = []
    for p in range(1, len(mom) + 1):
        cum.append(0)
        correction = 0
        for parts in _integer_partitions(p):
            if len(parts) < 2:
                continue
            correction = correction + set_partition_type_count(parts) * _product(cum, parts)
        cum[-1] = mom[p - 1] - correction
    return CumulantVector(cum)


def moments_by_enumeration(k, noncrossing: bool = True) -> MomentVector:
    """Brute-force moments from cumulants by listing partitions (test oracle, small p only)."""
    kappa = _values(k)
    out = []
    for p in range(1, len(kappa) + 1):
        parts = enumerate_nc(p) if noncrossing else enumerate_set_partitions(p)
        total = 0
        for pi in parts:
            total = total + _product(kappa, pi.block_sizes())
        out.append(total)
    return MomentVector(out)
