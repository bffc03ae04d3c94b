"""Finite descriptors of uniform barriers on infinite subsets of the naturals.

A descriptor carries a ``base`` (the infinite set the barrier lives on) and
an ``offset``.  Rules that depend on the numeric value of an element (the
Schreier size rule, fundamental-sequence indices, custom child tables) read
``element + offset``.  Shifting a descriptor down by ``d`` therefore only
needs ``base - d`` and ``offset + d``, which keeps shifted children exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Iterator, Mapping, Union

from .finite import FiniteSet, is_strictly_increasing, set_prec_key
from .ordinal import (
    ZERO,
    Kind,
    Ordinal,
    format_ordinal,
    fundamental_seq,
    ord_kind,
    parse_ordinal,
)


class DescriptorError(ValueError):
    """Raised for malformed descriptors or violated preconditions."""


@dataclass(frozen=True)
class InfSetDesc:
    """prefix ∪ {tail_start + k*stride : k >= 0}."""

    prefix: FiniteSet = ()
    tail_start: int = 0
    stride: int = 1

    def __post_init__(self) -> None:
        if self.stride < 1 or self.tail_start < 0:
            raise DescriptorError("stride must be positive and tail_start natural")
        if not is_strictly_increasing(self.prefix) or (self.prefix and self.prefix[0] < 0):
            raise DescriptorError("prefix must be strictly increasing naturals")
        if self.prefix and self.prefix[-1] >= self.tail_start:
            raise DescriptorError("prefix elements must lie below tail_start")

    def __contains__(self, n: int) -> bool:
        if n >= self.tail_start:
            return (n - self.tail_start) % self.stride == 0
        return n in self.prefix

    def first_at_least(self, n: int) -> int:
        for p in self.prefix:
            if p >= n:
                return p
        if n <= self.tail_start:
            return self.tail_start
        k = -(-(n - self.tail_start) // self.stride)
        return self.tail_start + k * self.stride

    def elements_upto(self, bound: int) -> list[int]:
        out = [p for p in self.prefix if p <= bound]
        if bound >= self.tail_start:
            out.extend(range(self.tail_start, bound + 1, self.stride))
        return out

    def iter_from(self, n: int) -> Iterator[int]:
        x = self.first_at_least(n)
        while True:
            yield x
            x = self.first_at_least(x + 1)

    def above(self, n: int) -> "InfSetDesc":
        """The elements strictly greater than n."""
        prefix = tuple(p for p in self.prefix if p > n)
        start = self.tail_start if self.tail_start > n else self.first_at_least(n + 1)
        return InfSetDesc(prefix, start, self.stride)

    def shift_down(self, d: int) -> "InfSetDesc":
        if self.prefix and self.prefix[0] < d or (not self.prefix and self.tail_start < d):
            raise DescriptorError("cannot shift below zero")
        return InfSetDesc(tuple(p - d for p in self.prefix), self.tail_start - d, self.stride)

    def is_subset_of(self, other: "InfSetDesc") -> bool:
        if any(p not in other for p in self.prefix):
            return False
        if self.stride % other.stride:
            return False
        probe = self.tail_start
        while probe < other.tail_start:
            if probe not in other:
                return False
            probe += self.stride
        return probe in other

    def intersect(self, other: "InfSetDesc") -> "InfSetDesc | None":
        """Intersection, or None when it is finite."""
        lcm = self.stride * other.stride // math.gcd(self.stride, other.stride)
        start = max(self.tail_start, other.tail_start)
        tail = next((x for x in range(start, start + lcm) if x in self and x in other), None)
        if tail is None:
            return None
        prefix = tuple(x for x in range(tail) if x in self and x in other)
        return InfSetDesc(prefix, tail, lcm)

    def normalized(self) -> "InfSetDesc":
        """Pull trailing prefix elements that fit the tail pattern into the tail."""
        prefix, start = list(self.prefix), self.tail_start
        while prefix and prefix[-1] == start - self.stride:
            start = prefix.pop()
        return InfSetDesc(tuple(prefix), start, self.stride)

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "tail_start": self.tail_start, "stride": self.stride}

    @staticmethod
    def from_json(obj: Mapping) -> "InfSetDesc":
        return InfSetDesc(tuple(obj.get("prefix", ())), int(obj.get("tail_start", 0)), int(obj.get("stride", 1)))

    def __str__(self) -> str:
        pre = ",".join(str(p) for p in self.prefix)
        tail = f"{self.tail_start}+{self.stride}k"
        return "{" + (pre + "," if pre else "") + tail + "}"


NATURALS = InfSetDesc()


@dataclass(frozen=True, kw_only=True)
class BarrierDesc:
    base: InfSetDesc = NATURALS
    offset: int = 0


@dataclass(frozen=True, kw_only=True)
class Point(BarrierDesc):
    """The rank-0 barrier {∅}."""


@dataclass(frozen=True, kw_only=True)
class FiniteRank(BarrierDesc):
    """All k-element subsets of the base."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DescriptorError("FiniteRank needs k >= 1; use Point for rank 0")


@dataclass(frozen=True, kw_only=True)
class Schreier(BarrierDesc):
    """Sets b with |b| = min(b) + offset + 1."""


@dataclass(frozen=True, kw_only=True)
class Tower(BarrierDesc):
    """The canonical barrier of the given rank built from fundamental sequences."""

    rank: Ordinal


TOWER_RULE = "tower"


@dataclass(frozen=True, kw_only=True)
class Custom(BarrierDesc):
    """Explicit child table keyed by ``n + offset`` with a fallback for the remaining columns.

    ``fallback`` is either a descriptor used for every other column or the
    string ``"tower"``, meaning the column follows the canonical rule for
    ``declared_rank``.  Child descriptors inherit the parent's base above n
    and have the parent's offset added to their own.  ``extra`` lists sets
    (in offset coordinates) forced into the family; it exists to build
    deliberately corrupted families for negative tests.
    """

    children: tuple[tuple[int, BarrierDesc], ...] = ()
    fallback: Union[BarrierDesc, str] = TOWER_RULE
    declared_rank: Ordinal = ZERO
    extra: tuple[FiniteSet, ...] = ()

    def child_table(self) -> dict[int, BarrierDesc]:
        return dict(self.children)


def _with_offset(desc: BarrierDesc, base: InfSetDesc, offset: int) -> BarrierDesc:
    if isinstance(desc, (Point, FiniteRank)):
        return replace(desc, base=base, offset=0)
    if isinstance(desc, Tower) and desc.rank.is_finite():
        return replace(desc, base=base, offset=0)
    return replace(desc, base=base, offset=offset)


def _finite_rank_desc(k: int, base: InfSetDesc) -> BarrierDesc:
    return Point(base=base) if k == 0 else FiniteRank(k=k, base=base)


def _rule_child_rank(rank: Ordinal, index: int) -> Ordinal:
    kind, pred = ord_kind(rank)
    if kind is Kind.ZERO:
        raise DescriptorError("rank-0 barrier has no children")
    if kind is Kind.SUCCESSOR:
        return pred
    return fundamental_seq(rank, index)


def _tower(rank: Ordinal, base: InfSetDesc, offset: int) -> BarrierDesc:
    if rank.is_finite():
        return _finite_rank_desc(rank.finite_value(), base)
    return Tower(rank=rank, base=base, offset=offset)


def normal(desc: BarrierDesc) -> BarrierDesc:
    """Finite-rank towers behave exactly like Point / FiniteRank; use those."""
    if isinstance(desc, Tower) and desc.rank.is_finite():
        return _finite_rank_desc(desc.rank.finite_value(), desc.base)
    return desc


@lru_cache(maxsize=200_000)
def child_barrier(desc: BarrierDesc, n: int, shifted: bool = False) -> BarrierDesc:
    """Descriptor of {a : min(a) > n and {n} ∪ a ∈ B}, optionally shifted down by n + 1."""
    desc = normal(desc)
    if isinstance(desc, Point):
        raise DescriptorError("the rank-0 barrier has no children")
    if n not in desc.base:
        raise DescriptorError(f"{n} is not in the base {desc.base}")
    base = desc.base.above(n)
    idx = n + desc.offset
    if isinstance(desc, FiniteRank):
        child = _finite_rank_desc(desc.k - 1, base)
    elif isinstance(desc, Schreier):
        child = _finite_rank_desc(idx, base)
    elif isinstance(desc, Tower):
        child = _tower(_rule_child_rank(desc.rank, idx), base, desc.offset)
    elif isinstance(desc, Custom):
        table = desc.child_table()
        if idx in table:
            sub = table[idx]
            child = _with_offset(sub, base, sub.offset + desc.offset)
        elif desc.fallback == TOWER_RULE:
            child = _tower(_rule_child_rank(desc.declared_rank, idx), base, desc.offset)
        elif isinstance(desc.fallback, BarrierDesc):
            sub = desc.fallback
            child = _with_offset(sub, base, sub.offset + desc.offset)
        else:
            raise DescriptorError(f"bad fallback {desc.fallback!r}")
    else:
        raise DescriptorError(f"unknown descriptor {desc!r}")
    if shifted:
        return shift_desc(child, n + 1)
    return child


def shift_desc(desc: BarrierDesc, d: int) -> BarrierDesc:
    """The family {b - d : b ∈ B}."""
    if d == 0:
        return desc
    # extras are stored in offset coordinates, so they need no adjustment
    return _with_offset(desc, desc.base.shift_down(d), desc.offset + d)


def restrict(desc: BarrierDesc, sub: InfSetDesc) -> BarrierDesc:
    """B|N = {b ∈ B : b ⊆ N}; the same rules on a thinner base."""
    if not sub.is_subset_of(desc.base):
        raise DescriptorError(f"{sub} is not a subset of the base {desc.base}")
    return replace(desc, base=sub)


def _validated_rank(desc: BarrierDesc, horizon: int, depth: int) -> Ordinal:
    if isinstance(desc, Point):
        return ZERO
    if isinstance(desc, FiniteRank):
        return Ordinal.of(desc.k)
    if isinstance(desc, Schreier):
        return parse_ordinal("w")
    if isinstance(desc, Tower):
        return desc.rank
    if not isinstance(desc, Custom):
        raise DescriptorError(f"unknown descriptor {desc!r}")
    rank = desc.declared_rank
    kind, pred = ord_kind(rank)
    if kind is Kind.ZERO:
        raise DescriptorError("a custom descriptor of rank 0 must be Point")
    keys = [k - desc.offset for k, _ in desc.children]
    last = max([horizon] + [k + 2 for k in keys])
    prev: Ordinal | None = None
    for n in desc.base.elements_upto(last):
        child = child_barrier(desc, n)
        r = _validated_rank(child, horizon, depth + 1) if depth < 8 else rank_of_shallow(child)
        if not r < rank:
            raise DescriptorError(f"child at {n} has rank {r}, not below {rank}")
        if kind is Kind.SUCCESSOR and r != pred:
            raise DescriptorError(f"successor rank {rank} needs every child of rank {pred}; column {n} has {r}")
        if kind is Kind.LIMIT and prev is not None and not prev < r:
            raise DescriptorError(f"limit rank {rank} needs strictly increasing child ranks; column {n} breaks it")
        prev = r
    if kind is Kind.LIMIT and isinstance(desc.fallback, BarrierDesc):
        raise DescriptorError("a limit-rank custom descriptor needs the tower fallback")
    return rank


def rank_of_shallow(desc: BarrierDesc) -> Ordinal:
    if isinstance(desc, Custom):
        return desc.declared_rank
    return _validated_rank(desc, 0, 0)


def rank_of(desc: BarrierDesc, horizon: int = 12) -> Ordinal:
    """Uniformity rank; custom descriptors are validated on columns up to ``horizon``."""
    return _validated_rank(desc, horizon, 0)


class Membership(Enum):
    IN_BARRIER = "InBarrier"
    PROPER_INITIAL = "ProperInitial"
    BEYOND = "Beyond"
    OUTSIDE = "Outside"


def _extra_hit(desc: BarrierDesc, a: FiniteSet) -> bool:
    return isinstance(desc, Custom) and bool(desc.extra) and tuple(x + desc.offset for x in a) in desc.extra


def classify(desc: BarrierDesc, a: FiniteSet) -> Membership:
    a, desc = tuple(a), normal(desc)
    if not is_strictly_increasing(a) or any(x not in desc.base for x in a):
        return Membership.OUTSIDE
    if _extra_hit(desc, a):
        return Membership.IN_BARRIER
    cur = desc
    for i, x in enumerate(a):
        if isinstance(cur, Point):
            return Membership.BEYOND
        cur = child_barrier(cur, x)
    return Membership.IN_BARRIER if isinstance(cur, Point) else Membership.PROPER_INITIAL


def _combos(elems: list[int], k: int) -> Iterator[FiniteSet]:
    return itertools.combinations(elems, k)


def iter_barrier(desc: BarrierDesc, bound: int) -> Iterator[FiniteSet]:
    """All b ∈ B with max(b) <= bound, in no particular order (extras excluded)."""
    desc = normal(desc)
    if isinstance(desc, Point):
        yield ()
        return
    elems = desc.base.elements_upto(bound)
    if isinstance(desc, FiniteRank):
        yield from _combos(elems, desc.k)
        return
    for i, n in enumerate(elems):
        child = child_barrier(desc, n)
        if isinstance(child, Point):
            yield (n,)
        elif isinstance(child, FiniteRank):
            for rest in _combos(elems[i + 1 :], child.k):
                yield (n,) + rest
        else:
            for rest in iter_barrier(child, bound):
                yield (n,) + rest


def _extras_within(desc: BarrierDesc, bound: int) -> list[FiniteSet]:
    if not isinstance(desc, Custom):
        return []
    out = []
    for e in desc.extra:
        a = tuple(x - desc.offset for x in e)
        if all(0 <= x <= bound and x in desc.base for x in a):
            out.append(a)
    return out


@lru_cache(maxsize=64)
def _enumerate_sorted(desc: BarrierDesc, bound: int) -> tuple[FiniteSet, ...]:
    found = set(iter_barrier(desc, bound))
    found.update(_extras_within(desc, bound))
    return tuple(sorted(found, key=set_prec_key))


def enumerate_barrier(desc: BarrierDesc, bound: int) -> list[FiniteSet]:
    """B ∩ P([0, bound]) sorted by prec of sigma."""
    return list(_enumerate_sorted(desc, bound))


def iter_closure(desc: BarrierDesc, bound: int) -> Iterator[tuple[FiniteSet, BarrierDesc]]:
    """Every a in the initial-segment closure of B within bound, with its residual descriptor."""
    stack: list[tuple[FiniteSet, BarrierDesc]] = [((), normal(desc))]
    while stack:
        a, cur = stack.pop()
        yield a, cur
        if isinstance(cur, Point):
            continue
        lo = a[-1] + 1 if a else 0
        for n in reversed(cur.base.elements_upto(bound)):
            if n >= lo:
                stack.append((a + (n,), child_barrier(cur, n)))


@dataclass(frozen=True)
class FrontOk:
    checked_elements: int
    maximal_paths: int
    boundary_inconclusive: int


@dataclass(frozen=True)
class FrontCounterexample:
    path: tuple[FiniteSet, ...]
    reason: str


def verify_front(desc: BarrierDesc, bound: int) -> FrontOk | FrontCounterexample:
    """Bounded front check: an antichain under initial segments, and every path meets B."""
    elems = enumerate_barrier(desc, bound)
    members = set(elems)
    for b in elems:
        for m in range(len(b)):
            if b[:m] in members:
                return FrontCounterexample((b[:m], b), "one element is a proper initial segment of another")
    paths = inconclusive = 0
    extras = set(_extras_within(desc, bound))
    stack: list[tuple[FiniteSet, BarrierDesc]] = [((), normal(desc))]
    while stack:
        a, cur = stack.pop()
        if isinstance(cur, Point) or a in extras:
            paths += 1
            continue
        lo = a[-1] + 1 if a else 0
        nxt = [n for n in cur.base.elements_upto(bound) if n >= lo]
        if not nxt:
            paths += 1
            inconclusive += 1
            continue
        for n in nxt:
            try:
                stack.append((a + (n,), child_barrier(cur, n)))
            except DescriptorError as exc:
                return FrontCounterexample((a + (n,),), str(exc))
    return FrontOk(len(elems), paths, inconclusive)


@dataclass(frozen=True)
class Equal:
    witness: InfSetDesc


@dataclass(frozen=True)
class BProjectsToC:
    """Every element of B|M is a proper initial segment of an element of C|M."""

    witness: InfSetDesc


@dataclass(frozen=True)
class CProjectsToB:
    witness: InfSetDesc


@dataclass(frozen=True)
class Inconclusive:
    reason: str = "no witness within the search bound"


def _all_classify(elems: list[FiniteSet], other: BarrierDesc, want: Membership) -> bool:
    return all(classify(other, b) is want for b in elems)


def compare_barriers(desc_b: BarrierDesc, desc_c: BarrierDesc, depth: int):
    """Search arithmetic sets M = {t + k*d} with t <= depth, 1 <= d <= depth for B|M vs C|M."""
    for d in range(1, depth + 1):
        for t in range(depth + 1):
            cand = InfSetDesc((), t, d)
            m = cand.intersect(desc_b.base)
            m = m.intersect(desc_c.base) if m is not None else None
            if m is None:
                continue
            bm, cm = restrict(desc_b, m), restrict(desc_c, m)
            eb, ec = enumerate_barrier(bm, depth), enumerate_barrier(cm, depth)
            if not eb or not ec:
                continue
            if eb == ec:
                return Equal(m)
            if _all_classify(eb, cm, Membership.PROPER_INITIAL):
                return BProjectsToC(m)
            if _all_classify(ec, bm, Membership.PROPER_INITIAL):
                return CProjectsToB(m)
    return Inconclusive()


_KIND_NAMES = {Point: "point", FiniteRank: "finite_rank", Schreier: "schreier", Tower: "tower", Custom: "custom"}


def desc_to_json(desc: BarrierDesc) -> dict:
    out: dict = {"kind": _KIND_NAMES[type(desc)]}
    if isinstance(desc, FiniteRank):
        out["k"] = desc.k
    elif isinstance(desc, Tower):
        out["rank"] = format_ordinal(desc.rank)
    elif isinstance(desc, Custom):
        out["children"] = [{"n": n, "barrier": desc_to_json(c)} for n, c in desc.children]
        out["fallback"] = desc.fallback if isinstance(desc.fallback, str) else desc_to_json(desc.fallback)
        out["rank"] = format_ordinal(desc.declared_rank)
        if desc.extra:
            out["extra"] = [list(e) for e in desc.extra]
    if desc.base != NATURALS:
        out["base"] = desc.base.to_json()
    if desc.offset:
        out["offset"] = desc.offset
    return out


def desc_from_json(obj: Mapping) -> BarrierDesc:
    try:
        kind = obj["kind"]
    except (KeyError, TypeError):
        raise DescriptorError("barrier descriptor needs a 'kind'") from None
    common = {
        "base": InfSetDesc.from_json(obj["base"]) if "base" in obj else NATURALS,
        "offset": int(obj.get("offset", 0)),
    }
    if kind == "point":
        return Point(**common)
    if kind == "finite_rank":
        return FiniteRank(k=int(obj["k"]), **common)
    if kind == "schreier":
        return Schreier(**common)
    if kind == "tower":
        return Tower(rank=parse_ordinal(str(obj["rank"])), **common)
    if kind == "custom":
        fb = obj.get("fallback", TOWER_RULE)
        fallback = fb if isinstance(fb, str) else desc_from_json(fb)
        if isinstance(fallback, str) and fallback != TOWER_RULE:
            raise DescriptorError(f"unknown fallback rule {fallback!r}")
        children = tuple(sorted((int(c["n"]), desc_from_json(c["barrier"])) for c in obj.get("children", [])))
        extra = tuple(tuple(e) for e in obj.get("extra", []))
        return Custom(
            children=children,
            fallback=fallback,
            declared_rank=parse_ordinal(str(obj.get("rank", "0"))),
            extra=extra,
            **common,
        )
    raise DescriptorError(f"unknown barrier kind {kind!r}")


ALIASES = {"schreier": Schreier(), "point": Point()}
ALIASES.update({f"rank{k}": FiniteRank(k=k) for k in range(1, 6)})


def desc_from_alias(name: str) -> BarrierDesc:
    if name in ALIASES:
        return ALIASES[name]
    if name.startswith("tower:"):
        return Tower(rank=parse_ordinal(name[len("tower:") :]))
    raise DescriptorError(f"unknown barrier alias {name!r}")
