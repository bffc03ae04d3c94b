"""Finite sets of naturals, non-decreasing sequences, and the sigma / prec machinery.

Finite sets are plain tuples of strictly increasing ints; sequences are
tuples of non-decreasing ints.  Both are hashable and cheap to compare.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .ordinal import Ordering

FiniteSet = tuple[int, ...]
NonDecSeq = tuple[int, ...]


def fset(items: Iterable[int]) -> FiniteSet:
    """Normalise any iterable of naturals into a sorted duplicate-free tuple."""
    out = tuple(sorted(set(int(x) for x in items)))
    if out and out[0] < 0:
        raise ValueError("finite sets contain naturals only")
    return out


def is_strictly_increasing(a: Sequence[int]) -> bool:
    return all(x < y for x, y in zip(a, a[1:]))


def is_nondecreasing(s: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(s, s[1:]))


def is_initial(a: Sequence[int], b: Sequence[int]) -> bool:
    """a is an initial segment of b (possibly equal)."""
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


def is_proper_initial(a: Sequence[int], b: Sequence[int]) -> bool:
    return len(a) < len(b) and tuple(b[: len(a)]) == tuple(a)


def comparable(a: Sequence[int], b: Sequence[int]) -> bool:
    return is_initial(a, b) or is_initial(b, a)


def meet(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Longest common initial segment."""
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return tuple(a[:n])


def closure(sets: Iterable[Sequence[int]]) -> set[tuple[int, ...]]:
    """All nonempty initial segments of the given sets."""
    out: set[tuple[int, ...]] = set()
    for s in sets:
        for m in range(1, len(s) + 1):
            out.add(tuple(s[:m]))
    return out


def sigma(a: Sequence[int]) -> NonDecSeq:
    """(a0, a1 - 1, a2 - 2, ...); a bijection from finite sets onto non-decreasing sequences."""
    return tuple(x - i for i, x in enumerate(a))


def sigma_inv(s: Sequence[int]) -> FiniteSet:
    return tuple(x + i for i, x in enumerate(s))


def prec_key(s: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort key realising prec on sequences.

    Smaller maximum first; equal maxima fall back to lexicographic order in
    which a proper initial segment precedes its extensions, which is exactly
    Python's tuple order.  The empty sequence gets max -1 and so comes first.
    """
    t = tuple(s)
    return (max(t) if t else -1, t)


def set_prec_key(a: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """prec applied to sigma(a)."""
    return prec_key(sigma(a))


def prec_cmp(s: Sequence[int], t: Sequence[int]) -> Ordering:
    ks, kt = prec_key(s), prec_key(t)
    if ks < kt:
        return Ordering.LESS
    if ks > kt:
        return Ordering.GREATER
    return Ordering.EQUAL


def format_set(a: Sequence[int]) -> str:
    return "{" + ",".join(str(x) for x in a) + "}"


def format_seq(s: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in s) + ")"
