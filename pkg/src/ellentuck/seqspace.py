"""The sequence side of a barrier: the prec enumeration nu, the top member W_B and rho.

``SpaceIndex`` lazily lists the nonempty sequences of S_B-hat in prec
order.  Every sequence with maximum m is some earlier non-leaf sequence t
(max(t) < m, possibly empty) followed by one or more copies of m, so a
level can be produced from the previous levels alone.
"""

from __future__ import annotations

import bisect
import threading
from typing import Iterable, Sequence

from .barrier import BarrierDesc, DescriptorError, Membership, Point, child_barrier, classify, normal
from .finite import (
    FiniteSet,
    NonDecSeq,
    is_nondecreasing,
    prec_cmp,
    prec_key,
    sigma,
    sigma_inv,
)

__all__ = [
    "SpaceIndex",
    "sigma",
    "sigma_inv",
    "prec_cmp",
    "prec_key",
    "nu",
    "nu_inv",
    "w_node",
    "rho",
    "rho_inv",
    "enumerate_w",
]


class NotInSpace(ValueError):
    """The sequence or set is not a node of the tree in question."""


class SpaceIndex:
    """Memoised prec-enumeration of S_B-hat minus the empty sequence."""

    def __init__(self, barrier: BarrierDesc):
        self.barrier = normal(barrier)
        self.nodes: list[NonDecSeq] = []
        self.nu_of: dict[NonDecSeq, int] = {}
        self.residual: dict[NonDecSeq, BarrierDesc] = {(): self.barrier}
        self._open: list[NonDecSeq] = [] if isinstance(self.barrier, Point) else [()]
        self._leaf_positions: list[int] = []
        self.levels_done = -1
        self._w_cache: dict[NonDecSeq, FiniteSet] = {}
        self._lock = threading.Lock()

    def _build_level(self, m: int) -> None:
        fresh: list[NonDecSeq] = []
        for t in self._open:
            if t and t[-1] >= m:
                continue
            s, desc = t, self.residual[t]
            while not isinstance(desc, Point):
                x = m + len(s)
                if x not in desc.base:
                    break
                desc = child_barrier(desc, x)
                s = s + (m,)
                self.residual[s] = desc
                fresh.append(s)
        fresh.sort()
        for s in fresh:
            self.nu_of[s] = len(self.nodes)
            if isinstance(self.residual[s], Point):
                self._leaf_positions.append(len(self.nodes))
            else:
                self._open.append(s)
            self.nodes.append(s)
        self.levels_done = m

    def grow_to_level(self, m: int) -> None:
        if m <= self.levels_done:
            return
        with self._lock:
            for level in range(self.levels_done + 1, m + 1):
                self._build_level(level)

    def grow_to_count(self, count: int, leaves: bool = False) -> None:
        if isinstance(self.barrier, Point):
            return
        target = self._leaf_positions if leaves else self.nodes
        while len(target) < count:
            self.grow_to_level(self.levels_done + 1)

    def contains_seq(self, s: Sequence[int]) -> bool:
        s = tuple(s)
        if not s or not is_nondecreasing(s) or s[0] < 0:
            return False
        return classify(self.barrier, sigma_inv(s)) in (Membership.IN_BARRIER, Membership.PROPER_INITIAL)

    def is_leaf(self, s: Sequence[int]) -> bool:
        s = tuple(s)
        self.nu(s)
        return isinstance(self.residual[s], Point)

    def residual_of(self, s: Sequence[int]) -> BarrierDesc:
        s = tuple(s)
        self.nu(s)
        return self.residual[s]

    def nu(self, s: Sequence[int]) -> int:
        s = tuple(s)
        if s in self.nu_of:
            return self.nu_of[s]
        if not self.contains_seq(s):
            raise NotInSpace(f"{s} is not a nonempty node of the sequence tree")
        self.grow_to_level(max(s))
        return self.nu_of[s]

    def nu_inv(self, n: int) -> NonDecSeq:
        if n < 0:
            raise NotInSpace("negative position")
        if isinstance(self.barrier, Point):
            raise NotInSpace("the rank-0 tree has no nonempty nodes")
        self.grow_to_count(n + 1)
        return self.nodes[n]

    def w_node(self, s: Sequence[int]) -> FiniteSet:
        s = tuple(s)
        w = self._w_cache.get(s)
        if w is None:
            self.nu(s)
            w = self._w_cache[s] = tuple(self.nu_of[s[:m]] for m in range(1, len(s) + 1))
        return w

    def seq_of_w(self, w: Sequence[int]) -> NonDecSeq | None:
        """The sequence whose W-node is w, or None if w is not a node of W-hat."""
        w = tuple(w)
        if not w or isinstance(self.barrier, Point):
            return None
        s = self.nu_inv(w[-1])
        if len(s) != len(w):
            return None
        return s if self.w_node(s) == w else None

    def rho(self, b: Sequence[int]) -> FiniteSet:
        if not b:
            raise NotInSpace("rho is defined on nonempty nodes only")
        return self.w_node(sigma(tuple(b)))

    def rho_inv(self, w: Sequence[int]) -> FiniteSet:
        s = self.seq_of_w(w)
        if s is None:
            raise NotInSpace(f"{tuple(w)} is not a node of the top member's tree")
        return sigma_inv(s)

    def w_is_node(self, w: Sequence[int]) -> bool:
        return self.seq_of_w(w) is not None

    def w_is_leaf(self, w: Sequence[int]) -> bool:
        s = self.seq_of_w(w)
        return s is not None and isinstance(self.residual[s], Point)

    def w_residual(self, w: Sequence[int]) -> BarrierDesc:
        """Residual barrier below the set rho_inv(w); the whole barrier for the empty node."""
        w = tuple(w)
        if not w:
            return self.barrier
        s = self.seq_of_w(w)
        if s is None:
            raise NotInSpace(f"{w} is not a node of the top member's tree")
        return self.residual[s]

    def leaf_w_from(self, start: int, limit: int):
        """Yield (position, W-leaf) for leaves at positions >= start, growing as needed, up to ``limit``."""
        if isinstance(self.barrier, Point):
            return
        while True:
            i = bisect.bisect_left(self._leaf_positions, start)
            while i >= len(self._leaf_positions):
                if len(self.nodes) > limit:
                    return
                self.grow_to_level(self.levels_done + 1)
            pos = self._leaf_positions[i]
            if pos > limit:
                return
            yield pos, self.w_node(self.nodes[pos])
            start = pos + 1

    def leaf_seqs(self, count: int) -> list[NonDecSeq]:
        if isinstance(self.barrier, Point):
            return []
        self.grow_to_count(count, leaves=True)
        return [self.nodes[i] for i in self._leaf_positions[:count]]

    def leaves_upto_max(self, bound: int) -> list[FiniteSet]:
        """All W-leaves whose maximum is at most bound, in prec order."""
        if isinstance(self.barrier, Point):
            return []
        while len(self.nodes) <= bound:
            self.grow_to_level(self.levels_done + 1)
        return [self.w_node(self.nodes[i]) for i in self._leaf_positions if i <= bound]

    def nodes_upto_max(self, bound: int) -> list[FiniteSet]:
        if isinstance(self.barrier, Point):
            return []
        while len(self.nodes) <= bound:
            self.grow_to_level(self.levels_done + 1)
        return [self.w_node(s) for s in self.nodes[: bound + 1]]

    def enumerate_w(self, count: int) -> list[FiniteSet]:
        return [self.w_node(s) for s in self.leaf_seqs(count)]


_INDEXES: dict[BarrierDesc, SpaceIndex] = {}
_INDEX_LOCK = threading.Lock()


def space_index(barrier: BarrierDesc) -> SpaceIndex:
    """Shared memoised index per descriptor."""
    with _INDEX_LOCK:
        idx = _INDEXES.get(barrier)
        if idx is None:
            idx = _INDEXES[barrier] = SpaceIndex(barrier)
        return idx


def nu(idx: SpaceIndex, s: Sequence[int]) -> int:
    return idx.nu(s)


def nu_inv(idx: SpaceIndex, n: int) -> NonDecSeq:
    return idx.nu_inv(n)


def w_node(idx: SpaceIndex, s: Sequence[int]) -> FiniteSet:
    return idx.w_node(s)


def rho(idx: SpaceIndex, b: Sequence[int]) -> FiniteSet:
    return idx.rho(b)


def rho_inv(idx: SpaceIndex, w: Sequence[int]) -> FiniteSet:
    return idx.rho_inv(w)


def enumerate_w(idx: SpaceIndex, count: int) -> list[FiniteSet]:
    return idx.enumerate_w(count)


def closure_nodes(sets: Iterable[Sequence[int]]) -> list[FiniteSet]:
    from .finite import closure

    return sorted(closure(sets), key=lambda w: (w[-1], w))


__all__ += ["space_index", "NotInSpace", "closure_nodes", "DescriptorError"]
