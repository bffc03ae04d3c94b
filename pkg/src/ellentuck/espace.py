"""Members of the space at finite scale.

A member is never stored as an infinite set.  It is the outcome of the
column-interleaving schedule that defines full approximations, driven by a
choice rule.  The schedule works on the W-side tree:

* a column rooted at a leaf contributes that leaf once and nothing later;
* a column rooted at an inner node, at its first stage, receives one leaf
  below it (which opens its first sub-column); at every later stage it runs
  one stage of each of its sub-columns in order and then receives one leaf
  opening a new sub-column.

Each "receive a leaf below node" is a request.  The leaf placed for a
request at node ``stem`` must properly extend ``stem`` and its first node
past ``stem`` must be fresh: larger than the maximum of everything placed
so far.  The leaves in placement order are the member's prec enumeration,
and the leaves placed by the end of stage k are its k-th full approximation.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

from .barrier import BarrierDesc, DescriptorError, Point, shift_desc
from .finite import FiniteSet, closure, is_initial, is_proper_initial
from .seqspace import NotInSpace, SpaceIndex, space_index

Approx = tuple[FiniteSet, ...]
Admit = Callable[[FiniteSet, FiniteSet], bool]

DEFAULT_SEARCH_SPAN = 400_000


class SpaceError(ValueError):
    """Violated precondition in a space operation."""


class SearchExhausted(RuntimeError):
    """No admissible leaf was found within the search span."""


class _Column:
    __slots__ = ("root", "is_leaf", "columns", "stages_done")

    def __init__(self, root: FiniteSet, is_leaf: bool):
        self.root = root
        self.is_leaf = is_leaf
        self.columns: list[_Column] = []
        self.stages_done = 0

    def absorb_first(self, leaf: FiniteSet, index: SpaceIndex) -> None:
        self.stages_done = 1
        if not self.is_leaf:
            self._open_column(leaf, index)

    def _open_column(self, leaf: FiniteSet, index: SpaceIndex) -> None:
        node = leaf[: len(self.root) + 1]
        col = _Column(node, node == leaf)
        col.absorb_first(leaf, index)
        self.columns.append(col)

    def run_stage(self, index: SpaceIndex):
        if self.stages_done == 0:
            leaf = yield self.root
            self.absorb_first(leaf, index)
            return
        if not self.is_leaf:
            for col in list(self.columns):
                yield from col.run_stage(index)
            leaf = yield self.root
            self._open_column(leaf, index)
        self.stages_done += 1


class Schedule:
    """The request sequence of the schedule, advanced one placed leaf at a time."""

    def __init__(self, index: SpaceIndex):
        if isinstance(index.barrier, Point):
            raise SpaceError("the rank-0 barrier has no space of members")
        self.index = index
        self.top = _Column((), False)
        self.leaves: list[FiniteSet] = []
        self.stage_ends: list[int] = [0]
        self._events = self._run()
        self.pending: FiniteSet = next(self._events)

    def _run(self):
        while True:
            yield from self.top.run_stage(self.index)
            self.stage_ends.append(len(self.leaves))

    @property
    def floor(self) -> int:
        return self.leaves[-1][-1] if self.leaves else -1

    def admissible(self, leaf: FiniteSet) -> str | None:
        """None if ``leaf`` may be placed next, otherwise the reason it may not."""
        stem = self.pending
        if not is_proper_initial(stem, leaf):
            return f"{list(leaf)} does not properly extend the stem {list(stem)}"
        if leaf[len(stem)] <= self.floor:
            return f"{list(leaf)} is not fresh above {self.floor}"
        if not self.index.w_is_leaf(leaf):
            return f"{list(leaf)} is not an element of the top member"
        return None

    def place(self, leaf: FiniteSet) -> None:
        leaf = tuple(leaf)
        reason = self.admissible(leaf)
        if reason is not None:
            raise SpaceError(reason)
        self.leaves.append(leaf)
        self.pending = self._events.send(leaf)


@dataclass(frozen=True)
class StemInfo:
    w_u: FiniteSet
    a_u: FiniteSet | None


class SpaceMember:
    """A member generated by always placing the prec-least admissible leaf accepted by ``admit``.

    ``admit(stem, leaf)`` sees the current request node, so rules can treat
    different parts of the tree differently.  ``prefix`` is placed first
    verbatim (it must be a valid approximation).
    """

    def __init__(
        self,
        barrier: BarrierDesc,
        admit: Admit | None = None,
        prefix: Sequence[Sequence[int]] = (),
        index: SpaceIndex | None = None,
        name: str = "",
        search_span: int = DEFAULT_SEARCH_SPAN,
    ):
        self.barrier = barrier
        self.index = index or space_index(barrier)
        self.admit = admit
        self.name = name or ("W" if admit is None and not prefix else "member")
        self.search_span = search_span
        self._schedule = Schedule(self.index)
        self._set: set[FiniteSet] = set()
        self._lock = threading.RLock()
        for w in prefix:
            self._place(tuple(w))

    def _place(self, w: FiniteSet) -> None:
        self._schedule.place(w)
        self._set.add(w)

    def _choose(self) -> FiniteSet:
        sched = self._schedule
        stem, floor = sched.pending, sched.floor
        depth = len(stem)
        for _, leaf in self.index.leaf_w_from(floor + 1, floor + 1 + self.search_span):
            if len(leaf) <= depth or leaf[:depth] != stem or leaf[depth] <= floor:
                continue
            if self.admit is None or self.admit(stem, leaf):
                return leaf
        raise SearchExhausted(
            f"no admissible leaf below {list(stem)} fresh above {floor} within {self.search_span} positions"
        )

    def _extend(self) -> None:
        self._place(self._choose())

    def restrict(self, k: int) -> Approx:
        if k < 0:
            raise SpaceError("k must be a natural number")
        with self._lock:
            while len(self._schedule.leaves) < k:
                self._extend()
            return tuple(self._schedule.leaves[:k])

    def full_approx(self, k: int) -> Approx:
        with self._lock:
            while len(self._schedule.stage_ends) <= k:
                self._extend()
            return tuple(self._schedule.leaves[: self._schedule.stage_ends[k]])

    def upto_max(self, bound: int) -> Approx:
        """All elements with maximum at most ``bound``."""
        with self._lock:
            while not self._schedule.leaves or self._schedule.leaves[-1][-1] <= bound:
                self._extend()
            return tuple(w for w in self._schedule.leaves if w[-1] <= bound)

    def contains(self, w: Sequence[int]) -> bool:
        w = tuple(w)
        if not w:
            return False
        with self._lock:
            while not self._schedule.leaves or self._schedule.leaves[-1][-1] < w[-1]:
                self._extend()
            return w in self._set

    def __contains__(self, w: Sequence[int]) -> bool:
        return self.contains(w)

    def stage_count(self) -> int:
        return len(self._schedule.stage_ends) - 1

    def __repr__(self) -> str:
        return f"SpaceMember({self.name}, placed={len(self._schedule.leaves)})"


class ExplicitPrefix:
    """A bare list standing in for a member; used to feed corrupted data to the axiom checks."""

    def __init__(self, elements: Sequence[Sequence[int]], name: str = "explicit"):
        self.elements = tuple(tuple(w) for w in elements)
        self.name = name

    def restrict(self, k: int) -> Approx:
        if k > len(self.elements):
            raise SpaceError("explicit prefix too short")
        return self.elements[:k]

    def upto_max(self, bound: int) -> Approx:
        return tuple(w for w in self.elements if max(w) <= bound)

    def contains(self, w: Sequence[int]) -> bool:
        return tuple(w) in self.elements


def top_member(barrier: BarrierDesc) -> SpaceMember:
    return SpaceMember(barrier, name="W")


def filtered_member(base: SpaceMember, keep: Callable[[FiniteSet], bool], name: str = "") -> SpaceMember:
    """Greedy member using only elements of ``base`` that ``keep`` accepts."""

    def admit(stem: FiniteSet, leaf: FiniteSet) -> bool:
        return keep(leaf) and base.contains(leaf)

    return SpaceMember(base.barrier, admit, index=base.index, name=name or f"{base.name}|filtered")


def seeded_filter(seed: int, keep_ratio: float = 0.6) -> Callable[[FiniteSet], bool]:
    """Deterministic pseudo-random subset of leaves, stable across runs and platforms."""

    def keep(leaf: FiniteSet) -> bool:
        digest = hashlib.blake2b(repr((seed, leaf)).encode(), digest_size=8).digest()
        return int.from_bytes(digest, "big") / 2**64 < keep_ratio

    return keep


def restrict_k(member: SpaceMember, k: int) -> Approx:
    return member.restrict(k)


def full_approx(member: SpaceMember, k: int) -> Approx:
    return member.full_approx(k)


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    reason: str
    position: int


@dataclass(frozen=True)
class InconclusiveAtBound:
    bound: int


def _replay(index: SpaceIndex, u: Sequence[Sequence[int]]) -> Schedule | Invalid:
    sched = Schedule(index)
    for i, w in enumerate(u):
        w = tuple(w)
        reason = None if w else "empty set is not an element"
        reason = reason or sched.admissible(w)
        if reason is not None:
            return Invalid(reason, i)
        sched.place(w)
    return sched


def is_valid_approx(barrier: BarrierDesc, u: Sequence[Sequence[int]], bound: int):
    """Whether u = r_|u|(X) for some member X.

    Replaying u through the schedule decides this exactly: every admissible
    prefix extends, since each request has infinitely many fresh leaves.
    Inputs reaching past ``bound`` are reported as inconclusive rather than
    growing the index without limit.
    """
    u = [tuple(w) for w in u]
    if any(w and w[-1] > bound for w in u):
        return InconclusiveAtBound(bound)
    out = _replay(space_index(barrier), u)
    return out if isinstance(out, Invalid) else Valid()


def stem_of(barrier: BarrierDesc, u: Sequence[Sequence[int]], bound: int | None = None) -> StemInfo:
    idx = space_index(barrier)
    out = _replay(idx, u)
    if isinstance(out, Invalid):
        raise SpaceError(f"not a valid approximation: {out.reason}")
    w_u = out.pending
    return StemInfo(w_u, idx.rho_inv(w_u) if w_u else None)


def _require_subset(u: Sequence[FiniteSet], member) -> None:
    missing = [w for w in u if not member.contains(w)]
    if missing:
        raise SpaceError(f"{[list(w) for w in missing]} not in the member")


def one_extensions(u: Sequence[Sequence[int]], member: SpaceMember, bound: int) -> list[FiniteSet]:
    """All w in the member, max(w) <= bound, with u + [w] a valid approximation."""
    u = [tuple(w) for w in u]
    _require_subset(u, member)
    out = _replay(member.index, u)
    if isinstance(out, Invalid):
        raise SpaceError(f"not a valid approximation: {out.reason}")
    stem, floor = out.pending, out.floor
    return [
        w
        for w in member.upto_max(bound)
        if is_proper_initial(stem, w) and w[len(stem)] > floor
    ]


def depth_of(member: SpaceMember, u: Sequence[Sequence[int]]) -> float:
    """Least n with u ⊆ r_n(member); math.inf when some element is absent."""
    u = [tuple(w) for w in u]
    if not u:
        return 0
    if not all(member.contains(w) for w in u):
        return math.inf
    top = max(w[-1] for w in u)
    prefix = member.upto_max(top)
    return max(prefix.index(w) for w in u) + 1


SubsArg = Union[Mapping[int, SpaceMember], Callable[[int], "SpaceMember | None"]]


def _lookup(subs: SubsArg, n: int):
    if callable(subs) and not isinstance(subs, Mapping):
        return subs(n)
    return subs.get(n)


def fuse_columns(member: SpaceMember, subs: SubsArg) -> SpaceMember:
    """A member Z <= member whose column at node {n} lies inside subs(n) whenever it is nonempty.

    ``subs`` maps the first W-node value n of a column to a member whose
    column n is used; columns with no entry are dropped.
    """
    if isinstance(subs, Mapping) and not subs:
        raise SpaceError("no columns to fuse")

    def admit(stem: FiniteSet, leaf: FiniteSet) -> bool:
        target = _lookup(subs, leaf[0])
        return target is not None and target.contains(leaf) and member.contains(leaf)

    return SpaceMember(member.barrier, admit, index=member.index, name=f"fuse({member.name})")


def fuse_above(u: Sequence[Sequence[int]], member: SpaceMember, target) -> SpaceMember:
    """Z in [u, member] whose one-extensions of u lie in ``target``.

    ``target`` is a member (its elements are used) or a predicate on leaves.
    Requests at or below the stem of u are served from ``target``; every
    other request takes the prec-least admissible element of ``member``.
    """
    u = [tuple(w) for w in u]
    _require_subset(u, member)
    info = stem_of(member.barrier, u)
    w_u = info.w_u
    in_target = target.contains if hasattr(target, "contains") else target

    def admit(stem: FiniteSet, leaf: FiniteSet) -> bool:
        if not member.contains(leaf):
            return False
        return in_target(leaf) if is_initial(w_u, stem) else True

    return SpaceMember(member.barrier, admit, prefix=u, index=member.index, name=f"fuse_above({member.name})")


def shifted_barrier(index: SpaceIndex, w_star: FiniteSet) -> tuple[BarrierDesc, FiniteSet]:
    """(B^a, a) for a = rho_inv(w_star)."""
    a = index.rho_inv(w_star)
    return shift_desc(index.w_residual(w_star), a[-1] + 1), a


def shift_above(member: SpaceMember, w_star: Sequence[int]) -> SpaceMember:
    """The copy of member restricted below w_star, moved into the space over B^a."""
    w_star = tuple(w_star)
    idx = member.index
    if not w_star or not idx.w_is_node(w_star) or idx.w_is_leaf(w_star):
        raise SpaceError(f"{list(w_star)} is not an inner node of the top member")
    if not _has_below(member, w_star):
        raise SpaceError(f"{list(w_star)} is not a node of the member's tree")
    shifted, a = shifted_barrier(idx, w_star)
    sub_idx = space_index(shifted)
    d = a[-1] + 1

    def preimage(leaf: FiniteSet) -> FiniteSet:
        c = sub_idx.rho_inv(leaf)
        return idx.rho(a + tuple(x + d for x in c))

    def admit(stem: FiniteSet, leaf: FiniteSet) -> bool:
        return member.contains(preimage(leaf))

    out = SpaceMember(shifted, admit, index=sub_idx, name=f"shift({member.name},{list(w_star)})")
    out.preimage = preimage  # type: ignore[attr-defined]
    return out


def _has_below(member: SpaceMember, w_star: FiniteSet, probe: int = 2000) -> bool:
    for k in range(1, probe):
        if is_proper_initial(w_star, member.restrict(k)[-1]):
            return True
    return False


# ---------------------------------------------------------------------------
# bounded axiom checks


@dataclass
class AxiomReport:
    barrier: str
    bound: int
    samples: int
    passed: dict[str, bool] = field(default_factory=dict)
    failures: dict[str, list] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def fail(self, axiom: str, witness) -> None:
        self.passed[axiom] = False
        self.failures.setdefault(axiom, []).append(witness)

    def ok(self, axiom: str) -> None:
        self.passed.setdefault(axiom, True)

    def to_json(self) -> dict:
        return {
            "barrier": self.barrier,
            "bound": self.bound,
            "samples": self.samples,
            "passed": dict(self.passed),
            "all_passed": self.all_passed,
            "failures": {k: [repr(w) for w in v[:5]] for k, v in self.failures.items()},
            "notes": dict(self.notes),
        }


AXIOMS = ("A.1(1)", "A.1(2)", "A.1(3)", "A.2(1)", "A.2(2)", "A.2(3)", "A.3(1)", "A.3(2)")


def sample_members(barrier: BarrierDesc, samples: int) -> list[SpaceMember]:
    top = top_member(barrier)
    out = [top]
    for seed in range(1, samples):
        out.append(filtered_member(top, seeded_filter(seed), name=f"sample{seed}"))
    return out


def _prefixes(member, bound: int) -> list[Approx]:
    elems = member.upto_max(bound)
    return [tuple(elems[:n]) for n in range(len(elems) + 1)]


def _check_a1(report: AxiomReport, members: list, bound: int) -> None:
    pre = {id(m): _prefixes(m, bound) for m in members}
    for m in members:
        if pre[id(m)][0] != ():
            report.fail("A.1(1)", (m.name, "r_0 is not empty"))
    report.ok("A.1(1)")
    for x, y in itertools.combinations(members, 2):
        px, py = pre[id(x)], pre[id(y)]
        if set(px[-1]) != set(py[-1]) and all(set(a) == set(b) for a, b in zip(px, py)):
            # the truncations differ but no restriction tells them apart
            if len(px) == len(py):
                report.fail("A.1(2)", (x.name, y.name))
    report.ok("A.1(2)")
    for x, y in itertools.product(members, repeat=2):
        px, py = pre[id(x)], pre[id(y)]
        by_set: dict[frozenset, int] = {}
        for m, a in enumerate(py):
            by_set.setdefault(frozenset(a), m)
        for n, a in enumerate(px):
            m = by_set.get(frozenset(a))
            if m is None:
                continue
            if m != n or any(frozenset(px[i]) != frozenset(py[i]) for i in range(n)):
                report.fail("A.1(3)", {"X": x.name, "Y": y.name, "n": n, "m": m, "r_n": a})
                break
    report.ok("A.1(3)")


def _check_a2(report: AxiomReport, members: list, bound: int, barrier: BarrierDesc) -> None:
    top = members[0]
    top_pre = _prefixes(top, bound)
    for y in members[1:]:
        ys = y.upto_max(bound)
        # A.2(1): Y <= X iff every r_n(Y) sits inside some r_m(X)
        subset = all(top.contains(w) for w in ys)
        every_n = all(any(set(r) <= set(t) for t in top_pre) for r in _prefixes(y, bound))
        if subset != every_n:
            report.fail("A.2(1)", (y.name, subset, every_n))
    report.ok("A.2(1)")
    for x in members[:3]:
        for u in _prefixes(x, bound)[:7]:
            below = [
                v
                for r in range(len(u) + 1)
                for v in itertools.combinations(u, r)
                if isinstance(is_valid_approx(barrier, sorted(v, key=lambda w: w[-1]), bound), Valid)
            ]
            if len(below) > 2 ** len(u):
                report.fail("A.2(2)", u)
    report.ok("A.2(2)")
    for y in members[1:]:
        py = _prefixes(y, bound)
        for u in py:
            for v in top_pre:
                if not set(u) <= set(v):
                    continue
                for w in _prefixes(ExplicitPrefix(u), bound):
                    if not any(set(w) <= set(z) for z in _prefixes(ExplicitPrefix(v), bound)):
                        report.fail("A.2(3)", (u, v, w))
                break
    report.ok("A.2(3)")


def _check_a3(report: AxiomReport, members: list, bound: int) -> None:
    top = members[0]
    for y in members[1:]:
        elems = y.upto_max(bound)
        for k in range(1, min(len(elems), 5) + 1):
            u = elems[:k]
            d = depth_of(top, u)
            if d == math.inf:
                report.fail("A.3(1)", ("depth infinite", u))
                continue
            head = top.restrict(int(d))
            keep = seeded_filter(k)
            below = SpaceMember(top.barrier, lambda s, w: keep(w) and top.contains(w), prefix=head, index=top.index)
            try:
                z = SpaceMember(top.barrier, lambda s, w, b=below: b.contains(w), prefix=u, index=top.index)
                ext = z.restrict(len(u) + 2)
            except SearchExhausted as exc:
                report.notes.setdefault("A.3(1)", f"inconclusive at {u}: {exc}")
                continue
            except SpaceError as exc:
                report.fail("A.3(1)", (u, str(exc)))
                continue
            if not all(below.contains(w) for w in ext):
                report.fail("A.3(1)", (u, ext))
            # A.3(2): Y' in [depth_X(u), X] takes elements from Y wherever the
            # request hangs off a node of u-hat, and from X below the other nodes of r_d(X)
            u_hat = closure(u) | {()}
            head_hat = closure(head) | {()}

            def from_y(stem, uh=u_hat, hh=head_hat):
                t = max((stem[:i] for i in range(len(stem) + 1) if stem[:i] in hh), key=len)
                return t in uh

            yprime = SpaceMember(
                top.barrier,
                lambda s, w, yy=y, fy=from_y: (yy.contains(w) if fy(s) else True) and top.contains(w),
                prefix=head,
                index=top.index,
            )
            try:
                z2 = SpaceMember(top.barrier, lambda s, w, yp=yprime: yp.contains(w), prefix=u, index=top.index)
                ext2 = z2.restrict(len(u) + 2)
            except SearchExhausted as exc:
                report.notes.setdefault("A.3(2)", f"inconclusive at {u}: {exc}")
                continue
            except SpaceError as exc:
                report.fail("A.3(2)", (u, str(exc)))
                continue
            if yprime.restrict(int(d)) != head or not all(y.contains(w) for w in ext2[len(u) :]):
                report.fail("A.3(2)", (u, ext2))
    report.ok("A.3(1)")
    report.ok("A.3(2)")


def check_axioms(barrier: BarrierDesc, bound: int, samples: int, extra_members: Iterable = ()) -> AxiomReport:
    """Bounded structural checks of A.1-A.3 on W_B and seeded sub-members.

    ``extra_members`` may include ``ExplicitPrefix`` objects (for negative
    controls); they join the A.1 checks.
    """
    from .barrier import desc_to_json

    members = sample_members(barrier, samples)
    report = AxiomReport(str(desc_to_json(barrier)), bound, samples)
    extras = list(extra_members)
    _check_a1(report, members + extras, bound)
    _check_a2(report, members, bound, barrier)
    _check_a3(report, members, bound)
    for ax in AXIOMS:
        report.ok(ax)
    return report


__all__ = [
    "Approx",
    "Schedule",
    "SpaceMember",
    "ExplicitPrefix",
    "StemInfo",
    "Valid",
    "Invalid",
    "InconclusiveAtBound",
    "SpaceError",
    "SearchExhausted",
    "top_member",
    "filtered_member",
    "seeded_filter",
    "restrict_k",
    "full_approx",
    "is_valid_approx",
    "stem_of",
    "one_extensions",
    "depth_of",
    "fuse_columns",
    "fuse_above",
    "shift_above",
    "shifted_barrier",
    "check_axioms",
    "AxiomReport",
    "NotInSpace",
    "DescriptorError",
]
