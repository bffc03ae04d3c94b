"""Uniform projections, canonical equivalence relations and their finite-scale search.

Everything works on the W-side tree: stems, projection targets and front
elements are W-nodes.  Searches only ever see a truncation, so each result
is a certificate that an independent checker (``ellentuck.certcheck``)
re-verifies before it is returned.  Failure to find one is reported as
inconclusive, never as a negative answer.
"""

from __future__ import annotations

import ast
import itertools
import operator
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

from . import certcheck
from .barrier import BarrierDesc, Point, enumerate_barrier, normal, rank_of
from .espace import Approx, SpaceMember, stem_of
from .finite import FiniteSet, closure, is_initial, is_proper_initial
from .ordinal import ONE, ZERO, Ordinal, successor
from .seqspace import SpaceIndex, space_index


class ProjError(ValueError):
    """Malformed projection descriptor or a point outside its domain."""


class BudgetExhausted(RuntimeError):
    pass


class _EmptyMark:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = _EmptyMark()


# ---------------------------------------------------------------------------
# projection descriptors


@dataclass(frozen=True)
class Collapse:
    """P = {root}: every point projects to nothing."""

    root: FiniteSet


@dataclass(frozen=True)
class Full:
    """P = the points below root themselves (the identity projection)."""

    root: FiniteSet


@dataclass(frozen=True)
class Split:
    """P is the union of one projection per sub-column root + (n,).

    ``children`` lists the sub-columns explicitly; ``rest`` ("collapse" or
    "full") covers any sub-column not listed, so rule-like projections stay
    finite to describe.
    """

    root: FiniteSet
    children: tuple[tuple[int, "UProjDesc"], ...] = ()
    rest: str | None = None
    rank_mode: str = "constant"

    def __post_init__(self) -> None:
        if self.rest not in (None, "collapse", "full") and not _levels_rule(self.rest):
            raise ProjError(f"unknown rest rule {self.rest!r}")
        if self.rank_mode not in ("constant", "increasing"):
            raise ProjError(f"unknown rank mode {self.rank_mode!r}")
        for n, child in self.children:
            if child.root != self.root + (n,):
                raise ProjError(f"child at {n} is rooted at {list(child.root)}, not {list(self.root + (n,))}")

    def child(self, n: int) -> "UProjDesc":
        for m, c in self.children:
            if m == n:
                return c
        node = self.root + (n,)
        if self.rest == "collapse":
            return Collapse(node)
        if self.rest == "full":
            return Full(node)
        if _levels_rule(self.rest):
            return levels(node, int(self.rest.split(":")[1]))
        raise ProjError(f"no sub-projection for column {n} below {list(self.root)}")


UProjDesc = Union[Collapse, Full, Split]


def _levels_rule(rest) -> bool:
    return isinstance(rest, str) and rest.startswith("levels:") and rest[7:].isdigit() and int(rest[7:]) > 0


def first_level(root: Sequence[int]) -> Split:
    """Project every point to the node one step below ``root``."""
    return Split(tuple(root), (), rest="collapse")


def levels(root: Sequence[int], d: int) -> UProjDesc:
    """Project every point w to w[:len(root) + d]; d = 0 collapses.

    Sub-columns not listed follow the rule "levels:N", meaning project N
    further steps below the sub-column's root.
    """
    root = tuple(root)
    if d <= 0:
        return Collapse(root)
    return Split(root, (), rest="collapse" if d == 1 else f"levels:{d - 1}")


def depth_family(d: int) -> Callable[[FiniteSet], UProjDesc]:
    """Stem -> projection onto nodes of length at most d (the stem itself once it is that long)."""

    def make(stem: FiniteSet) -> UProjDesc:
        return levels(stem, d - len(stem))

    return make


def proj_target(p: UProjDesc, w: FiniteSet) -> FiniteSet:
    """The element of P below w; for a collapse this is the root itself."""
    if not is_proper_initial(p.root, w):
        raise ProjError(f"{list(w)} does not extend the root {list(p.root)}")
    while isinstance(p, Split):
        p = p.child(w[len(p.root)])
    return p.root if isinstance(p, Collapse) else w


def proj_apply(p: UProjDesc, w: Sequence[int]):
    w = tuple(w)
    target = proj_target(p, w)
    return EMPTY if isinstance(p, Collapse) else target


def proj_nodes(p: UProjDesc, points: Iterable[FiniteSet]) -> set[FiniteSet]:
    """P restricted to the truncation given by ``points``."""
    if isinstance(p, Collapse):
        return {p.root}
    return {proj_target(p, w) for w in points}


def proj_rank(p: UProjDesc, index: SpaceIndex) -> Ordinal:
    if isinstance(p, Collapse):
        return ZERO
    if isinstance(p, Full):
        return rank_of(index.w_residual(p.root)) if p.root else rank_of(index.barrier)
    if p.rank_mode == "increasing":
        return rank_of(index.w_residual(p.root)) if p.root else rank_of(index.barrier)
    ranks = {proj_rank(c, index) for _, c in p.children if not index.w_is_leaf(c.root)}
    if p.rest == "collapse":
        ranks.add(ZERO)
    if p.rest == "full":
        return rank_of(index.w_residual(p.root)) if p.root else rank_of(index.barrier)
    if len(ranks) > 1:
        raise ProjError(f"constant-rank split at {list(p.root)} has child ranks {sorted(map(str, ranks))}")
    return successor(ranks.pop()) if ranks else ONE


def simplify(p: UProjDesc, index: SpaceIndex) -> UProjDesc:
    """Rewrite splits that act as the identity into Full."""
    if not isinstance(p, Split):
        return p
    kids = tuple((n, simplify(c, index)) for n, c in p.children)
    identity = all(
        isinstance(c, Full) or (isinstance(c, Collapse) and index.w_is_leaf(c.root)) for _, c in kids
    )
    if kids and identity and p.rest in (None, "full"):
        return Full(p.root)
    return Split(p.root, kids, p.rest, p.rank_mode)


def validate_proj(p: UProjDesc, index: SpaceIndex, points: Sequence[FiniteSet], _top: bool = True) -> list[str]:
    """Problems with p as a uniform projection on the truncation ``points`` (empty if none).

    Below the top, a sub-column rooted at a leaf projects onto that leaf
    whatever its descriptor says, so it is accepted as is.
    """
    problems: list[str] = []
    if p.root and not index.w_is_node(p.root):
        return [f"root {list(p.root)} is not a node"]
    if p.root and index.w_is_leaf(p.root):
        if _top or isinstance(p, Split):
            problems.append(f"root {list(p.root)} is a leaf")
        return problems
    below = [w for w in points if is_proper_initial(p.root, w)]
    try:
        targets = proj_nodes(p, below)
    except ProjError as exc:
        return problems + [str(exc)]
    for t in targets:
        if not is_initial(p.root, t):
            problems.append(f"target {list(t)} is not above the root")
    for s, t in itertools.combinations(sorted(targets), 2):
        if is_initial(s, t) or is_initial(t, s):
            problems.append(f"targets {list(s)} and {list(t)} are comparable")
    if isinstance(p, Split):
        cols = sorted({w[len(p.root)] for w in below})
        ranks = []
        for n in cols:
            child = p.child(n)
            problems += validate_proj(child, index, below, _top=False)
            if not index.w_is_leaf(child.root):
                ranks.append(proj_rank(child, index))
        if p.rank_mode == "constant" and len(set(ranks)) > 1:
            problems.append(f"split at {list(p.root)} mixes child ranks")
        if p.rank_mode == "increasing" and any(not a < b for a, b in zip(ranks, ranks[1:])):
            problems.append(f"split at {list(p.root)} has child ranks that do not strictly increase")
    return problems


def proj_to_json(p: UProjDesc) -> dict:
    if isinstance(p, Collapse):
        return {"kind": "collapse", "root": list(p.root)}
    if isinstance(p, Full):
        return {"kind": "full", "root": list(p.root)}
    return {
        "kind": "split",
        "root": list(p.root),
        "children": [{"n": n, "proj": proj_to_json(c)} for n, c in p.children],
        "rest": p.rest,
        "rank_mode": p.rank_mode,
    }


def proj_from_json(obj: Mapping) -> UProjDesc:
    try:
        kind, root = obj["kind"], tuple(int(x) for x in obj["root"])
    except (KeyError, TypeError):
        raise ProjError("projection needs 'kind' and 'root'") from None
    if kind == "collapse":
        return Collapse(root)
    if kind == "full":
        return Full(root)
    if kind == "split":
        kids = tuple(sorted((int(c["n"]), proj_from_json(c["proj"])) for c in obj.get("children", [])))
        return Split(root, kids, obj.get("rest"), obj.get("rank_mode", "constant"))
    raise ProjError(f"unknown projection kind {kind!r}")


# ---------------------------------------------------------------------------
# equivalence relations


def _freeze(x):
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(y) for y in x)
    return x


def _thaw(x):
    if isinstance(x, tuple):
        return [_thaw(y) for y in x]
    return x


@dataclass(frozen=True)
class EquivRel:
    """A partition of a finite domain, stored as one class label per element."""

    domain: tuple
    labels: tuple[int, ...]
    _pos: dict = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if len(self.domain) != len(self.labels):
            raise ValueError("one label per domain element")
        object.__setattr__(self, "domain", tuple(_freeze(d) for d in self.domain))
        pos = {d: i for i, d in enumerate(self.domain)}
        if len(pos) != len(self.domain):
            raise ValueError("duplicate domain elements")
        object.__setattr__(self, "_pos", pos)

    @classmethod
    def from_key(cls, domain: Iterable, key: Callable[[Hashable], Hashable]) -> "EquivRel":
        domain = [_freeze(d) for d in domain]
        ids: dict = {}
        return cls(tuple(domain), tuple(ids.setdefault(key(d), len(ids)) for d in domain))

    @classmethod
    def from_classes(cls, classes: Iterable[Iterable]) -> "EquivRel":
        domain, labels = [], []
        for i, c in enumerate(classes):
            for d in c:
                domain.append(_freeze(d))
                labels.append(i)
        return cls(tuple(domain), tuple(labels))

    def __contains__(self, x) -> bool:
        return _freeze(x) in self._pos

    def label(self, x) -> int:
        try:
            return self.labels[self._pos[_freeze(x)]]
        except KeyError:
            raise KeyError(f"{x!r} is outside the relation's domain") from None

    def related(self, x, y) -> bool:
        return self.label(x) == self.label(y)

    def classes(self) -> list[list]:
        out: dict[int, list] = {}
        for d, l in zip(self.domain, self.labels):
            out.setdefault(l, []).append(d)
        return list(out.values())

    def restrict(self, sub: Iterable) -> "EquivRel":
        sub = [_freeze(s) for s in sub]
        return EquivRel(tuple(sub), tuple(self.label(s) for s in sub))

    def to_json(self) -> dict:
        return {"domain": [_thaw(d) for d in self.domain], "labels": list(self.labels)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "EquivRel":
        if "classes" in obj:
            return cls.from_classes(obj["classes"])
        return cls(tuple(obj["domain"]), tuple(int(x) for x in obj["labels"]))


def relation_of_projection(p: UProjDesc, points: Iterable[FiniteSet]) -> EquivRel:
    """E_P on the given points."""
    return EquivRel.from_key(points, lambda w: proj_apply(p, w))


# ---------------------------------------------------------------------------
# comparing projections


class UpOrder(Enum):
    P_BELOW = "PBelow"
    EQUAL = "Equal"
    P_ABOVE = "PAbove"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class UpComparison:
    order: UpOrder
    columns: tuple[int, ...] | None = None
    witness: tuple | None = None


def _strictly_below(ps: set, qs: set) -> bool:
    return all(
        is_proper_initial(p, q) or not (is_initial(p, q) or is_initial(q, p)) for p in ps for q in qs
    )


def _relation(ps: set, qs: set) -> UpOrder | None:
    if ps == qs:
        return UpOrder.EQUAL
    if _strictly_below(ps, qs):
        return UpOrder.P_BELOW
    if _strictly_below(qs, ps):
        return UpOrder.P_ABOVE
    return None


def up_compare(p: UProjDesc, q: UProjDesc, member: SpaceMember, depth: int) -> UpComparison:
    """Compare two projections on the member's points up to ``depth``.

    When no relation holds globally, keep the largest set of sub-columns on
    which one relation holds column by column (the restriction Y), and
    re-check it on exactly those columns.
    """
    if p.root != q.root:
        raise ProjError(f"roots differ: {list(p.root)} vs {list(q.root)}")
    points = [w for w in member.upto_max(depth) if is_proper_initial(p.root, w)]
    rel = _relation(proj_nodes(p, points), proj_nodes(q, points))
    if rel is not None:
        return UpComparison(rel)
    k = len(p.root)
    per_col: dict[UpOrder, list[int]] = defaultdict(list)
    for n in sorted({w[k] for w in points}):
        col = [w for w in points if w[k] == n]
        r = _relation(proj_nodes(p, col), proj_nodes(q, col))
        if r is not None:
            per_col[r].append(n)
    if not per_col:
        return UpComparison(UpOrder.INCONCLUSIVE, witness=tuple(points[:4]))
    best = max(per_col, key=lambda r: (len(per_col[r]), -list(UpOrder).index(r)))
    cols = tuple(per_col[best])
    kept = [w for w in points if w[k] in cols]
    ps, qs = proj_nodes(p, kept), proj_nodes(q, kept)
    if best is UpOrder.P_BELOW and isinstance(p, Collapse):
        ok = _strictly_below(ps, qs)
    else:
        ok = _relation(ps, qs) is best
    return UpComparison(best, cols) if ok else UpComparison(UpOrder.INCONCLUSIVE, witness=cols)


# ---------------------------------------------------------------------------
# canonization of one-extensions


@dataclass(frozen=True)
class OneExtCertificate:
    """E agrees with E_P on ``survivors``, the truncated one-extensions of u inside Z."""

    approx: Approx
    stem: FiniteSet
    survivors: tuple[FiniteSet, ...]
    proj: UProjDesc
    dropped: int

    def to_json(self) -> dict:
        return {
            "kind": "one-ext",
            "approx": [list(w) for w in self.approx],
            "stem": list(self.stem),
            "survivors": [list(w) for w in self.survivors],
            "proj": proj_to_json(self.proj),
            "dropped": self.dropped,
        }


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    partial: object | None = None


class _Budget:
    def __init__(self, limit: int):
        self.limit, self.used = limit, 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExhausted(f"node budget {self.limit} exhausted")


def _longest_increasing(items: list[tuple[int, Ordinal]]) -> list[int]:
    best: list[list[int]] = []
    for i, (_, r) in enumerate(items):
        cand = [j for j in range(i) if items[j][1] < r]
        chain = max((best[j] for j in cand), key=len, default=[]) + [i]
        best.append(chain)
    return max(best, key=len, default=[])


def _residual_rank(index: SpaceIndex, node: FiniteSet) -> Ordinal:
    return rank_of(index.w_residual(node)) if node else rank_of(index.barrier)


def _proj_of_rank(index: SpaceIndex, node: FiniteSet, point: FiniteSet, beta: Ordinal) -> UProjDesc | None:
    """A projection of rank beta on a column that holds the single point ``point``."""
    top = _residual_rank(index, node)
    if beta == top:
        return Full(node)
    if top < beta:
        return None
    if beta == ZERO:
        return Collapse(node)
    if not beta.is_finite():
        return None
    k = len(node)
    sub = _proj_of_rank(index, node + (point[k],), point, Ordinal.of(beta.finite_value() - 1))
    return None if sub is None else Split(node, ((point[k], sub),))


def _rank_pattern(
    index: SpaceIndex,
    children: dict[int, UProjDesc],
    kept: dict[int, list],
) -> tuple[str, dict[int, UProjDesc]]:
    """Choose the rank mode and the surviving columns so that the child ranks are uniform.

    Leaf columns carry no rank.  A column holding a single point can take
    any rank its residual allows, so it is fitted to the pattern of the
    others instead of deciding it.
    """
    fixed = {n: c for n, c in children.items() if not index.w_is_leaf(c.root) and len(kept[n]) > 1}
    free = [n for n, c in children.items() if not index.w_is_leaf(c.root) and len(kept[n]) == 1]
    out = {n: c for n, c in children.items() if index.w_is_leaf(c.root)}
    ranked = [(n, proj_rank(c, index)) for n, c in sorted(fixed.items())]
    counts = Counter(r for _, r in ranked)
    if ranked:
        top_rank = max(dict.fromkeys(r for _, r in ranked), key=lambda r: counts[r])
        inc = [ranked[i] for i in _longest_increasing(ranked)]
    else:
        top_rank, inc = ZERO, []
    if counts.get(top_rank, 0) >= len(inc):
        mode = "constant"
        out.update({n: fixed[n] for n, r in ranked if r == top_rank})
        for n in free:
            p = _proj_of_rank(index, children[n].root, kept[n][0], top_rank)
            if p is not None:
                out[n] = p
        return mode, out
    out.update({n: fixed[n] for n, _ in inc})
    chain = dict(inc)
    for n in free:
        lower = max((r for m, r in chain.items() if m < n), default=None)
        upper = min((r for m, r in chain.items() if m > n), default=None)
        want = ZERO if lower is None else successor(lower)
        if upper is not None and not want < upper:
            continue
        p = _proj_of_rank(index, children[n].root, kept[n][0], want)
        if p is not None:
            out[n] = p
            chain[n] = want
    return "increasing", out


def _canon(index: SpaceIndex, label: Callable[[FiniteSet], int], root: FiniteSet, points: list, budget: _Budget):
    budget.tick()
    labels = {label(w) for w in points}
    if len(labels) == 1:
        return Collapse(root), points
    k = len(root)
    groups: dict[int, list] = defaultdict(list)
    for w in points:
        groups[w[k]].append(w)
    col_labels = {n: {label(w) for w in g} for n, g in groups.items()}
    shared = Counter(l for ls in col_labels.values() for l in ls)
    if any(c > 1 for c in shared.values()):
        # disjoint pairs are not homogeneous yet; keep the better homogeneous option
        by_label: dict[int, list] = defaultdict(list)
        for w in points:
            by_label[label(w)].append(w)
        collapse_keep = max(by_label.values(), key=len)
        split_cols, seen = [], set()
        for n in sorted(groups):
            if not col_labels[n] & seen:
                split_cols.append(n)
                seen |= col_labels[n]
        split_keep = [w for w in points if w[k] in split_cols]
        if len(collapse_keep) >= len(split_keep):
            return Collapse(root), collapse_keep
        return _canon(index, label, root, split_keep, budget)
    children: dict[int, UProjDesc] = {}
    kept: dict[int, list] = {}
    for n, g in sorted(groups.items()):
        node = root + (n,)
        if g == [node]:
            children[n], kept[n] = Collapse(node), g
        else:
            children[n], kept[n] = _canon(index, label, node, g, budget)
    mode, chosen = _rank_pattern(index, children, kept)
    out = [w for n in sorted(chosen) for w in kept[n]]
    return Split(root, tuple(sorted(chosen.items())), None, mode), out


def canonize_points(
    index: SpaceIndex,
    rel: EquivRel,
    root: FiniteSet,
    budget: int = 100_000,
) -> tuple[UProjDesc, list[FiniteSet]]:
    """Search for a projection rooted at ``root`` canonizing ``rel`` on a large subset of its domain."""
    points = sorted((tuple(w) for w in rel.domain), key=lambda w: (w[-1], w))
    for w in points:
        if not is_proper_initial(root, w):
            raise ProjError(f"{list(w)} does not extend the stem {list(root)}")
    proj, kept = _canon(index, rel.label, tuple(root), points, _Budget(budget))
    return simplify(proj, index), sorted(kept, key=lambda w: (w[-1], w))


def canonize_1ext(
    barrier: BarrierDesc,
    member: SpaceMember,
    rel: EquivRel,
    u: Sequence[Sequence[int]],
    budget: int = 100_000,
) -> OneExtCertificate | Inconclusive:
    """Canonize an equivalence relation on the truncated one-extensions of u."""
    from .espace import one_extensions

    u = tuple(tuple(w) for w in u)
    stem = stem_of(barrier, u).w_u
    bound = max((w[-1] for w in rel.domain), default=0)
    allowed = set(one_extensions(u, member, bound))
    outside = [w for w in rel.domain if tuple(w) not in allowed]
    if outside:
        raise ProjError(f"{list(outside[0])} is not a one-extension of the approximation")
    try:
        proj, kept = canonize_points(member.index, rel, stem, budget)
    except BudgetExhausted as exc:
        return Inconclusive(str(exc))
    cert = OneExtCertificate(u, stem, tuple(kept), proj, len(rel.domain) - len(kept))
    labels = {w: rel.label(w) for w in kept}
    verdict = certcheck.check_one_ext(cert.to_json(), labels)
    if not verdict.ok:
        return Inconclusive(f"certificate failed independent check: {verdict.detail}")
    return cert


def _random_of_rank(index: SpaceIndex, node: FiniteSet, beta: int, points: list, rng) -> UProjDesc:
    alpha = _residual_rank(index, node)
    if beta == 0:
        return Collapse(node)
    if alpha.is_finite() and beta >= alpha.finite_value():
        return Full(node)
    k = len(node)
    kids = []
    for n in sorted({w[k] for w in points}):
        sub = node + (n,)
        col = [w for w in points if w[k] == n]
        kids.append((n, Collapse(sub) if index.w_is_leaf(sub) else _random_of_rank(index, sub, beta - 1, col, rng)))
    return Split(node, tuple(kids))


def random_proj(index: SpaceIndex, root: Sequence[int], points: Sequence[FiniteSet], rng) -> UProjDesc:
    """A random uniform projection rooted at ``root`` covering the given points.

    Finite-rank columns admit one projection per rank (keep the first
    beta levels), so the randomness is in the ranks: one constant rank for
    all sub-columns, or strictly increasing ranks below a limit-rank root.
    """
    root = tuple(root)
    points = [tuple(w) for w in points if is_proper_initial(root, tuple(w))]
    roll = rng.random()
    if roll < 0.2:
        return Collapse(root)
    if roll < 0.35:
        return Full(root)
    k = len(root)
    cols = sorted({w[k] for w in points})
    inner = [n for n in cols if not index.w_is_leaf(root + (n,))]
    ranks = {n: _residual_rank(index, root + (n,)) for n in inner}
    alpha = _residual_rank(index, root)
    kids: dict[int, UProjDesc] = {n: Collapse(root + (n,)) for n in cols if n not in ranks}
    if not inner or alpha.is_finite() or rng.random() < 0.5:
        top = min((r.finite_value() for r in ranks.values() if r.is_finite()), default=0)
        beta = rng.randint(0, top)
        for n in inner:
            col = [w for w in points if w[k] == n]
            kids[n] = _random_of_rank(index, root + (n,), beta, col, rng)
        mode = "constant"
    else:
        prev = -1
        for n in inner:
            col = [w for w in points if w[k] == n]
            r = ranks[n].finite_value()
            beta = rng.randint(min(prev + 1, r), min(r, prev + 3))
            kids[n] = _random_of_rank(index, root + (n,), beta, col, rng)
            prev = beta
        mode = "increasing"
    return Split(root, tuple(sorted(kids.items())), None, mode)


# ---------------------------------------------------------------------------
# the maps phi, phi' and phi''


InnerMap = dict  # front element -> frozenset of W-nodes


def maximal_nodes(nodes: Iterable[FiniteSet]) -> frozenset[FiniteSet]:
    nodes = {n for n in nodes if n}
    return frozenset(n for n in nodes if not any(m != n and is_initial(n, m) for m in nodes))


def meet_nodes(u: Iterable[FiniteSet], v: Iterable[FiniteSet]) -> frozenset[FiniteSet]:
    """u ∧ v: the maximal nodes common to both closures."""
    return maximal_nodes(closure(u) & closure(v))


ProjFamily = Union[Mapping[Approx, UProjDesc], Callable[[Approx], UProjDesc]]


def _family_lookup(family: ProjFamily, u: Approx) -> UProjDesc:
    if callable(family) and not isinstance(family, Mapping):
        p = family(u)
    else:
        p = family.get(u)
    if p is None:
        raise ProjError(f"projection family has no entry for {[list(w) for w in u]}")
    return p


def build_phi(front: Sequence[Approx], family: ProjFamily) -> tuple[InnerMap, InnerMap, InnerMap]:
    """(phi, phi', phi'') for each front element; the empty projection is recorded as ()."""
    phi, phi1, phi2 = {}, {}, {}
    for v in front:
        v = tuple(tuple(w) for w in v)
        vals = set()
        for n in range(len(v)):
            t = proj_apply(_family_lookup(family, v[:n]), v[n])
            vals.add(() if t is EMPTY else t)
        phi1[v] = frozenset(vals)
        phi2[v] = frozenset(x for x in vals if x)
        phi[v] = maximal_nodes(vals)
    return phi, phi1, phi2


def family_for(front: Sequence[Approx], barrier: BarrierDesc, make: Callable[[FiniteSet], UProjDesc]) -> dict:
    """A projection family assigning make(stem of u) to every proper restriction u of the front."""
    out = {}
    for v in front:
        for n in range(len(v)):
            u = tuple(v[:n])
            if u not in out:
                out[u] = make(stem_of(barrier, u).w_u)
    return out


@dataclass(frozen=True)
class StarResult:
    holds: bool | None
    missing: tuple = ()


@dataclass(frozen=True)
class IrreducibilityReport:
    inner: bool
    nash_williams: bool | tuple
    star: StarResult

    @property
    def all_true(self) -> bool:
        return self.inner and self.nash_williams is True and self.star.holds is True


def verify_inner_nw_star(
    phi: InnerMap,
    front: Sequence[Approx],
    witnesses: Sequence[Approx] | None = None,
    bound: int | None = None,
) -> IrreducibilityReport:
    """Check inner-ness, the Nash-Williams property and (*) on a truncated front.

    (*) is existential: for each u a v with phi(u) = phi(v) = u ∧ v is
    searched among ``witnesses`` (default: the front itself).  A u with no
    witness in range is reported as missing and the verdict is None
    (unknown at this bound), not False.
    """
    front = [tuple(tuple(w) for w in u) for u in front]
    if bound is not None:
        front = [u for u in front if all(w[-1] <= bound for w in u)]
    pool = [tuple(tuple(w) for w in v) for v in (witnesses if witnesses is not None else front)]
    inner = all(
        all(x in closure(u) for x in phi[u]) and phi[u] == maximal_nodes(phi[u]) for u in front
    )
    nw: bool | tuple = True
    for u in front:
        cuts = [frozenset(x for x in phi[u] if x in closure(u[:n])) for n in range(len(u) + 1)]
        for v in front:
            if phi[v] != phi[u] and phi[v] in cuts:
                nw = (u, v, cuts.index(phi[v]))
                break
        if nw is not True:
            break
    missing = []
    for u in front:
        if not any(v in phi and phi[v] == phi[u] == meet_nodes(u, v) for v in pool):
            missing.append(u)
    star = StarResult(True) if not missing else StarResult(None, tuple(missing))
    return IrreducibilityReport(inner, nw, star)


@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class Counterexample:
    u: Approx
    v: Approx


def verify_canonical(phi: InnerMap, front: Sequence[Approx], rel: EquivRel) -> Ok | Counterexample:
    front = [tuple(tuple(w) for w in u) for u in front]
    for u, v in itertools.combinations(front, 2):
        if rel.related(u, v) != (phi[u] == phi[v]):
            return Counterexample(u, v)
    return Ok()


# ---------------------------------------------------------------------------
# canonization on a front


def mixing_relation(front: Sequence[Approx], rel: EquivRel, u: Approx) -> EquivRel:
    """Finite-scale mixing on the one-extensions of u seen in the front.

    Two one-extensions mix when some front elements through them are
    R-related; the transitive closure of that is returned.
    """
    n = len(u)
    reach: dict[FiniteSet, set[int]] = defaultdict(set)
    for v in front:
        if len(v) > n and v[:n] == u:
            reach[v[n]].add(rel.label(v))
    points = sorted(reach, key=lambda w: (w[-1], w))
    parent = {w: w for w in points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[int, FiniteSet] = {}
    for w in points:
        for lab in reach[w]:
            if lab in owner:
                parent[find(w)] = find(owner[lab])
            else:
                owner[lab] = w
    return EquivRel.from_key(points, find)


@dataclass(frozen=True)
class FrontCertificate:
    surviving: tuple[Approx, ...]
    phi: InnerMap
    family: dict
    bound: int
    report: IrreducibilityReport

    def to_json(self) -> dict:
        return {
            "kind": "front",
            "bound": self.bound,
            "surviving": [[list(w) for w in u] for u in self.surviving],
            "phi": [
                {"u": [list(w) for w in u], "value": sorted(list(x) for x in self.phi[u])} for u in self.surviving
            ],
            "family": [
                {"u": [list(w) for w in u], "proj": proj_to_json(p)} for u, p in sorted(self.family.items())
            ],
        }


def canonize_front(
    barrier: BarrierDesc,
    front: Sequence[Approx],
    rel: EquivRel,
    budget: int = 200_000,
    min_keep: float = 0.25,
) -> FrontCertificate | Inconclusive:
    """Find a projection family whose phi canonizes R on a large truncated part of the front.

    Each proper restriction u gets the projection canonizing the finite
    mixing relation on its one-extensions.  Elements whose steps were
    dropped by those searches leave the front; then the truncation bound is
    lowered until the canonical and irreducibility checks pass.  Lowering
    the bound discards the elements whose mixing evidence was cut off by
    the truncation.
    """
    front = [tuple(tuple(w) for w in u) for u in front]
    if not front:
        raise ValueError("empty front")
    index = space_index(barrier)
    spent = _Budget(budget)
    family, survivors = {}, {}
    try:
        for u in sorted({v[:n] for v in front for n in range(len(v))}, key=lambda a: (len(a), a)):
            stem = stem_of(barrier, u).w_u
            mix = mixing_relation(front, rel, u)
            proj, kept = _canon(index, mix.label, stem, sorted(mix.domain, key=lambda w: (w[-1], w)), spent)
            family[u], survivors[u] = simplify(proj, index), set(kept)
    except BudgetExhausted as exc:
        return Inconclusive(str(exc))
    live = [v for v in front if all(v[n] in survivors[v[:n]] for n in range(len(v)))]
    phi, _, _ = build_phi(live, family)
    partial = None
    for bound in sorted({v[-1][-1] for v in live}, reverse=True):
        part = [v for v in live if v[-1][-1] <= bound]
        if len(part) < min_keep * len(front):
            break
        if not isinstance(verify_canonical(phi, part, rel), Ok):
            continue
        report = verify_inner_nw_star(phi, part, witnesses=live)
        cert = FrontCertificate(tuple(part), {u: phi[u] for u in part}, family, bound, report)
        if not report.all_true:
            partial = partial or cert
            continue
        labels = {u: rel.label(u) for u in part}
        check = certcheck.check_front(cert.to_json(), labels)
        if not check.ok:
            return Inconclusive(f"certificate failed independent check: {check.detail}", partial)
        return cert
    return Inconclusive("no truncation of the front passed the checks", partial)


def approximations_of_length(barrier: BarrierDesc, k: int, bound: int) -> list[Approx]:
    """All k-element approximations with every element's maximum at most bound (the front AE_k)."""
    from .espace import Schedule

    index = space_index(barrier)
    leaves = index.leaves_upto_max(bound)
    out: list[Approx] = []

    def grow(prefix: list) -> None:
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        sched = Schedule(index)
        for w in prefix:
            sched.place(w)
        for w in leaves:
            if sched.admissible(w) is None:
                grow(prefix + [w])

    grow([])
    return out


# ---------------------------------------------------------------------------
# colourings and homogenization


_ALLOWED_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
}
_ALLOWED_CMPS = {
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}


class RuleError(ValueError):
    pass


def _eval_rule(node: ast.AST, env: dict):
    if isinstance(node, ast.Expression):
        return _eval_rule(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise RuleError(f"unknown name {node.id!r}; use min, max, size or b")
        return env[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
        return _ALLOWED_BINOPS[type(node.op)](_eval_rule(node.left, env), _eval_rule(node.right, env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.Not, ast.USub)):
        val = _eval_rule(node.operand, env)
        return (not val) if isinstance(node.op, ast.Not) else -val
    if isinstance(node, ast.BoolOp):
        vals = [_eval_rule(v, env) for v in node.values]
        return all(vals) if isinstance(node.op, ast.And) else any(vals)
    if isinstance(node, ast.Compare):
        left = _eval_rule(node.left, env)
        for op, right_node in zip(node.ops, node.comparators):
            right = _eval_rule(right_node, env)
            if isinstance(op, (ast.In, ast.NotIn)):
                ok = (left in right) if isinstance(op, ast.In) else (left not in right)
            elif type(op) in _ALLOWED_CMPS:
                ok = _ALLOWED_CMPS[type(op)](left, right)
            else:
                raise RuleError("unsupported comparison")
            if not ok:
                return False
            left = right
        return True
    raise RuleError(f"unsupported syntax: {ast.dump(node)[:60]}")


def coloring_from_rule(rule: str) -> Callable[[FiniteSet], int]:
    """Colour sets by a small expression over ``min``, ``max``, ``size`` and membership in ``b``.

    Example: ``"min % 2"`` or ``"3 in b and size > 2"``.  Booleans become 0/1.
    """
    try:
        tree = ast.parse(rule, mode="eval")
    except SyntaxError as exc:
        raise RuleError(f"cannot parse rule {rule!r}: {exc.msg}") from None
    _eval_rule(tree, {"min": 0, "max": 0, "size": 1, "b": (0,)})

    def color(b: FiniteSet) -> int:
        env = {"min": b[0] if b else -1, "max": b[-1] if b else -1, "size": len(b), "b": tuple(b)}
        return int(_eval_rule(tree, env))

    return color


@dataclass(frozen=True)
class Homogeneous:
    selection: tuple[int, ...]
    color: Hashable | None
    elements: tuple[FiniteSet, ...]

    def to_json(self) -> dict:
        return {
            "kind": "homogeneous",
            "selection": list(self.selection),
            "color": self.color,
            "elements": [list(b) for b in self.elements],
        }


@dataclass(frozen=True)
class NotFoundAtBound:
    bound: int
    explored: int


def homogenize(
    barrier: BarrierDesc,
    coloring: Callable[[FiniteSet], Hashable] | Mapping[FiniteSet, Hashable],
    target: int,
    bound: int,
    min_elements: int = 1,
    budget: int = 5_000_000,
) -> Homogeneous | NotFoundAtBound:
    """Backtracking search for M within [0, bound], |M| >= target, with the colouring constant on B|M.

    ``min_elements`` rules out selections that contain too few barrier
    elements for constancy to mean anything.
    """
    color = coloring.__getitem__ if isinstance(coloring, Mapping) else coloring
    desc = normal(barrier)
    if isinstance(desc, Point):
        raise ValueError("the rank-0 barrier has no selections to make")
    elems = enumerate_barrier(desc, bound)
    by_max: dict[int, list[FiniteSet]] = defaultdict(list)
    for b in elems:
        by_max[b[-1]].append(b)
    base = desc.base.elements_upto(bound)
    explored = 0
    chosen: list[int] = []
    found: list[Homogeneous] = []

    def search(start: int, col, inside: list[FiniteSet]) -> bool:
        nonlocal explored
        explored += 1
        if explored > budget:
            raise BudgetExhausted
        if len(chosen) >= target and len(inside) >= min_elements:
            found.append(Homogeneous(tuple(chosen), col, tuple(inside)))
            return True
        for i in range(start, len(base)):
            if len(chosen) + len(base) - i < target:
                return False
            x = base[i]
            picked = set(chosen)
            new = [b for b in by_max[x] if all(y in picked for y in b[:-1])]
            cols = {color(b) for b in new} | ({col} if col is not None else set())
            if len(cols) > 1:
                continue
            chosen.append(x)
            if search(i + 1, next(iter(cols)) if cols else None, inside + new):
                return True
            chosen.pop()
        return False

    try:
        search(0, None, [])
    except BudgetExhausted:
        return NotFoundAtBound(bound, explored)
    if not found:
        return NotFoundAtBound(bound, explored)
    result = found[0]
    check = certcheck.check_homogeneous(result.selection, color, elems)
    if not check.ok:
        raise AssertionError(f"homogeneous set failed independent check: {check.detail}")
    return result


__all__ = [
    "EMPTY",
    "Collapse",
    "Full",
    "Split",
    "UProjDesc",
    "first_level",
    "levels",
    "depth_family",
    "proj_apply",
    "proj_target",
    "proj_nodes",
    "proj_rank",
    "simplify",
    "validate_proj",
    "proj_to_json",
    "proj_from_json",
    "EquivRel",
    "relation_of_projection",
    "UpOrder",
    "UpComparison",
    "up_compare",
    "OneExtCertificate",
    "Inconclusive",
    "canonize_points",
    "random_proj",
    "canonize_1ext",
    "build_phi",
    "family_for",
    "maximal_nodes",
    "meet_nodes",
    "verify_inner_nw_star",
    "IrreducibilityReport",
    "StarResult",
    "verify_canonical",
    "Ok",
    "Counterexample",
    "mixing_relation",
    "FrontCertificate",
    "canonize_front",
    "approximations_of_length",
    "coloring_from_rule",
    "homogenize",
    "Homogeneous",
    "NotFoundAtBound",
    "ProjError",
    "RuleError",
]
