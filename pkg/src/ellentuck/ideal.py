"""Membership in the ideal Fin^B for a small algebra of subsets of a barrier.

Expressions are normalised to a finite union of terms ``Cone(a) minus a
finite union of Cone(c)`` (explicit elements are cones of barrier
elements, a column is the cone of a singleton).  Slicing such a term at a
column keeps it in the same shape, so the recursive definition of the ideal
can be evaluated directly:

* a term whose stem is nonempty lives inside a single column, so all other
  columns of it are empty and the term is null;
* a term with the empty stem excludes finitely many cones, each inside one
  column, so every later column is the full column, which is never null.

Hence an expression is null exactly when no surviving term has the empty
stem (over the rank-0 barrier, exactly when it is empty).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .barrier import (
    BarrierDesc,
    DescriptorError,
    Membership,
    Point,
    child_barrier,
    classify,
    enumerate_barrier,
    normal,
)
from .finite import FiniteSet, is_initial


class ExprError(ValueError):
    """Malformed set expression."""


@dataclass(frozen=True)
class All:
    pass


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Explicit:
    sets: tuple[FiniteSet, ...]


@dataclass(frozen=True)
class Cone:
    stem: FiniteSet


@dataclass(frozen=True)
class Column:
    n: int


@dataclass(frozen=True)
class Union_:
    left: "SetExpr"
    right: "SetExpr"


@dataclass(frozen=True)
class Intersect:
    left: "SetExpr"
    right: "SetExpr"


@dataclass(frozen=True)
class Diff:
    left: "SetExpr"
    right: "SetExpr"


SetExpr = Union[All, Empty, Explicit, Cone, Column, Union_, Intersect, Diff]


@dataclass(frozen=True)
class Term:
    """Cone(stem) minus the union of Cone(c) for c in ``excluded``."""

    stem: FiniteSet
    excluded: frozenset[FiniteSet] = frozenset()

    def simplified(self) -> "Term | None":
        if any(is_initial(c, self.stem) for c in self.excluded):
            return None
        keep = frozenset(c for c in self.excluded if is_initial(self.stem, c))
        # an exclusion below another exclusion is redundant
        keep = frozenset(c for c in keep if not any(d != c and is_initial(d, c) for d in keep))
        return Term(self.stem, keep)


def _meet_terms(s: Term, t: Term) -> Term | None:
    if is_initial(s.stem, t.stem):
        stem = t.stem
    elif is_initial(t.stem, s.stem):
        stem = s.stem
    else:
        return None
    return Term(stem, s.excluded | t.excluded).simplified()


def _validate_stem(desc: BarrierDesc, a: FiniteSet, leaf_only: bool = False) -> None:
    m = classify(desc, a)
    ok = (Membership.IN_BARRIER,) if leaf_only else (Membership.IN_BARRIER, Membership.PROPER_INITIAL)
    if m not in ok:
        raise ExprError(f"{list(a)} classifies as {m.value}; not usable here")


def _dedupe(terms: list[Term]) -> list[Term]:
    out: list[Term] = []
    for t in terms:
        if t is not None and t not in out:
            out.append(t)
    return out


def normalize(desc: BarrierDesc, expr: SetExpr) -> list[Term]:
    """Disjunctive normal form over cones; validates stems against the barrier."""
    desc = normal(desc)
    if isinstance(expr, All):
        return [Term(())]
    if isinstance(expr, Empty):
        return []
    if isinstance(expr, Explicit):
        for b in expr.sets:
            _validate_stem(desc, b, leaf_only=True)
        return _dedupe([Term(tuple(b)) for b in expr.sets])
    if isinstance(expr, Cone):
        _validate_stem(desc, expr.stem)
        return [Term(tuple(expr.stem))]
    if isinstance(expr, Column):
        if isinstance(desc, Point) or expr.n not in desc.base:
            return []
        return [Term((expr.n,))]
    if isinstance(expr, Union_):
        return _dedupe(normalize(desc, expr.left) + normalize(desc, expr.right))
    if isinstance(expr, Intersect):
        left, right = normalize(desc, expr.left), normalize(desc, expr.right)
        return _dedupe([_meet_terms(s, t) for s in left for t in right])
    if isinstance(expr, Diff):
        terms = normalize(desc, expr.left)
        for sub in normalize(desc, expr.right):
            nxt: list[Term | None] = []
            for t in terms:
                # t minus (Cone(b) minus U Cone(d)) = (t minus Cone(b)) U U (t meet Cone(d))
                nxt.append(Term(t.stem, t.excluded | {sub.stem}).simplified())
                nxt.extend(_meet_terms(t, Term(d)) for d in sub.excluded)
            terms = _dedupe(nxt)
        return terms
    raise ExprError(f"unknown expression {expr!r}")


@dataclass(frozen=True)
class FinTrue:
    special_columns: tuple[int, ...]


@dataclass(frozen=True)
class FinFalse:
    """Witness: the cone over ``stem`` keeps a full column at every n >= generic_from."""

    stem: FiniteSet
    generic_from: int
    sample: FiniteSet


def _first_element_below(desc: BarrierDesc, a: FiniteSet) -> FiniteSet:
    cur = normal(desc)
    for x in a:
        cur = child_barrier(cur, x)
    out = tuple(a)
    while not isinstance(cur, Point):
        n = cur.base.first_at_least(out[-1] + 1 if out else 0)
        out += (n,)
        cur = child_barrier(cur, n)
    return out


def in_fin_ideal(desc: BarrierDesc, expr: SetExpr) -> FinTrue | FinFalse:
    desc = normal(desc)
    terms = normalize(desc, expr)
    if isinstance(desc, Point):
        return FinFalse((), 0, ()) if terms else FinTrue(())
    mentioned = {x for t in terms for c in (t.stem, *t.excluded) for x in c[:1]}
    for t in terms:
        if t.stem == ():
            g = desc.base.first_at_least(max(mentioned) + 1 if mentioned else 0)
            return FinFalse((), g, _first_element_below(desc, (g,)))
    return FinTrue(tuple(sorted({t.stem[0] for t in terms})))


def is_null(desc: BarrierDesc, expr: SetExpr) -> bool:
    return isinstance(in_fin_ideal(desc, expr), FinTrue)


def almost_leq(desc: BarrierDesc, x: SetExpr, y: SetExpr) -> bool:
    """x is contained in y modulo Fin^B."""
    return is_null(desc, Diff(x, y))


def slice_column(expr: SetExpr, n: int) -> SetExpr:
    """The column-n part of expr, as an expression over the same barrier."""
    return Intersect(expr, Column(n))


def member(expr: SetExpr, b: FiniteSet) -> bool:
    """Direct set semantics of expr at a barrier element b."""
    if isinstance(expr, All):
        return True
    if isinstance(expr, Empty):
        return False
    if isinstance(expr, Explicit):
        return b in expr.sets
    if isinstance(expr, Cone):
        return is_initial(expr.stem, b)
    if isinstance(expr, Column):
        return bool(b) and b[0] == expr.n
    if isinstance(expr, Union_):
        return member(expr.left, b) or member(expr.right, b)
    if isinstance(expr, Intersect):
        return member(expr.left, b) and member(expr.right, b)
    if isinstance(expr, Diff):
        return member(expr.left, b) and not member(expr.right, b)
    raise ExprError(f"unknown expression {expr!r}")


def materialize_expr(desc: BarrierDesc, expr: SetExpr, bound: int) -> list[FiniteSet]:
    return [b for b in enumerate_barrier(desc, bound) if member(expr, b)]


def expr_to_json(expr: SetExpr) -> dict:
    if isinstance(expr, All):
        return {"kind": "all"}
    if isinstance(expr, Empty):
        return {"kind": "empty"}
    if isinstance(expr, Explicit):
        return {"kind": "explicit", "sets": [list(b) for b in expr.sets]}
    if isinstance(expr, Cone):
        return {"kind": "cone", "stem": list(expr.stem)}
    if isinstance(expr, Column):
        return {"kind": "column", "n": expr.n}
    name = {Union_: "union", Intersect: "intersect", Diff: "diff"}[type(expr)]
    return {"kind": name, "left": expr_to_json(expr.left), "right": expr_to_json(expr.right)}


def expr_from_json(obj: Mapping) -> SetExpr:
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise ExprError("set expression needs a 'kind'")
    kind = obj["kind"]
    if kind == "all":
        return All()
    if kind == "empty":
        return Empty()
    if kind == "explicit":
        return Explicit(tuple(tuple(int(x) for x in b) for b in obj.get("sets", [])))
    if kind == "cone":
        return Cone(tuple(int(x) for x in obj["stem"]))
    if kind == "column":
        return Column(int(obj["n"]))
    ctor = {"union": Union_, "intersect": Intersect, "diff": Diff}.get(kind)
    if ctor is None:
        raise ExprError(f"unknown expression kind {kind!r}")
    return ctor(expr_from_json(obj["left"]), expr_from_json(obj["right"]))


def explicit(sets: Sequence[Sequence[int]]) -> Explicit:
    return Explicit(tuple(tuple(s) for s in sets))


__all__ = [
    "All",
    "Empty",
    "Explicit",
    "Cone",
    "Column",
    "Union_",
    "Intersect",
    "Diff",
    "SetExpr",
    "Term",
    "normalize",
    "in_fin_ideal",
    "is_null",
    "almost_leq",
    "slice_column",
    "member",
    "materialize_expr",
    "expr_to_json",
    "expr_from_json",
    "explicit",
    "FinTrue",
    "FinFalse",
    "ExprError",
    "DescriptorError",
]
