"""Stand-alone certificate checks.

This module reads certificates in their JSON form and imports nothing from
the rest of the package, so a bug in a search cannot also hide in its
verification.  Each check returns a ``Verdict``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping


@dataclass(frozen=True)
class Verdict:
    ok: bool
    detail: str = ""


def _key(xs) -> tuple:
    return tuple(tuple(x) if isinstance(x, list) else x for x in xs)


def _starts_with(prefix: tuple, w: tuple) -> bool:
    return len(prefix) <= len(w) and w[: len(prefix)] == prefix


def project(proj: Mapping, w: tuple):
    """Evaluate a JSON projection at w; None stands for the empty projection."""
    node = proj
    root = tuple(node["root"])
    if not (len(root) < len(w) and w[: len(root)] == root):
        raise ValueError(f"{list(w)} is not below {list(root)}")
    top_collapse = node["kind"] == "collapse"
    while node["kind"] == "split":
        r = tuple(node["root"])
        n = w[len(r)]
        nxt = None
        for c in node.get("children", []):
            if c["n"] == n:
                nxt = c["proj"]
        if nxt is None:
            rest = node.get("rest")
            if rest is None:
                raise ValueError(f"column {n} below {list(r)} is not covered")
            if rest.startswith("levels:"):
                more = int(rest.split(":")[1])
                nxt = {"kind": "split", "root": list(r + (n,)), "children": [],
                       "rest": "collapse" if more == 1 else f"levels:{more - 1}"}
            else:
                nxt = {"kind": rest, "root": list(r + (n,))}
        node = nxt
    if top_collapse:
        return None
    return tuple(node["root"]) if node["kind"] == "collapse" else w


def check_one_ext(cert: Mapping, labels: Mapping[tuple, Hashable]) -> Verdict:
    """Labels must agree with equality of projections on every pair of survivors."""
    survivors = [tuple(w) for w in cert["survivors"]]
    stem = tuple(cert["stem"])
    for w in survivors:
        if not (len(stem) < len(w) and _starts_with(stem, w)):
            return Verdict(False, f"survivor {list(w)} does not extend the stem")
        if w not in labels:
            return Verdict(False, f"survivor {list(w)} has no label")
    try:
        image = {w: project(cert["proj"], w) for w in survivors}
    except ValueError as exc:
        return Verdict(False, str(exc))
    for w, t in image.items():
        if t is not None and not (_starts_with(stem, t) and _starts_with(t, w)):
            return Verdict(False, f"projection of {list(w)} is not between the stem and the point")
    targets = {t for t in image.values() if t is not None}
    for s, t in itertools.combinations(sorted(targets), 2):
        if _starts_with(s, t) or _starts_with(t, s):
            return Verdict(False, f"projection targets {list(s)} and {list(t)} are comparable")
    for a, b in itertools.combinations(survivors, 2):
        if (labels[a] == labels[b]) != (image[a] == image[b]):
            return Verdict(False, f"{list(a)} and {list(b)} disagree")
    return Verdict(True)


def _closure(u: Iterable[tuple]) -> set[tuple]:
    return {w[:m] for w in u for m in range(1, len(w) + 1)}


def check_front(cert: Mapping, labels: Mapping[tuple, Hashable]) -> Verdict:
    """phi must be inner and canonize the labels on the surviving front."""
    phi = {_key(row["u"]): frozenset(tuple(x) for x in row["value"]) for row in cert["phi"]}
    surviving = [_key(u) for u in cert["surviving"]]
    for u in surviving:
        if u not in phi or u not in labels:
            return Verdict(False, f"front element {u} lacks a value or a label")
        nodes = _closure(u)
        if not phi[u] <= nodes:
            return Verdict(False, f"phi({u}) is not made of nodes of u")
        for s, t in itertools.combinations(phi[u], 2):
            if _starts_with(s, t) or _starts_with(t, s):
                return Verdict(False, f"phi({u}) has comparable nodes")
    for u, v in itertools.combinations(surviving, 2):
        if (labels[u] == labels[v]) != (phi[u] == phi[v]):
            return Verdict(False, f"{u} and {v} disagree")
    return Verdict(True)


def check_homogeneous(
    selection: Iterable[int],
    color: Callable[[tuple], Hashable],
    elements: Iterable[Iterable[int]],
) -> Verdict:
    """The colour is constant on every listed element contained in the selection."""
    sel = set(selection)
    inside = [tuple(b) for b in elements if set(b) <= sel]
    colors = {color(b) for b in inside}
    if len(colors) > 1:
        return Verdict(False, f"{len(colors)} colours on {len(inside)} elements")
    return Verdict(True, f"{len(inside)} elements")


def homogeneous_exists(
    ground: Iterable[int],
    color: Callable[[tuple], Hashable],
    elements: Iterable[Iterable[int]],
    target: int,
) -> tuple[int, ...] | None:
    """Exhaustive search over all target-subsets of ground; the first homogeneous one or None."""
    elems = [tuple(b) for b in elements]
    for sel in itertools.combinations(sorted(ground), target):
        if check_homogeneous(sel, color, elems).ok:
            return sel
    return None
