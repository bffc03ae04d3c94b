"""Text renderings of finite trees of sets or sequences (indented ASCII and Graphviz DOT)."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .finite import closure, format_seq, format_set, prec_key


def _tree(nodes: Iterable[Sequence[int]], order: Callable) -> dict[tuple, list[tuple]]:
    full = closure(tuple(n) for n in nodes) | {()}
    kids: dict[tuple, list[tuple]] = {n: [] for n in full}
    for n in full:
        if n:
            kids[n[:-1]].append(n)
    for n in kids:
        kids[n].sort(key=order)
    return kids


def _walk(kids: dict[tuple, list[tuple]]) -> list[tuple[int, tuple]]:
    out, stack = [], [(0, ())]
    while stack:
        depth, n = stack.pop()
        out.append((depth, n))
        stack.extend((depth + 1, c) for c in reversed(kids[n]))
    return out


def render_tree(nodes: Iterable[Sequence[int]], fmt: str = "ascii", side: str = "set") -> str:
    """Render the tree spanned by ``nodes`` and their initial segments.

    ``side`` is "set" for W-side nodes (labels {a,b}, siblings by last
    entry) or "seq" for sequences (labels (a,b), siblings by prec).
    """
    if side == "set":
        label, order, root = format_set, (lambda n: (n[-1], n)), "{}"
    elif side == "seq":
        label, order, root = format_seq, prec_key, "()"
    else:
        raise ValueError(f"unknown side {side!r}")
    walk = _walk(_tree(nodes, order))
    if fmt == "ascii":
        return "\n".join("  " * d + (label(n) if n else root) for d, n in walk) + "\n"
    if fmt == "dot":
        ids = {n: f"n{i}" for i, (_, n) in enumerate(walk)}
        lines = ["digraph tree {", "  rankdir=BT;", "  node [shape=plaintext];"]
        for _, n in walk:
            lines.append(f'  {ids[n]} [label="{label(n) if n else root}"];')
        for _, n in walk:
            if n:
                lines.append(f"  {ids[n[:-1]]} -> {ids[n]};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_dot(text: str) -> tuple[dict[str, str], list[tuple[str, str]]]:
    """Labels and edges of a DOT file written by render_tree."""
    import re

    labels = dict(re.findall(r'^\s*(n\d+) \[label="([^"]*)"\];', text, re.M))
    edges = re.findall(r"^\s*(n\d+) -> (n\d+);", text, re.M)
    return labels, edges
