"""Command-line interface.

Exit status: 0 success or a positive verdict, 1 a verified negative verdict
(Invalid, Counterexample, not in the ideal), 2 inconclusive, 3 usage error.
Usage errors are detected before any computation starts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import barrier as bar
from . import canonize as cz
from . import certcheck
from . import espace as es
from . import ideal
from .finite import format_set
from .ordinal import format_ordinal
from .render import render_tree
from .seqspace import NotInSpace, space_index

EXIT_OK, EXIT_NEGATIVE, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


@dataclass
class Outcome:
    payload: Any
    text: str
    status: int = EXIT_OK


# ---------------------------------------------------------------------------
# input helpers


def _load_json(arg: str) -> Any:
    """Inline JSON or a path to a JSON file."""
    text = arg.strip()
    if text[:1] in "[{" or text in ("true", "false", "null"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid inline JSON: {exc}") from None
    path = Path(arg)
    if not path.is_file():
        raise UsageError(f"no such file: {arg}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{arg}: invalid JSON: {exc}") from None


def _barrier(arg: str) -> bar.BarrierDesc:
    try:
        if arg in bar.ALIASES or arg.startswith("tower:"):
            return bar.desc_from_alias(arg)
        return bar.desc_from_json(_load_json(arg))
    except bar.DescriptorError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(f"bad barrier {arg!r}: {exc}") from None


def _approx(arg: str) -> es.Approx:
    data = _load_json(arg)
    if not isinstance(data, list) or not all(isinstance(w, list) for w in data):
        raise UsageError("an approximation is a JSON array of integer arrays")
    return tuple(tuple(int(x) for x in w) for w in data)


def _sets(xs) -> list[list[int]]:
    return [list(w) for w in xs]


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_barrier_info(a) -> Outcome:
    desc = a.barrier
    rank = bar.rank_of(desc)
    elems = bar.enumerate_barrier(desc, a.bound)
    kids = []
    if not isinstance(bar.normal(desc), bar.Point):
        for n in bar.normal(desc).base.elements_upto(min(a.bound, 8)):
            kids.append({"n": n, "rank": format_ordinal(bar.rank_of(bar.child_barrier(desc, n)))})
    front = bar.verify_front(desc, a.bound)
    ok = isinstance(front, bar.FrontOk)
    payload = {
        "barrier": bar.desc_to_json(desc),
        "rank": format_ordinal(rank),
        "bound": a.bound,
        "elements_within_bound": len(elems),
        "first_elements": _sets(elems[:10]),
        "children": kids,
        "front": {"ok": True, "checked": front.checked_elements, "paths": front.maximal_paths}
        if ok
        else {"ok": False, "path": _sets(front.path), "reason": front.reason},
    }
    lines = [f"rank {payload['rank']}", f"{len(elems)} elements with max <= {a.bound}"]
    lines += [f"  child {k['n']}: rank {k['rank']}" for k in kids]
    lines.append("front check: ok" if ok else f"front check: counterexample {front.path} ({front.reason})")
    return Outcome(payload, "\n".join(lines) + "\n", EXIT_OK if ok else EXIT_NEGATIVE)


def cmd_barrier_compare(a) -> Outcome:
    res = bar.compare_barriers(a.barrier, a.other, a.depth)
    name = type(res).__name__
    payload = {"result": name}
    if hasattr(res, "witness"):
        payload["witness"] = res.witness.to_json()
    status = EXIT_INCONCLUSIVE if isinstance(res, bar.Inconclusive) else EXIT_OK
    text = name + (f" on {res.witness}" if hasattr(res, "witness") else "") + "\n"
    return Outcome(payload, text, status)


def cmd_space_enumerate(a) -> Outcome:
    idx = space_index(a.barrier)
    unit = a.unit or ("leaves" if a.format == "json" else "nodes")
    if unit == "leaves":
        items = idx.enumerate_w(a.count)
        seqs = [idx.seq_of_w(w) for w in items]
    else:
        seqs = [idx.nu_inv(i) for i in range(a.count)]
        items = [idx.w_node(s) for s in seqs]
    shown = seqs if a.side == "seq" else items
    if a.format in ("ascii", "dot"):
        return Outcome(None, render_tree(shown, a.format, side="seq" if a.side == "seq" else "set"))
    payload = {"unit": unit, "side": a.side, "items": _sets(shown)}
    return Outcome(payload, "")


def cmd_space_approx(a) -> Outcome:
    top = es.top_member(a.barrier)
    u = top.restrict(a.k) if a.kind == "r" else top.full_approx(a.k)
    return Outcome({"kind": a.kind, "k": a.k, "approx": _sets(u)}, " ".join(format_set(w) for w in u) + "\n")


def cmd_space_stem(a) -> Outcome:
    verdict = es.is_valid_approx(a.barrier, a.approx, a.bound)
    if isinstance(verdict, es.InconclusiveAtBound):
        return Outcome({"verdict": "inconclusive", "bound": a.bound}, f"inconclusive at bound {a.bound}\n", 2)
    if isinstance(verdict, es.Invalid):
        payload = {"verdict": "invalid", "reason": verdict.reason, "position": verdict.position}
        return Outcome(payload, f"invalid at {verdict.position}: {verdict.reason}\n", EXIT_NEGATIVE)
    info = es.stem_of(a.barrier, a.approx)
    a_u = list(info.a_u) if info.a_u is not None else []
    payload = {"verdict": "valid", "stem": list(info.w_u), "stem_set": a_u}
    return Outcome(payload, f"valid; stem {format_set(info.w_u)} = rho({format_set(a_u)})\n")


def cmd_space_fuse(a) -> Outcome:
    top = es.top_member(a.barrier)
    keep = cz.coloring_from_rule(a.rule)
    z = es.fuse_above(a.approx, top, lambda w: bool(keep(w)))
    elems = z.restrict(len(a.approx) + a.count)
    return Outcome({"approx": _sets(a.approx), "rule": a.rule, "member_prefix": _sets(elems)},
                   " ".join(format_set(w) for w in elems) + "\n")


def cmd_space_axioms(a) -> Outcome:
    report = es.check_axioms(a.barrier, a.bound, a.samples)
    lines = [f"{ax}: {'pass' if ok else 'FAIL'}" for ax, ok in report.passed.items()]
    return Outcome(report.to_json(), "\n".join(lines) + "\n", EXIT_OK if report.all_passed else EXIT_NEGATIVE)


def cmd_ideal_check(a) -> Outcome:
    try:
        expr = ideal.expr_from_json(_load_json(a.expr))
        verdict = ideal.in_fin_ideal(a.barrier, expr)
    except (ideal.ExprError, KeyError, TypeError) as exc:
        raise UsageError(f"bad set expression: {exc}") from None
    payload: dict = {"in_ideal": isinstance(verdict, ideal.FinTrue)}
    if isinstance(verdict, ideal.FinFalse):
        payload["witness"] = {"stem": list(verdict.stem), "generic_from": verdict.generic_from,
                              "sample": list(verdict.sample)}
    if a.oracle_bound is not None:
        payload["materialized"] = _sets(ideal.materialize_expr(a.barrier, expr, a.oracle_bound))
    text = "True\n" if payload["in_ideal"] else f"False (full columns from {verdict.generic_from})\n"
    return Outcome(payload, text, EXIT_OK if payload["in_ideal"] else EXIT_NEGATIVE)


def _relation(data: Any, domain: Sequence, what: str) -> cz.EquivRel:
    if not isinstance(data, dict):
        raise UsageError(f"{what}: expected a JSON object")
    try:
        if "rule" in data:
            color = cz.coloring_from_rule(data["rule"])
            return cz.EquivRel.from_key(domain, lambda w: color(w))
        if "projection" in data:
            p = cz.proj_from_json(data["projection"])
            return cz.relation_of_projection(p, domain)
        rel = cz.EquivRel.from_json(data)
    except (cz.RuleError, cz.ProjError, KeyError, ValueError) as exc:
        raise UsageError(f"{what}: {exc}") from None
    return rel


def cmd_canonize_one_ext(a) -> Outcome:
    top = es.top_member(a.barrier)
    try:
        points = es.one_extensions(a.approx, top, a.bound)
    except es.SpaceError as exc:
        raise UsageError(str(exc)) from None
    data = _load_json(a.relation)
    rel = _relation(data, points, "relation")
    if not len(rel.domain):
        raise UsageError("the relation is empty")
    res = cz.canonize_1ext(a.barrier, top, rel, a.approx, a.budget)
    if isinstance(res, cz.Inconclusive):
        return Outcome({"verdict": "inconclusive", "reason": res.reason}, res.reason + "\n", EXIT_INCONCLUSIVE)
    payload = res.to_json()
    payload["labels"] = [rel.label(w) for w in res.survivors]
    return Outcome(payload, f"certificate: {len(res.survivors)} points, {res.dropped} dropped\n")


def _front(arg: str, desc: bar.BarrierDesc) -> list[es.Approx]:
    data = _load_json(arg)
    if isinstance(data, dict) and "length" in data:
        front = cz.approximations_of_length(desc, int(data["length"]), int(data.get("bound", 20)))
    elif isinstance(data, list):
        front = [tuple(tuple(int(x) for x in w) for w in u) for u in data]
    else:
        raise UsageError("a front is a list of approximations or {\"length\": k, \"bound\": n}")
    if not front:
        raise UsageError("the front is empty")
    return front


def _front_relation(data: Any, front: list, desc) -> cz.EquivRel:
    if isinstance(data, dict) and "depth" in data:
        make = cz.depth_family(int(data["depth"]))
        phi, _, _ = cz.build_phi(front, cz.family_for(front, desc, make))
        return cz.EquivRel.from_key(front, lambda u: phi[u])
    if isinstance(data, dict) and data.get("identity"):
        return cz.EquivRel.from_key(front, lambda u: u)
    rel = _relation(data, front, "relation")
    if any(u not in rel for u in front):
        raise UsageError("the relation does not cover the front")
    return rel


def cmd_canonize_front(a) -> Outcome:
    front = _front(a.front, a.barrier)
    rel = _front_relation(_load_json(a.relation), front, a.barrier)
    res = cz.canonize_front(a.barrier, front, rel, a.budget)
    if isinstance(res, cz.Inconclusive):
        return Outcome({"verdict": "inconclusive", "reason": res.reason}, res.reason + "\n", EXIT_INCONCLUSIVE)
    payload = res.to_json()
    payload["labels"] = [rel.label(u) for u in res.surviving]
    text = f"certificate: {len(res.surviving)} of {len(front)} front elements, bound {res.bound}\n"
    return Outcome(payload, text)


def _cert_key(row, kind: str) -> tuple:
    return tuple(tuple(w) for w in row) if kind == "front" else tuple(row)


def cmd_canonize_verify(a) -> Outcome:
    cert = _load_json(a.certificate)
    if not isinstance(cert, dict) or "kind" not in cert:
        raise UsageError("not a certificate")
    kind = cert["kind"]
    if kind in ("one-ext", "front"):
        rows = cert["survivors"] if kind == "one-ext" else cert["surviving"]
        keys = [_cert_key(r, kind) for r in rows]
        if a.relation:
            src = _load_json(a.relation)
            try:
                rel = cz.EquivRel.from_json(src)
                labels = {k: rel.label(k) for k in keys if k in rel}
            except (KeyError, ValueError, TypeError) as exc:
                raise UsageError(f"relation: {exc}") from None
        elif cert.get("labels") is not None:
            labels = dict(zip(keys, cert["labels"]))
        else:
            raise UsageError("no labels: pass --relation or a certificate that carries them")
        check = certcheck.check_one_ext if kind == "one-ext" else certcheck.check_front
        verdict = check(cert, labels)
    elif kind == "homogeneous":
        if a.barrier is None or a.coloring is None:
            raise UsageError("homogeneous certificates need --barrier and --coloring")
        elems = bar.enumerate_barrier(a.barrier, max(cert["selection"], default=0))
        color = _coloring(_load_json(a.coloring))
        verdict = certcheck.check_homogeneous(cert["selection"], _as_callable(color), elems)
    else:
        raise UsageError(f"unknown certificate kind {kind!r}")
    payload = {"ok": verdict.ok, "detail": verdict.detail}
    return Outcome(payload, ("verified" if verdict.ok else f"REJECTED: {verdict.detail}") + "\n",
                   EXIT_OK if verdict.ok else EXIT_NEGATIVE)


def _as_callable(color):
    if isinstance(color, dict):
        return lambda b: color.get(tuple(b))
    return color


def _coloring(data: Any):
    if isinstance(data, dict) and "rule" in data:
        try:
            return cz.coloring_from_rule(data["rule"])
        except cz.RuleError as exc:
            raise UsageError(str(exc)) from None
    if isinstance(data, dict) and "table" in data:
        table = {tuple(int(x) for x in b): c for b, c in data["table"]}
        return table
    raise UsageError("a colouring is {\"rule\": expr} or {\"table\": [[set, colour], ...]}")


def cmd_homogenize(a) -> Outcome:
    coloring = _coloring(_load_json(a.coloring))
    if isinstance(coloring, dict):
        missing = [b for b in bar.enumerate_barrier(a.barrier, a.bound) if b not in coloring]
        if missing:
            raise UsageError(f"colouring table misses {list(missing[0])} (and {len(missing) - 1} more)")
    res = cz.homogenize(a.barrier, coloring, a.target, a.bound, a.min_elements, a.budget)
    if isinstance(res, cz.NotFoundAtBound):
        payload = {"verdict": "not-found", "bound": res.bound, "explored": res.explored}
        return Outcome(payload, f"no homogeneous selection within bound {a.bound}\n", EXIT_INCONCLUSIVE)
    return Outcome(res.to_json(), f"homogeneous {format_set(res.selection)} colour {res.color}\n")


def cmd_render(a) -> Outcome:
    data = _load_json(a.nodes)
    if not isinstance(data, list):
        raise UsageError("nodes must be a JSON array of integer arrays")
    nodes = [tuple(int(x) for x in n) for n in data]
    return Outcome(None, render_tree(nodes, a.format if a.format != "json" else "ascii", side=a.side))


# ---------------------------------------------------------------------------
# parser


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "ascii", "dot"), default="json",
                        help="output format (default: json)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized harnesses (default: 0)")

    p = _Parser(prog="ellentuck", description="Barriers, Ellentuck spaces over barriers, and canonization at desk scale.")
    verbs = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def add(sub, name: str, func, help_text: str):
        q = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        q.set_defaults(func=func)
        return q

    def barrier_flag(q, required: bool = True, dest: str = "barrier", flag: str = "--barrier"):
        q.add_argument(flag, dest=dest, required=required, metavar="B",
                       help="alias (schreier, point, rank1..rank5, tower:<ordinal>), JSON file, or inline JSON")

    b = verbs.add_parser("barrier", help="barrier descriptors").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = add(b, "info", cmd_barrier_info, "rank, children and a bounded front check")
    barrier_flag(q)
    q.add_argument("--bound", type=_positive, default=15, help="enumeration bound (default: 15)")
    q = add(b, "compare", cmd_barrier_compare, "search an arithmetic set M comparing B|M and C|M")
    barrier_flag(q)
    barrier_flag(q, dest="other", flag="--other")
    q.add_argument("--depth", type=_positive, default=6, help="search depth (default: 6)")

    s = verbs.add_parser("space", help="the space over a barrier").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = add(s, "enumerate", cmd_space_enumerate, "enumerate the top member or its tree")
    barrier_flag(q)
    q.add_argument("--count", type=_positive, default=8, help="how many items (default: 8)")
    q.add_argument("--unit", choices=("leaves", "nodes"), default=None,
                   help="count elements (leaves) or tree nodes; default leaves for json, nodes for ascii/dot")
    q.add_argument("--side", choices=("w", "seq"), default="w", help="W-side sets or sigma-side sequences")
    q = add(s, "approx", cmd_space_approx, "restrictions r_k or full approximations of the top member")
    barrier_flag(q)
    q.add_argument("--kind", choices=("r", "a"), default="r", help="r: k least elements; a: k-th full approximation")
    q.add_argument("--k", type=_positive, required=True)
    q = add(s, "stem", cmd_space_stem, "validity and stem of an approximation")
    barrier_flag(q)
    q.add_argument("--approx", type=str, required=True, help="JSON array of sets (file or inline)")
    q.add_argument("--bound", type=_positive, default=200, help="largest value examined (default: 200)")
    q = add(s, "fuse", cmd_space_fuse, "member through u whose one-extensions satisfy a rule")
    barrier_flag(q)
    q.add_argument("--approx", type=str, required=True)
    q.add_argument("--rule", required=True, help="expression over min, max, size, b selecting allowed elements")
    q.add_argument("--count", type=_positive, default=8, help="elements to list after u (default: 8)")
    q = add(s, "axioms", cmd_space_axioms, "bounded checks of axioms A.1-A.3")
    barrier_flag(q)
    q.add_argument("--bound", type=_positive, default=20, help="value bound (default: 20)")
    q.add_argument("--samples", type=_positive, default=10, help="sampled members (default: 10)")

    i = verbs.add_parser("ideal", help="the ideal Fin^B").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = add(i, "check", cmd_ideal_check, "decide membership of a set expression in Fin^B")
    barrier_flag(q)
    q.add_argument("--expr", required=True, help="JSON set expression (file or inline)")
    q.add_argument("--oracle-bound", type=_positive, default=None, help="also list the expression's elements up to N")

    c = verbs.add_parser("canonize", help="canonization searches").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    q = add(c, "one-ext", cmd_canonize_one_ext, "canonize a relation on the one-extensions of u")
    barrier_flag(q)
    q.add_argument("--relation", required=True, help="JSON: {labels/domain}, {classes}, {rule} or {projection}")
    q.add_argument("--approx", default="[]", help="JSON approximation u (default: empty)")
    q.add_argument("--bound", type=_positive, default=40, help="truncation bound (default: 40)")
    q.add_argument("--budget", type=_positive, default=100_000, help="node expansions (default: 100000)")
    q = add(c, "front", cmd_canonize_front, "canonize a relation on a truncated front")
    barrier_flag(q)
    q.add_argument("--front", required=True, help="JSON list of approximations or {\"length\": k, \"bound\": n}")
    q.add_argument("--relation", required=True, help="JSON: {labels/domain}, {classes}, {depth: d} or {identity: true}")
    q.add_argument("--budget", type=_positive, default=200_000, help="node expansions (default: 200000)")
    q = add(c, "verify", cmd_canonize_verify, "re-check a certificate with the independent checker")
    q.add_argument("--certificate", required=True)
    q.add_argument("--relation", default=None, help="labels to check against (default: labels in the certificate)")
    barrier_flag(q, required=False)
    q.add_argument("--coloring", default=None)

    q = add(verbs, "homogenize", cmd_homogenize, "find a homogeneous selection for a colouring of B")
    barrier_flag(q)
    q.add_argument("--coloring", required=True, help="JSON {rule: expr} or {table: [[set, colour], ...]}")
    q.add_argument("--target", type=_positive, required=True, help="selection size")
    q.add_argument("--bound", type=_positive, required=True, help="largest element allowed")
    q.add_argument("--min-elements", type=_positive, default=1, help="least barrier elements inside (default: 1)")
    q.add_argument("--budget", type=_positive, default=5_000_000, help="search nodes (default: 5000000)")

    q = add(verbs, "render", cmd_render, "render a tree of nodes")
    q.add_argument("--nodes", required=True, help="JSON array of nodes")
    q.add_argument("--side", choices=("set", "seq"), default="set")
    return p


def _resolve(args) -> None:
    """Turn descriptor and approximation arguments into objects; raises UsageError."""
    for name in ("barrier", "other"):
        val = getattr(args, name, None)
        if isinstance(val, str):
            setattr(args, name, _barrier(val))
    if isinstance(getattr(args, "approx", None), str):
        args.approx = _approx(args.approx)


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _resolve(args)
        outcome = args.func(args)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (NotInSpace, es.SpaceError, cz.ProjError) as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except es.SearchExhausted as exc:
        err.write(f"inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE
    if args.format == "json" and outcome.payload is not None:
        out.write(_dump(outcome.payload))
    else:
        out.write(outcome.text)
    return outcome.status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
