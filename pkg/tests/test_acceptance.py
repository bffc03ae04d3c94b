"""The twelve acceptance criteria, each with its time limit.

Every criterion prints one PASS/FAIL line.  Run with
``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import itertools
import json
import random
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ellentuck import canonize as cz  # noqa: E402
from ellentuck import certcheck, cli, ideal  # noqa: E402
from ellentuck import espace as es  # noqa: E402
from ellentuck.barrier import (  # noqa: E402
    Custom,
    FiniteRank,
    FrontCounterexample,
    FrontOk,
    Membership,
    Point,
    Schreier,
    child_barrier,
    classify,
    enumerate_barrier,
    rank_of,
    verify_front,
)
from ellentuck.finite import prec_key, sigma, sigma_inv  # noqa: E402
from ellentuck.ordinal import OMEGA, Ordinal  # noqa: E402
from ellentuck.render import parse_dot  # noqa: E402
from ellentuck.seqspace import space_index  # noqa: E402
from oracles import null_by_growth, oracle_is_approx, random_expr, sorted_candidates  # noqa: E402

S, F2, F3 = Schreier(), FiniteRank(k=2), FiniteRank(k=3)

# Figure 2 (the tree of W over the Schreier barrier), children in drawing order.
FIGURE_W = {
    (): [(0,), (1,), (4,), (11,)],
    (1,): [(1, 2), (1, 3), (1, 7), (1, 15)],
    (4,): [(4, 5), (4, 9), (4, 18)],
    (4, 5): [(4, 5, 6), (4, 5, 8), (4, 5, 16)],
    (4, 9): [(4, 9, 10), (4, 9, 17)],
    (4, 18): [(4, 18, 19)],
    (11,): [(11, 12), (11, 23)],
    (11, 12): [(11, 12, 13), (11, 12, 21)],
    (11, 12, 13): [(11, 12, 13, 14), (11, 12, 13, 20)],
    (11, 12, 21): [(11, 12, 21, 22)],
    (11, 23): [(11, 23, 24)],
    (11, 23, 24): [(11, 23, 24, 25)],
}
# Figure 1 (the sequence tree), children in drawing order.
FIGURE_SEQ = {
    (): [(0,), (1,), (2,), (3,)],
    (1,): [(1, 1), (1, 2), (1, 3), (1, 4)],
    (2,): [(2, 2), (2, 3), (2, 4)],
    (2, 2): [(2, 2, 2), (2, 2, 3), (2, 2, 4)],
    (2, 3): [(2, 3, 3), (2, 3, 4)],
    (2, 4): [(2, 4, 4)],
    (3,): [(3, 3), (3, 4)],
    (3, 3): [(3, 3, 3), (3, 3, 4)],
    (3, 3, 3): [(3, 3, 3, 3), (3, 3, 3, 4)],
    (3, 3, 4): [(3, 3, 4, 4)],
    (3, 4): [(3, 4, 4)],
    (3, 4, 4): [(3, 4, 4, 4)],
}
RESULTS: list[str] = []  # printed by the terminal-summary hook in conftest.py
A4 = [(0,), (1, 2), (1, 3), (4, 5, 6), (1, 7), (4, 5, 8), (4, 9, 10), (11, 12, 13, 14)]


@contextmanager
def criterion(number: int, title: str, limit: float):
    """Time the block; print one PASS/FAIL line; fail on an error or on exceeding the limit."""
    start = time.perf_counter()
    problem = None
    try:
        yield
    except AssertionError as exc:
        problem = str(exc).splitlines()[0] if str(exc) else "assertion failed"
        raise
    finally:
        elapsed = time.perf_counter() - start
        if problem is None and elapsed >= limit:
            problem = f"took {elapsed:.2f}s, limit {limit}s"
        verdict = "PASS" if problem is None else "FAIL"
        line = f"{verdict} criterion {number:2d}: {title} [{elapsed:.2f}s, limit {limit}s]"
        RESULTS.append(line + (f" -- {problem}" if problem else ""))
    assert elapsed < limit, f"criterion {number} took {elapsed:.2f}s (limit {limit}s)"


def _cli(*argv) -> tuple[int, str]:
    out = io.StringIO()
    code = cli.run(list(argv), out, io.StringIO())
    return code, out.getvalue()


def _tree_from_dot(text: str, parse) -> dict:
    labels, edges = parse_dot(text)
    kids: dict = {}
    for a, b in edges:
        kids.setdefault(parse(labels[a]), []).append(parse(labels[b]))
    return kids


def _parse_set(label: str) -> tuple:
    inner = label.strip("{}()")
    return tuple(int(x) for x in inner.split(",")) if inner else ()


def test_criterion_01_figures():
    with criterion(1, "figure reproduction (W-side and sequence side)", 1.0):
        code, text = _cli("space", "enumerate", "--barrier", "schreier", "--count", "26", "--format", "dot")
        assert code == 0
        assert _tree_from_dot(text, _parse_set) == FIGURE_W
        code, text = _cli("space", "enumerate", "--barrier", "schreier", "--count", "26", "--format", "dot",
                          "--side", "seq")
        assert code == 0
        assert _tree_from_dot(text, _parse_set) == FIGURE_SEQ
        # count 30 adds nu = 26..29 and keeps every labelled vertex and cover edge of the figure
        code, text = _cli("space", "enumerate", "--barrier", "schreier", "--count", "30", "--format", "dot")
        tree = _tree_from_dot(text, _parse_set)
        for parent, kids in FIGURE_W.items():
            assert [k for k in tree[parent] if k[-1] < 26] == kids
        extra = {k for kids in tree.values() for k in kids} - {k for kids in FIGURE_W.values() for k in kids}
        assert sorted(k[-1] for k in extra) == [26, 27, 28, 29]
        assert text == _cli("space", "enumerate", "--barrier", "schreier", "--count", "30", "--format", "dot")[1]


def test_criterion_02_example_values():
    with criterion(2, "worked example: full approximations and restrictions", 1.0):
        W = es.top_member(S)
        assert W.full_approx(1) == ((0,),)
        assert W.full_approx(2) == ((0,), (1, 2))
        assert W.full_approx(3) == ((0,), (1, 2), (1, 3), (4, 5, 6))
        assert list(W.full_approx(4)) == A4
        assert W.restrict(3) == ((0,), (1, 2), (1, 3))
        assert W.restrict(4) == W.full_approx(3)
        assert W.restrict(8) == W.full_approx(4)
        # derived: the oracle's fifth element is {1,7}; the printed list omits {4,5,6}
        r5 = ((0,), (1, 2), (1, 3), (4, 5, 6), (1, 7))
        assert W.restrict(5) == r5
        assert oracle_is_approx(W.index, r5)
        assert not oracle_is_approx(W.index, ((0,), (1, 2), (1, 3), (1, 7), (4, 5, 8)))


def test_criterion_03_sigma_round_trip():
    with criterion(3, "sigma round trip on all subsets of [0,12]", 1.0):
        count = 0
        for mask in range(1 << 13):
            a = tuple(i for i in range(13) if mask >> i & 1)
            s = sigma(a)
            assert all(x <= y for x, y in zip(s, s[1:]))
            assert sigma_inv(s) == a
            count += 1
        assert count == 8192


def _closure_seqs(desc, max_entry: int) -> set:
    """All nonempty sequences with entries <= max_entry whose set lies in the closure of desc."""
    out, stack = set(), [()]
    while stack:
        s = stack.pop()
        for x in range(s[-1] if s else 0, max_entry + 1):
            t = s + (x,)
            if classify(desc, sigma_inv(t)) in (Membership.IN_BARRIER, Membership.PROPER_INITIAL):
                out.add(t)
                stack.append(t)
    return out


def test_criterion_04_nu_order():
    with criterion(4, "nu is an order isomorphism on the first 10^4 sequences", 5.0):
        for desc in (S, F2, F3):
            idx = space_index(desc)
            seqs = [idx.nu_inv(i) for i in range(10_000)]
            keys = [prec_key(s) for s in seqs]
            assert all(a < b for a, b in zip(keys, keys[1:]))
            assert [idx.nu(s) for s in seqs] == list(range(10_000))
            # nothing is skipped: every sequence with smaller maximum entry than the last one appears
            top = max(seqs[-1])
            expected = _closure_seqs(desc, top - 1)
            assert {s for s in seqs if max(s) < top} == expected


def test_criterion_05_ranks():
    with criterion(5, "ranks of finite-rank, Schreier and Schreier children", 1.0):
        for k in range(1, 6):
            assert rank_of(FiniteRank(k=k)) == Ordinal.of(k)
        assert rank_of(S) == OMEGA
        assert isinstance(child_barrier(S, 0), Point)
        for n in range(1, 7):
            assert rank_of(child_barrier(S, n)) == Ordinal.of(n)


def test_criterion_06_fronts():
    with criterion(6, "front property at bound 20 and a corrupted descriptor", 10.0):
        for desc in (S, F2, F3):
            res = verify_front(desc, 20)
            assert isinstance(res, FrontOk), res
            assert res.checked_elements == len(enumerate_barrier(desc, 20))
        bad = verify_front(Custom(declared_rank=Ordinal.of(2), extra=((1, 2, 3),)), 20)
        assert isinstance(bad, FrontCounterexample)
        assert bad.path == ((1, 2), (1, 2, 3))


def test_criterion_07_ideal():
    with criterion(7, "Fin^B examples, closure laws and growth agreement", 10.0):
        assert ideal.is_null(F2, ideal.explicit([(0, 1), (2, 5)]))
        assert not ideal.is_null(F2, ideal.All())
        assert ideal.is_null(F2, ideal.Column(5))
        rng = random.Random(2024)
        grown = 0
        for i in range(200):
            desc = (S, F2, F3)[i % 3]
            x, y = random_expr(rng, desc), random_expr(rng, desc)
            nx, ny = ideal.is_null(desc, x), ideal.is_null(desc, y)
            assert ideal.is_null(desc, ideal.Union_(x, y)) == (nx and ny)
            if nx:
                assert ideal.is_null(desc, ideal.Intersect(x, y))
                assert ideal.is_null(desc, ideal.Diff(x, y))
            assert ideal.almost_leq(desc, x, ideal.Union_(x, y))
            bounds = (10, 20) if desc == S else (10, 20, 30)
            for e in (x, y):
                null = ideal.is_null(desc, e)
                for n in bounds:
                    assert null_by_growth(desc, e, n) == null
                    grown += 1
        assert grown > 1000


def test_criterion_08_validity_oracle():
    with criterion(8, "is_valid_approx agrees with the brute-force oracle", 60.0):
        for desc in (S, F2):
            idx = space_index(desc)
            total = valid = 0
            for u in sorted_candidates(idx, 30, 5):
                want = oracle_is_approx(idx, u)
                got = isinstance(es.is_valid_approx(desc, u, 30), es.Valid)
                assert want == got, (desc, u, want, got)
                total += 1
                valid += want
                if len(u) <= 3:
                    for perm in itertools.permutations(u):
                        if perm != u:
                            assert not oracle_is_approx(idx, perm)
                            assert not isinstance(es.is_valid_approx(desc, perm, 30), es.Valid)
            assert valid > 50 and total > 5000


def test_criterion_09_canonization_round_trip():
    with criterion(9, "canonize_1ext recovers 50 random projections", 60.0):
        rng = random.Random(7)
        for i in range(50):
            desc, bound = ((F2, 40), (S, 60))[i % 2]
            member = es.top_member(desc)
            u = member.restrict(rng.randint(0, 3))
            pts = es.one_extensions(u, member, bound)
            stem = es.stem_of(desc, u).w_u
            p = cz.random_proj(member.index, stem, pts, rng)
            rel = cz.relation_of_projection(p, pts)
            cert = cz.canonize_1ext(desc, member, rel, u)
            assert isinstance(cert, cz.OneExtCertificate), cert
            labels = {w: rel.label(w) for w in cert.survivors}
            assert certcheck.check_one_ext(cert.to_json(), labels).ok
            induced = cz.relation_of_projection(cert.proj, cert.survivors)
            for a, b in itertools.combinations(cert.survivors, 2):
                assert induced.related(a, b) == rel.related(a, b)


def test_criterion_10_homogenization():
    with criterion(10, "homogeneous 4-sets for 100 random 2-colourings of pairs", 30.0):
        rng = random.Random(3)
        elems = enumerate_barrier(F2, 17)
        for _ in range(100):
            table = {b: rng.randint(0, 1) for b in elems}
            res = cz.homogenize(F2, table, 4, 17)
            assert isinstance(res, cz.Homogeneous)
            assert len(res.selection) == 4 and max(res.selection) <= 17
            assert certcheck.check_homogeneous(res.selection, table.__getitem__, elems).ok
            assert certcheck.homogeneous_exists(range(18), table.__getitem__, elems, 4) is not None


def test_criterion_11_front_canonization():
    with criterion(11, "front canonization for the empty, first-coordinate and identity relations", 120.0):
        front = cz.approximations_of_length(F2, 2, 30)
        for make in (cz.depth_family(0), cz.depth_family(1), cz.Full):
            inducing, _, _ = cz.build_phi(front, cz.family_for(front, F2, make))
            rel = cz.EquivRel.from_key(front, lambda u: inducing[u])
            cert = cz.canonize_front(F2, front, rel)
            assert isinstance(cert, cz.FrontCertificate), cert
            assert all(cert.phi[u] == inducing[u] for u in cert.surviving)
            # (*) is existential over the whole front, so witnesses may lie past the truncation
            report = cz.verify_inner_nw_star(inducing, cert.surviving, witnesses=front)
            assert cert.report.all_true
            assert report.inner and report.nash_williams is True and report.star.holds is True
            labels = {u: rel.label(u) for u in cert.surviving}
            assert certcheck.check_front(cert.to_json(), labels).ok


def test_criterion_12_axioms():
    with criterion(12, "axioms A.1-A.3 on sampled members, with negative controls", 30.0):
        for desc in (S, F3):
            report = es.check_axioms(desc, 20, 10)
            assert report.all_passed, report.failures
            swapped = list(es.top_member(desc).restrict(10))
            swapped[0], swapped[1] = swapped[1], swapped[0]
            control = es.check_axioms(desc, 20, 1, extra_members=[es.ExplicitPrefix(swapped, "swapped")])
            assert control.passed["A.1(3)"] is False and control.failures["A.1(3)"]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
