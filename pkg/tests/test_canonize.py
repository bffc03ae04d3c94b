import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellentuck import canonize as cz
from ellentuck import certcheck
from ellentuck import espace as es
from ellentuck.barrier import FiniteRank, Schreier, enumerate_barrier
from ellentuck.seqspace import space_index

S, F2 = Schreier(), FiniteRank(k=2)
WS, WF2 = es.top_member(S), es.top_member(F2)
IS, IF2 = space_index(S), space_index(F2)


def small_front(desc, k=2, bound=8):
    return cz.approximations_of_length(desc, k, bound)


# --- projections ------------------------------------------------------------


def test_apply_examples():
    assert cz.proj_apply(cz.Collapse((1,)), (1, 7)) is cz.EMPTY
    assert cz.proj_apply(cz.Full((1,)), (1, 7)) == (1, 7)
    assert cz.proj_apply(cz.first_level(()), IF2.rho((3, 7))) == IF2.rho((3,))


def test_apply_rejects_points_outside_the_root():
    with pytest.raises(cz.ProjError):
        cz.proj_apply(cz.Full((4,)), (1, 7))


def test_levels_and_depth_family():
    w = IS.rho((3, 4, 5, 6))
    assert cz.proj_target(cz.levels((), 2), w) == w[:2]
    assert cz.levels((1,), 0) == cz.Collapse((1,))
    assert cz.depth_family(1)((1,)) == cz.Collapse((1,))
    assert cz.proj_target(cz.depth_family(1)(()), w) == w[:1]


def test_compare_examples():
    assert cz.up_compare(cz.Collapse(()), cz.Full(()), WS, 12).order is cz.UpOrder.P_BELOW
    assert cz.up_compare(cz.first_level(()), cz.first_level(()), WS, 12).order is cz.UpOrder.EQUAL
    assert cz.up_compare(cz.first_level(()), cz.Full(()), WF2, 10).order is cz.UpOrder.P_BELOW
    assert cz.up_compare(cz.Full(()), cz.first_level(()), WF2, 10).order is cz.UpOrder.P_ABOVE


def test_projection_json_round_trip():
    rng = random.Random(4)
    pts = WS.upto_max(30)
    for _ in range(40):
        p = cz.random_proj(IS, (), pts, rng)
        assert cz.proj_from_json(cz.proj_to_json(p)) == p


def test_split_rejects_bad_children():
    with pytest.raises(cz.ProjError):
        cz.Split((), ((1, cz.Full((2,))),))
    with pytest.raises(cz.ProjError):
        cz.Split((), (), rest="levels:0")


# --- relations --------------------------------------------------------------


def test_relation_constructors_agree():
    dom = [(0,), (1,), (2,), (3,)]
    a = cz.EquivRel.from_key(dom, lambda w: w[0] % 2)
    b = cz.EquivRel.from_classes([[(0,), (2,)], [(1,), (3,)]])
    assert all(a.related(x, y) == b.related(x, y) for x in dom for y in dom)
    assert cz.EquivRel.from_json(a.to_json()) == a


def test_relation_of_collapse_is_one_class():
    pts = WS.upto_max(20)
    assert len(cz.relation_of_projection(cz.Collapse(()), pts).classes()) == 1
    assert len(cz.relation_of_projection(cz.Full(()), pts).classes()) == len(pts)


# --- one-extension canonization ---------------------------------------------


def _rank_one_column():
    u = WS.full_approx(2)  # stem {1}, one-extensions {1, x}
    return u, es.one_extensions(u, WS, 60)


def test_everything_equivalent_gives_collapse():
    u, pts = _rank_one_column()
    cert = cz.canonize_1ext(S, WS, cz.EquivRel.from_key(pts, lambda w: 0), u)
    assert cert.proj == cz.Collapse((1,)) and cert.dropped == 0


def test_equality_gives_identity():
    u, pts = _rank_one_column()
    cert = cz.canonize_1ext(S, WS, cz.EquivRel.from_key(pts, lambda w: w), u)
    assert cert.proj == cz.Full((1,)) and cert.dropped == 0


def test_relation_outside_one_extensions_rejected():
    u, pts = _rank_one_column()
    with pytest.raises(cz.ProjError):
        cz.canonize_1ext(S, WS, cz.EquivRel.from_key(pts + [(4, 5, 6)], lambda w: 0), u)


def test_budget_exhaustion_is_inconclusive():
    pts = es.one_extensions([], WS, 40)
    rel = cz.EquivRel.from_key(pts, lambda w: (w[0] * 7 + w[-1]) % 3)
    assert isinstance(cz.canonize_1ext(S, WS, rel, [], budget=0), cz.Inconclusive)


@given(st.integers(0, 2**32 - 1), st.sampled_from([(F2, 30), (S, 45)]))
def test_random_projection_round_trip(seed, case):
    desc, bound = case
    member = es.top_member(desc)
    u = member.restrict(random.Random(seed).randint(0, 3))
    pts = es.one_extensions(u, member, bound)
    stem = es.stem_of(desc, u).w_u
    p = cz.random_proj(member.index, stem, pts, random.Random(seed))
    rel = cz.relation_of_projection(p, pts)
    cert = cz.canonize_1ext(desc, member, rel, u)
    assert isinstance(cert, cz.OneExtCertificate)
    assert cz.validate_proj(cert.proj, member.index, list(cert.survivors)) == []
    induced = cz.relation_of_projection(cert.proj, cert.survivors)
    assert all(induced.related(a, b) == rel.related(a, b) for a, b in itertools.combinations(cert.survivors, 2))


# --- phi, irreducibility and canonical relations ----------------------------


def test_phi_of_constant_families():
    front = small_front(S, 3, 12)
    fam = cz.family_for(front, S, cz.Collapse)
    phi, _, _ = cz.build_phi(front, fam)
    assert all(phi[v] == frozenset() for v in front)
    phi, _, _ = cz.build_phi(front, cz.family_for(front, S, cz.Full))
    assert all(phi[v] == frozenset(v) for v in front)


def test_phi_of_mixed_family_by_hand():
    front = small_front(F2)[:2]
    assert front == [((0, 1), (0, 2)), ((0, 1), (0, 5))]
    fam = {(): cz.first_level(()), ((0, 1),): cz.Full((0,))}
    phi, phi1, phi2 = cz.build_phi(front, fam)
    assert phi1[front[0]] == {(0,), (0, 2)}
    assert phi[front[0]] == {(0, 2)} and phi[front[1]] == {(0, 5)}
    assert phi2 == phi1


def test_irreducibility_of_identity_and_constant():
    front = small_front(F2, 2, 12)
    ident = {u: frozenset(u) for u in front}
    assert cz.verify_inner_nw_star(ident, front).all_true
    const = {u: frozenset() for u in front}
    assert cz.verify_inner_nw_star(const, front).all_true


def test_nash_williams_counterexample():
    u, v = ((0, 1), (0, 2)), ((0, 1), (0, 5))
    phi = {u: frozenset({(0, 1)}), v: frozenset({(0, 1), (0, 5)})}
    report = cz.verify_inner_nw_star(phi, [u, v])
    assert report.inner
    assert report.nash_williams == (v, u, 1)


def test_star_is_unknown_not_false_without_witnesses():
    u = ((0, 1), (0, 2))
    report = cz.verify_inner_nw_star({u: frozenset()}, [u])
    assert report.star.holds is None and report.star.missing == (u,)


def test_canonical_examples():
    front = small_front(F2, 2, 10)
    eq = cz.EquivRel.from_key(front, lambda u: u)
    one = cz.EquivRel.from_key(front, lambda u: 0)
    ident = {u: frozenset(u) for u in front}
    const = {u: frozenset() for u in front}
    assert cz.verify_canonical(ident, front, eq) == cz.Ok()
    assert cz.verify_canonical(const, front, one) == cz.Ok()
    assert isinstance(cz.verify_canonical(const, front, eq), cz.Counterexample)


@pytest.mark.parametrize("case", [(F2, 2, 8), (F2, 3, 8), (S, 2, 8), (S, 3, 12)])
def test_irreducible_maps_are_unique_per_partition(case):
    desc, k, bound = case
    front = small_front(desc, k, bound)[:6]
    restr = sorted({u[:n] for u in front for n in range(len(u))})
    stems = {u: es.stem_of(desc, u).w_u for u in restr}
    makers = [cz.Collapse, cz.first_level, cz.Full]
    seen: dict = {}
    for choice in itertools.product(range(3), repeat=len(restr)):
        fam = {u: makers[c](stems[u]) for u, c in zip(restr, choice)}
        phi, _, phi2 = cz.build_phi(front, fam)
        assert all(phi[v] == cz.maximal_nodes(phi2[v]) for v in front)
        if not cz.verify_inner_nw_star(phi, front).all_true:
            continue
        partition = tuple(tuple(phi[a] == phi[b] for b in front) for a in front)
        values = tuple(phi[v] for v in front)
        assert seen.setdefault(partition, values) == values


# --- front canonization -----------------------------------------------------


@pytest.mark.parametrize("key, expect", [("equal", "identity"), ("one", "empty")])
def test_front_trivial_relations(key, expect):
    front = cz.approximations_of_length(F2, 2, 20)
    rel = cz.EquivRel.from_key(front, (lambda u: u) if key == "equal" else (lambda u: 0))
    cert = cz.canonize_front(F2, front, rel)
    assert isinstance(cert, cz.FrontCertificate)
    for u in cert.surviving:
        assert cert.phi[u] == (frozenset(u) if expect == "identity" else frozenset())


def test_front_first_coordinates():
    front = cz.approximations_of_length(F2, 2, 30)
    inducing, _, _ = cz.build_phi(front, cz.family_for(front, F2, cz.depth_family(1)))
    rel = cz.EquivRel.from_key(front, lambda u: inducing[u])
    cert = cz.canonize_front(F2, front, rel)
    assert isinstance(cert, cz.FrontCertificate)
    assert all(cert.phi[u] == inducing[u] for u in cert.surviving)
    assert cert.report.all_true
    labels = {u: rel.label(u) for u in cert.surviving}
    assert certcheck.check_front(cert.to_json(), labels).ok


def test_empty_front_rejected():
    with pytest.raises(ValueError):
        cz.canonize_front(F2, [], cz.EquivRel((), ()))


# --- colourings -------------------------------------------------------------


def test_rule_parser():
    assert cz.coloring_from_rule("min % 2")((3, 4)) == 1
    assert cz.coloring_from_rule("3 in b and size > 2")((1, 3, 5)) == 1
    for bad in ["__import__('os')", "min(", "x + 1", "b[0]"]:
        with pytest.raises(cz.RuleError):
            cz.coloring_from_rule(bad)


def test_constant_colouring_is_immediate():
    res = cz.homogenize(F2, lambda b: 0, 5, 10)
    assert res.selection == (0, 1, 2, 3, 4)


def test_parity_of_min_on_schreier():
    color = cz.coloring_from_rule("min % 2")
    res = cz.homogenize(S, color, 3, 12, min_elements=2)
    assert isinstance(res, cz.Homogeneous)
    inside = [b for b in enumerate_barrier(S, 12) if set(b) <= set(res.selection)]
    assert len(inside) >= 2 and len({b[0] % 2 for b in inside}) == 1


def test_not_found_at_small_bound():
    # a proper 2-colouring of pairs by parity of the sum has no homogeneous 3-set of mixed parity
    res = cz.homogenize(F2, cz.coloring_from_rule("(min + max) % 2"), 4, 4)
    assert isinstance(res, cz.NotFoundAtBound)


@given(st.integers(0, 2**32 - 1))
def test_homogenize_matches_exhaustive_search(seed):
    rng = random.Random(seed)
    bound = 9
    elems = enumerate_barrier(F2, bound)
    table = {b: rng.randint(0, 1) for b in elems}
    res = cz.homogenize(F2, table, 4, bound)
    exists = certcheck.homogeneous_exists(range(bound + 1), table.__getitem__, elems, 4)
    assert isinstance(res, cz.Homogeneous) == (exists is not None)
    if exists is not None:
        assert certcheck.check_homogeneous(res.selection, table.__getitem__, elems).ok
