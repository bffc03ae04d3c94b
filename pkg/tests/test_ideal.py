import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellentuck import ideal
from ellentuck.barrier import FiniteRank, Point, Schreier
from ellentuck.ideal import All, Column, Cone, Diff, Empty, Intersect, Union_, explicit
from oracles import EXPR_CEILING, null_by_growth, random_expr

S, F2 = Schreier(), FiniteRank(k=2)


def test_membership_examples():
    assert ideal.is_null(F2, explicit([(0, 1), (2, 5)]))
    assert not ideal.is_null(F2, All())
    assert ideal.is_null(F2, Column(5))


def test_almost_leq_examples():
    assert ideal.almost_leq(F2, All(), Diff(All(), Column(3)))
    # Cone({4}) is column 4 alone, which is null just as Column(5) is
    assert ideal.almost_leq(F2, Cone((4,)), explicit([]))
    assert not ideal.almost_leq(F2, Diff(All(), Cone((4,))), explicit([]))
    assert ideal.almost_leq(S, Diff(All(), All()), All())


def test_column_slice_recursion():
    # column 4 of [w]^2 is a full copy of [w]^1, which is not null there
    assert not ideal.is_null(FiniteRank(k=1), All())
    assert ideal.is_null(F2, ideal.slice_column(All(), 4))


def test_materialize_examples():
    assert ideal.materialize_expr(S, Cone((1,)), 4) == [(1, 2), (1, 3), (1, 4)]
    assert ideal.materialize_expr(F2, Diff(All(), Column(0)), 3) == [(1, 2), (1, 3), (2, 3)]
    assert ideal.materialize_expr(S, Empty(), 9) == []


def test_non_null_witness_is_generic():
    v = ideal.in_fin_ideal(F2, Diff(All(), Union_(Column(0), Column(7))))
    assert isinstance(v, ideal.FinFalse)
    assert v.generic_from == 8 and v.sample[0] == 8


def test_point_barrier():
    assert not ideal.is_null(Point(), All())
    assert ideal.is_null(Point(), Empty())


def test_invalid_stems_rejected():
    with pytest.raises(ideal.ExprError):
        ideal.in_fin_ideal(S, Cone((2, 3, 4, 5)))
    with pytest.raises(ideal.ExprError):
        ideal.in_fin_ideal(F2, explicit([(1,)]))


def test_json_round_trip_is_exact():
    rng = random.Random(5)
    for _ in range(50):
        e = random_expr(rng, S)
        assert ideal.expr_from_json(ideal.expr_to_json(e)) == e


seeds = st.integers(0, 2**32 - 1)
barriers = st.sampled_from([S, F2, FiniteRank(k=3)])


@given(seeds, barriers)
def test_normal_form_has_same_elements(seed, desc):
    e = random_expr(random.Random(seed), desc)
    terms = ideal.normalize(desc, e)
    for b in ideal.materialize_expr(desc, All(), 12):
        in_terms = any(
            b[: len(t.stem)] == t.stem and not any(b[: len(c)] == c for c in t.excluded) for t in terms
        )
        assert in_terms == ideal.member(e, b)


@given(seeds, barriers)
def test_closure_laws(seed, desc):
    rng = random.Random(seed)
    x, y = random_expr(rng, desc), random_expr(rng, desc)
    nx, ny = ideal.is_null(desc, x), ideal.is_null(desc, y)
    assert ideal.is_null(desc, Union_(x, y)) == (nx and ny)
    if nx:
        assert ideal.is_null(desc, Intersect(x, y))
        assert ideal.is_null(desc, Diff(x, y))
    assert ideal.almost_leq(desc, x, Union_(x, y))
    assert ideal.almost_leq(desc, Intersect(x, y), x)


@given(seeds, barriers)
def test_symbolic_verdict_matches_materialized_growth(seed, desc):
    e = random_expr(random.Random(seed), desc)
    assert all(null_by_growth(desc, e, n) == ideal.is_null(desc, e) for n in (12, 16))


def test_ceiling_is_respected():
    rng = random.Random(1)
    for _ in range(30):
        e = random_expr(rng, S)
        text = repr(ideal.expr_to_json(e))
        assert all(int(tok) <= EXPR_CEILING for tok in __import__("re").findall(r"\d+", text))
