import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ellentuck.finite import (
    closure,
    is_initial,
    meet,
    prec_cmp,
    prec_key,
    sigma,
    sigma_inv,
)
from ellentuck.ordinal import Ordering

finite_sets = st.lists(st.integers(0, 30), max_size=7, unique=True).map(lambda xs: tuple(sorted(xs)))
nondec = st.lists(st.integers(0, 12), max_size=6).map(lambda xs: tuple(sorted(xs)))


@pytest.mark.parametrize("a, s", [((), ()), ((1, 2), (1, 1)), ((3, 4, 5, 6), (3, 3, 3, 3))])
def test_sigma_examples(a, s):
    assert sigma(a) == s


def test_sigma_inv_example():
    assert sigma_inv((2, 3, 4)) == (2, 4, 6)
    assert sigma_inv(()) == ()


@pytest.mark.parametrize("s, t", [((2, 2, 3), (2, 3)), ((3, 3, 3, 3), (1, 4)), ((), (0,))])
def test_prec_examples(s, t):
    assert prec_cmp(s, t) is Ordering.LESS


def test_listed_prec_chain_is_increasing():
    chain = [(), (0,), (1,), (1, 1), (1, 2), (2,), (2, 2), (2, 2, 2), (1, 3), (2, 2, 3), (2, 3),
             (2, 3, 3), (3,), (3, 3), (3, 3, 3), (3, 3, 3, 3), (1, 4)]
    assert sorted(chain, key=prec_key) == chain


@given(finite_sets)
def test_sigma_round_trip(a):
    assert sigma_inv(sigma(a)) == a


@given(nondec)
def test_sigma_inv_round_trip(s):
    assert sigma(sigma_inv(s)) == s


@given(nondec, nondec)
def test_proper_initial_segments_come_first(s, t):
    if is_initial(s, t) and s != t:
        assert prec_cmp(s, t) is Ordering.LESS


@given(finite_sets, finite_sets)
def test_meet_is_common_initial_segment(a, b):
    m = meet(a, b)
    assert is_initial(m, a) and is_initial(m, b)
    assert len(m) == len(a) or len(m) == len(b) or a[len(m)] != b[len(m)]


def test_closure_is_nonempty_prefixes():
    assert closure([(1, 2, 3)]) == {(1,), (1, 2), (1, 2, 3)}


def test_prec_has_finite_initial_segments():
    # every sequence with entries <= 3 and length <= 4 sits below (4,)
    below = [s for r in range(5) for s in itertools.combinations_with_replacement(range(4), r)]
    assert all(prec_cmp(s, (4,)) is Ordering.LESS for s in below)
