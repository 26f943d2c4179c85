from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratiolab import groups as G
from ratiolab.groups import (
    BudgetExceeded,
    GroupError,
    ball,
    bidirectional_length,
    central_powers_in_ball,
    heisenberg_word_length,
    set_product,
)

from oracles import heis_lengths, heis_mul

HEIS = G.heisenberg()
Z1 = G.zd(1)
Z2 = G.zd(2)
F2 = G.free_group(2)
ZI = G.zinf([1, 2, 5])

a, b = G.HEIS_A, G.HEIS_B

heis_el = st.tuples(st.integers(-30, 30), st.integers(-400, 400), st.integers(-30, 30))
free_word = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12).map(lambda w: G._free_mul((), tuple(w)))
zinf_el = st.dictionaries(st.sampled_from([1, 2, 5]), st.integers(-5, 5).filter(bool), max_size=3).map(
    lambda d: tuple(sorted(d.items()))
)


# -- worked examples


def test_heis_products():
    assert HEIS.multiply(a, b) == (1, 1, 1)
    binv, ainv = HEIS.invert(b), HEIS.invert(a)
    c = HEIS.multiply(HEIS.multiply(HEIS.multiply(binv, ainv), b), a)
    assert c == (0, -1, 0) == G.HEIS_C


def test_identity_and_inverse_examples():
    for ctx, g in [(HEIS, (3, -7, 2)), (Z2, (4, 1)), (F2, (1, 2, -1)), (ZI, ((1, 3), (5, -1)))]:
        assert ctx.multiply(g, ctx.identity) == g
        assert ctx.invert(ctx.identity) == ctx.identity
    assert Z2.invert((3, -1)) == (-3, 1)
    assert HEIS.invert((1, 1, 1)) == (-1, 0, -1)


def test_ball_examples():
    assert len(ball(HEIS, 0)) == 1
    assert len(ball(HEIS, 1)) == 5
    assert len(ball(HEIS, 2)) == 17
    assert len(ball(Z2, 2)) == 13


def test_word_length_examples():
    assert HEIS.word_length(HEIS.identity) == 0
    assert HEIS.word_length((0, -1, 0)) == 4
    assert Z2.word_length((3, -1)) == 4
    assert heisenberg_word_length((0, 0, 0)) == 0
    assert heisenberg_word_length((0, -1, 0)) == 4
    assert heisenberg_word_length((5, 0, 0)) == 5


def test_translated_ball_examples():
    assert Z1.translated_ball_contains(2, (10,), (10,))
    assert not Z1.translated_ball_contains(2, (10,), (13,))
    assert HEIS.translated_ball_contains(4, HEIS.identity, G.HEIS_C)


def test_set_product_examples():
    B1 = ball(Z1, 1)
    assert set_product(B1, B1).elements == ball(Z1, 2).elements
    e = G.subset(HEIS, [HEIS.identity])
    assert set_product(ball(HEIS, 3), e).elements == ball(HEIS, 3).elements
    B = set_product(ball(HEIS, 1), ball(HEIS, 1))
    assert len(B) == 17 and B.elements == ball(HEIS, 2).elements


def test_central_powers_examples():
    assert central_powers_in_ball(0) == {0}
    assert {-1, 0, 1} <= central_powers_in_ball(1)
    assert {-2, -1, 0, 1, 2} <= central_powers_in_ball(2)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_central_powers_match_ball_filter(r):
    lengths = heis_lengths(4 * r)
    oracle = {-g[1] for g, d in lengths.items() if g[0] == 0 and g[2] == 0}
    assert central_powers_in_ball(r) == oracle


# -- errors


def test_mismatched_elements_rejected():
    with pytest.raises(GroupError):
        HEIS.multiply((1, 2), (0, 0, 0))
    with pytest.raises(GroupError):
        F2.multiply((1, -1), ())
    with pytest.raises(GroupError):
        ZI.check(((1, 0),))


def test_generating_set_validation():
    with pytest.raises(GroupError):
        G.GroupContext("heis", 3, ((1, 0, 0),))
    with pytest.raises(GroupError):
        G.GroupContext("zd", 1, ((0,), (1,), (-1,)))
    ctx = G.GroupContext("zd", 1, ((0,), (1,), (-1,)), allow_identity=True)
    assert len(ball(ctx, 3)) == 7


def test_budget_error_reports_layers():
    ctx = G.heisenberg(budget=1000)
    with pytest.raises(BudgetExceeded) as info:
        ball(ctx, 12)
    assert info.value.layers >= 5
    # the cache stays exact after a failed extension
    assert len(ball(ctx, 5)) == 299


# -- invariants


def test_balls_strictly_nested():
    for ctx in (HEIS, Z2, F2, ZI):
        sizes = G.ball_sizes(ctx, 6)
        assert all(x < y for x, y in zip(sizes, sizes[1:]))


def test_ball_lengths_agree_with_bfs_oracle():
    B = ball(HEIS, 9)
    oracle = heis_lengths(9)
    assert B.elements == frozenset(oracle)
    assert all(B.lengths[g] == oracle[g] for g in oracle)


def test_nonstandard_generators_use_search():
    # Z with generators +-1, +-3
    ctx = G.GroupContext("zd", 1, ((1,), (-1,), (3,), (-3,)))
    assert not ctx.standard
    assert ctx.word_length((7,)) == 3
    assert ctx.word_length((0,)) == 0
    assert len(ball(ctx, 1)) == 5


@given(heis_el, heis_el)
def test_heis_law_matches_matrix_product(g, h):
    assert HEIS._mul(g, h) == heis_mul(g, h)


@given(heis_el, heis_el, heis_el)
def test_heis_associative(g, h, k):
    assert HEIS._mul(HEIS._mul(g, h), k) == HEIS._mul(g, HEIS._mul(h, k))


@given(heis_el)
def test_heis_inverse(g):
    assert HEIS._mul(g, HEIS.invert(g)) == HEIS.identity == HEIS._mul(HEIS.invert(g), g)


@given(heis_el, heis_el)
def test_heis_triangle_and_symmetry(g, h):
    wl = heisenberg_word_length
    assert wl(HEIS._mul(g, h)) <= wl(g) + wl(h)
    assert wl(HEIS.invert(g)) == wl(g)
    assert wl(g) >= abs(g[0]) + abs(g[2])


@given(st.tuples(st.integers(-4, 4), st.integers(-12, 12), st.integers(-4, 4)))
def test_heis_closed_form_matches_bidirectional(g):
    assert heisenberg_word_length(g) == bidirectional_length(HEIS, g)


@given(free_word, free_word)
def test_free_group(g, h):
    F2.check(g)
    assert F2.word_length(F2.multiply(g, h)) <= len(g) + len(h)
    assert F2.multiply(g, F2.invert(g)) == ()


@given(zinf_el, zinf_el)
def test_zinf(g, h):
    ZI.check(g)
    gh = ZI.multiply(g, h)
    ZI.check(gh)
    assert ZI.multiply(gh, ZI.invert(h)) == g
    assert ZI.word_length(gh) <= ZI.word_length(g) + ZI.word_length(h)


def test_zinf_outside_span_is_infinite():
    assert ZI.word_length(((3, 1),)) == float("inf")


@given(st.integers(0, 6))
def test_balls_symmetric(n):
    for ctx in (HEIS, F2):
        B = ball(ctx, n)
        assert all(ctx.invert(g) in B for g in B.elements)


def test_growth_fit_and_slope():
    # (2n^2 + 2n + 1) / n^2 decreases in n
    assert G.fit_growth_constants(Z2, 2, 1, 20) == (2, Fraction(841, 400), Fraction(5))
    sizes = G.ball_sizes(HEIS, 16)
    assert 3.5 <= G.loglog_slope(sizes, 8, 16) <= 4.5


def test_dilation_is_endomorphism():
    g, h = (2, -3, 1), (-1, 4, 5)
    for lam in (2, 3, 7):
        assert G.dilate(HEIS._mul(g, h), lam) == HEIS._mul(G.dilate(g, lam), G.dilate(h, lam))
        assert heisenberg_word_length(G.dilate(g, lam)) <= lam * heisenberg_word_length(g)
