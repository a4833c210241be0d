from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import char_matrices, identity
from lvpir.errors import ParseError, ShapeError, StochasticityError
from lvpir.model import (CharMatrix, LatentDistribution, QuerySet, format_matrix, parse_matrix,
                         parse_rational, posterior_given_query, prior_s)


def test_parse_example1_exact():
    H = parse_matrix("# example 1\n2 3\n0.1 0.9 0.5\n0.9 0.1 0.5\n")
    assert H.entries == ((F(1, 10), F(9, 10), F(1, 2)), (F(9, 10), F(1, 10), F(1, 2)))
    assert (H.T, H.K) == (2, 3)


def test_parse_single_entry():
    assert parse_matrix("1\n").entries == ((F(1),),)


def test_fraction_and_decimal_literals_agree():
    a = parse_matrix("2 2\n3/10 1\n7/10 0\n")
    b = parse_matrix("2 2\n0.3 1.0\n0.70 0\n")
    assert a == b


@pytest.mark.parametrize("token,value", [("0.3", F(3, 10)), ("3/10", F(3, 10)), ("1", F(1)),
                                         (".25", F(1, 4)), ("6/8", F(3, 4))])
def test_parse_rational(token, value):
    assert parse_rational(token) == value


@pytest.mark.parametrize("token", ["abc", "1e-1", "0.3.1", "1/0", "nan", ""])
def test_parse_rational_rejects(token):
    with pytest.raises(ParseError):
        parse_rational(token)


def test_column_not_summing_to_one():
    with pytest.raises(StochasticityError) as info:
        parse_matrix("2 2\n0.5 0.49\n0.5 0.5\n")
    assert info.value.column == 2
    assert info.value.total == F(99, 100)


def test_ragged_rows():
    with pytest.raises(ShapeError):
        parse_matrix("2 2\n0.5 0.5\n0.5\n")
    with pytest.raises(ShapeError):
        parse_matrix("2 2\n1 1\n")


def test_bad_header_and_tokens():
    with pytest.raises(ParseError):
        parse_matrix("two 2\n1 1\n0 0\n")
    with pytest.raises(ParseError):
        parse_matrix("1 1\nx\n")
    with pytest.raises(ParseError):
        parse_matrix("# only comments\n")


def test_entry_out_of_range():
    with pytest.raises(StochasticityError):
        CharMatrix(((F(3, 2),), (F(-1, 2),)))


def test_format_round_trip(h1, h3):
    for H in (h1, h3):
        text = format_matrix(H)
        assert parse_matrix(text) == H
        assert format_matrix(parse_matrix(text)) == text
    assert format_matrix(h1) == "2 3\n1/10 9/10 1/2\n9/10 1/10 1/2\n"


def test_prior_examples(h1, h3):
    assert prior_s(h1).probs == (F(1, 2), F(1, 2))
    assert prior_s(h3).probs == (F(1, 5), F(3, 10), F(1, 2))
    assert prior_s(identity(4)).probs == (F(1, 4),) * 4


def test_posterior_examples(h1):
    assert posterior_given_query(h1, QuerySet.of(3, [3])).probs == (F(1, 2), F(1, 2))
    assert posterior_given_query(h1, QuerySet.of(3, [1])).probs == (F(1, 10), F(9, 10))


def test_query_set_forms():
    q = QuerySet.of(5, [4, 2])
    assert q.members == (2, 4)
    assert q.indicator == (0, 1, 0, 1, 0)
    assert q.mask == 0b01010
    assert QuerySet.from_mask(5, q.mask) == q
    assert QuerySet.from_indicator(q.indicator) == q
    assert 4 in q and 3 not in q and len(q) == 2


def test_query_set_invariants():
    with pytest.raises(ValueError):
        QuerySet(3, ())
    with pytest.raises(ValueError):
        QuerySet(3, (1, 1))
    with pytest.raises(IndexError):
        QuerySet(3, (0, 1))
    with pytest.raises(IndexError):
        QuerySet(3, (4,))


def test_latent_distribution_must_normalize():
    with pytest.raises(ValueError):
        LatentDistribution((F(1, 2), F(1, 3)))
    assert LatentDistribution((F(1, 10), F(9, 10))).tv_distance(
        LatentDistribution((F(1, 2), F(1, 2)))) == F(2, 5)


def test_integer_scaling(h1):
    assert h1.scale == 10
    assert h1.integer_rows == ((1, 9, 5), (9, 1, 5))


@settings(max_examples=150, deadline=None)
@given(char_matrices())
def test_full_set_identity_and_normalization(H):
    prior = prior_s(H)
    assert posterior_given_query(H, QuerySet.full(H.K)) == prior
    assert sum(prior.probs) == 1
    for p in prior.probs:
        assert isinstance(p, F)


@settings(max_examples=100, deadline=None)
@given(char_matrices(), st.randoms(use_true_random=False), st.data())
def test_permutation_invariance(H, rnd, data):
    order = list(range(1, H.K + 1))
    rnd.shuffle(order)
    P = H.permute_columns(order)
    members = data.draw(st.sets(st.integers(1, H.K), min_size=1))
    # column j of P is column order[j-1] of H, so H's index i sits at position pos[i]
    pos = {orig: j + 1 for j, orig in enumerate(order)}
    q = QuerySet.of(H.K, members)
    qp = QuerySet.of(H.K, [pos[i] for i in members])
    assert posterior_given_query(H, q) == posterior_given_query(P, qp)
    assert prior_s(H) == prior_s(P)
    assert sum(posterior_given_query(H, q).probs) == 1
