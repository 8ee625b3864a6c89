from fractions import Fraction

import pytest

from tlsynth.errors import InfinityClash
from tlsynth.exact import (
    NEG_INF,
    POS_INF,
    Cost,
    cost_sum,
    decimal4,
    format_rational,
    parse_rational,
)


def test_finite_arithmetic_is_exact():
    assert Cost(Fraction(1, 3)) + Cost(Fraction(1, 6)) == Cost(Fraction(1, 2))
    assert cost_sum([Cost(1), Cost(2), Cost(Fraction(1, 2))]) == Cost(Fraction(7, 2))
    assert cost_sum([]) == Cost(0)


def test_saturating_addition():
    assert Cost(5) + POS_INF == POS_INF
    assert NEG_INF + Cost(-17) == NEG_INF
    assert POS_INF + POS_INF == POS_INF


def test_opposite_infinities_clash():
    with pytest.raises(InfinityClash):
        POS_INF + NEG_INF
    with pytest.raises(InfinityClash):
        cost_sum([Cost(1), NEG_INF, POS_INF])


def test_total_order():
    assert NEG_INF < Cost(-1000) < Cost(0) < Cost(Fraction(1, 10)) < POS_INF
    assert not POS_INF < POS_INF
    assert max([Cost(3), POS_INF, Cost(7)]) == POS_INF


def test_parse_and_format_round_trip():
    for text in ["3", "-2", "5/4", "0"]:
        assert format_rational(parse_rational(text)) == text
    assert parse_rational("0.25") == Fraction(1, 4)
    assert Cost.parse("+inf") == POS_INF
    assert Cost.parse("-inf") == NEG_INF
    assert str(Cost(Fraction(7, 2))) == "7/2"


def test_decimal4_round_half_even():
    assert decimal4(Fraction(2672, 1000)) == "2.6720"
    assert decimal4(Fraction(1, 3)) == "0.3333"
    # ties round to the even last digit
    assert decimal4(Fraction(25, 100000)) == "0.0002"
    assert decimal4(Fraction(15, 100000)) == "0.0002"
    assert decimal4(Fraction(3)) == "3.0000"
