import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcegar.formula import (
    ALL_FRAGMENTS,
    FALSE,
    TRUE,
    And,
    FormulaError,
    FormulaSyntaxError,
    Fragment,
    Next,
    Not,
    Or,
    Prob,
    Prop,
    Until,
    classify,
    explain_outside,
    negate,
    parse_formula,
    size,
    sub_and_path_formulas,
)
from randgen import random_liveness, random_safety

P, Q = Prop("P"), Prop("Q")


def test_parse_two_choice_formula():
    f = parse_formula("P<3/4[X (P1 & !P2)] | P<3/4[X (!P1 & P2)]")
    assert f == Or(
        Prob("<", F(3, 4), Next(And(Prop("P1"), Not(Prop("P2"))))),
        Prob("<", F(3, 4), Next(And(Not(Prop("P1")), Prop("P2")))),
    )


def test_parse_until_and_eventually():
    assert parse_formula("P<=0[true U P]") == Prob("<=", F(0), Until(TRUE, P))
    assert parse_formula("P<=0[F P]") == parse_formula("P<=0[◊ P]") == parse_formula("P<=0[true U P]")


def test_parse_nested_and_precedence():
    f = parse_formula("P | Q & !P")
    assert f == Or(P, And(Q, Not(P)))
    g = parse_formula("P<1/2[!P<=1/4[X P] U Q]")
    assert g == Prob("<", F(1, 2), Until(Not(Prob("<=", F(1, 4), Next(P))), Q))


def test_p_as_proposition_when_not_followed_by_comparison():
    assert parse_formula("P & P<1[X P]") == And(P, Prob("<", F(1), Next(P)))


def test_decimal_threshold_is_exact():
    assert parse_formula("P<0.25[X P]").bound == F(1, 4)


@pytest.mark.parametrize(
    "text, pos",
    [("P<2[X P]", 2), ("P & ", 4), ("(P", 2), ("P<1/2[P]", 7), ("P $ Q", 2), ("P Q", 2)],
)
def test_syntax_errors_carry_positions(text, pos):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula(text)
    assert exc.value.pos == pos


def test_threshold_outside_unit_interval():
    with pytest.raises(FormulaSyntaxError, match=r"threshold 2 outside \[0,1\] at position 2"):
        parse_formula("P<2[X P]")
    with pytest.raises(FormulaError):
        Prob("<", F(3, 2), Next(P))


def test_only_upper_bounds():
    with pytest.raises(FormulaError):
        Prob(">", F(1, 2), Next(P))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_print_parse_round_trip(seed):
    rng = random.Random(seed)
    f = random_safety(rng, 3) if seed % 2 else random_liveness(rng, 3)
    assert parse_formula(str(f)) == f


def test_classify_basic():
    assert classify(P) == ALL_FRAGMENTS
    assert classify(Not(P)) == ALL_FRAGMENTS
    assert classify(parse_formula("P<1/2[X P]")) == Fragment.SAFETY
    assert classify(parse_formula("P<=1/2[X P]")) == Fragment.SAFETY | Fragment.WEAK_SAFETY
    assert classify(parse_formula("!P<1/2[X P]")) == Fragment.LIVENESS
    assert classify(parse_formula("!P<=1/2[X P]")) == Fragment.LIVENESS | Fragment.STRICT_LIVENESS


def test_classify_nesting():
    # safety operands inside a P-operator are outside both fragments
    assert classify(parse_formula("P<1/2[X P<1/2[X P]]")) == Fragment.OUTSIDE
    # liveness inside safety is fine
    assert Fragment.SAFETY in classify(parse_formula("P<1/2[X !P<1/2[X P]]"))
    # weak safety needs strict liveness operands
    f = parse_formula("P<=1/2[X !P<1/2[X P]]")
    assert classify(f) == Fragment.SAFETY
    # mixing a safety and a liveness conjunct
    assert classify(parse_formula("P<1/2[X P] & !P<1/2[X P]")) == Fragment.OUTSIDE


def test_negation_of_compound_is_outside():
    f = Not(And(P, Q))
    assert classify(f) == Fragment.OUTSIDE
    assert "negation" in explain_outside(f)
    assert explain_outside(P) is None


def test_negate_swaps_fragments():
    f = parse_formula("P<1/2[X P] | (Q & P<=1/3[true U P])")
    g = negate(f)
    assert g == And(
        Not(Prob("<", F(1, 2), Next(P))),
        Or(Not(Q), Not(Prob("<=", F(1, 3), Until(TRUE, P)))),
    )
    assert Fragment.LIVENESS in classify(g)
    assert negate(g) == f
    assert negate(TRUE) == FALSE


def test_negate_rejects_outside():
    with pytest.raises(FormulaError):
        negate(Not(And(P, Q)))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_negate_maps_safety_to_liveness(seed):
    rng = random.Random(seed)
    f = random_safety(rng, 3, weak=bool(seed % 2))
    c = classify(f)
    g = negate(f)
    assert Fragment.SAFETY in c and Fragment.LIVENESS in classify(g)
    if Fragment.WEAK_SAFETY in c:
        assert Fragment.STRICT_LIVENESS in classify(g)
    assert negate(g) == f


def test_size_counts_nodes():
    assert size(parse_formula("P<=0[true U P]")) == 4
    assert size(parse_formula("!P & Q")) == 4


def test_sub_and_path_formulas():
    f = parse_formula("!P<=3/4[true U P]")
    states, paths = sub_and_path_formulas(f)
    assert states == (P, TRUE, f)
    assert paths == (Until(TRUE, P),)
    with pytest.raises(FormulaError):
        sub_and_path_formulas(parse_formula("P<=3/4[true U P]"))
