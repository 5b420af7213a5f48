import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from querylearn.logic import (
    Not,
    Threshold,
    Var,
    Vocabulary,
    atoms,
    conj,
    consistent,
    disj,
    evaluate,
    format_row,
    horn_to_formula,
    iff,
    implies,
    parse_row,
    partial_eval,
    refines,
    size,
    witnessed,
)
from querylearn.oracle import truth

from strategies import completions, formulas, obscured, scenes

R = [Var(i) for i in range(6)]
# 5 R1 + R2 + R3 + R4 + R5 - R6 >= 4
RISK = Threshold(((5, R[0]), (1, R[1]), (1, R[2]), (1, R[3]), (1, R[4]), (-1, R[5])), 4)
a, b, c = Var(0), Var(1), Var(2)


def row(text):
    return parse_row(text)


class TestVocabulary:
    def test_intern_is_dense_and_idempotent(self):
        v = Vocabulary()
        assert v.intern("p") == 0
        assert v.intern("q") == 1
        assert v.intern("p") == 0
        assert len(v) == 2
        assert v.name(1) == "q"
        assert "q" in v and "r" not in v

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            Vocabulary(["a"]).id("b")


class TestConstruction:
    def test_zero_weight_rejected(self):
        with pytest.raises(ValueError):
            Threshold(((0, a),), 1)

    def test_int64_overflow_rejected(self):
        with pytest.raises(OverflowError):
            Threshold(((2**63, a),), 1)
        with pytest.raises(OverflowError):
            Threshold(((1, a),), -(2**63) - 1)

    def test_sugar(self):
        assert conj(a, b) == Threshold(((1, a), (1, b)), 2)
        assert disj(a, b) == Threshold(((1, a), (1, b)), 1)
        assert implies(a, b) == Threshold(((-1, a), (1, b)), 0)

    def test_atoms_and_size(self):
        f = conj(a, Not(c))
        assert atoms(f) == {0, 2}
        assert size(f) == 4

    def test_hashable(self):
        assert len({conj(a, b), conj(a, b), disj(a, b)}) == 2


class TestEvaluate:
    def test_risk_formula_with_first_factor_only(self):
        assert evaluate(RISK, (1, 0, 0, 0, 0, 0))

    def test_empty_conjunction_is_true(self):
        assert evaluate(conj(), ())
        assert evaluate(conj(), (0, 1))

    def test_two_a_minus_three_b(self):
        f = Threshold(((2, a), (-3, b)), 0)
        table = {(0, 0): True, (1, 0): True, (0, 1): False, (1, 1): False}
        for x, want in table.items():
            assert evaluate(f, x) is want

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            evaluate(Var(3), (0, 1))

    def test_iff(self):
        for x in itertools.product((0, 1), repeat=2):
            assert evaluate(iff(a, b), x) == (x[0] == x[1])

    @settings(max_examples=300)
    @given(formulas(5), scenes(5))
    def test_agrees_with_oracle(self, f, x):
        assert evaluate(f, x) == truth(f, x)


class TestPartialEval:
    def test_risk_witnessed_true(self):
        assert partial_eval(RISK, row("1*****")) is True

    def test_risk_witnessed_false(self):
        assert partial_eval(RISK, row("0****1")) is False

    def test_risk_residual(self):
        got = partial_eval(RISK, row("01***0"))
        assert got == Threshold(((1, R[2]), (1, R[3]), (1, R[4])), 3)

    def test_total_scene_gives_classical_value(self):
        x = (1, 0, 1, 1, 0, 1)
        assert partial_eval(RISK, x) is evaluate(RISK, x)

    def test_excluded_middle_is_not_witnessed(self):
        f = disj(a, Not(a))
        assert not isinstance(partial_eval(f, (None,)), bool)
        assert witnessed(f, (None,)) is None

    def test_negation_flips(self):
        assert partial_eval(Not(a), (1,)) is False
        assert partial_eval(Not(a), (None,)) == Not(a)

    def test_empty_threshold(self):
        assert partial_eval(Threshold((), 0), ()) is True
        assert partial_eval(Threshold((), 1), ()) is False

    def test_double_negation_kept(self):
        assert partial_eval(Not(Not(a)), (None,)) == Not(Not(a))


class TestHorn:
    def test_fact(self):
        assert horn_to_formula((), 3) == Threshold(((1, Var(3)),), 1)

    def test_truth_table(self):
        f = horn_to_formula((0, 1), 2)
        for x in itertools.product((0, 1), repeat=3):
            assert evaluate(f, x) == (x != (1, 1, 0))

    def test_witnessed_by_head(self):
        assert partial_eval(horn_to_formula((0, 1), 2), row("1*1")) is True

    def test_duplicate_body(self):
        with pytest.raises(ValueError):
            horn_to_formula((0, 0), 1)


class TestScenes:
    def test_row_round_trip(self):
        assert format_row(parse_row("10*1")) == "10*1"
        with pytest.raises(ValueError):
            parse_row("10x")

    def test_consistent_and_refines(self):
        assert consistent(row("1*0"), (1, 1, 0))
        assert not consistent(row("1*0"), (0, 1, 0))
        assert refines(row("110"), row("1*0"))
        assert not refines(row("1*0"), row("110"))


N = 6


@settings(max_examples=400)
@given(formulas(N), obscured(N))
def test_witnessing_is_sound(f, rho):
    value = partial_eval(f, rho)
    for x in completions(rho):
        if isinstance(value, bool):
            assert truth(f, x) is value
        else:
            assert truth(value, x) == truth(f, x)


@settings(max_examples=300)
@given(formulas(N), obscured(N), st.data())
def test_witnessing_is_monotone(f, rho, data):
    value = partial_eval(f, rho)
    finer = tuple(v if v is not None else data.draw(st.sampled_from([0, 1, None])) for v in rho)
    if isinstance(value, bool):
        assert partial_eval(f, finer) is value


@settings(max_examples=300)
@given(formulas(N), obscured(N))
def test_residual_mentions_only_hidden_atoms(f, rho):
    value = partial_eval(f, rho)
    if not isinstance(value, bool):
        assert all(rho[i] is None for i in atoms(value))
