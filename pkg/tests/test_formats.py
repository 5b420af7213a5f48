from fractions import Fraction

import pytest

from querylearn.distributions import FixedSubset, IndependentCoin, ValueDependent
from querylearn.formats import (
    FormatError,
    format_cnf,
    format_distribution,
    format_scenes,
    parse_clause,
    parse_cnf,
    parse_distribution,
    parse_kb,
    parse_mask,
    parse_pattern,
    parse_scenes,
)
from querylearn.logic import Var, Vocabulary
from querylearn.resolution import clause


def test_pattern():
    p = parse_pattern("hit(X, floor)")
    assert p.predicate == "hit" and p.args == ("X", "floor")
    assert parse_pattern("rain").args == ()
    with pytest.raises(ValueError):
        parse_pattern("p(X")


class TestKB:
    def test_grounds_rules(self):
        kb = parse_kb("domain a b\nfact p(a)  # given\nrule p(X) => q(X)\n")
        assert len(kb.rules) == 2
        assert kb.rule_label(1) == "[p(X)] => q(X) / X=b"

    def test_line_numbers(self):
        with pytest.raises(FormatError, match="<kb>:2"):
            parse_kb("domain a\nrule p(X) q(X)\n")
        with pytest.raises(FormatError, match="<kb>:1"):
            parse_kb("axiom p\n")

    def test_empty_body(self):
        kb = parse_kb("rule => p\n")
        assert kb.rules[0].body == ()


class TestDistribution:
    def test_columns_follow_vocab(self):
        v = Vocabulary(["b", "a"])
        d = parse_distribution("atoms: a b\n1/4 10\n3/4 01\n", v)
        assert dict(d.support) == {(0, 1): Fraction(1, 4), (1, 0): Fraction(3, 4)}

    def test_round_trip(self):
        v = Vocabulary()
        d = parse_distribution("atoms: a b\n1/3 11\n2/3 00\n", v)
        assert parse_distribution(format_distribution(d, v), Vocabulary()) == d

    def test_must_cover_vocab(self):
        with pytest.raises(FormatError, match="does not cover"):
            parse_distribution("atoms: a\n1 1\n", Vocabulary(["a", "z"]))

    def test_errors(self):
        with pytest.raises(FormatError, match=":2"):
            parse_distribution("atoms: a\n1/2 2\n", Vocabulary())
        with pytest.raises(FormatError, match="sum"):
            parse_distribution("atoms: a\n1/2 1\n", Vocabulary())
        with pytest.raises(FormatError, match="header"):
            parse_distribution("1 1\n", Vocabulary())


class TestMask:
    def test_kinds(self):
        v = Vocabulary(["a", "b", "c"])
        assert parse_mask("fixed a c", v) == FixedSubset(frozenset({0, 2}))
        assert parse_mask("coin 1/2", v) == IndependentCoin(Fraction(1, 2))
        m = parse_mask("when a & ~b hide c with 3/4\nwhen b hide a b with 1\n", v)
        assert isinstance(m, ValueDependent) and len(m.rules) == 2
        assert m.rules[0].hidden == {2} and m.rules[0].prob == Fraction(3, 4)

    def test_errors(self):
        v = Vocabulary(["a"])
        with pytest.raises(FormatError, match=":1"):
            parse_mask("when z hide a with 1", v)
        with pytest.raises(FormatError):
            parse_mask("coin 1/2\nfixed a", v)
        with pytest.raises(FormatError):
            parse_mask("# nothing\n", v)
        with pytest.raises(FormatError):
            parse_mask("when a hide a with 2", v)


class TestScenes:
    def test_padding(self):
        v = Vocabulary(["x", "y", "z"])
        s = parse_scenes("atoms: z x\n1*\n0 1\n", v)
        assert s.scenes == ((None, None, 1), (1, None, 0))

    def test_round_trip(self):
        v = Vocabulary()
        s = parse_scenes("atoms: a b\n1*\n*0\n", v)
        assert parse_scenes(format_scenes(s, v), Vocabulary()).scenes == s.scenes

    def test_bad_row(self):
        with pytest.raises(FormatError, match=":3"):
            parse_scenes("atoms: a b\n11\n1\n", Vocabulary())


class TestCnf:
    def test_names_and_clauses(self):
        phi, v = parse_cnf("c atom 1 rain\nc plain comment\np cnf 2 2\n1 -2 0\n-1\n0\n")
        assert v.names == ("rain", "x2")
        assert phi.clauses == (clause(1, -2), clause(-1))

    def test_round_trip(self):
        phi, v = parse_cnf("p cnf 3 2\n1 -3 0 2 0\n")
        again, _ = parse_cnf(format_cnf(phi, v))
        assert again == phi

    def test_errors(self):
        with pytest.raises(FormatError, match="header"):
            parse_cnf("1 0\n")
        with pytest.raises(FormatError, match="terminated"):
            parse_cnf("p cnf 1 1\n1\n")
        with pytest.raises(FormatError):
            parse_cnf("p cnf 1 1\n2 0\n")


def test_clause_text():
    v = Vocabulary(["a", "b"])
    assert parse_clause("~a | b", v) == clause(-1, 2)
    assert parse_clause("-1 2 0", v) == clause(-1, 2)
    assert parse_clause("", v) == frozenset()
    with pytest.raises(FormatError):
        parse_clause("a ~a", v)
    with pytest.raises(FormatError):
        parse_clause("c", v)
