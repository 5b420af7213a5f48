import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from querylearn.chaining import HornClause, HornKB, Mode
from querylearn.distributions import ExplicitDistribution, FixedSubset, IndependentCoin
from querylearn.generators import random_cnf, random_horn_kb, random_obscured_scene
from querylearn.logic import Var, Vocabulary, conj, disj
from querylearn.oracle import (
    EnumLimit,
    GuaranteeReport,
    OracleLimitError,
    TrialSpec,
    all_clauses,
    all_consistent_clauses,
    check_oblivious,
    enumerate_normal_proofs,
    exact_validity,
    monte_carlo_guarantee,
    pebbling_space,
    perfectly_valid_clauses,
    reference_space_search,
    trial_seed,
    truth,
)
from querylearn.resolution import EMPTY, Cnf, clause, count_bounds, learn_search_space, proof_space, verify_proof


@lru_cache(maxsize=None)
def space_profile(free: int) -> dict:
    """Number of refutation trees over ``free`` unused variables, by clause space."""
    out = {1: 1}
    if free == 0:
        return out
    sub = space_profile(free - 1)
    for a, ca in sub.items():
        for b, cb in sub.items():
            sp = a + 1 if a == b else max(a, b)
            out[sp] = out.get(sp, 0) + free * ca * cb
    return out


def count_up_to(n, s):
    return sum(c for sp, c in space_profile(n).items() if sp <= s)


class TestTruth:
    def test_threshold(self):
        f = conj(Var(0), disj(Var(1), Var(2)))
        assert truth(f, (1, 0, 1)) and not truth(f, (1, 0, 0))

    def test_validity(self):
        d = ExplicitDistribution.uniform([(0,), (1,)], 1)
        assert exact_validity(Var(0), d) == Fraction(1, 2)


class TestClauseEnumeration:
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_three_to_the_n(self, n):
        assert len(all_clauses(n)) == 3**n

    def test_width(self):
        assert len(all_clauses(3, 1)) == 7

    def test_limit(self):
        with pytest.raises(OracleLimitError):
            all_clauses(5, limit=EnumLimit(max_atoms=4))

    def test_consistent(self):
        got = set(all_consistent_clauses([(1, 0)], 2))
        assert clause(-1) not in got and clause(2) not in got and EMPTY not in got
        assert clause(1) in got and clause(-2) in got

    def test_perfectly_valid(self):
        d = ExplicitDistribution.uniform([(1, 0), (1, 1)], 2)
        got = set(perfectly_valid_clauses(d))
        assert clause(1) in got and clause(2) not in got


class TestReferenceSearch:
    def test_one_atom(self):
        p = reference_space_search(Cnf((clause(-1),), 1), [clause(1)], 2)
        assert p is not None and p.size() == 3

    def test_space_matters(self):
        # refuting all four clauses over two atoms needs space 3
        phi = Cnf((clause(1, 2), clause(1, -2), clause(-1, 2), clause(-1, -2)), 2)
        assert reference_space_search(phi, [], 2) is None
        p = reference_space_search(phi, [], 3)
        assert p is not None and verify_proof(p, phi, [])

    def test_limit(self):
        with pytest.raises(OracleLimitError):
            reference_space_search(Cnf((), 7), [], 2)


class TestNormalEnumeration:
    @pytest.mark.parametrize("n,s,count", [(2, 2, 7), (3, 2, 40), (4, 2, 317), (3, 3, 232), (4, 3, 67841)])
    def test_counts(self, n, s, count):
        assert count_up_to(n, s) == count
        assert len(enumerate_normal_proofs(n, s)) == count

    def test_space_agrees_with_production(self):
        for p in enumerate_normal_proofs(3, 3):
            assert pebbling_space(p.root) == proof_space(p.root)

    @pytest.mark.parametrize("n,s", [(2, 2), (3, 2), (3, 3)])
    def test_bounds(self, n, s):
        b = count_bounds(n, s)
        proofs = enumerate_normal_proofs(n, s)
        assert len(proofs) <= b.max_proofs_floor
        for p in proofs:
            k = p.size()
            assert 2 ** pebbling_space(p.root) - 1 <= k <= b.max_k_floor

    def test_limit(self):
        with pytest.raises(OracleLimitError):
            enumerate_normal_proofs(5, 2)


class TestObliviousCheck:
    def test_detects_skips(self):
        kb = HornKB(Vocabulary(["a", "b", "g"]), frozenset(), (HornClause((0,), 2), HornClause((1,), 0)))
        r = check_oblivious(kb, {0}, 2)
        assert r.ok
        assert len(r.extended_sequence) < len(r.kb_sequence)

    def test_random_sweep_has_nontrivial_cases(self):
        differing = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 7))
            kb = random_horn_kb(rng, n, int(rng.integers(1, 9)), 1)
            r = check_oblivious(kb, {int(rng.integers(n))}, int(rng.integers(n)))
            assert r.ok
            differing += r.extended_sequence != r.kb_sequence
        assert differing > 20


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_backtracking_search_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    phi = random_cnf(rng, n, int(rng.integers(0, 6)))
    samples = [random_obscured_scene(rng, n) for _ in range(int(rng.integers(1, 8)))]
    s = int(rng.integers(1, 4))
    h = all_consistent_clauses(samples, n)
    want = reference_space_search(phi, h, s) is not None
    assert (learn_search_space(phi, s, EMPTY, samples, backtrack=True) is not None) == want
    if learn_search_space(phi, s, EMPTY, samples) is not None:
        assert want


class TestGuaranteeHarness:
    def kb(self):
        vocab = Vocabulary(["a", "b", "g"])
        return HornKB(vocab, frozenset(), (HornClause((0, 1), 2),))

    def test_spec_validation(self):
        d = ExplicitDistribution.uniform([(1, 1, 1)], 3)
        with pytest.raises(ValueError):
            TrialSpec("chain", d, FixedSubset(frozenset()))
        with pytest.raises(ValueError):
            TrialSpec("res", d, FixedSubset(frozenset()))
        with pytest.raises(ValueError):
            TrialSpec("other", d, FixedSubset(frozenset()))

    def test_seeds_are_distinct_and_stable(self):
        seeds = {trial_seed(7, i) for i in range(100)}
        assert len(seeds) == 100
        assert trial_seed(7, 3) == trial_seed(7, 3)

    def test_margin(self):
        r = GuaranteeReport("x", "chain", 200, 10, 0.2, 0.1, Fraction(1), True)
        assert r.margin == pytest.approx(0.1 + 3 * (0.09 / 200) ** 0.5)

    def test_valid_support(self):
        d = ExplicitDistribution.uniform([(1, 1, 0), (1, 1, 1)], 3)
        spec = TrialSpec("chain", d, IndependentCoin(Fraction(1, 2)), kb=self.kb(), goal=2, trials=20, samples=30)
        report = monte_carlo_guarantee(spec)
        # the rule itself fails on (1,1,0), so [KB => g] holds on every scene
        assert report.valid_support_exists and report.query_validity == 1
        assert report.proof_rate == 1.0
        assert report.invalid_premise_rate == 0.0
        assert report.ok_premises and report.ok_rejection is None and report.passed

    def test_invalid_query_rejected(self):
        d = ExplicitDistribution.uniform([(1, 0, 0), (0, 1, 0), (1, 1, 0)], 3)
        spec = TrialSpec("chain", d, FixedSubset(frozenset()), kb=self.kb(), goal=2, trials=10, samples=20)
        report = monte_carlo_guarantee(spec)
        assert report.proof_rate == 0.0 and report.ok_rejection

    def test_deterministic(self):
        d = ExplicitDistribution.product([Fraction(9, 10), Fraction(9, 10), Fraction(1, 2)])
        spec = TrialSpec("chain", d, IndependentCoin(Fraction(1, 2)), kb=self.kb(), goal=2, trials=15, samples=10)
        assert monte_carlo_guarantee(spec).format() == monte_carlo_guarantee(spec).format()

    def test_resolution_fragment(self):
        d = ExplicitDistribution.uniform([(1, 1), (1, 0)], 2)
        phi = Cnf((clause(-1),), 2)
        spec = TrialSpec("res", d, IndependentCoin(Fraction(1, 2)), cnf=phi, s=2, trials=10, samples=40, epsilon=0.2)
        report = monte_carlo_guarantee(spec)
        assert report.valid_support_exists
        assert report.invalid_premise_rate == 0.0 and report.passed
