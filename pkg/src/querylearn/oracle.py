"""Brute-force reference implementations for cross-checking the learners.

Nothing here calls the production evaluators (``logic.evaluate``,
``logic.partial_eval``, ``resolution.clause_falsified``): truth values,
witnessing and proof search are recomputed along separate code paths so a
bug in one side shows up as a disagreement.  Everything is exponential and
meant for a handful of atoms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import chaining, resolution
from .distributions import ExplicitDistribution, MaskingProcess, sample
from .logic import Formula, Not, Threshold, Var, conj, horn_to_formula, implies
from .resolution import (
    EMPTY,
    Cnf,
    Cut,
    HypothesisLeaf,
    ResolutionProof,
    WeakeningLeaf,
    clause_to_formula,
    cnf_to_formula,
)


@dataclass(frozen=True)
class EnumLimit:
    max_atoms: int = 12
    max_proof_atoms: int = 6
    max_space: int = 3

    def __post_init__(self):
        if min(self.max_atoms, self.max_proof_atoms, self.max_space) < 1:
            raise ValueError("enumeration limits must be positive")


DEFAULT_LIMIT = EnumLimit()


class OracleLimitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# truth and validity


def truth(f: Formula, x: Sequence[int]) -> bool:
    """Classical value by an explicit post-order stack walk."""
    values: dict[int, bool] = {}
    stack: list[tuple[Formula, bool]] = [(f, False)]
    while stack:
        g, ready = stack.pop()
        if isinstance(g, Var):
            values[id(g)] = x[g.atom] == 1
        elif not ready:
            stack.append((g, True))
            children = [g.child] if isinstance(g, Not) else [c for _, c in g.terms]
            stack.extend((c, False) for c in children)
        elif isinstance(g, Not):
            values[id(g)] = not values[id(g.child)]
        else:
            total = sum(w for w, c in g.terms if values[id(c)])
            values[id(g)] = total >= g.bound
    return values[id(f)]


def exact_validity(f: Formula, d: ExplicitDistribution) -> Fraction:
    total = Fraction(0)
    for x, p in d.support:
        if truth(f, x):
            total = total + p
    return total


# ---------------------------------------------------------------------------
# clauses consistent with a sample


def _lit_false(l: int, rho) -> bool:
    v = rho[abs(l) - 1]
    return v is not None and v == (0 if l > 0 else 1)


def _witnessed_false(c, rho) -> bool:
    return all(_lit_false(l, rho) for l in c)


def all_clauses(n: int, max_width: Optional[int] = None, limit: EnumLimit = DEFAULT_LIMIT):
    if n > limit.max_atoms:
        raise OracleLimitError(f"3^{n} clauses exceeds the enumeration limit")
    width = n if max_width is None else max_width
    out = []
    for signs in itertools.product((0, 1, -1), repeat=n):
        c = frozenset(s * (i + 1) for i, s in enumerate(signs) if s)
        if len(c) <= width:
            out.append(c)
    out.sort(key=lambda c: (len(c), sorted(c, key=abs)))
    return out


def all_consistent_clauses(
    samples: Sequence, n: int, max_width: Optional[int] = None, limit: EnumLimit = DEFAULT_LIMIT
) -> list[frozenset[int]]:
    """Every clause of width <= max_width no sample witnesses false."""
    samples = list(samples)
    return [c for c in all_clauses(n, max_width, limit) if not any(_witnessed_false(c, r) for r in samples)]


def perfectly_valid_clauses(d: ExplicitDistribution, limit: EnumLimit = DEFAULT_LIMIT):
    return [
        c
        for c in all_clauses(d.n, None, limit)
        if all(any((x[abs(l) - 1] == 1) == (l > 0) for l in c) for x, _ in d.support)
    ]


# ---------------------------------------------------------------------------
# reference proof search


def reference_space_search(
    phi: Cnf,
    h: Sequence[frozenset[int]],
    s: int,
    c=EMPTY,
    limit: EnumLimit = DEFAULT_LIMIT,
) -> Optional[ResolutionProof]:
    """Space-``s`` treelike proof of ``c`` from ``phi`` and ``h``, full backtracking.

    Weakening leaves index into the concatenation of ``phi`` and ``h``; a
    clause that is literally in ``h`` becomes a hypothesis leaf.
    """
    if phi.n > limit.max_proof_atoms or s > limit.max_space:
        raise OracleLimitError("instance beyond the proof search limit")
    base = list(phi.clauses) + [frozenset(x) for x in h]
    hset = set(base[len(phi.clauses):])
    n = phi.n

    @lru_cache(maxsize=None)
    def go(cl: frozenset, budget: int):
        if cl in hset:
            return HypothesisLeaf(cl)
        for j, b in enumerate(base):
            if b <= cl:
                return WeakeningLeaf(cl, j)
        if budget == 1:
            return None
        for atom in range(n):
            pos, neg = atom + 1, -(atom + 1)
            if pos in cl or neg in cl:
                continue
            for small, big in ((pos, neg), (neg, pos)):
                left = go(cl | {small}, budget - 1)
                if left is None:
                    continue
                right = go(cl | {big}, budget)
                if right is None:
                    continue
                pos_side, neg_side = (left, right) if small > 0 else (right, left)
                return Cut(atom, pos_side, neg_side, cl)
        return None

    root = go(frozenset(c), s)
    return None if root is None else ResolutionProof(root, s)


# ---------------------------------------------------------------------------
# normal proof enumeration


def pebbling_space(node) -> int:
    if not isinstance(node, Cut):
        return 1
    a, b = pebbling_space(node.left), pebbling_space(node.right)
    return a + 1 if a == b else max(a, b)


def enumerate_normal_proofs(n: int, s: int) -> list[ResolutionProof]:
    """All cut-only treelike refutations over ``n`` atoms with space <= ``s``.

    Leaves are hypothesis clauses determined by their path, every path cuts
    each variable at most once, and the positive premise is the left child.
    """
    if not (1 <= n <= 4 and 1 <= s <= 3):
        raise OracleLimitError("enumeration only supported for n <= 4, s <= 3")

    def gen(cl: frozenset, free: tuple[int, ...]) -> list[tuple[object, int]]:
        out = [(HypothesisLeaf(cl), 1)]
        for x in free:
            rest = tuple(v for v in free if v != x)
            lefts = gen(cl | {x + 1}, rest)
            rights = gen(cl | {-(x + 1)}, rest)
            for left, a in lefts:
                for right, b in rights:
                    sp = a + 1 if a == b else max(a, b)
                    if sp <= s:
                        out.append((Cut(x, left, right, cl), sp))
        return out

    return [ResolutionProof(node, s) for node, _ in gen(EMPTY, tuple(range(n)))]


# ---------------------------------------------------------------------------
# obliviousness of the chaining search


@dataclass(frozen=True)
class ObliviousCheck:
    """Outcome of comparing a run on KB with a run on KB plus extra facts.

    ``test_invariant``: at every step, TEST gave the same answer when every
    atom not labelling a query vertex was added as a fact.
    ``subsequence``: the extended run proposed exactly the KB run's vertices
    minus those successful (or below a successful vertex) from the extended
    KB, stopping no later.
    """

    test_invariant: bool
    subsequence: bool
    kb_sequence: tuple
    extended_sequence: tuple
    expected_sequence: tuple

    @property
    def ok(self) -> bool:
        return self.test_invariant and self.subsequence


def _under_success(v, status) -> bool:
    while v is not None:
        if status[v.key] is chaining.Status.SUCCESSFUL:
            return True
        v = v.parent
    return False


def check_oblivious(kb: chaining.HornKB, extra, goal: int) -> ObliviousCheck:
    extra = frozenset(extra)
    union = kb.facts | extra
    everything = frozenset(range(kb.n))
    kb_seq: list = []
    expected: list = []
    test_ok = True

    def hook(search: chaining.BackwardSearch, v) -> None:
        nonlocal test_ok
        g = search.graph
        labels = {u.atom for u in g.vertices() if isinstance(u, chaining.QueryVertex)}
        unseen = everything - labels
        plain = chaining.extract_proof(g, search.facts)
        padded = chaining.extract_proof(g, search.facts | unseen)
        if (plain is None) != (padded is None) or (plain is not None and plain.lines != padded.lines):
            test_ok = False
        kb_seq.append(v.key)
        if not _under_success(v, g.status(union)):
            expected.append(v.key)

    base = chaining.BackwardSearch(goal, kb, on_explore=hook)
    base_result = base.run()
    ext = chaining.BackwardSearch(goal, kb.with_facts(extra))
    ext_result = ext.run()
    ext_seq = tuple(ext.proposed)
    if ext_result is None:
        sub_ok = base_result is None and ext_seq == tuple(expected)
    else:
        sub_ok = ext_seq == tuple(expected[: len(ext_seq)])
    return ObliviousCheck(test_ok, sub_ok, tuple(kb_seq), ext_seq, tuple(expected))


# ---------------------------------------------------------------------------
# statistical guarantee harness


@dataclass
class TrialSpec:
    """One guarantee experiment; ``fragment`` is ``"chain"`` or ``"res"``."""

    fragment: str
    distribution: ExplicitDistribution
    mask: MaskingProcess
    epsilon: float = 0.1
    delta: float = 0.05
    eta: float = 1.0
    c: float = 1.0
    trials: int = 200
    seed: int = 0
    samples: Optional[int] = None
    kb: Optional[chaining.HornKB] = None
    goal: Optional[int] = None
    mode: chaining.Mode = chaining.Mode.CREDULOUS
    cnf: Optional[Cnf] = None
    clause: frozenset = EMPTY
    s: int = 2
    backtrack: bool = False
    name: str = "experiment"

    def __post_init__(self):
        if self.fragment not in ("chain", "res"):
            raise ValueError(f"unknown fragment {self.fragment!r}")
        if self.fragment == "chain" and (self.kb is None or self.goal is None):
            raise ValueError("chain experiments need a kb and a goal")
        if self.fragment == "res" and self.cnf is None:
            raise ValueError("res experiments need a cnf")
        if self.trials < 1:
            raise ValueError("need at least one trial")

    def sample_size(self) -> int:
        if self.samples is not None:
            return self.samples
        n = self.distribution.n
        if self.fragment == "chain":
            return chaining.sample_size_chaining(n, self.epsilon, self.delta, self.eta, self.c)
        return resolution.sample_size_resolution(n, self.s, self.epsilon, self.delta, self.eta, self.c)


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    seed: int
    proved: bool
    premises: tuple[str, ...]
    premise_validity: Optional[Fraction]
    verified: Optional[bool] = None


@dataclass
class GuaranteeReport:
    name: str
    fragment: str
    trials: int
    samples_per_trial: int
    epsilon: float
    delta: float
    query_validity: Fraction
    valid_support_exists: bool
    outcomes: list[TrialOutcome] = field(default_factory=list)

    @property
    def margin(self) -> float:
        """delta plus three binomial standard deviations."""
        return self.delta + 3 * math.sqrt(self.delta * (1 - self.delta) / self.trials)

    @property
    def proof_rate(self) -> float:
        return sum(o.proved for o in self.outcomes) / self.trials

    @property
    def invalid_premise_rate(self) -> float:
        bad = sum(
            1
            for o in self.outcomes
            if o.proved and o.premise_validity is not None and o.premise_validity < 1 - Fraction(self.epsilon)
        )
        return bad / self.trials

    @property
    def query_invalid(self) -> bool:
        return self.query_validity < 1 - Fraction(self.epsilon)

    @property
    def ok_premises(self) -> Optional[bool]:
        if not self.valid_support_exists:
            return None
        return self.invalid_premise_rate <= self.margin

    @property
    def ok_rejection(self) -> Optional[bool]:
        if not self.query_invalid:
            return None
        return self.proof_rate <= self.margin

    @property
    def all_verified(self) -> bool:
        """Every returned proof passed the proof checker."""
        return all(o.verified for o in self.outcomes if o.proved)

    def format(self, per_trial: bool = True) -> str:
        lines = [
            f"experiment: {self.name}",
            f"fragment: {self.fragment}",
            f"trials: {self.trials}",
            f"samples per trial: {self.samples_per_trial}",
            f"epsilon: {self.epsilon}  delta: {self.delta}  margin (delta + 3 sigma): {self.margin:.4f}",
            f"query implication validity: {self.query_validity} ({float(self.query_validity):.4f})",
            f"perfectly valid support exists: {'yes' if self.valid_support_exists else 'no'}",
        ]
        if per_trial:
            for o in self.outcomes:
                validity = "-" if o.premise_validity is None else f"{float(o.premise_validity):.4f}"
                learned = ", ".join(o.premises) if o.premises else "-"
                lines.append(
                    f"trial {o.index}: {'proof' if o.proved else 'fail'}"
                    f"  premise validity {validity}  learned {learned}"
                )
        lines.append(f"proof rate: {self.proof_rate:.4f}")
        lines.append(f"invalid-premise proof rate: {self.invalid_premise_rate:.4f}")
        lines.append(f"returned proofs verified: {'yes' if self.all_verified else 'NO'}")
        for label, flag in (("premise guarantee", self.ok_premises), ("rejection guarantee", self.ok_rejection)):
            verdict = "not applicable" if flag is None else ("pass" if flag else "FAIL")
            lines.append(f"{label}: {verdict}")
        return "\n".join(lines)

    @property
    def passed(self) -> bool:
        return self.ok_premises is not False and self.ok_rejection is not False and self.all_verified


def trial_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _forward_closure(kb: chaining.HornKB, facts) -> set[int]:
    known = set(facts)
    changed = True
    while changed:
        changed = False
        for rule in kb.rules:
            if rule.head not in known and all(b in known for b in rule.body):
                known.add(rule.head)
                changed = True
    return known


def monte_carlo_guarantee(spec: TrialSpec) -> GuaranteeReport:
    """Run the learner on fresh samples per trial and tally guarantee violations."""
    d = spec.distribution
    m = spec.sample_size()
    if spec.fragment == "chain":
        kb = spec.kb
        assert kb.n == d.n, "distribution and KB must share the atom table"
        kb_formula = conj(*(Var(a) for a in sorted(kb.facts)), *(horn_to_formula(r.body, r.head) for r in kb.rules))
        query_validity = exact_validity(implies(kb_formula, Var(spec.goal)), d)
        certain = {a for a in range(d.n) if all(x[a] == 1 for x, _ in d.support)}
        support_exists = spec.goal in _forward_closure(kb, kb.facts | certain)
    else:
        phi = spec.cnf
        query_validity = exact_validity(implies(cnf_to_formula(phi), clause_to_formula(spec.clause)), d)
        support_exists = reference_space_search(phi, perfectly_valid_clauses(d), spec.s, spec.clause) is not None

    report = GuaranteeReport(
        spec.name, spec.fragment, spec.trials, m, spec.epsilon, spec.delta, query_validity, support_exists
    )
    for i in range(spec.trials):
        seed = trial_seed(spec.seed, i)
        rhos = sample(d, spec.mask, m, seed).scenes
        if spec.fragment == "chain":
            search = chaining.BackwardSearch(spec.goal, spec.kb, rhos, spec.mode)
            proof = search.run()
            if proof is None:
                report.outcomes.append(TrialOutcome(i, seed, False, (), None))
                continue
            # every atom added to the KB during the run, used in the proof or not
            learned = sorted(search.learned)
            premise = conj(*(Var(a) for a in learned))
            names = tuple(spec.kb.vocab.name(a) for a in learned)
            verified = chaining.verify_chaining_proof(proof, spec.kb, rhos, spec.mode)
        else:
            proof = resolution.learn_search_space(spec.cnf, spec.s, spec.clause, rhos, spec.backtrack)
            if proof is None:
                report.outcomes.append(TrialOutcome(i, seed, False, (), None))
                continue
            premises = resolution.extract_premises(proof)
            premise = conj(*(clause_to_formula(c) for c in premises))
            names = tuple(resolution.clause_text(c) for c in premises)
            verified = resolution.verify_proof(proof, spec.cnf, premises) and resolution.check_normal(proof)
        report.outcomes.append(TrialOutcome(i, seed, True, names, exact_validity(premise, d), verified))
    return report
