"""Seeded random instances for property tests and experiments."""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np

from .chaining import HornClause, HornKB
from .distributions import ExplicitDistribution, FixedSubset, IndependentCoin, MaskRule, ValueDependent
from .logic import Formula, Not, Threshold, Var, Vocabulary
from .resolution import Cnf


def random_formula(rng: np.random.Generator, n: int, depth: int, max_children: int = 4, max_weight: int = 3) -> Formula:
    """A formula over atoms ``0..n-1`` whose nesting depth is at most ``depth``."""
    if depth <= 0 or rng.random() < 0.25:
        return Var(int(rng.integers(n)))
    if rng.random() < 0.2:
        return Not(random_formula(rng, n, depth - 1, max_children, max_weight))
    k = int(rng.integers(1, max_children + 1))
    terms = []
    for _ in range(k):
        w = int(rng.integers(1, max_weight + 1))
        if rng.random() < 0.3:
            w = -w
        terms.append((w, random_formula(rng, n, depth - 1, max_children, max_weight)))
    lo = sum(w for w, _ in terms if w < 0)
    hi = sum(w for w, _ in terms if w > 0)
    bound = int(rng.integers(lo, hi + 2))
    return Threshold(tuple(terms), bound)


def random_obscured_scene(rng: np.random.Generator, n: int, hide: float = 0.4):
    return tuple(None if rng.random() < hide else int(rng.integers(2)) for _ in range(n))


def random_scene(rng: np.random.Generator, n: int):
    return tuple(int(v) for v in rng.integers(0, 2, size=n))


def random_horn_kb(
    rng: np.random.Generator,
    n: int,
    rules: int,
    facts: int,
    max_body: int = 3,
    acyclic: bool = False,
) -> HornKB:
    """Propositional Horn KB over atoms ``a0..a{n-1}``.

    With ``acyclic`` every rule's head has a larger index than its body atoms.
    """
    vocab = Vocabulary(f"a{i}" for i in range(n))
    out = []
    for _ in range(rules):
        head = int(rng.integers(1 if acyclic else 0, n)) if n > 1 else 0
        pool = [a for a in range(head if acyclic else n) if a != head]
        k = int(rng.integers(0, min(max_body, len(pool)) + 1))
        body = tuple(int(a) for a in rng.choice(pool, size=k, replace=False)) if k else ()
        out.append(HornClause(body, head))
    fact_set = frozenset(int(a) for a in rng.choice(n, size=min(facts, n), replace=False))
    return HornKB(vocab, fact_set, tuple(out))


def random_cnf(rng: np.random.Generator, n: int, clauses: int, max_width: int = 3) -> Cnf:
    out = []
    for _ in range(clauses):
        k = int(rng.integers(1, min(max_width, n) + 1))
        chosen = rng.choice(n, size=k, replace=False)
        out.append(frozenset(int(a + 1) * (1 if rng.random() < 0.5 else -1) for a in chosen))
    return Cnf(tuple(out), n)


def random_distribution(rng: np.random.Generator, n: int, support: int, denominator: int = 12) -> ExplicitDistribution:
    """Distribution over ``support`` distinct random scenes with rational weights."""
    support = min(support, 2**n)
    picked = rng.choice(2**n, size=support, replace=False)
    weights = [int(w) for w in rng.integers(1, denominator + 1, size=support)]
    total = sum(weights)
    scenes = [tuple((int(v) >> i) & 1 for i in range(n)) for v in picked]
    return ExplicitDistribution(tuple((x, Fraction(w, total)) for x, w in zip(scenes, weights)), n)


def random_mask(rng: np.random.Generator, n: int, kind: Optional[str] = None):
    kind = kind or ("fixed", "coin", "value")[int(rng.integers(3))]
    if kind == "fixed":
        return FixedSubset(frozenset(int(a) for a in range(n) if rng.random() < 0.3))
    if kind == "coin":
        return IndependentCoin(Fraction(int(rng.integers(0, 5)), 4))
    rules = []
    for _ in range(int(rng.integers(1, 3))):
        cond = random_formula(rng, n, 1)
        hidden = frozenset(int(a) for a in range(n) if rng.random() < 0.4)
        rules.append(MaskRule(cond, hidden, Fraction(int(rng.integers(0, 5)), 4)))
    return ValueDependent(tuple(rules))
