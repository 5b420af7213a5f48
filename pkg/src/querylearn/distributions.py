"""Scene distributions, masking processes and exact probability queries.

Probabilities are exact ``Fraction`` values.  Exact queries enumerate the
distribution's support times every outcome of the masking process, so they
are only meant for small instances; the ``estimate_*`` functions give Monte
Carlo answers with a 95% interval for anything larger.

Randomness comes from numpy's Philox counter-based generator keyed by an
explicit integer seed, so a seed fully determines a sample.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .logic import Formula, ObscuredScene, Scene, atoms, evaluate, partial_eval

MAX_EXACT_ATOMS = 16


class EnumerationLimitError(ValueError):
    """Exact enumeration would be too large; use the ``estimate_*`` variants."""


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed & (2**64 - 1)))


def _fraction(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


@dataclass(frozen=True)
class ExplicitDistribution:
    """Finite distribution over total scenes with exact probabilities."""

    support: tuple[tuple[Scene, Fraction], ...]
    n: int
    name: str = "distribution"

    def __post_init__(self):
        if not self.support:
            raise ValueError("distribution support is empty")
        support = tuple((tuple(int(v) for v in x), _fraction(p)) for x, p in self.support)
        seen = set()
        for x, p in support:
            if len(x) != self.n:
                raise ValueError(f"scene {x} has {len(x)} atoms, expected {self.n}")
            if any(v not in (0, 1) for v in x):
                raise ValueError(f"scene {x} is not a 0/1 vector")
            if not 0 < p <= 1:
                raise ValueError(f"probability {p} outside (0, 1]")
            if x in seen:
                raise ValueError(f"scene {x} listed twice")
            seen.add(x)
        total = sum(p for _, p in support)
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def uniform(cls, scenes: Iterable[Sequence[int]], n: int) -> "ExplicitDistribution":
        scenes = [tuple(x) for x in scenes]
        p = Fraction(1, len(scenes))
        return cls(tuple((x, p) for x in scenes), n)

    @classmethod
    def product(cls, marginals: Sequence) -> "ExplicitDistribution":
        """Independent atoms with ``Pr[atom i = 1] = marginals[i]``."""
        marginals = [_fraction(q) for q in marginals]
        support = []
        for x in itertools.product((0, 1), repeat=len(marginals)):
            p = Fraction(1)
            for v, q in zip(x, marginals):
                p *= q if v else 1 - q
            if p:
                support.append((x, p))
        return cls(tuple(support), len(marginals))

    def scenes(self) -> list[Scene]:
        return [x for x, _ in self.support]

    def draw_indices(self, rng: np.random.Generator, count: int) -> np.ndarray:
        probs = np.array([float(p) for _, p in self.support])
        probs /= probs.sum()
        return rng.choice(len(self.support), size=count, p=probs)


@dataclass(frozen=True)
class FixedSubset:
    """Always hides the same atoms."""

    hidden: frozenset[int] = frozenset()

    def apply(self, x: Scene, rng: np.random.Generator) -> ObscuredScene:
        return _hide(x, self.hidden)

    def outcomes(self, x: Scene) -> list[tuple[ObscuredScene, Fraction]]:
        return [(_hide(x, self.hidden), Fraction(1))]


@dataclass(frozen=True)
class IndependentCoin:
    """Hides each atom independently with probability ``p``."""

    p: Fraction = Fraction(1, 2)

    def __post_init__(self):
        p = _fraction(self.p)
        if not 0 <= p <= 1:
            raise ValueError(f"hide probability {p} outside [0, 1]")
        object.__setattr__(self, "p", p)

    def apply(self, x: Scene, rng: np.random.Generator) -> ObscuredScene:
        hide = rng.random(len(x)) < float(self.p)
        return tuple(None if h else v for v, h in zip(x, hide))

    def outcomes(self, x: Scene, relevant: Optional[Iterable[int]] = None):
        """Enumerate hide sets over ``relevant`` atoms (all atoms by default).

        Atoms outside ``relevant`` are left revealed; callers pass the atoms
        their query reads, so the marginal over those atoms stays exact.
        """
        idx = sorted(range(len(x)) if relevant is None else set(relevant))
        if len(idx) > MAX_EXACT_ATOMS:
            raise EnumerationLimitError(
                f"coin mask over {len(idx)} atoms is too large to enumerate; use an estimate"
            )
        out = []
        for pattern in itertools.product((False, True), repeat=len(idx)):
            prob = Fraction(1)
            hidden = set()
            for a, h in zip(idx, pattern):
                prob *= self.p if h else 1 - self.p
                if h:
                    hidden.add(a)
            if prob:
                out.append((_hide(x, hidden), prob))
        return out


@dataclass(frozen=True)
class MaskRule:
    condition: Formula
    hidden: frozenset[int]
    prob: Fraction


@dataclass(frozen=True)
class ValueDependent:
    """Ordered rules; the first rule whose condition holds on the scene fires.

    A firing rule hides its atoms with its probability and hides nothing
    otherwise.  Scenes matching no rule are returned unmasked.
    """

    rules: tuple[MaskRule, ...] = field(default_factory=tuple)

    def _rule_for(self, x: Scene) -> Optional[MaskRule]:
        for rule in self.rules:
            if evaluate(rule.condition, x):
                return rule
        return None

    def apply(self, x: Scene, rng: np.random.Generator) -> ObscuredScene:
        rule = self._rule_for(x)
        if rule is None:
            return tuple(x)
        if rng.random() < float(rule.prob):
            return _hide(x, rule.hidden)
        return tuple(x)

    def outcomes(self, x: Scene) -> list[tuple[ObscuredScene, Fraction]]:
        rule = self._rule_for(x)
        if rule is None or rule.prob == 0:
            return [(tuple(x), Fraction(1))]
        if rule.prob == 1:
            return [(_hide(x, rule.hidden), Fraction(1))]
        return [(_hide(x, rule.hidden), rule.prob), (tuple(x), 1 - rule.prob)]


MaskingProcess = Union[FixedSubset, IndependentCoin, ValueDependent]


def _hide(x: Sequence[int], hidden) -> ObscuredScene:
    return tuple(None if i in hidden else v for i, v in enumerate(x))


def mask_outcomes(m_proc: MaskingProcess, x: Scene, relevant: Optional[Iterable[int]] = None):
    if isinstance(m_proc, IndependentCoin):
        return m_proc.outcomes(x, relevant)
    return m_proc.outcomes(x)


@dataclass(frozen=True)
class SampleSet:
    scenes: tuple[ObscuredScene, ...]
    n: int
    seed: Optional[int] = None
    provenance: str = "external file"

    def __post_init__(self):
        for rho in self.scenes:
            if len(rho) != self.n:
                raise ValueError(f"obscured scene of {len(rho)} atoms in a set over {self.n}")

    def __len__(self):
        return len(self.scenes)

    def __iter__(self):
        return iter(self.scenes)


def sample(
    d: ExplicitDistribution,
    m_proc: MaskingProcess,
    count: int,
    seed: int,
    with_scenes: bool = False,
):
    """Draw ``count`` scenes from ``d`` and mask each one.

    With ``with_scenes`` the underlying total scenes are returned alongside.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = make_rng(seed)
    idx = d.draw_indices(rng, count) if count else []
    xs = [d.support[i][0] for i in idx]
    rhos = tuple(m_proc.apply(x, rng) for x in xs)
    out = SampleSet(rhos, d.n, seed, f"{d.name} masked by {describe_mask(m_proc)}")
    return (out, xs) if with_scenes else out


def describe_mask(m_proc: MaskingProcess) -> str:
    if isinstance(m_proc, FixedSubset):
        return f"fixed{sorted(m_proc.hidden)}"
    if isinstance(m_proc, IndependentCoin):
        return f"coin({m_proc.p})"
    return f"value-dependent({len(m_proc.rules)} rules)"


def validity(d: ExplicitDistribution, f: Formula) -> Fraction:
    """Exact probability that ``f`` is true under ``d``."""
    return sum((p for x, p in d.support if evaluate(f, x)), Fraction(0))


def _check_enumerable(d: ExplicitDistribution, m_proc: MaskingProcess, relevant) -> None:
    if isinstance(m_proc, IndependentCoin) and len(relevant) > MAX_EXACT_ATOMS:
        raise EnumerationLimitError(
            f"exact computation needs 2^{len(relevant)} mask outcomes per scene; "
            "use estimate_concealment / estimate_counterexample_rate"
        )


def conditional_witness_rates(
    d: ExplicitDistribution, m_proc: MaskingProcess, formulas: Sequence[Formula]
) -> list[Optional[Fraction]]:
    """``Pr[f witnessed on m(x) | f false on x]`` per formula.

    ``None`` marks a formula that is never false under ``d`` (vacuous
    conditional).
    """
    rates = []
    for f in formulas:
        relevant = atoms(f)
        _check_enumerable(d, m_proc, relevant)
        false_mass = Fraction(0)
        seen = Fraction(0)
        for x, p in d.support:
            if evaluate(f, x):
                continue
            false_mass += p
            for rho, q in mask_outcomes(m_proc, x, relevant):
                if isinstance(partial_eval(f, rho), bool):
                    seen += p * q
        rates.append(seen / false_mass if false_mass else None)
    return rates


def concealment(
    d: ExplicitDistribution, m_proc: MaskingProcess, formulas: Sequence[Formula]
) -> Fraction:
    """Largest eta such that ``m_proc`` is (1-eta)-concealing for the class.

    Returns 1 when no formula of the class is ever false under ``d``; use
    ``conditional_witness_rates`` to tell that case apart.
    """
    rates = [r for r in conditional_witness_rates(d, m_proc, formulas) if r is not None]
    return min(rates) if rates else Fraction(1)


def counterexample_rate(d: ExplicitDistribution, m_proc: MaskingProcess, f: Formula) -> Fraction:
    """Exact probability over M(D) that ``f`` is witnessed false."""
    relevant = atoms(f)
    _check_enumerable(d, m_proc, relevant)
    total = Fraction(0)
    for x, p in d.support:
        for rho, q in mask_outcomes(m_proc, x, relevant):
            if partial_eval(f, rho) is False:
                total += p * q
    return total


@dataclass(frozen=True)
class Estimate:
    value: float
    low: float
    high: float
    trials: int


def _wilson(successes: int, trials: int, z: float = 1.96) -> Estimate:
    if trials == 0:
        return Estimate(float("nan"), 0.0, 1.0, 0)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return Estimate(phat, max(0.0, centre - half), min(1.0, centre + half), trials)


def estimate_counterexample_rate(
    d: ExplicitDistribution, m_proc: MaskingProcess, f: Formula, trials: int, seed: int
) -> Estimate:
    samples = sample(d, m_proc, trials, seed)
    hits = sum(1 for rho in samples if partial_eval(f, rho) is False)
    return _wilson(hits, trials)


def estimate_concealment(
    d: ExplicitDistribution,
    m_proc: MaskingProcess,
    formulas: Sequence[Formula],
    trials: int,
    seed: int,
) -> Estimate:
    """Monte Carlo estimate of the class's worst conditional witness rate."""
    samples, xs = sample(d, m_proc, trials, seed, with_scenes=True)
    worst: Optional[Estimate] = None
    for f in formulas:
        false_count = 0
        hits = 0
        for x, rho in zip(xs, samples):
            if not evaluate(f, x):
                false_count += 1
                hits += isinstance(partial_eval(f, rho), bool)
        if false_count == 0:
            continue
        est = _wilson(hits, false_count)
        if worst is None or est.value < worst.value:
            worst = est
    return worst if worst is not None else Estimate(1.0, 1.0, 1.0, trials)
