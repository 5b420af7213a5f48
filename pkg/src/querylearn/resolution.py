"""Space-bounded treelike resolution with learning from obscured scenes.

Literals are signed ints in DIMACS style: atom ``i`` is ``i + 1`` positively
and ``-(i + 1)`` negatively.  Clauses are frozensets of literals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import mpmath

from .chaining import _sample_size
from .logic import ObscuredScene, Threshold, Var, Not, partial_eval

Clause = frozenset


def lit(atom: int, positive: bool = True) -> int:
    return atom + 1 if positive else -(atom + 1)


def lit_atom(literal: int) -> int:
    return abs(literal) - 1


def lit_positive(literal: int) -> bool:
    return literal > 0


def clause(*literals: int) -> frozenset[int]:
    c = frozenset(literals)
    if 0 in c:
        raise ValueError("0 is not a literal")
    if any(-l in c for l in c):
        raise ValueError(f"clause {sorted(c)} contains complementary literals")
    return c


EMPTY = frozenset()


def clause_falsified(c: Iterable[int], rho: Sequence[Optional[int]]) -> bool:
    """True when every literal of ``c`` is witnessed false on ``rho``."""
    for l in c:
        v = rho[abs(l) - 1]
        if v is None or (v == 1) == (l > 0):
            return False
    return True


def literal_value(l: int, rho: Sequence[Optional[int]]) -> Optional[int]:
    v = rho[abs(l) - 1]
    if v is None:
        return None
    return v if l > 0 else 1 - v


def clause_to_formula(c: Iterable[int]) -> Threshold:
    """OR of the literals as a threshold with unit weights and bound 1."""
    terms = []
    for l in sorted(c, key=lambda l: (abs(l), -l)):
        atom = Var(lit_atom(l))
        terms.append((1, atom if l > 0 else Not(atom)))
    return Threshold(tuple(terms), 1)


def clause_witnessed_false(c: Iterable[int], rho) -> bool:
    """Slow path through the general partial evaluator; agrees with ``clause_falsified``."""
    return partial_eval(clause_to_formula(c), rho) is False


@dataclass(frozen=True)
class Cnf:
    clauses: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        cs = tuple(clause(*c) for c in self.clauses)
        for c in cs:
            if any(lit_atom(l) >= self.n for l in c):
                raise ValueError(f"clause {sorted(c)} mentions an atom beyond {self.n}")
        object.__setattr__(self, "clauses", cs)

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)


def cnf_to_formula(phi: Cnf) -> Threshold:
    return Threshold(tuple((1, clause_to_formula(c)) for c in phi), len(phi))


# ---------------------------------------------------------------------------
# proofs


@dataclass(frozen=True)
class HypothesisLeaf:
    clause: frozenset[int]


@dataclass(frozen=True)
class WeakeningLeaf:
    clause: frozenset[int]
    source: int


@dataclass(frozen=True)
class Cut:
    pivot: int
    left: "ProofNode"
    right: "ProofNode"
    clause: frozenset[int]


ProofNode = Union[HypothesisLeaf, WeakeningLeaf, Cut]


@dataclass(frozen=True)
class ResolutionProof:
    root: ProofNode
    space: int

    @property
    def clause(self) -> frozenset[int]:
        return self.root.clause

    def nodes(self) -> list[ProofNode]:
        out = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            if isinstance(v, Cut):
                stack.append(v.right)
                stack.append(v.left)
        return out

    def size(self) -> int:
        return len(self.nodes())


def cut(pivot: int, left: ProofNode, right: ProofNode) -> Cut:
    a = lit(pivot)
    return Cut(pivot, left, right, (left.clause - {a}) | (right.clause - {-a}))


def proof_space(node: ProofNode) -> int:
    """Clause space of the best evaluation order of a treelike proof."""
    if not isinstance(node, Cut):
        return 1
    a, b = proof_space(node.left), proof_space(node.right)
    return min(max(a, b + 1), max(a + 1, b))


# ---------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class LearnConfig:
    s: int = 2
    epsilon: Fraction = Fraction(1, 10)
    delta: Fraction = Fraction(1, 20)
    eta: Fraction = Fraction(1)
    c: float = 1.0
    backtrack: bool = False

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("space bound must be at least 1")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not self.c > 0:
            raise ValueError("c must be positive")


class _Search:
    def __init__(self, phi: Cnf, samples: Sequence[ObscuredScene], backtrack: bool):
        self.phi = phi
        self.samples = list(samples)
        for rho in self.samples:
            if len(rho) != phi.n:
                raise ValueError(f"sample over {len(rho)} atoms, CNF has {phi.n}")
        self.backtrack = backtrack
        self.calls = 0
        # literal order: ascending atom, positive first
        self.literals = [l for a in range(phi.n) for l in (lit(a), lit(a, False))]

    def run(self, s: int, c: frozenset[int], idx: tuple[int, ...]) -> Optional[ProofNode]:
        self.calls += 1
        samples = self.samples
        if not any(clause_falsified(c, samples[i]) for i in idx):
            return HypothesisLeaf(c)
        for j, base in enumerate(self.phi.clauses):
            if base <= c:
                return WeakeningLeaf(c, j)
        if s <= 1:
            return None
        for l in self.literals:
            if l in c or -l in c:
                continue
            left_idx = tuple(i for i in idx if literal_value(l, samples[i]) != 1)
            first = self.run(s - 1, c | {l}, left_idx)
            if first is None:
                continue
            right_idx = tuple(i for i in idx if literal_value(l, samples[i]) != 0)
            second = self.run(s, c | {-l}, right_idx)
            if second is None:
                if self.backtrack:
                    continue
                return None
            if l > 0:
                return cut(lit_atom(l), first, second)
            return cut(lit_atom(l), second, first)
        return None


def learn_search_space(
    phi: Cnf,
    s: int,
    c: Iterable[int],
    samples: Sequence[ObscuredScene],
    backtrack: bool = False,
) -> Optional[ResolutionProof]:
    """Search for a space-``s`` treelike proof of ``c``, learning hypothesis clauses.

    A clause no sample witnesses false becomes a hypothesis leaf.  By default
    a failing second branch abandons the whole node; ``backtrack=True``
    instead moves on to the next literal.

    Choosing ``s``: a treelike proof with ``k`` nodes never needs more than
    space ``ceil(log2(k + 1))``, so ``s`` of order ``log k`` covers every
    proof of size up to ``k``.
    """
    if s < 1:
        raise ValueError("space bound must be at least 1")
    c = clause(*c)
    search = _Search(phi, samples, backtrack)
    root = search.run(s, c, tuple(range(len(search.samples))))
    return None if root is None else ResolutionProof(root, s)


def refute(phi: Cnf, cfg: LearnConfig, samples: Sequence[ObscuredScene]) -> Optional[ResolutionProof]:
    """Derive the empty clause from ``phi`` plus learned clauses."""
    if not samples:
        raise ValueError("refute needs at least one obscured scene")
    return learn_search_space(phi, cfg.s, EMPTY, samples, cfg.backtrack)


def extract_premises(p: ResolutionProof) -> Cnf:
    """Hypothesis clauses of the proof, deduplicated, in first-use order."""
    seen: dict[frozenset[int], None] = {}
    atoms_seen = 0
    for v in p.nodes():
        if isinstance(v, HypothesisLeaf):
            seen.setdefault(v.clause)
        for l in v.clause:
            atoms_seen = max(atoms_seen, abs(l))
    return Cnf(tuple(seen), atoms_seen)


def verify_proof(p: ResolutionProof, phi: Cnf, h: Union[Cnf, Iterable[frozenset[int]]]) -> bool:
    """Check leaves against ``phi``/``h``, every cut, and the space bound."""
    allowed = {frozenset(c) for c in h}

    def ok(v: ProofNode) -> bool:
        if any(-l in v.clause for l in v.clause):
            return False
        if isinstance(v, HypothesisLeaf):
            return v.clause in allowed
        if isinstance(v, WeakeningLeaf):
            return 0 <= v.source < len(phi.clauses) and phi.clauses[v.source] <= v.clause
        a = lit(v.pivot)
        if a not in v.left.clause or -a not in v.right.clause:
            return False
        if v.clause != (v.left.clause - {a}) | (v.right.clause - {-a}):
            return False
        return ok(v.left) and ok(v.right)

    return ok(p.root) and proof_space(p.root) <= p.space


def check_normal(p: ResolutionProof) -> bool:
    """Normality of a treelike proof whose weakening happens only at leaves.

    1. every cut's conclusion feeds a cut (or is the final clause);
    2. each cut node's clause mentions the pivot of every cut below it on
       the way to the final clause (its ancestor cuts);
    3. no variable is cut twice, or weakened twice, on any leaf-to-root path.
    """

    def walk(v: ProofNode, outer: tuple[int, ...], parent_is_cut: bool) -> bool:
        if isinstance(v, Cut):
            if not parent_is_cut:
                return False
            mentioned = {lit_atom(l) for l in v.clause}
            if any(x not in mentioned for x in outer):
                return False
            if v.pivot in outer:
                return False
            return walk(v.left, outer + (v.pivot,), True) and walk(v.right, outer + (v.pivot,), True)
        return True

    return walk(p.root, (), True)


# ---------------------------------------------------------------------------
# counting and sample size


@dataclass(frozen=True)
class CountBounds:
    min_k: int
    max_k: mpmath.mpf
    max_proofs: mpmath.mpf

    def k_within(self, k: int) -> bool:
        return self.min_k <= k and k <= self.max_k

    @property
    def max_k_floor(self) -> int:
        return int(mpmath.floor(self.max_k))

    @property
    def max_proofs_floor(self) -> int:
        return int(mpmath.floor(self.max_proofs))


def count_bounds(n: int, s: int, dps: int = 60) -> CountBounds:
    """Node-count range and proof-count cap for space-``s`` normal proofs.

    ``max_k`` and ``max_proofs`` involve e, so they are high precision
    mpmath values; compare integers against their floors.
    """
    if not n >= s >= 1:
        raise ValueError(f"need n >= s >= 1, got n={n}, s={s}")
    min_k = 2**s - 1
    if s == 1:
        return CountBounds(1, mpmath.mpf(1), mpmath.mpf(1))
    with mpmath.workdps(dps):
        leaves = (mpmath.e * n / (s - 1)) ** (s - 1)
        return CountBounds(min_k, 2 * leaves, mpmath.power(8 * n, leaves))


def sample_size_resolution(n: int, s: int, epsilon, delta, eta, c=1.0) -> int:
    """Samples for learning space-``s`` treelike proofs over ``n`` atoms."""
    if not n >= s >= 1:
        raise ValueError(f"need n >= s >= 1, got n={n}, s={s}")
    bits = n ** (s - 1) * math.log2(n)
    return _sample_size(bits, float(epsilon), float(delta), float(eta), float(c))


# ---------------------------------------------------------------------------
# text output


def clause_text(c: frozenset[int], names=None) -> str:
    if not c:
        return "[]"
    parts = []
    for l in sorted(c, key=lambda l: (abs(l), -l)):
        atom = lit_atom(l)
        name = names[atom] if names is not None else str(atom + 1)
        parts.append(name if l > 0 else f"~{name}")
    return " | ".join(parts)


def format_proof(p: ResolutionProof, names=None) -> str:
    lines = []

    def walk(v: ProofNode, depth: int) -> None:
        pad = "  " * depth
        text = clause_text(v.clause, names)
        if isinstance(v, HypothesisLeaf):
            lines.append(f"{pad}{text}  (hyp)")
        elif isinstance(v, WeakeningLeaf):
            lines.append(f"{pad}{text}  (weaken {v.source + 1})")
        else:
            pivot = names[v.pivot] if names is not None else str(v.pivot + 1)
            lines.append(f"{pad}{text}  (cut {pivot})")
            walk(v.left, depth + 1)
            walk(v.right, depth + 1)

    walk(p.root, 0)
    return "\n".join(lines)


def proof_to_dict(p: ResolutionProof) -> dict:
    def enc(v: ProofNode) -> dict:
        body = {"clause": sorted(v.clause, key=lambda l: (abs(l), -l))}
        if isinstance(v, HypothesisLeaf):
            return {"type": "hyp", **body}
        if isinstance(v, WeakeningLeaf):
            return {"type": "weaken", "from": v.source, **body}
        return {"type": "cut", "pivot": v.pivot + 1, **body, "left": enc(v.left), "right": enc(v.right)}

    return {"space": p.space, "root": enc(p.root)}


def proof_from_dict(data: dict) -> ResolutionProof:
    def dec(d: dict) -> ProofNode:
        c = frozenset(d["clause"])
        if d["type"] == "hyp":
            return HypothesisLeaf(c)
        if d["type"] == "weaken":
            return WeakeningLeaf(c, d["from"])
        if d["type"] == "cut":
            return Cut(d["pivot"] - 1, dec(d["left"]), dec(d["right"]), c)
        raise ValueError(f"unknown proof node type {d['type']!r}")

    return ResolutionProof(dec(data["root"]), data["space"])
