"""Backward chaining over ground Horn knowledge bases, with query-driven learning.

The search keeps an explicit subgoal dependency structure: query vertices
labelled by atoms and threshold vertices labelled by ground rules.  Each loop
iteration asks TEST whether the goal is already successful, otherwise asks
EXPLORE for an unexplored vertex and GENERATE for one more outgoing edge of it.

Subgoals are unfolded as a tree (one vertex per derivation path).  An atom
that already labels an ancestor on its own path becomes a leaf that is never
expanded, which is what keeps cyclic rule sets finite.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .logic import ObscuredScene, Var, Vocabulary, partial_eval


# ---------------------------------------------------------------------------
# knowledge bases and grounding


@dataclass(frozen=True)
class HornClause:
    body: tuple[int, ...]
    head: int
    schema: Optional[str] = None
    binding: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if len(set(self.body)) != len(self.body):
            raise ValueError("body atoms must be distinct")
        if self.head in self.body:
            raise ValueError("head atom appears in the body")


@dataclass
class HornKB:
    """Ground facts plus an ordered rule list; the order drives GENERATE."""

    vocab: Vocabulary
    facts: frozenset[int]
    rules: tuple[HornClause, ...]
    _by_head: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.facts = frozenset(self.facts)
        self.rules = tuple(self.rules)
        by_head: dict[int, list[int]] = {}
        for i, rule in enumerate(self.rules):
            by_head.setdefault(rule.head, []).append(i)
        self._by_head = {h: tuple(ids) for h, ids in by_head.items()}

    @property
    def n(self) -> int:
        return len(self.vocab)

    def rules_for(self, head: int) -> tuple[int, ...]:
        return self._by_head.get(head, ())

    def with_facts(self, extra: Iterable[int]) -> "HornKB":
        return HornKB(self.vocab, self.facts | frozenset(extra), self.rules)

    def rule_label(self, index: int) -> str:
        rule = self.rules[index]
        if rule.schema is not None:
            text = rule.schema
            if rule.binding:
                text += " / " + ", ".join(f"{v}={c}" for v, c in rule.binding)
            return text
        body = " & ".join(self.vocab.name(a) for a in rule.body)
        return f"[{body}] => {self.vocab.name(rule.head)}"


def is_variable(term: str) -> bool:
    return term[:1].isupper() or term.startswith("?")


@dataclass(frozen=True)
class AtomPattern:
    predicate: str
    args: tuple[str, ...] = ()

    def variables(self) -> list[str]:
        return [a for a in self.args if is_variable(a)]

    def ground(self, binding: dict[str, str]) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(binding.get(a, a) for a in self.args)})"

    def __str__(self):
        return self.ground({})


@dataclass(frozen=True)
class RuleSchema:
    body: tuple[AtomPattern, ...]
    head: AtomPattern

    def variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for pattern in (*self.body, self.head):
            for v in pattern.variables():
                seen.setdefault(v)
        return list(seen)

    def __str__(self):
        return f"[{' & '.join(map(str, self.body))}] => {self.head}"


def ground(
    schemas: Sequence[RuleSchema],
    domain: Sequence[str],
    facts: Sequence[AtomPattern] = (),
    vocab: Optional[Vocabulary] = None,
) -> HornKB:
    """Propositionalize function-free rules over a finite domain.

    Variables are bound in order of first appearance and substitutions are
    enumerated in domain order, so rule order is reproducible.  Groundings
    whose head also occurs in the body are tautologies and are dropped;
    repeated body atoms collapse to one.
    """
    vocab = Vocabulary() if vocab is None else vocab
    arity: dict[str, int] = {}
    for pattern in itertools.chain(facts, *((*s.body, s.head) for s in schemas)):
        if arity.setdefault(pattern.predicate, len(pattern.args)) != len(pattern.args):
            raise ValueError(
                f"predicate {pattern.predicate!r} used with arities "
                f"{arity[pattern.predicate]} and {len(pattern.args)}"
            )
    needs_domain = any(s.variables() for s in schemas) or any(p.variables() for p in facts)
    if needs_domain and not domain:
        raise ValueError("empty domain")

    fact_ids: set[int] = set()
    for pattern in facts:
        names = pattern.variables()
        for values in itertools.product(domain, repeat=len(dict.fromkeys(names))):
            binding = dict(zip(dict.fromkeys(names), values))
            fact_ids.add(vocab.intern(pattern.ground(binding)))

    rules = []
    for schema in schemas:
        names = schema.variables()
        for values in itertools.product(domain, repeat=len(names)):
            binding = dict(zip(names, values))
            body = tuple(dict.fromkeys(vocab.intern(p.ground(binding)) for p in schema.body))
            head = vocab.intern(schema.head.ground(binding))
            if head in body:
                continue
            rules.append(HornClause(body, head, str(schema), tuple(binding.items())))
    return HornKB(vocab, frozenset(fact_ids), tuple(rules))


# ---------------------------------------------------------------------------
# subgoal structure


class Status(enum.Enum):
    UNKNOWN = "unknown"
    SUCCESSFUL = "successful"
    UNSUCCESSFUL = "unsuccessful"


@dataclass(eq=False)
class QueryVertex:
    key: tuple[int, ...]
    atom: int
    parent: Optional["RuleVertex"]
    repeat: bool = False
    unexplored: bool = False
    finished: bool = False
    next_rule: int = 0
    children: list["RuleVertex"] = field(default_factory=list)

    def edges(self):
        return ((1, c) for c in self.children)


@dataclass(eq=False)
class RuleVertex:
    key: tuple[int, ...]
    rule: int
    parent: QueryVertex
    threshold: int
    w_plus: int
    w_minus: int = 0
    unexplored: bool = True
    finished: bool = False
    next_body: int = 0
    children: list[tuple[int, QueryVertex]] = field(default_factory=list)

    def edges(self):
        return iter(self.children)


Vertex = Union[QueryVertex, RuleVertex]

FULLY_EXPLORED = "fully explored"


class SubgoalGraph:
    """Partial subgoal structure rooted at the goal atom."""

    def __init__(self, kb: HornKB, goal: int):
        self.kb = kb
        self.root = QueryVertex((goal,), goal, None, unexplored=True)
        self.size = 1

    def vertices(self) -> list[Vertex]:
        out: list[Vertex] = []
        stack: list[Vertex] = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed([c for _, c in v.edges()]))
        return out

    def edge_count(self) -> int:
        return self.size - 1

    def find(self, key: tuple[int, ...]) -> Optional[Vertex]:
        for v in self.vertices():
            if v.key == key:
                return v
        return None

    def status(self, facts) -> dict[tuple[int, ...], Status]:
        """Node status under the given successful atoms (see ``node_status``)."""
        out: dict[tuple[int, ...], Status] = {}
        _status(self.root, facts, out)
        return out

    def generate(self, v: Vertex):
        """Add the next outgoing edge of ``v``; return the new vertex or FULLY_EXPLORED."""
        kb = self.kb
        if isinstance(v, QueryVertex):
            options = kb.rules_for(v.atom)
            if v.repeat or v.next_rule >= len(options):
                return FULLY_EXPLORED
            index = options[v.next_rule]
            v.next_rule += 1
            k = len(kb.rules[index].body)
            child = RuleVertex(v.key + (index,), index, v, threshold=k, w_plus=k)
            v.children.append(child)
            self.size += 1
            return child
        body = kb.rules[v.rule].body
        if v.next_body >= len(body):
            return FULLY_EXPLORED
        atom = body[v.next_body]
        v.next_body += 1
        v.w_plus -= 1
        child = QueryVertex(v.key + (atom,), atom, v, repeat=_on_path(v, atom))
        v.children.append((1, child))
        self.size += 1
        return child


def _on_path(v: RuleVertex, atom: int) -> bool:
    q: Optional[QueryVertex] = v.parent
    while q is not None:
        if q.atom == atom:
            return True
        q = q.parent.parent if q.parent is not None else None
    return False


def _status(v: Vertex, facts, out) -> Status:
    child_status = [(w, _status(c, facts, out)) for w, c in v.edges()]
    if isinstance(v, QueryVertex):
        if v.atom in facts:
            s = Status.SUCCESSFUL
        elif any(cs is Status.SUCCESSFUL for _, cs in child_status):
            s = Status.SUCCESSFUL
        elif v.finished and all(cs is Status.UNSUCCESSFUL for _, cs in child_status):
            s = Status.UNSUCCESSFUL
        else:
            s = Status.UNKNOWN
    else:
        won = sum(w for w, cs in child_status if cs is Status.SUCCESSFUL)
        open_neg = sum(min(0, w) for w, cs in child_status if cs is Status.UNKNOWN)
        open_pos = sum(max(0, w) for w, cs in child_status if cs is Status.UNKNOWN)
        if won + v.w_minus + open_neg >= v.threshold:
            s = Status.SUCCESSFUL
        elif won + v.w_plus + open_pos < v.threshold:
            s = Status.UNSUCCESSFUL
        else:
            s = Status.UNKNOWN
    out[v.key] = s
    return s


def node_status(g: SubgoalGraph, successes) -> dict[tuple[int, ...], Status]:
    return g.status(frozenset(successes))


def explore(g: SubgoalGraph, facts) -> Optional[Vertex]:
    """Depth-first choice of the deepest unexplored vertex.

    Successful vertices are not entered.  Returns None (FAIL) when no
    unexplored vertex is reachable.
    """
    status = g.status(facts)

    def visit(v: Vertex) -> Optional[Vertex]:
        if status[v.key] is Status.SUCCESSFUL:
            return None
        for _, c in v.edges():
            found = visit(c)
            if found is not None:
                return found
        return v if v.unexplored else None

    return visit(g.root)


def generate(g: SubgoalGraph, v: Vertex):
    return g.generate(v)


# ---------------------------------------------------------------------------
# proofs


class Justification(enum.Enum):
    HYPOTHESIS = "hypothesis"
    LEARNED = "learned"
    CHAINING = "chaining"


@dataclass(frozen=True)
class ProofLine:
    atom: int
    kind: Justification
    rule: Optional[int] = None
    premises: tuple[int, ...] = ()


@dataclass(frozen=True)
class ChainingProof:
    lines: tuple[ProofLine, ...]
    kb: HornKB

    @property
    def query(self) -> int:
        return self.lines[-1].atom

    @property
    def learned(self) -> frozenset[int]:
        return frozenset(l.atom for l in self.lines if l.kind is Justification.LEARNED)

    def format(self) -> str:
        name = self.kb.vocab.name
        out = []
        for i, line in enumerate(self.lines, 1):
            if line.kind is Justification.CHAINING:
                refs = " & ".join(str(p) for p in line.premises)
                just = f"chaining, {refs}, {self.kb.rule_label(line.rule)}" if refs else (
                    f"chaining, {self.kb.rule_label(line.rule)}"
                )
            else:
                just = line.kind.value
            out.append(f"{i}. {name(line.atom)} ({just})")
        return "\n".join(out)

    def to_dict(self) -> dict:
        name = self.kb.vocab.name
        lines = []
        for i, line in enumerate(self.lines, 1):
            entry = {"line": i, "atom": name(line.atom), "justification": line.kind.value}
            if line.kind is Justification.CHAINING:
                entry["premises"] = list(line.premises)
                entry["rule"] = self.kb.rule_label(line.rule)
            lines.append(entry)
        return {
            "query": name(self.query),
            "lines": lines,
            "learned": sorted(name(a) for a in self.learned),
        }


def extract_proof(g: SubgoalGraph, facts, learned=frozenset()) -> Optional[ChainingProof]:
    """Chaining proof of the root from the successful part of ``g``, if any."""
    status = g.status(facts)
    if status[g.root.key] is not Status.SUCCESSFUL:
        return None
    lines: list[ProofLine] = []
    line_of: dict[int, int] = {}

    def emit(v: QueryVertex) -> int:
        if v.atom in line_of:
            return line_of[v.atom]
        if v.atom in facts:
            kind = Justification.LEARNED if v.atom in learned else Justification.HYPOTHESIS
            line = ProofLine(v.atom, kind)
        else:
            r = next(c for c in v.children if status[c.key] is Status.SUCCESSFUL)
            premises = tuple(emit(c) for _, c in r.children)
            line = ProofLine(v.atom, Justification.CHAINING, r.rule, premises)
        lines.append(line)
        line_of[v.atom] = len(lines)
        return len(lines)

    emit(g.root)
    return ChainingProof(tuple(lines), g.kb)


def test(g: SubgoalGraph, goal: int, facts, learned=frozenset()) -> Optional[ChainingProof]:
    """TEST: a proof of ``goal`` if its vertex is successful, else None."""
    if g.root.atom != goal:
        raise ValueError("goal does not label the source of the graph")
    return extract_proof(g, facts, learned)


def trivial_proof(goal: int, kb: HornKB, learned: bool = False) -> ChainingProof:
    kind = Justification.LEARNED if learned else Justification.HYPOTHESIS
    return ChainingProof((ProofLine(goal, kind),), kb)


# ---------------------------------------------------------------------------
# the search loop


class Mode(enum.Enum):
    CREDULOUS = "credulous"
    SKEPTICAL = "skeptical"


def passes_sample_test(atom: int, samples: Iterable[ObscuredScene], mode: Mode) -> bool:
    """Credulous: never witnessed false.  Skeptical: always witnessed true."""
    h = Var(atom)
    if mode is Mode.CREDULOUS:
        return all(partial_eval(h, rho) is not False for rho in samples)
    return all(partial_eval(h, rho) is True for rho in samples)


class BackwardSearch:
    """One run of the backward search loop, optionally learning from samples.

    ``on_explore(search, vertex)`` is called for every vertex EXPLORE
    proposes, before GENERATE runs on it.
    """

    def __init__(
        self,
        goal: int,
        kb: HornKB,
        samples: Optional[Sequence[ObscuredScene]] = None,
        mode: Mode = Mode.CREDULOUS,
        on_explore: Optional[Callable[["BackwardSearch", Vertex], None]] = None,
    ):
        if not 0 <= goal < kb.n:
            raise ValueError(f"goal atom {goal} is not in the vocabulary")
        self.goal = goal
        self.kb = kb
        self.samples = None if samples is None else list(samples)
        if self.samples is not None:
            for rho in self.samples:
                if len(rho) != kb.n:
                    raise ValueError(f"sample over {len(rho)} atoms, vocabulary has {kb.n}")
        self.mode = Mode(mode)
        self.on_explore = on_explore
        self.facts: set[int] = set(kb.facts)
        self.learned: list[int] = []
        self.graph: Optional[SubgoalGraph] = None
        self.iterations = 0
        self.proposed: list[tuple[int, ...]] = []
        self._tested: dict[int, bool] = {}

    def _learnable(self, atom: int) -> bool:
        if atom not in self._tested:
            self._tested[atom] = passes_sample_test(atom, self.samples, self.mode)
        return self._tested[atom]

    def run(self) -> Optional[ChainingProof]:
        if self.goal in self.facts:
            return trivial_proof(self.goal, self.kb)
        g = self.graph = SubgoalGraph(self.kb, self.goal)
        learned = set()
        while (proof := test(g, self.goal, self.facts, learned)) is None:
            v = explore(g, self.facts)
            if v is None:
                return None
            self.iterations += 1
            self.proposed.append(v.key)
            if self.on_explore is not None:
                self.on_explore(self, v)
            new = g.generate(v)
            if new == FULLY_EXPLORED:
                v.unexplored = False
                v.finished = True
                continue
            if isinstance(new, RuleVertex):
                new.unexplored = True
                continue
            if new.repeat:
                continue
            if (
                self.samples is not None
                and new.atom not in self.facts
                and self._learnable(new.atom)
            ):
                self.facts.add(new.atom)
                self.learned.append(new.atom)
                learned.add(new.atom)
            new.unexplored = new.atom not in self.facts
        return proof


def backward_search(goal: int, kb: HornKB) -> Optional[ChainingProof]:
    """Plain backward chaining; None means Fail."""
    return BackwardSearch(goal, kb).run()


def learn_backward_search(
    goal: int,
    kb: HornKB,
    samples: Sequence[ObscuredScene],
    mode: Union[Mode, str] = Mode.CREDULOUS,
) -> Optional[ChainingProof]:
    """Backward chaining that adds sample-supported subgoal atoms to the KB."""
    return BackwardSearch(goal, kb, samples, Mode(mode)).run()


def verify_chaining_proof(
    proof: ChainingProof,
    kb: HornKB,
    samples: Optional[Sequence[ObscuredScene]] = None,
    mode: Mode = Mode.CREDULOUS,
) -> bool:
    """Check every line is a fact, a sample-supported atom or a valid chaining step."""
    if not proof.lines:
        return False
    for i, line in enumerate(proof.lines, 1):
        if line.kind is Justification.HYPOTHESIS:
            if line.atom not in kb.facts:
                return False
        elif line.kind is Justification.LEARNED:
            if samples is None or not passes_sample_test(line.atom, samples, Mode(mode)):
                return False
        else:
            if line.rule is None or not 0 <= line.rule < len(kb.rules):
                return False
            rule = kb.rules[line.rule]
            if rule.head != line.atom or len(line.premises) != len(rule.body):
                return False
            if any(not 1 <= p < i for p in line.premises):
                return False
            if [proof.lines[p - 1].atom for p in line.premises] != list(rule.body):
                return False
    return True


# ---------------------------------------------------------------------------
# sample size


def _sample_size(bits: float, epsilon: float, delta: float, eta: float, c: float) -> int:
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if not c > 0:
        raise ValueError(f"constant c must be positive, got {c}")
    return math.ceil(c * (bits * math.log(2) - math.log(delta)) / (epsilon * eta))


def sample_size_chaining(n: int, epsilon, delta, eta, c=1.0) -> int:
    """Samples for learning chaining proofs: proofs take ``n log2 n`` bits."""
    if n < 1:
        raise ValueError(f"need at least one atom, got {n}")
    bits = n * math.log2(n)
    return _sample_size(bits, float(epsilon), float(delta), float(eta), float(c))
