"""Propositional formulas over linear threshold connectives.

Formulas are immutable trees of three node kinds: ``Var`` (a ground atom,
referenced by its integer id), ``Not`` and ``Threshold``.  AND, OR,
implication and equivalence are only constructor sugar; everything compiles
to thresholds.

Scenes are tuples of 0/1 ints indexed by atom id.  Obscured scenes are tuples
whose entries are 0, 1 or ``None`` (hidden, written ``*`` in files).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

STAR = None

Scene = Tuple[int, ...]
ObscuredScene = Tuple[Optional[int], ...]


class Vocabulary:
    """Dense table of ground atom names, ids assigned in interning order."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        if name not in self._ids:
            self._ids[name] = len(self._names)
            self._names.append(name)
        return self._ids[name]

    def id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise KeyError(f"unknown atom {name!r}") from None

    def name(self, atom: int) -> str:
        return self._names[atom]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __repr__(self) -> str:
        return f"Vocabulary({self._names!r})"


def _check_int64(value: int, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"{what} must be an int, got {value!r}")
    if not INT64_MIN <= value <= INT64_MAX:
        raise OverflowError(f"{what} {value} does not fit in 64 bits")
    return value


@dataclass(frozen=True)
class Var:
    atom: int

    def __post_init__(self):
        if self.atom < 0:
            raise ValueError(f"atom id must be non-negative, got {self.atom}")


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class Threshold:
    """``[sum c_i * f_i >= bound]`` with nonzero integer weights."""

    terms: Tuple[Tuple[int, "Formula"], ...]
    bound: int
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple((w, f) for w, f in self.terms)
        for w, _ in terms:
            _check_int64(w, "weight")
            if w == 0:
                raise ValueError("threshold weights must be nonzero")
        _check_int64(self.bound, "bound")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_hash", hash((terms, self.bound)))

    def __hash__(self):
        return self._hash


Formula = Union[Var, Not, Threshold]


def conj(*children: Formula) -> Threshold:
    return Threshold(tuple((1, c) for c in children), len(children))


def disj(*children: Formula) -> Threshold:
    return Threshold(tuple((1, c) for c in children), 1)


def implies(premise: Formula, conclusion: Formula) -> Threshold:
    return Threshold(((-1, premise), (1, conclusion)), 0)


def iff(left: Formula, right: Formula) -> Threshold:
    return conj(implies(left, right), implies(right, left))


def horn_to_formula(body: Sequence[int], head: int) -> Threshold:
    """Threshold encoding of ``b1 & ... & bk => head``.

    The clause is ``[-b1 - ... - bk + head >= 1 - k]``.
    """
    if len(set(body)) != len(body):
        raise ValueError("body atoms must be distinct")
    terms = tuple((-1, Var(a)) for a in body) + ((1, Var(head)),)
    return Threshold(terms, 1 - len(body))


def atoms(f: Formula) -> frozenset[int]:
    out: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.atom)
        elif isinstance(g, Not):
            stack.append(g.child)
        else:
            stack.extend(c for _, c in g.terms)
    return frozenset(out)


def size(f: Formula) -> int:
    """Number of nodes in the formula tree."""
    if isinstance(f, Var):
        return 1
    if isinstance(f, Not):
        return 1 + size(f.child)
    return 1 + sum(size(c) for _, c in f.terms)


def evaluate(f: Formula, x: Sequence[int]) -> bool:
    """Classical truth value of ``f`` on the total scene ``x``."""
    if isinstance(f, Var):
        if f.atom >= len(x):
            raise ValueError(f"atom id {f.atom} out of range for scene of {len(x)} atoms")
        return bool(x[f.atom])
    if isinstance(f, Not):
        return not evaluate(f.child, x)
    total = 0
    for w, child in f.terms:
        if evaluate(child, x):
            total += w
    return total >= f.bound


PartialValue = Union[bool, Formula]


def partial_eval(f: Formula, rho: Sequence[Optional[int]]) -> PartialValue:
    """Partially evaluate ``f`` under an obscured scene.

    Returns ``True``/``False`` when the formula is witnessed, otherwise the
    residual formula over hidden atoms.  Witnessed children are dropped from
    a residual threshold and their weight is folded into the bound.
    """
    if isinstance(f, Var):
        if f.atom >= len(rho):
            raise ValueError(f"atom id {f.atom} out of range for scene of {len(rho)} atoms")
        v = rho[f.atom]
        return f if v is None else bool(v)
    if isinstance(f, Not):
        inner = partial_eval(f.child, rho)
        if isinstance(inner, bool):
            return not inner
        return Not(inner)
    witnessed_true = 0
    low = 0
    high = 0
    residual = []
    for w, child in f.terms:
        value = partial_eval(child, rho)
        if value is True:
            witnessed_true += w
        elif value is False:
            continue
        else:
            residual.append((w, value))
            if w < 0:
                low += w
            else:
                high += w
    if witnessed_true + low >= f.bound:
        return True
    if witnessed_true + high < f.bound:
        return False
    return Threshold(tuple(residual), f.bound - witnessed_true)


def witnessed(f: Formula, rho: Sequence[Optional[int]]) -> Optional[bool]:
    """``True``/``False`` if witnessed, ``None`` otherwise."""
    value = partial_eval(f, rho)
    return value if isinstance(value, bool) else None


def consistent(rho: Sequence[Optional[int]], x: Sequence[int]) -> bool:
    return len(rho) == len(x) and all(r is None or r == v for r, v in zip(rho, x))


def refines(finer: Sequence[Optional[int]], coarser: Sequence[Optional[int]]) -> bool:
    """True when ``finer`` agrees with every revealed entry of ``coarser``."""
    return len(finer) == len(coarser) and all(
        c is None or f == c for f, c in zip(finer, coarser)
    )


def parse_row(text: str) -> ObscuredScene:
    table = {"0": 0, "1": 1, "*": None}
    try:
        return tuple(table[ch] for ch in text)
    except KeyError as exc:
        raise ValueError(f"bad scene character {exc.args[0]!r} in {text!r}") from None


def format_row(rho: Sequence[Optional[int]]) -> str:
    return "".join("*" if v is None else str(int(v)) for v in rho)
