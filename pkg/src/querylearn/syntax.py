"""Text syntax for formulas.

    ~f          negation
    f & g       conjunction (n-ary when chained without parentheses)
    f | g       disjunction (n-ary likewise)
    f -> g      implication, right associative
    f <-> g     equivalence
    thr(b; c1*f1, c2*f2, ...)   linear threshold, ``thr(b)`` when empty

Atoms are identifiers, optionally applied to constants: ``hit(sculpture,floor)``.
``thr`` is reserved.  ``format_formula`` output always parses back to an equal
formula.
"""
from __future__ import annotations

import re
from typing import Optional

from .logic import Formula, Not, Threshold, Var, Vocabulary, conj, disj, iff, implies


class FormulaSyntaxError(ValueError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|[&|~();,*])|(?P<int>-?\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary, intern: bool):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vocab = vocab
        self.intern = intern
        self.text = text

    def peek(self) -> Optional[str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return None

    def take(self, expected: Optional[str] = None) -> tuple[str, str]:
        if self.pos >= len(self.tokens):
            raise FormulaSyntaxError(f"unexpected end of formula {self.text!r}")
        tok = self.tokens[self.pos]
        if expected is not None and tok[1] != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, got {tok[1]!r} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.equiv()
        if self.pos != len(self.tokens):
            raise FormulaSyntaxError(f"trailing input {self.tokens[self.pos][1]!r} in {self.text!r}")
        return f

    def equiv(self) -> Formula:
        left = self.implication()
        while self.peek() == "<->":
            self.take()
            left = iff(left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else disj(*parts)

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else conj(*parts)

    def unary(self) -> Formula:
        if self.peek() == "~":
            self.take()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, value = self.take()
        if value == "(":
            f = self.equiv()
            self.take(")")
            return f
        if kind != "ident":
            raise FormulaSyntaxError(f"unexpected {value!r} in {self.text!r}")
        if value == "thr":
            return self.threshold()
        name = value
        if self.peek() == "(":
            self.take()
            args = [self._constant()]
            while self.peek() == ",":
                self.take()
                args.append(self._constant())
            self.take(")")
            name = f"{name}({','.join(args)})"
        if self.intern:
            return Var(self.vocab.intern(name))
        if name not in self.vocab:
            raise FormulaSyntaxError(f"unknown atom {name!r}")
        return Var(self.vocab.id(name))

    def _constant(self) -> str:
        kind, value = self.take()
        if kind not in ("ident", "int"):
            raise FormulaSyntaxError(f"bad argument {value!r} in {self.text!r}")
        return value

    def threshold(self) -> Formula:
        self.take("(")
        kind, bound = self.take()
        if kind != "int":
            raise FormulaSyntaxError(f"threshold bound must be an integer, got {bound!r}")
        terms = []
        if self.peek() == ";":
            self.take()
            if self.peek() != ")":
                terms.append(self.term())
                while self.peek() == ",":
                    self.take()
                    terms.append(self.term())
        self.take(")")
        return Threshold(tuple(terms), int(bound))

    def term(self) -> tuple[int, Formula]:
        kind, weight = self.take()
        if kind != "int":
            raise FormulaSyntaxError(f"threshold weight must be an integer, got {weight!r}")
        self.take("*")
        return int(weight), self.unary()


def parse_formula(text: str, vocab: Vocabulary, intern: bool = True) -> Formula:
    """Parse ``text``; unknown atoms are interned unless ``intern`` is False."""
    return _Parser(text, vocab, intern).parse()


# precedence levels, loosest first
_IFF, _IMP, _OR, _AND, _UNARY = range(5)


def _shape(f: Formula):
    """Classify a threshold as one of the sugared connectives, if it is one."""
    if not isinstance(f, Threshold):
        return None
    ws = [w for w, _ in f.terms]
    k = len(ws)
    if k >= 2 and all(w == 1 for w in ws):
        if f.bound == k:
            a, b = f.terms[0][1], f.terms[1][1]
            if k == 2 and _shape(a) == "imp" and _shape(b) == "imp":
                if a.terms[0][1] == b.terms[1][1] and a.terms[1][1] == b.terms[0][1]:
                    return "iff"
            return "and"
        if f.bound == 1:
            return "or"
    if k == 2 and ws == [-1, 1] and f.bound == 0:
        return "imp"
    return None


def format_formula(f: Formula, vocab: Vocabulary) -> str:
    return _fmt(f, vocab, _IFF)


def _fmt(f: Formula, vocab: Vocabulary, level: int) -> str:
    if isinstance(f, Var):
        return vocab.name(f.atom)
    if isinstance(f, Not):
        return "~" + _fmt(f.child, vocab, _UNARY)
    shape = _shape(f)
    if shape == "iff":
        imp = f.terms[0][1]
        text = f"{_fmt(imp.terms[0][1], vocab, _IMP)} <-> {_fmt(imp.terms[1][1], vocab, _IMP)}"
        own = _IFF
    elif shape == "imp":
        # right operand may itself be an implication; left must bind tighter
        text = f"{_fmt(f.terms[0][1], vocab, _OR)} -> {_fmt(f.terms[1][1], vocab, _IMP)}"
        own = _IMP
    elif shape == "or":
        text = " | ".join(_fmt(c, vocab, _AND) for _, c in f.terms)
        own = _OR
    elif shape == "and":
        text = " & ".join(_fmt(c, vocab, _UNARY) for _, c in f.terms)
        own = _AND
    else:
        body = ", ".join(f"{w}*{_fmt(c, vocab, _UNARY)}" for w, c in f.terms)
        text = f"thr({f.bound}; {body})" if body else f"thr({f.bound})"
        own = _UNARY
    return f"({text})" if own < level else text
