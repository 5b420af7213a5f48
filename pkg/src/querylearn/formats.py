"""Readers and writers for the plain-text input files.

KB file::

    domain sculpture crate floor sidewalk
    fact fragile(sculpture)
    rule crushed(X) & fragile(X) => broken(X)

Distribution file (``atoms:`` header, then ``probability bits`` rows)::

    atoms: a b c
    1/4 101

Mask file: ``fixed a c``, ``coin 1/2``, or one or more
``when <formula> hide a b with 3/4`` lines.

Scene file: ``atoms:`` header, then rows over ``0``, ``1`` and ``*``.

CNF file: DIMACS ``p cnf N M`` with optional ``c atom <id> <name>`` comments.

Blank lines and ``#`` comments are ignored everywhere.  Errors carry the
source name and line number.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .chaining import AtomPattern, HornKB, RuleSchema, ground
from .distributions import (
    ExplicitDistribution,
    FixedSubset,
    IndependentCoin,
    MaskingProcess,
    MaskRule,
    SampleSet,
    ValueDependent,
)
from .logic import Vocabulary, format_row, parse_row
from .resolution import Cnf
from .syntax import FormulaSyntaxError, parse_formula


class FormatError(ValueError):
    pass


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


_PATTERN = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*(?:\((.*)\))?\s*$")


def parse_pattern(text: str) -> AtomPattern:
    m = _PATTERN.match(text)
    if not m:
        raise ValueError(f"bad atom {text.strip()!r}")
    args = ()
    if m.group(2) is not None:
        args = tuple(a.strip() for a in m.group(2).split(","))
        if any(not re.fullmatch(r"[A-Za-z0-9_?']+", a) for a in args):
            raise ValueError(f"bad argument list in {text.strip()!r}")
    return AtomPattern(m.group(1), args)


def parse_kb(text: str, source: str = "<kb>", vocab: Optional[Vocabulary] = None) -> HornKB:
    domain: list[str] = []
    facts: list[AtomPattern] = []
    schemas: list[RuleSchema] = []
    for lineno, line in _lines(text):
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if keyword == "domain":
                domain.extend(rest.split())
            elif keyword == "fact":
                facts.append(parse_pattern(rest))
            elif keyword == "rule":
                if "=>" not in rest:
                    raise ValueError("rule needs '=>'")
                body_text, head_text = rest.split("=>", 1)
                body = tuple(parse_pattern(b) for b in body_text.split("&")) if body_text.strip() else ()
                schemas.append(RuleSchema(body, parse_pattern(head_text)))
            else:
                raise ValueError(f"unknown directive {keyword!r}")
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    try:
        return ground(schemas, domain, facts, vocab)
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from None


def read_kb(path, vocab: Optional[Vocabulary] = None) -> HornKB:
    return parse_kb(Path(path).read_text(), str(path), vocab)


def _header(lineno: int, line: str, source: str) -> list[str]:
    if not line.startswith("atoms:"):
        raise FormatError(f"{source}:{lineno}: expected 'atoms:' header")
    names = line[len("atoms:"):].split()
    if len(set(names)) != len(names):
        raise FormatError(f"{source}:{lineno}: duplicate atom in header")
    return names


def _columns(names: Sequence[str], vocab: Vocabulary) -> list[int]:
    return [vocab.intern(name) for name in names]


def parse_distribution(text: str, vocab: Vocabulary, source: str = "<distribution>") -> ExplicitDistribution:
    """Parse a distribution; header atoms are interned and columns reordered to vocab ids.

    Every atom in ``vocab`` must be covered by the header.
    """
    lines = list(_lines(text))
    if not lines:
        raise FormatError(f"{source}: empty distribution file")
    cols = _columns(_header(*lines[0], source), vocab)
    n = len(vocab)
    if sorted(cols) != list(range(n)):
        missing = sorted(set(vocab) - {vocab.name(c) for c in cols})
        raise FormatError(f"{source}: header does not cover atoms {missing}")
    support = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{source}:{lineno}: expected 'probability bits'")
        try:
            p = Fraction(parts[0])
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"{source}:{lineno}: bad probability {parts[0]!r}") from None
        bits = parts[1]
        if len(bits) != len(cols) or set(bits) - {"0", "1"}:
            raise FormatError(f"{source}:{lineno}: scene must be {len(cols)} bits")
        x = [0] * n
        for col, ch in zip(cols, bits):
            x[col] = int(ch)
        support.append((tuple(x), p))
    try:
        return ExplicitDistribution(tuple(support), n, name=Path(source).name)
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from None


def read_distribution(path, vocab: Vocabulary) -> ExplicitDistribution:
    return parse_distribution(Path(path).read_text(), vocab, str(path))


def format_distribution(d: ExplicitDistribution, vocab: Vocabulary) -> str:
    lines = ["atoms: " + " ".join(vocab.names[: d.n])]
    for x, p in d.support:
        lines.append(f"{p} {''.join(map(str, x))}")
    return "\n".join(lines) + "\n"


_WHEN = re.compile(r"^when\s+(.*)\s+hide\s+(.*?)\s+with\s+(\S+)$")


def parse_mask(text: str, vocab: Vocabulary, source: str = "<mask>") -> MaskingProcess:
    rules = []
    result: Optional[MaskingProcess] = None
    for lineno, line in _lines(text):
        keyword = line.split()[0]
        try:
            if keyword == "fixed":
                if result is not None or rules:
                    raise ValueError("only one mask directive allowed")
                result = FixedSubset(frozenset(vocab.id(a) for a in line.split()[1:]))
            elif keyword == "coin":
                if result is not None or rules:
                    raise ValueError("only one mask directive allowed")
                result = IndependentCoin(Fraction(line.split()[1]))
            elif keyword == "when":
                if result is not None:
                    raise ValueError("'when' rules cannot follow another mask directive")
                m = _WHEN.match(line)
                if not m:
                    raise ValueError("expected 'when <formula> hide <atoms> with <prob>'")
                condition = parse_formula(m.group(1), vocab, intern=False)
                hidden = frozenset(vocab.id(a) for a in m.group(2).split())
                prob = Fraction(m.group(3))
                if not 0 <= prob <= 1:
                    raise ValueError(f"probability {prob} outside [0, 1]")
                rules.append(MaskRule(condition, hidden, prob))
            else:
                raise ValueError(f"unknown mask directive {keyword!r}")
        except (ValueError, KeyError, IndexError, ZeroDivisionError, FormulaSyntaxError) as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    if rules:
        return ValueDependent(tuple(rules))
    if result is None:
        raise FormatError(f"{source}: no mask directive")
    return result


def read_mask(path, vocab: Vocabulary) -> MaskingProcess:
    return parse_mask(Path(path).read_text(), vocab, str(path))


def parse_scenes(text: str, vocab: Vocabulary, source: str = "<scenes>") -> SampleSet:
    """Parse obscured scenes; atoms of ``vocab`` missing from the header read as ``*``."""
    lines = list(_lines(text))
    if not lines:
        raise FormatError(f"{source}: empty scene file")
    cols = _columns(_header(*lines[0], source), vocab)
    n = len(vocab)
    rows = []
    for lineno, line in lines[1:]:
        try:
            row = parse_row(line.replace(" ", ""))
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
        if len(row) != len(cols):
            raise FormatError(f"{source}:{lineno}: row has {len(row)} entries, header has {len(cols)}")
        rho = [None] * n
        for col, v in zip(cols, row):
            rho[col] = v
        rows.append(tuple(rho))
    return SampleSet(tuple(rows), n)


def read_scenes(path, vocab: Vocabulary) -> SampleSet:
    return parse_scenes(Path(path).read_text(), vocab, str(path))


def pad_samples(samples: SampleSet, n: int) -> SampleSet:
    """Extend every scene with hidden entries up to ``n`` atoms."""
    if samples.n == n:
        return samples
    pad = (None,) * (n - samples.n)
    return SampleSet(tuple(r + pad for r in samples.scenes), n, samples.seed, samples.provenance)


def format_scenes(samples: SampleSet, vocab: Vocabulary) -> str:
    lines = ["atoms: " + " ".join(vocab.names[: samples.n])]
    lines.extend(format_row(rho) for rho in samples.scenes)
    return "\n".join(lines) + "\n"


def parse_cnf(text: str, source: str = "<cnf>") -> tuple[Cnf, Vocabulary]:
    n = None
    names: dict[int, str] = {}
    clauses = []
    pending: list[int] = []
    for lineno, line in _lines(text):
        parts = line.split()
        try:
            if parts[0] == "c":
                if len(parts) >= 4 and parts[1] == "atom":
                    names[int(parts[2])] = parts[3]
                continue
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError("expected 'p cnf N M'")
                n = int(parts[2])
                continue
            for tok in parts:
                v = int(tok)
                if v == 0:
                    clauses.append(frozenset(pending))
                    pending = []
                else:
                    pending.append(v)
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    if n is None:
        raise FormatError(f"{source}: missing 'p cnf' header")
    if pending:
        raise FormatError(f"{source}: last clause is not terminated by 0")
    vocab = Vocabulary(names.get(i, f"x{i}") for i in range(1, n + 1))
    if len(vocab) != n:
        raise FormatError(f"{source}: duplicate atom names")
    try:
        return Cnf(tuple(clauses), n), vocab
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from None


def read_cnf(path) -> tuple[Cnf, Vocabulary]:
    return parse_cnf(Path(path).read_text(), str(path))


def format_cnf(phi: Cnf, vocab: Optional[Vocabulary] = None) -> str:
    lines = [f"p cnf {phi.n} {len(phi)}"]
    if vocab is not None:
        lines[:0] = [f"c atom {i + 1} {vocab.name(i)}" for i in range(phi.n)]
    for c in phi:
        lits = sorted(c, key=lambda l: (abs(l), -l))
        lines.append(" ".join(map(str, lits + [0])))
    return "\n".join(lines) + "\n"


def parse_clause(text: str, vocab: Vocabulary) -> frozenset[int]:
    """Literals separated by spaces, commas or ``|``; ``~x``/``-x`` negate, signed ids allowed."""
    lits = []
    for tok in re.split(r"[\s,|]+", text.strip()):
        if not tok or tok == "0":
            continue
        neg = tok[0] in "~-"
        body = tok[1:] if neg else tok
        if body.isdigit():
            atom = int(body) - 1
            if not 0 <= atom < len(vocab):
                raise FormatError(f"literal {tok!r} out of range")
        elif body in vocab:
            atom = vocab.id(body)
        else:
            raise FormatError(f"unknown atom in literal {tok!r}")
        lits.append(-(atom + 1) if neg else atom + 1)
    c = frozenset(lits)
    if any(-l in c for l in c):
        raise FormatError(f"clause {text!r} contains complementary literals")
    return c


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
