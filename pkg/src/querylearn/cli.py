"""Command-line front end.

Exit codes: 0 success or proof found, 1 Fail / none, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import chaining, resolution
from .distributions import (
    EnumerationLimitError,
    ExplicitDistribution,
    SampleSet,
    conditional_witness_rates,
    estimate_concealment,
    sample,
)
from .formats import (
    FormatError,
    load_json,
    pad_samples,
    parse_clause,
    parse_cnf,
    parse_distribution,
    parse_kb,
    parse_mask,
    read_cnf,
    read_distribution,
    read_kb,
    read_mask,
    read_scenes,
)
from .logic import Vocabulary, format_row, partial_eval
from .oracle import TrialSpec, monte_carlo_guarantee
from .syntax import format_formula, parse_formula

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    kb: Optional[str] = None
    cnf: Optional[str] = None
    query: Optional[list] = None
    clause: Optional[str] = None
    scenes: Optional[str] = None
    dist: Optional[str] = None
    mask: Optional[str] = None
    count: Optional[int] = None
    space: int = 2
    epsilon: float = 0.1
    delta: float = 0.05
    eta: float = 1.0
    const_c: float = 1.0
    mode: str = "credulous"
    seed: int = 0
    backtrack: bool = False
    out: Optional[str] = None

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise UsageError("--epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise UsageError("--delta must lie in (0, 1)")
        if not 0 < self.eta <= 1:
            raise UsageError("--eta must lie in (0, 1]")
        if not self.const_c > 0:
            raise UsageError("--const-c must be positive")
        if self.space < 1:
            raise UsageError("--space must be at least 1")
        if self.count is not None and self.count < 0:
            raise UsageError("--count must be non-negative")
        if self.scenes is not None and (self.dist is not None or self.mask is not None):
            raise UsageError("give either --scenes or --dist/--mask, not both")
        if (self.dist is None) != (self.mask is None) and self.command in ("chain", "resolve"):
            raise UsageError("--dist and --mask must be given together")

    @property
    def has_samples(self) -> bool:
        return self.scenes is not None or self.dist is not None


def _emit(cfg: RunConfig, text: str, payload: dict) -> None:
    print(text)
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _samples(cfg: RunConfig, vocab: Vocabulary, fragment: str, s: int = 2) -> Optional[SampleSet]:
    if cfg.scenes is not None:
        return read_scenes(cfg.scenes, vocab)
    if cfg.dist is None:
        return None
    n_before = len(vocab)
    d = read_distribution(cfg.dist, vocab)
    if len(vocab) != n_before and fragment == "res":
        raise FormatError(f"{cfg.dist}: distribution mentions atoms outside the CNF")
    m_proc = read_mask(cfg.mask, vocab)
    count = cfg.count
    if count is None:
        if fragment == "chain":
            count = chaining.sample_size_chaining(d.n, cfg.epsilon, cfg.delta, cfg.eta, cfg.const_c)
        else:
            count = resolution.sample_size_resolution(d.n, s, cfg.epsilon, cfg.delta, cfg.eta, cfg.const_c)
    return sample(d, m_proc, count, cfg.seed)


def cmd_eval(cfg: RunConfig) -> int:
    if not cfg.query or len(cfg.query) != 1 or cfg.scenes is None:
        raise UsageError("eval needs one --query formula and --scenes")
    vocab = Vocabulary()
    rows = read_scenes(cfg.scenes, vocab)
    f = parse_formula(cfg.query[0], vocab, intern=False)
    lines, results = [], []
    for i, rho in enumerate(rows, 1):
        value = partial_eval(f, rho)
        if value is True:
            verdict = "witnessed true"
        elif value is False:
            verdict = "witnessed false"
        else:
            verdict = "residual " + format_formula(value, vocab)
        lines.append(f"{i}. {format_row(rho)} {verdict}")
        results.append({"row": i, "scene": format_row(rho), "result": verdict})
    _emit(cfg, "\n".join(lines), {"command": "eval", "formula": format_formula(f, vocab), "rows": results})
    return EXIT_OK


def cmd_chain(cfg: RunConfig) -> int:
    if cfg.kb is None or not cfg.query or len(cfg.query) != 1:
        raise UsageError("chain needs --kb and one --query atom")
    kb = read_kb(cfg.kb)
    name = cfg.query[0].replace(" ", "")
    if name not in kb.vocab:
        raise FormatError(f"unknown atom {name!r}")
    goal = kb.vocab.id(name)
    samples = _samples(cfg, kb.vocab, "chain")
    if samples is None:
        search = chaining.BackwardSearch(goal, kb)
    else:
        samples = pad_samples(samples, kb.n)
        search = chaining.BackwardSearch(goal, kb, samples.scenes, chaining.Mode(cfg.mode))
    proof = search.run()
    payload = {
        "command": "chain",
        "query": name,
        "mode": cfg.mode if samples is not None else None,
        "samples": None if samples is None else len(samples),
        "iterations": search.iterations,
        "result": "proof" if proof else "Fail",
        "proof": proof.to_dict() if proof else None,
        "added_to_kb": [kb.vocab.name(a) for a in search.learned],
    }
    _emit(cfg, proof.format() if proof else "Fail", payload)
    return EXIT_OK if proof else EXIT_FAIL


def cmd_resolve(cfg: RunConfig) -> int:
    if cfg.cnf is None:
        raise UsageError("resolve needs --cnf")
    phi, vocab = read_cnf(cfg.cnf)
    c = parse_clause(cfg.clause, vocab) if cfg.clause else resolution.EMPTY
    samples = _samples(cfg, vocab, "res", cfg.space)
    if samples is None:
        raise UsageError("resolve needs --scenes or --dist/--mask")
    if samples.n != phi.n or len(vocab) != phi.n:
        raise FormatError(f"{cfg.scenes}: scene header names atoms outside the CNF")
    proof = resolution.learn_search_space(phi, cfg.space, c, samples.scenes, cfg.backtrack)
    names = vocab.names
    if proof is None:
        _emit(cfg, "none", {"command": "resolve", "clause": resolution.clause_text(c, names), "result": "none"})
        return EXIT_FAIL
    premises = resolution.extract_premises(proof)
    text = resolution.format_proof(proof, names)
    learned = [resolution.clause_text(h, names) for h in premises]
    text += "\nlearned premises:" + ("".join(f"\n  {h}" for h in learned) if learned else " none")
    payload = {
        "command": "resolve",
        "clause": resolution.clause_text(c, names),
        "space": cfg.space,
        "backtrack": cfg.backtrack,
        "samples": len(samples),
        "result": "proof",
        "proof": resolution.proof_to_dict(proof),
        "learned": learned,
    }
    _emit(cfg, text, payload)
    return EXIT_OK


def _fmt_rate(r) -> str:
    return "unfalsifiable" if r is None else f"{r} ({float(r):.6f})"


def cmd_conceal(cfg: RunConfig) -> int:
    if cfg.dist is None or cfg.mask is None or not cfg.query:
        raise UsageError("conceal needs --dist, --mask and at least one --query formula")
    vocab = Vocabulary()
    d = read_distribution(cfg.dist, vocab)
    m_proc = read_mask(cfg.mask, vocab)
    formulas = [parse_formula(q, vocab, intern=False) for q in cfg.query]
    texts = [format_formula(f, vocab) for f in formulas]
    try:
        rates = conditional_witness_rates(d, m_proc, formulas)
    except EnumerationLimitError as exc:
        if cfg.count is None:
            raise UsageError(f"{exc}; pass --count for a Monte Carlo estimate") from None
        est = estimate_concealment(d, m_proc, formulas, cfg.count, cfg.seed)
        text = f"eta ~ {est.value:.6f} (95% CI {est.low:.6f}..{est.high:.6f}, {est.trials} falsified draws)"
        _emit(cfg, text, {"command": "conceal", "formulas": texts, "estimate": est.__dict__})
        return EXIT_OK
    falsifiable = [r for r in rates if r is not None]
    eta = min(falsifiable) if falsifiable else Fraction(1)
    lines = [f"{t}: {_fmt_rate(r)}" for t, r in zip(texts, rates)]
    lines.append(f"eta = {eta} ({float(eta):.6f})" + ("" if falsifiable else " [class never falsified]"))
    payload = {
        "command": "conceal",
        "formulas": texts,
        "rates": [None if r is None else str(r) for r in rates],
        "eta": str(eta),
        "unfalsifiable": not falsifiable,
    }
    _emit(cfg, "\n".join(lines), payload)
    return EXIT_OK


def cmd_samplesize(cfg: RunConfig, fragment: str, n: int) -> int:
    if n < 1:
        raise UsageError("--atoms must be at least 1")
    if fragment == "chain":
        m = chaining.sample_size_chaining(n, cfg.epsilon, cfg.delta, cfg.eta, cfg.const_c)
    else:
        m = resolution.sample_size_resolution(n, cfg.space, cfg.epsilon, cfg.delta, cfg.eta, cfg.const_c)
    payload = {
        "command": "samplesize",
        "fragment": fragment,
        "atoms": n,
        "space": cfg.space if fragment == "res" else None,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "eta": cfg.eta,
        "c": cfg.const_c,
        "m": m,
    }
    _emit(cfg, str(m), payload)
    return EXIT_OK


def _text_or_file(spec: dict, key: str, base: Path) -> tuple[str, str]:
    if key + "_file" in spec:
        path = base / spec[key + "_file"]
        return path.read_text(), str(path)
    if key in spec:
        value = spec[key]
        return ("\n".join(value) if isinstance(value, list) else value), f"<{key}>"
    raise FormatError(f"experiment spec needs '{key}' or '{key}_file'")


def load_trial_spec(path, overrides: Optional[RunConfig] = None) -> TrialSpec:
    """Build a TrialSpec from a JSON experiment file; relative paths resolve against it.

    Distribution entries: ``distribution_file``, or ``distribution`` holding
    either ``{"atoms": [...], "marginals": [...]}`` or ``{"atoms": [...],
    "support": [["1/4", "101"], ...]}``.
    """
    path = Path(path)
    spec = load_json(path)
    base = path.parent
    fragment = spec.get("fragment")
    if fragment not in ("chain", "res"):
        raise FormatError(f"{path}: 'fragment' must be 'chain' or 'res'")
    kb = cnf = None
    goal = None
    c = resolution.EMPTY
    if fragment == "chain":
        kb = parse_kb(*_text_or_file(spec, "kb", base))
        vocab = kb.vocab
    else:
        cnf, vocab = parse_cnf(*_text_or_file(spec, "cnf", base))
    n_before = len(vocab)
    block = spec.get("distribution")
    if isinstance(block, dict):
        names = block.get("atoms", [])
        if "marginals" in block:
            cols = [vocab.intern(a) for a in names]
            if sorted(cols) != list(range(len(vocab))) or len(block["marginals"]) != len(names):
                raise FormatError(f"{path}: distribution marginals must cover the vocabulary")
            margs = dict(zip(cols, block["marginals"]))
            d = ExplicitDistribution.product([Fraction(str(margs[i])) for i in range(len(vocab))])
        else:
            text = "atoms: " + " ".join(names) + "\n" + "\n".join(f"{p} {bits}" for p, bits in block["support"])
            d = parse_distribution(text, vocab, f"{path}:distribution")
    else:
        text, source = _text_or_file(spec, "distribution", base)
        d = parse_distribution(text, vocab, source)
    if fragment == "res" and len(vocab) != n_before:
        raise FormatError(f"{path}: distribution mentions atoms outside the CNF")
    text, source = _text_or_file(spec, "mask", base)
    m_proc = parse_mask(text, vocab, source)
    if fragment == "chain":
        q = spec.get("query")
        if q is None or q not in vocab:
            raise FormatError(f"{path}: unknown or missing query atom {q!r}")
        goal = vocab.id(q)
    elif spec.get("clause"):
        c = parse_clause(spec["clause"], vocab)
    return TrialSpec(
        fragment=fragment,
        distribution=d,
        mask=m_proc,
        epsilon=float(spec.get("epsilon", 0.1)),
        delta=float(spec.get("delta", 0.05)),
        eta=float(Fraction(str(spec.get("eta", 1)))),
        c=float(spec.get("const_c", 1.0)),
        trials=int(spec.get("trials", 200)),
        seed=int(spec.get("seed", 0)),
        samples=spec.get("samples"),
        kb=kb,
        goal=goal,
        mode=chaining.Mode(spec.get("mode", "credulous")),
        cnf=cnf,
        clause=c,
        s=int(spec.get("space", 2)),
        backtrack=bool(spec.get("backtrack", False)),
        name=spec.get("name", path.stem),
    )


def cmd_experiment(cfg: RunConfig, spec_path: str, summary: bool) -> int:
    spec = load_trial_spec(spec_path)
    report = monte_carlo_guarantee(spec)
    payload = {
        "command": "experiment",
        "name": report.name,
        "fragment": report.fragment,
        "trials": report.trials,
        "samples_per_trial": report.samples_per_trial,
        "epsilon": report.epsilon,
        "delta": report.delta,
        "margin": report.margin,
        "query_validity": str(report.query_validity),
        "valid_support_exists": report.valid_support_exists,
        "proof_rate": report.proof_rate,
        "invalid_premise_rate": report.invalid_premise_rate,
        "ok_premises": report.ok_premises,
        "ok_rejection": report.ok_rejection,
        "all_verified": report.all_verified,
        "passed": report.passed,
        "outcomes": [
            {
                "trial": o.index,
                "seed": o.seed,
                "proved": o.proved,
                "premises": list(o.premises),
                "premise_validity": None if o.premise_validity is None else str(o.premise_validity),
                "verified": o.verified,
            }
            for o in report.outcomes
        ],
    }
    _emit(cfg, report.format(per_trial=not summary), payload)
    return EXIT_OK if report.passed else EXIT_FAIL


def _common(p: argparse.ArgumentParser, *flags: str) -> None:
    if "kb" in flags:
        p.add_argument("--kb", help="knowledge base file")
    if "cnf" in flags:
        p.add_argument("--cnf", help="DIMACS CNF file")
    if "query" in flags:
        p.add_argument("--query", action="append", help="query atom or formula (repeatable for conceal)")
    if "clause" in flags:
        p.add_argument("--clause", help="target clause, e.g. '~a | b'; empty means refutation")
    if "samples" in flags:
        p.add_argument("--scenes", help="obscured scene file")
        p.add_argument("--dist", help="distribution file")
        p.add_argument("--mask", help="masking process file")
        p.add_argument("--count", type=int, help="number of scenes to draw from --dist/--mask")
        p.add_argument("--seed", type=int, default=0)
    if "space" in flags:
        p.add_argument("--space", type=int, default=2, help="space bound s")
    if "params" in flags:
        p.add_argument("--epsilon", type=float, default=0.1)
        p.add_argument("--delta", type=float, default=0.05)
        p.add_argument("--eta", type=lambda t: float(Fraction(t)), default=1.0)
        p.add_argument("--const-c", type=float, default=1.0)
    if "mode" in flags:
        p.add_argument("--mode", choices=["credulous", "skeptical"], default="credulous")
    if "backtrack" in flags:
        p.add_argument("--backtrack", action="store_true", help="continue past a failing second branch")
    p.add_argument("--out", help="also write a JSON result here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="querylearn", description="Query-driven learning of chaining and resolution proofs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="partially evaluate a formula on each scene row")
    _common(p, "query")
    p.add_argument("--scenes", required=True)

    p = sub.add_parser("chain", help="backward chaining, learning from scenes if given")
    _common(p, "kb", "query", "samples", "params", "mode")

    p = sub.add_parser("resolve", help="space-bounded resolution with learned clauses")
    _common(p, "cnf", "clause", "samples", "space", "params", "backtrack")

    p = sub.add_parser("conceal", help="exact concealment of a formula class")
    _common(p, "query")
    p.add_argument("--dist", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--count", type=int, help="Monte Carlo draws when exact enumeration is too large")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("samplesize", help="number of samples for the learning guarantee")
    p.add_argument("fragment", choices=["chain", "res"])
    p.add_argument("--atoms", type=int, required=True)
    _common(p, "space", "params")

    p = sub.add_parser("experiment", help="Monte Carlo guarantee check from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--summary", action="store_true", help="omit per-trial lines")
    p.add_argument("--out", help="also write a JSON result here")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    known = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    try:
        cfg = RunConfig(**known)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "chain":
            return cmd_chain(cfg)
        if args.command == "resolve":
            return cmd_resolve(cfg)
        if args.command == "conceal":
            return cmd_conceal(cfg)
        if args.command == "samplesize":
            return cmd_samplesize(cfg, args.fragment, args.atoms)
        return cmd_experiment(cfg, args.spec, args.summary)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
