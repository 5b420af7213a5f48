"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from querylearn.logic import Not, Threshold, Var


def formulas(n: int, depth: int = 3):
    leaves = st.builds(Var, st.integers(0, n - 1))

    def extend(children):
        weights = st.integers(-4, 4).filter(bool)
        terms = st.lists(st.tuples(weights, children), min_size=0, max_size=4).map(tuple)
        thresholds = terms.flatmap(
            lambda ts: st.builds(
                Threshold,
                st.just(ts),
                st.integers(sum(w for w, _ in ts if w < 0) - 1, sum(w for w, _ in ts if w > 0) + 1),
            )
        )
        return st.one_of(st.builds(Not, children), thresholds)

    return st.recursive(leaves, extend, max_leaves=12).filter(lambda f: _depth(f) <= depth)


def _depth(f) -> int:
    if isinstance(f, Var):
        return 0
    if isinstance(f, Not):
        return 1 + _depth(f.child)
    return 1 + max((_depth(c) for _, c in f.terms), default=0)


def scenes(n: int):
    return st.lists(st.integers(0, 1), min_size=n, max_size=n).map(tuple)


def obscured(n: int):
    return st.lists(st.sampled_from([0, 1, None]), min_size=n, max_size=n).map(tuple)


def completions(rho):
    """All total scenes consistent with ``rho``."""
    hidden = [i for i, v in enumerate(rho) if v is None]
    for mask in range(2 ** len(hidden)):
        x = list(rho)
        for j, i in enumerate(hidden):
            x[i] = (mask >> j) & 1
        yield tuple(x)
