"""Learning from partially observed scenes while searching for chaining and resolution proofs."""
from .chaining import (
    BackwardSearch,
    HornClause,
    HornKB,
    Mode,
    backward_search,
    ground,
    learn_backward_search,
    sample_size_chaining,
    verify_chaining_proof,
)
from .distributions import (
    ExplicitDistribution,
    FixedSubset,
    IndependentCoin,
    MaskRule,
    SampleSet,
    ValueDependent,
    concealment,
    counterexample_rate,
    sample,
    validity,
)
from .logic import Not, Threshold, Var, Vocabulary, conj, disj, evaluate, iff, implies, partial_eval
from .resolution import (
    Cnf,
    LearnConfig,
    ResolutionProof,
    check_normal,
    count_bounds,
    extract_premises,
    learn_search_space,
    refute,
    sample_size_resolution,
    verify_proof,
)
from .syntax import format_formula, parse_formula

__version__ = "0.1.0"
