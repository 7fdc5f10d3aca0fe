"""Centering-style local-coherence analysis over coreference-annotated corpora."""

__version__ = "0.1.0"

from .conll import (
    ConllParseError,
    Document,
    MentionSpan,
    Token,
    parse_conll,
    read_conll,
)
from .core import (
    Aggregator,
    CenteringFrame,
    CfCandidate,
    Discourse,
    InstantiationConfig,
    MentionMap,
    Transition,
    Utterance,
    Weighting,
    backward_center,
    build_utterances,
    classify_transition,
    discourse_from_document,
    entity_weight,
    forward_centers,
    mention_weight,
    preferred_center,
    run_centering,
)
from .evalstats import (
    AnalysisReport,
    analyze,
    b_cubed,
    ceaf_phi4,
    conll_f1,
    fisher_z_compare,
    mutual_information,
    muc,
    pearson,
    t_test_p,
)
from .metrics import (
    Comparison,
    Metric,
    Scorecard,
    compare_orderings,
    compute_scorecard,
)
from .recency import (
    AffineForget,
    ExponentialDecay,
    Gate,
    RecencyConfig,
    ZeroForget,
    backward_center_recency,
    fit_forget,
    run_centering_recency,
    update_center_set,
)
from .roles import (
    GrammaticalRole,
    RoleLabel,
    SemanticRole,
    grammatical_role,
    semantic_role,
)
from .scorer import (
    CoherenceResult,
    PermutationPlan,
    UnscorableDiscourse,
    coherence_score,
    corpus_coherence,
    permutations_of,
)
