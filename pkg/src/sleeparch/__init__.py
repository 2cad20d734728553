"""Sleep-architecture comparison between cohorts from hypnograms."""

__version__ = "0.1.0"

from .exceptions import InputError
from .stages import (
    COHORTS,
    STAGES,
    CohortDataset,
    Hypnogram,
    Run,
    SleepStage,
    format_hypnogram,
    load_manifest,
    parse_hypnogram,
    read_manifest,
    run_length_decode,
    run_length_encode,
)
from .markov import (
    chi_square_overall,
    count_transitions,
    kl_divergence,
    per_transition_tests,
    stage_frequency_test,
    transition_matrix,
)
from .special import chi_square_sf
from .features import FEATURE_NAMES, extract_features
from .simulator import MarkovChainSpec, builtin_spec, generate, generate_corpus
