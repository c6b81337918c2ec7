"""fewlabel: semi-supervised node classification with very few labels.

A small numpy/scipy library built around one idea: when only a handful
of nodes per class are labeled, train a graph model on its own
confident predictions — selected adaptively each epoch, re-weighted so
no class dominates, and regularized by pushing sampled non-neighbors
apart — instead of on the labeled loss alone.
"""

from .graph import Graph, NormalizedLaplacian, is_neighbor, normalized_laplacian, spmm
from .data import BundleError, Split, label_rate, load_bundle, make_split, save_bundle
from .models import (
    DagnnParams,
    GcnParams,
    ModelConfig,
    dagnn_forward,
    eval_probabilities,
    forward,
    gcn_forward,
    load_params,
    save_params,
)
from .pseudo import (
    AdaptiveSet,
    LabelAssignment,
    NegativeSample,
    PseudoConfig,
    adaptive_pseudo_labels,
    balancing_factors,
    baseline_pseudo_loss,
    combined_loss,
    cross_entropy,
    negative_loss,
    pseudo_labels,
    sample_negatives,
    supervised_loss,
)
from .training import (
    AdamState,
    EpochRecord,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    adam_step,
    early_stop_check,
    evaluate,
    init_params,
    load_train_state,
    save_train_state,
    train,
    xavier_init,
)
from .seeding import derive_seed, derived_rng
from .bench import (
    CANONICAL_SEARCH_SPACE,
    ConfigError,
    DiagnosticsTrace,
    ExperimentConfig,
    Report,
    SplitOutcome,
    SweepEntry,
    SweepResult,
    apply_overrides,
    confidence_accuracy_correlation,
    confidence_histogram,
    config_from_dict,
    config_to_dict,
    empirical_error_rate,
    estimate_theta,
    expand_grid,
    gradient_gap_bound,
    pseudo_label_distribution,
    row_normalize_features,
    run_benchmark,
    run_diagnostics,
    sweep,
    tuned_defaults,
    write_report,
)

__version__ = "0.1.0"
