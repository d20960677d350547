"""Correlation-game unsupervised learning.

A rectified neural network trained online by Hebbian feedforward excitation,
anti-Hebbian lateral inhibition, homeostatic gain control, and synaptic
competition that eliminates weakly correlated inputs; plus closed-form and
oracle solvers for the conjugate objective behind the learning rules, and an
experiment harness with metrics, checkpoints, and a CLI.
"""

from .core import (
    ActivityRecord,
    CorrGameError,
    CorrelationPair,
    Dataset,
    HyperParams,
    InvariantViolation,
    NetworkState,
    UpdateReport,
    build_constraint_matrix,
    correlations,
)
from .dynamics import (
    CopositivityCheck,
    DynamicsConfig,
    NonPositiveDiagonal,
    check_copositivity,
    solve_rectified,
    solve_sigmoid,
)
from .plasticity import (
    VariantMismatch,
    apply_plasticity,
    update_L_diag,
    update_L_offdiag,
    update_theta,
    update_W_analog,
    update_W_bounded,
)
from .objective import (
    ConjugateSolution,
    NonIntegralRatio,
    PayoffResult,
    PrimalObjective,
    conjugate_analog_kkt,
    conjugate_topk,
    elimination_trigger,
    grad_penalty_phi,
    payoff,
    penalty_phi,
    primal_objective,
    single_neuron_projection_check,
)
from .metrics import (
    MetricsLog,
    SurvivalCounts,
    activity_density,
    cosine_pairs,
    inhibition_vs_weight_similarity,
    pairwise_cosine,
    weight_survival,
)
from .data_io import (
    Checkpoint,
    IdxHeader,
    checkpoint_load,
    checkpoint_save,
    load_idx_images,
    load_idx_labels,
    synthetic_correlated,
    write_metrics_csv,
    write_weight_grid,
)
from .config import DatasetSpec, RunConfig, parse_config, parse_config_text
from .training import TrainResult, init_network, run_eval, run_training

__version__ = "0.1.0"
