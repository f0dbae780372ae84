"""Adaptive digital-twin simulator for maintenance planning.

Core pieces: a discrete state space over damage locations and severity
levels, conjugate online learning of action-conditioned transition
dynamics, belief tracking against a noisy observation channel,
finite-horizon policy optimization by backward induction, a synthetic
deterioration environment, and a seeded experiment harness. A FastAPI
service and a thin CLI client wrap the engine.
"""

from .beliefs import Belief, Forecast, assimilate, correct, forecast, predict
from .config import ExperimentConfig, bridge_payload, load_config, parse_config
from .environment import (
    ConfusionMatrix,
    EnvModel,
    GroundTruth,
    load_confusion,
    sample_true_params,
    step_truth,
    synth_confusion,
    true_state_of,
)
from .episode import (
    EpisodeTrace,
    ExperimentResult,
    ExperimentSummary,
    run_episode,
    run_experiment,
)
from .errors import EvidenceConflict, ValidationError
from .io import read_trace, write_summary, write_trace, write_traces
from .planning import (
    Policy,
    RewardConfig,
    reward,
    reward_table,
    select_action,
    value_iteration,
)
from .state_space import StateSpace, build_state_space
from .transitions import (
    ActionKind,
    ActionModel,
    BetaParams,
    DirichletParams,
    StateDependentDirichlet,
    StepCounts,
    TransitionMatrix,
    action_matrices,
    build_matrix,
    dirichlet_statistic,
    perturb_normalize,
    tally_step_counts,
    update_beta,
    update_dirichlet,
    update_state_dependent,
)

__version__ = "0.1.0"
