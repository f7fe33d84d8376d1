"""Covariate one-armed bandit: policies, bounds, and a deterministic MC harness."""

__version__ = "0.1.0"

from .env import (  # noqa: F401
    AdversarialMargin,
    BanditInstance,
    InfeasibleConstruction,
    MarginParams,
    NotCertifiable,
    PowerMargin,
    TwoPoint,
    Uniform,
    adversarial_pair,
    margin_params,
    reward_arm1,
    sample_covariate,
)
from .policy import (  # noqa: F401
    ForcedSampling,
    Myopic,
    NearlyMyopic,
    NoObservations,
    Oracle,
    PolicyState,
    RewardMismatch,
    decide,
    decision_threshold,
    theory_coefficient,
    theta_hat,
    update,
)
from .schedule import ForcedSchedule, build_schedule, theorem1_times, thresholds  # noqa: F401
from .sim import (  # noqa: F401
    AggregateStats,
    EpisodeMetrics,
    ExperimentConfig,
    ExperimentResult,
    episode_stream,
    policy_label,
    run_episode,
    run_experiment,
)
from .analysis import (  # noqa: F401
    ConditionViolated,
    GrowthFit,
    OutOfRange,
    RateDescriptor,
    concentration_bound,
    fit_growth,
    isr_lower_bound,
    lemma5_floor,
    regret_lower_bound,
    upper_envelope,
)
from .config import ConfigError, ParseError, ValidationError, paper_setup, parse_config  # noqa: F401
