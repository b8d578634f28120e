"""Solver-quality self-assessment for MDP planners on pursuit-evasion road networks."""

__version__ = "0.1.0"

from .mdp import Action, JointState, Status, TaskParams, actions, reward, sample_transition, transition_dist
from .metrics import (
    GaussianSummary,
    RewardRange,
    SqResult,
    hellinger_sq,
    outcome_assessment,
    reward_range,
    solver_quality,
)
from .roadnet import RoadNet, build_network, load_network
from .rollout import EpisodeResult, RewardDist, reward_distribution, run_episode
from .solvers import MctsConfig, SolverSpec, plan_action

__all__ = [
    "Action",
    "EpisodeResult",
    "GaussianSummary",
    "JointState",
    "MctsConfig",
    "RewardDist",
    "RewardRange",
    "RoadNet",
    "SolverSpec",
    "SqResult",
    "Status",
    "TaskParams",
    "actions",
    "build_network",
    "hellinger_sq",
    "load_network",
    "outcome_assessment",
    "plan_action",
    "reward",
    "reward_distribution",
    "reward_range",
    "run_episode",
    "sample_transition",
    "solver_quality",
    "transition_dist",
]
