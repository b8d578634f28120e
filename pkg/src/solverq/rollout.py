"""Episode simulation and empirical reward distributions.

Per-episode seeds are derived from the batch master seed with a stated
splittable hash (sha256 over "master|index"), so the sample multiset is
independent of evaluation order and of how episodes are spread over workers.
"""
from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from random import Random
from typing import NamedTuple

from .mdp import Action, JointState, Status, TaskParams, initial_state, reward, sample_transition
from .metrics import SIGMA_FLOOR, GaussianSummary
from .roadnet import RoadNet
from .solvers import SolverSpec, plan_action

OUTCOMES = ("exited", "caught", "truncated")


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from any mix of ints/strings (sha256 of 'a|b|...')."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class EpisodeResult(NamedTuple):
    ret: float
    steps: int
    outcome: Status


class StepRecord(NamedTuple):
    step: int
    state: JointState
    action: Action
    next_state: JointState
    reward: float


def run_episode(
    net: RoadNet, params: TaskParams, spec: SolverSpec, seed: int
) -> EpisodeResult:
    """Simulate one full episode; the return is the discounted reward sum
    (the first step is undiscounted)."""
    result, _ = _episode(net, params, spec, seed, collect=False)
    return result


def simulate_episode(
    net: RoadNet, params: TaskParams, spec: SolverSpec, seed: int
) -> tuple[EpisodeResult, list[StepRecord]]:
    """Like :func:`run_episode` but also returns the step-by-step trace."""
    return _episode(net, params, spec, seed, collect=True)


def _episode(
    net: RoadNet, params: TaskParams, spec: SolverSpec, seed: int, collect: bool
) -> tuple[EpisodeResult, list[StepRecord]]:
    rng = Random(seed)
    state = initial_state(net)
    trace: list[StepRecord] = []
    ret = 0.0
    disc = 1.0
    for k in range(params.max_steps):
        action = plan_action(state, net, params, spec, rng)
        nxt = sample_transition(state, action, net, params, rng)
        r = reward(state, action, nxt, params)
        ret += disc * r
        disc *= params.discount
        if collect:
            trace.append(StepRecord(k, state, action, nxt, r))
        state = nxt
        if state.status != Status.RUNNING:
            return EpisodeResult(ret, k + 1, state.status), trace
    return EpisodeResult(ret, params.max_steps, Status.TRUNCATED), trace


@dataclass(frozen=True)
class RewardDist:
    """Empirical distribution of episode returns for one solver on one task."""

    samples: tuple[float, ...]
    mean: float
    std: float
    n: int
    outcome_counts: dict[str, int] = field(compare=False)
    label: str = ""

    def summary(self) -> GaussianSummary:
        return GaussianSummary(self.mean, max(self.std, SIGMA_FLOOR))

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "label": self.label,
            "mean": self.mean,
            "std": self.std,
            "n": self.n,
            "outcomes": dict(self.outcome_counts),
        }
        if include_samples:
            out["samples"] = list(self.samples)
        return out


def _summarize(samples: list[float], outcomes: list[Status], label: str) -> RewardDist:
    n = len(samples)
    mean = math.fsum(samples) / n
    var = math.fsum((x - mean) ** 2 for x in samples) / (n - 1)
    counts = {name: 0 for name in OUTCOMES}
    for o in outcomes:
        counts[o.name.lower()] += 1
    return RewardDist(tuple(samples), mean, math.sqrt(var), n, counts, label)


def _run_indexed(args: tuple) -> EpisodeResult:
    net, params, spec, master_seed, i = args
    return run_episode(net, params, spec, derive_seed(master_seed, i))


def reward_distribution(
    net: RoadNet,
    params: TaskParams,
    spec: SolverSpec,
    n_episodes: int = 1000,
    master_seed: int = 0,
    workers: int | None = None,
) -> RewardDist:
    """Run ``n_episodes`` independent episodes and aggregate their returns.

    Episode i always uses seed derive_seed(master_seed, i); running with any
    number of workers yields the same sample multiset as a serial run.
    """
    if n_episodes < 2:
        raise ValueError(f"n_episodes must be >= 2 (sample std undefined), got {n_episodes}")
    jobs = [(net, params, spec, master_seed, i) for i in range(n_episodes)]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, jobs, chunksize=max(1, n_episodes // (4 * workers))))
    else:
        results = [_run_indexed(job) for job in jobs]
    return _summarize([r.ret for r in results], [r.outcome for r in results], spec.label)
