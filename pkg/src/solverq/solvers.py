"""Policy providers: an online UCT planner plus trivial baselines.

Every solver is exposed through :func:`plan_action`, which picks one action
for the current joint state and is called fresh at every episode step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random
from typing import NamedTuple

from .mdp import (
    Action,
    JointState,
    Status,
    TaskParams,
    action_choices,
    actions,
    reward,
    sample_transition,
)
from .roadnet import RoadNet, exit_distances


@dataclass(frozen=True)
class MctsConfig:
    """UCT search parameters: max combined tree+rollout depth, exploration
    constant (on the raw reward scale unless ``normalize_rewards``), and the
    number of search iterations per planning call."""

    depth: int
    exploration: float
    iterations: int
    rollout_policy: str = "uniform_random"
    normalize_rewards: bool = False

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.exploration < 0.0:
            raise ValueError(f"exploration must be >= 0, got {self.exploration}")
        if self.rollout_policy != "uniform_random":
            raise ValueError(f"unknown rollout policy {self.rollout_policy!r}")


@dataclass(frozen=True)
class SolverSpec:
    """A labeled solver: 'mcts' (with config), 'random', or 'greedy_to_exit'."""

    kind: str
    label: str
    mcts: MctsConfig | None = field(default=None)

    def __post_init__(self) -> None:
        if self.kind not in ("mcts", "random", "greedy_to_exit"):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if not self.label:
            raise ValueError("solver label must be nonempty")
        if self.kind == "mcts" and self.mcts is None:
            raise ValueError("mcts solver requires an MctsConfig")

    def to_dict(self) -> dict:
        if self.kind == "mcts":
            cfg = self.mcts
            assert cfg is not None
            out = {
                "kind": "mcts",
                "depth": cfg.depth,
                "exploration": cfg.exploration,
                "iterations": cfg.iterations,
                "label": self.label,
            }
            if cfg.normalize_rewards:
                out["normalize_rewards"] = True
            return out
        return {"kind": self.kind, "label": self.label}

    @staticmethod
    def from_dict(obj: dict) -> "SolverSpec":
        kind = obj.get("kind")
        label = obj.get("label", "")
        if kind == "mcts":
            cfg = MctsConfig(
                depth=int(obj["depth"]),
                exploration=float(obj["exploration"]),
                iterations=int(obj["iterations"]),
                normalize_rewards=bool(obj.get("normalize_rewards", False)),
            )
            return SolverSpec("mcts", label, cfg)
        if kind in ("random", "greedy_to_exit"):
            return SolverSpec(kind, label)
        raise ValueError(f"unknown solver kind {kind!r}")


class ActionStat(NamedTuple):
    action: Action
    visits: int
    mean_value: float


class _Node:
    __slots__ = ("state", "acts", "visits", "counts", "values", "children")

    def __init__(self, state: JointState, net: RoadNet):
        self.state = state
        if state.status == Status.RUNNING:
            self.acts: tuple[Action, ...] = action_choices(net.degree(state.ugv))
        else:
            self.acts = ()
        n = len(self.acts)
        self.visits = 0
        self.counts = [0] * n
        self.values = [0.0] * n
        self.children: list[dict[JointState, _Node]] = [{} for _ in range(n)]


class _Uct:
    def __init__(self, net: RoadNet, params: TaskParams, cfg: MctsConfig, rng: Random):
        self.net = net
        self.params = params
        self.cfg = cfg
        self.rng = rng
        # Only the UCB score is rescaled; backed-up values stay on reward scale.
        self.scale = (params.rwd_exit - params.rwd_caught) if cfg.normalize_rewards else 1.0

    def search(self, state: JointState) -> tuple[Action, list[ActionStat]]:
        root = _Node(state, self.net)
        for _ in range(self.cfg.iterations):
            self._simulate(root, self.cfg.depth)
        best_i = -1
        best_v = -math.inf
        for i, n in enumerate(root.counts):
            if n > 0 and root.values[i] > best_v:
                best_v = root.values[i]
                best_i = i
        stats = [
            ActionStat(a, root.counts[i], root.values[i]) for i, a in enumerate(root.acts)
        ]
        return root.acts[best_i], stats

    def _select(self, node: _Node) -> int:
        counts = node.counts
        for i, n in enumerate(counts):
            if n == 0:
                return i
        values = node.values
        c = self.cfg.exploration
        if c == 0.0:
            best_i, best_s = 0, values[0] / self.scale
            for i in range(1, len(counts)):
                s = values[i] / self.scale
                if s > best_s:
                    best_i, best_s = i, s
            return best_i
        log_n = math.log(node.visits)
        best_i, best_s = 0, -math.inf
        for i in range(len(counts)):
            s = values[i] / self.scale + c * math.sqrt(log_n / counts[i])
            if s > best_s:
                best_i, best_s = i, s
        return best_i

    def _simulate(self, node: _Node, depth: int) -> float:
        state = node.state
        if depth == 0 or state.status != Status.RUNNING:
            return 0.0
        ai = self._select(node)
        act = node.acts[ai]
        nxt = sample_transition(state, act, self.net, self.params, self.rng)
        r = reward(state, act, nxt, self.params)
        child = node.children[ai].get(nxt)
        if child is None:
            child = _Node(nxt, self.net)
            node.children[ai][nxt] = child
            tail = self._rollout(nxt, depth - 1)
        else:
            tail = self._simulate(child, depth - 1)
        g = r + self.params.discount * tail
        node.counts[ai] += 1
        node.values[ai] += (g - node.values[ai]) / node.counts[ai]
        node.visits += 1
        return g

    def _rollout(self, state: JointState, depth: int) -> float:
        g = 0.0
        disc = 1.0
        rng = self.rng
        net = self.net
        params = self.params
        while depth > 0 and state.status == Status.RUNNING:
            acts = action_choices(net.degree(state.ugv))
            act = acts[rng.randrange(len(acts))]
            nxt = sample_transition(state, act, net, params, rng)
            g += disc * reward(state, act, nxt, params)
            disc *= params.discount
            state = nxt
            depth -= 1
        return g


def mcts_search(
    state: JointState, net: RoadNet, params: TaskParams, cfg: MctsConfig, rng: Random
) -> tuple[Action, list[ActionStat]]:
    """Run one UCT search and return the chosen action plus root statistics.

    Selection maximizes mean value + exploration * sqrt(ln(parent visits) /
    child visits), visiting every child once first (lowest action index
    first). One new node is expanded per iteration, followed by a
    uniform-random rollout; tree depth plus rollout length never exceeds
    ``cfg.depth``. Returns are discounted during backup. The final action is
    the visited child with the highest mean value, ties to the lowest index.
    """
    if state.status != Status.RUNNING:
        raise ValueError("no action at terminal state")
    return _Uct(net, params, cfg, rng).search(state)


def greedy_to_exit_action(state: JointState, net: RoadNet) -> Action:
    """First step of a shortest path to the exit, ignoring the pursuer."""
    dist = exit_distances(net)
    if state.ugv == net.exit_node:
        return Action(None)
    nbrs = net.adjacency[state.ugv]
    best_i = min(range(len(nbrs)), key=lambda i: (dist[nbrs[i]], nbrs[i]))
    return Action(best_i)


def plan_action(
    state: JointState, net: RoadNet, params: TaskParams, spec: SolverSpec, rng: Random
) -> Action:
    """Choose one action for ``state`` under the given solver."""
    if state.status != Status.RUNNING:
        raise ValueError("no action at terminal state")
    if spec.kind == "mcts":
        assert spec.mcts is not None
        action, _ = mcts_search(state, net, params, spec.mcts, rng)
        return action
    if spec.kind == "random":
        acts = actions(state, net)
        return acts[rng.randrange(len(acts))]
    return greedy_to_exit_action(state, net)
