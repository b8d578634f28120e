"""Fully observable pursuit-evasion MDP on a road network.

State is the joint (UGV node, pursuer node) pair plus an episode status. Both
agents move simultaneously each step: the UGV follows the chosen action (with
probability ``p_trans`` of reaching the intended neighbor), the pursuer takes a
uniform random step over its neighbors. After the move the UGV is Caught if
co-located with the pursuer, Exited if it sits on the exit node; Caught wins
when both coincide at the exit. Agents exchanging nodes in one step ("edge
swap") does not count as caught.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from random import Random
from typing import Callable, NamedTuple, Sequence

from .roadnet import RoadNet

# Hook for alternative pursuer behavior: maps the current joint state to a
# distribution over the pursuer's next node. None means the default uniform
# random walk over its neighbors.
PursuerPolicy = Callable[["JointState", RoadNet], Sequence[tuple[int, float]]]


class Status(IntEnum):
    RUNNING = 0
    EXITED = 1
    CAUGHT = 2
    TRUNCATED = 3


class JointState(NamedTuple):
    ugv: int
    pursuer: int
    status: Status = Status.RUNNING


class Action(NamedTuple):
    """MoveTo(neighbor index) when ``neighbor`` is set, Stay when it is None."""

    neighbor: int | None

    @property
    def is_stay(self) -> bool:
        return self.neighbor is None


STAY = Action(None)

_ACTION_CHOICES: dict[int, tuple[Action, ...]] = {}


def action_choices(degree: int) -> tuple[Action, ...]:
    """Shared per-degree action tuple (MoveTo 0..degree-1, then Stay)."""
    choices = _ACTION_CHOICES.get(degree)
    if choices is None:
        choices = tuple(Action(i) for i in range(degree)) + (STAY,)
        _ACTION_CHOICES[degree] = choices
    return choices


@dataclass(frozen=True)
class TaskParams:
    """Task-level MDP parameters (transition noise, discount, rewards, horizon)."""

    p_trans: float
    discount: float
    rwd_exit: float
    rwd_caught: float
    rwd_sense: float
    max_steps: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_trans <= 1.0:
            raise ValueError(f"p_trans must be in [0, 1], got {self.p_trans}")
        if not 0.0 < self.discount <= 1.0:
            raise ValueError(f"discount must be in (0, 1], got {self.discount}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if not self.rwd_caught < 0.0 < self.rwd_exit:
            raise ValueError(
                f"rewards must satisfy rwd_caught < 0 < rwd_exit, "
                f"got caught={self.rwd_caught}, exit={self.rwd_exit}"
            )


def initial_state(net: RoadNet) -> JointState:
    return JointState(net.ugv_start, net.pursuer_start, Status.RUNNING)


def actions(state: JointState, net: RoadNet) -> list[Action]:
    """Legal actions: MoveTo(i) for each neighbor of the UGV node, then Stay.

    Terminal states have no actions (empty list).
    """
    if state.status != Status.RUNNING:
        return []
    return list(action_choices(net.degree(state.ugv)))


def _post_move_status(ugv: int, pursuer: int, net: RoadNet) -> Status:
    # Caught has priority when both agents land on the exit node.
    if ugv == pursuer:
        return Status.CAUGHT
    if ugv == net.exit_node:
        return Status.EXITED
    return Status.RUNNING


def transition_dist(
    state: JointState,
    action: Action,
    net: RoadNet,
    params: TaskParams,
    pursuer_policy: PursuerPolicy | None = None,
) -> list[tuple[JointState, float]]:
    """Full joint outcome distribution for one simultaneous move.

    UGV marginal: the intended neighbor with probability ``p_trans``, every
    other neighbor with (1 - p_trans)/(deg - 1); degree-1 nodes move surely;
    Stay is deterministic. Pursuer marginal: uniform over its neighbors. The
    joint is the product of the marginals; zero-probability outcomes are
    omitted.
    """
    if state.status != Status.RUNNING:
        raise ValueError("invalid action: state is terminal")
    nbrs = net.adjacency[state.ugv]
    if action.is_stay:
        ugv_marginal = [(state.ugv, 1.0)]
    else:
        i = action.neighbor
        deg = len(nbrs)
        if i is None or not 0 <= i < deg:
            raise ValueError(f"invalid action: neighbor index {i} at degree-{deg} node")
        if deg == 1 or params.p_trans == 1.0:
            ugv_marginal = [(nbrs[i], 1.0)]
        else:
            slip = (1.0 - params.p_trans) / (deg - 1)
            ugv_marginal = []
            if params.p_trans > 0.0:
                ugv_marginal.append((nbrs[i], params.p_trans))
            if slip > 0.0:
                ugv_marginal.extend((n, slip) for j, n in enumerate(nbrs) if j != i)

    if pursuer_policy is None:
        p_nbrs = net.adjacency[state.pursuer]
        p_prob = 1.0 / len(p_nbrs)
        pursuer_marginal: Sequence[tuple[int, float]] = [(n, p_prob) for n in p_nbrs]
    else:
        pursuer_marginal = list(pursuer_policy(state, net))
        if abs(sum(p for _, p in pursuer_marginal) - 1.0) > 1e-9:
            raise ValueError("pursuer policy distribution must sum to 1")
    out = []
    for ugv_next, pu in ugv_marginal:
        for p_next, pp in pursuer_marginal:
            if pp <= 0.0:
                continue
            status = _post_move_status(ugv_next, p_next, net)
            out.append((JointState(ugv_next, p_next, status), pu * pp))
    return out


def sample_transition(
    state: JointState,
    action: Action,
    net: RoadNet,
    params: TaskParams,
    rng: Random,
    pursuer_policy: PursuerPolicy | None = None,
) -> JointState:
    """Draw one successor state; distributed as :func:`transition_dist`."""
    if state.status != Status.RUNNING:
        raise ValueError("invalid action: state is terminal")
    if action.is_stay:
        ugv_next = state.ugv
    else:
        nbrs = net.adjacency[state.ugv]
        i = action.neighbor
        deg = len(nbrs)
        if i is None or not 0 <= i < deg:
            raise ValueError(f"invalid action: neighbor index {i} at degree-{deg} node")
        if deg == 1 or rng.random() < params.p_trans:
            ugv_next = nbrs[i]
        else:
            j = rng.randrange(deg - 1)
            if j >= i:
                j += 1
            ugv_next = nbrs[j]

    if pursuer_policy is None:
        p_nbrs = net.adjacency[state.pursuer]
        pursuer_next = p_nbrs[rng.randrange(len(p_nbrs))]
    else:
        r = rng.random()
        acc = 0.0
        pairs = list(pursuer_policy(state, net))
        pursuer_next = pairs[-1][0]
        for node, p in pairs:
            acc += p
            if r < acc:
                pursuer_next = node
                break
    return JointState(ugv_next, pursuer_next, _post_move_status(ugv_next, pursuer_next, net))


def reward(
    state: JointState, action: Action, next_state: JointState, params: TaskParams
) -> float:
    """Step reward: exit/caught payoff on termination, movement penalty otherwise.

    The movement penalty applies to every non-terminal step, Stay included.
    """
    if next_state.status == Status.EXITED:
        return params.rwd_exit
    if next_state.status == Status.CAUGHT:
        return params.rwd_caught
    return params.rwd_sense
