"""Independent reference computations used as test oracles.

Kept deliberately separate from the implementation paths they check: the
expectimax planner enumerates the full joint outcome distribution, and the
Hellinger oracle integrates 1 - integral(sqrt(p*q)) by adaptive quadrature.
"""
from __future__ import annotations

import math

from scipy.integrate import quad

from solverq.mdp import Action, JointState, Status, TaskParams, actions, reward, transition_dist
from solverq.roadnet import RoadNet


def expectimax(
    state: JointState, net: RoadNet, params: TaskParams, depth: int
) -> tuple[Action, list[float]]:
    """Exact depth-limited lookahead; returns (argmax action, per-action values).

    Ties resolve to the lowest action index, matching the planner contract.
    """
    memo: dict[tuple[JointState, int], float] = {}

    def value(s: JointState, d: int) -> float:
        if d == 0 or s.status != Status.RUNNING:
            return 0.0
        key = (s, d)
        if key not in memo:
            memo[key] = max(qvalue(s, a, d) for a in actions(s, net))
        return memo[key]

    def qvalue(s: JointState, a: Action, d: int) -> float:
        return sum(
            p * (reward(s, a, nxt, params) + params.discount * value(nxt, d - 1))
            for nxt, p in transition_dist(s, a, net, params)
        )

    acts = actions(state, net)
    qs = [qvalue(state, a, depth) for a in acts]
    best = max(range(len(qs)), key=lambda i: (qs[i], -i))
    return acts[best], qs


def gaussian_pdf(x: float, mean: float, std: float) -> float:
    z = (x - mean) / std
    return math.exp(-0.5 * z * z) / (std * math.sqrt(2.0 * math.pi))


def hellinger_sq_quadrature(m1: float, s1: float, m2: float, s2: float) -> float:
    """1 - integral of sqrt(p*q) over a generous finite window."""
    lo = min(m1 - 14.0 * s1, m2 - 14.0 * s2)
    hi = max(m1 + 14.0 * s1, m2 + 14.0 * s2)
    bc, _ = quad(
        lambda x: math.sqrt(gaussian_pdf(x, m1, s1) * gaussian_pdf(x, m2, s2)),
        lo,
        hi,
        points=sorted({m1, m2, 0.5 * (m1 + m2)}),
        limit=400,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    return 1.0 - bc
