from __future__ import annotations

import pytest

from solverq import TaskParams, build_network
from solverq.solvers import MctsConfig, SolverSpec


@pytest.fixture(scope="session")
def two_node():
    # start adjacent to exit; the pursuer can only swap past the UGV
    return build_network("two_node", 2, [(0, 1)], ugv_start=0, pursuer_start=1, exit_node=1)


@pytest.fixture(scope="session")
def chain3():
    # 0-1-2 path, exit in the middle: the leaf pins the pursuer onto the exit
    # node and then flushes it off, so optimal play is noise-free (wait one
    # step, then walk onto the vacated exit)
    return build_network("chain3", 3, [(0, 1), (1, 2)], ugv_start=0, pursuer_start=2, exit_node=1)


@pytest.fixture(scope="session")
def chain4():
    # 0-1-2-3 path with the exit next to the start and the pursuer parked far
    return build_network("chain4", 4, [(0, 1), (1, 2), (2, 3)], ugv_start=0, pursuer_start=3, exit_node=1)


@pytest.fixture(scope="session")
def escort_params():
    return TaskParams(p_trans=0.7, discount=0.90, rwd_exit=2000.0, rwd_caught=-2000.0,
                      rwd_sense=-200.0, max_steps=50)


@pytest.fixture(scope="session")
def sure_params():
    return TaskParams(p_trans=1.0, discount=0.90, rwd_exit=2000.0, rwd_caught=-2000.0,
                      rwd_sense=-200.0, max_steps=50)


def mcts_spec(label: str, depth: int, exploration: float = 1000.0, iterations: int = 100) -> SolverSpec:
    return SolverSpec("mcts", label, MctsConfig(depth, exploration, iterations))
