"""Road networks: undirected connected graphs with UGV start, pursuer start and exit.

Networks are loaded from JSON files of the form::

    {"name": "small13", "node_count": 13, "edges": [[0, 1], ...],
     "ugv_start": 0, "pursuer_start": 3, "exit_node": 12}

Node ids are 0-indexed. Two networks ship with the package ("small13",
"medium45"); :func:`load_network` accepts either a bundled name or a path.
"""
from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable


class NetworkError(ValueError):
    """Raised when a network file or its topology is invalid."""


@dataclass(frozen=True)
class RoadNet:
    """Immutable road network. ``adjacency[u]`` is the sorted tuple of neighbors of u."""

    name: str
    node_count: int
    adjacency: tuple[tuple[int, ...], ...]
    ugv_start: int
    pursuer_start: int
    exit_node: int

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def edges(self) -> list[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v, sorted."""
        return sorted(
            (u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v
        )


def build_network(
    name: str,
    node_count: int,
    edges: Iterable[tuple[int, int]],
    ugv_start: int,
    pursuer_start: int,
    exit_node: int,
) -> RoadNet:
    """Construct and validate a RoadNet from an undirected edge list."""
    if node_count < 2:
        raise NetworkError("node_count must be >= 2")
    nbrs: list[set[int]] = [set() for _ in range(node_count)]
    for u, v in edges:
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise NetworkError(f"edge ({u}, {v}) references a node outside 0..{node_count - 1}")
        if u == v:
            raise NetworkError(f"self-loop at node {u}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    adjacency = tuple(tuple(sorted(s)) for s in nbrs)

    for node in (ugv_start, pursuer_start, exit_node):
        if not 0 <= node < node_count:
            raise NetworkError(f"special node {node} outside 0..{node_count - 1}")
    if ugv_start == pursuer_start:
        raise NetworkError("ugv_start and pursuer_start must differ")

    net = RoadNet(name, node_count, adjacency, ugv_start, pursuer_start, exit_node)
    _check_connected(net)
    if exit_distances(net)[ugv_start] is None:
        raise NetworkError("exit node not reachable from ugv_start")
    return net


def _check_connected(net: RoadNet) -> None:
    seen = {0}
    frontier = deque([0])
    while frontier:
        u = frontier.popleft()
        for v in net.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    if len(seen) != net.node_count:
        missing = sorted(set(range(net.node_count)) - seen)
        raise NetworkError(f"graph not connected; unreachable nodes: {missing}")


@lru_cache(maxsize=32)
def exit_distances(net: RoadNet) -> tuple[int | None, ...]:
    """BFS hop distance from every node to the exit (None if unreachable)."""
    dist: list[int | None] = [None] * net.node_count
    dist[net.exit_node] = 0
    frontier = deque([net.exit_node])
    while frontier:
        u = frontier.popleft()
        for v in net.adjacency[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1  # type: ignore[operator]
                frontier.append(v)
    return tuple(dist)


def network_from_dict(obj: dict) -> RoadNet:
    try:
        name = str(obj["name"])
        node_count = int(obj["node_count"])
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
        return build_network(
            name,
            node_count,
            edges,
            int(obj["ugv_start"]),
            int(obj["pursuer_start"]),
            int(obj["exit_node"]),
        )
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network object: {exc}") from exc


def network_to_dict(net: RoadNet) -> dict:
    return {
        "name": net.name,
        "node_count": net.node_count,
        "edges": [list(e) for e in net.edges()],
        "ugv_start": net.ugv_start,
        "pursuer_start": net.pursuer_start,
        "exit_node": net.exit_node,
    }


def network_hash(net: RoadNet) -> str:
    """sha256 of the canonical JSON form, used in run manifests."""
    canon = json.dumps(network_to_dict(net), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


BUNDLED_NETWORKS = ("small13", "medium45")


def load_network(source: str | Path) -> RoadNet:
    """Load a network from a bundled name ("small13", "medium45") or a JSON path."""
    name = str(source)
    if name in BUNDLED_NETWORKS:
        text = (
            resources.files("solverq").joinpath(f"data/networks/{name}.json").read_text()
        )
    else:
        path = Path(source)
        if not path.exists():
            raise NetworkError(f"network file not found: {path}")
        text = path.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid network JSON: {exc}") from exc
    return network_from_dict(obj)
