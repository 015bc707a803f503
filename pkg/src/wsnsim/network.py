"""Deployment geometry: random node placement, unit-disk neighbor tables,
hop distances to the sink and sensing coverage.

The sink is always node 0 at a fixed position; sensor nodes are drawn
uniformly over the area from a seeded stream, so a deployment is a pure
function of (Deployment, seed).
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass

from .energy import ContractError

SINK_ID = 0

#: hop count marker for nodes with no path to the sink
UNREACHABLE = -1


@dataclass(frozen=True)
class Deployment:
    width: float = 200.0
    height: float = 200.0
    node_count: int = 100            # includes the sink
    sink_x: float = 100.0
    sink_y: float = 0.0
    tx_radius: float = 30.0
    sensing_radius: float = 20.0

    def __post_init__(self):
        if self.node_count < 1:
            raise ContractError("node_count must be >= 1")
        if self.width <= 0.0 or self.height <= 0.0:
            raise ContractError("area dimensions must be > 0")
        if self.tx_radius <= 0.0:
            raise ContractError("tx_radius must be > 0")
        if self.sensing_radius <= 0.0:
            raise ContractError("sensing_radius must be > 0")
        if not (0.0 <= self.sink_x <= self.width and 0.0 <= self.sink_y <= self.height):
            raise ContractError("sink position must lie inside the area")


@dataclass
class Topology:
    positions: dict[int, tuple[float, float]]
    neighbors: dict[int, set[int]]
    hop_dist: dict[int, int]         # UNREACHABLE when no path to the sink
    tx_radius: float

    def distance(self, i: int, j: int) -> float:
        xi, yi = self.positions[i]
        xj, yj = self.positions[j]
        return math.hypot(xi - xj, yi - yj)


def deploy(d: Deployment, rng: random.Random) -> dict[int, tuple[float, float]]:
    """Draw node positions: the sink fixed at its configured spot, the
    node_count - 1 sensors i.i.d. uniform over the area."""
    positions = {SINK_ID: (d.sink_x, d.sink_y)}
    for node_id in range(1, d.node_count):
        positions[node_id] = (rng.uniform(0.0, d.width), rng.uniform(0.0, d.height))
    return positions


def build_neighbors(positions: dict[int, tuple[float, float]],
                    tx_radius: float) -> dict[int, set[int]]:
    """Symmetric unit-disk adjacency; the boundary distance is inclusive
    and a node is never its own neighbor."""
    if tx_radius <= 0.0:
        raise ContractError("tx_radius must be > 0")
    ids = sorted(positions)
    neighbors: dict[int, set[int]] = {i: set() for i in ids}
    for a in range(len(ids)):
        i = ids[a]
        xi, yi = positions[i]
        for b in range(a + 1, len(ids)):
            j = ids[b]
            xj, yj = positions[j]
            if math.hypot(xi - xj, yi - yj) <= tx_radius:
                neighbors[i].add(j)
                neighbors[j].add(i)
    return neighbors


def hop_distances(neighbors: dict[int, set[int]], source: int = SINK_ID) -> dict[int, int]:
    """Breadth-first hop counts from `source`; unreached nodes get
    UNREACHABLE."""
    dist = {i: UNREACHABLE for i in neighbors}
    dist[source] = 0
    frontier = deque([source])
    while frontier:
        i = frontier.popleft()
        d_next = dist[i] + 1
        for j in neighbors[i]:
            if dist[j] == UNREACHABLE:
                dist[j] = d_next
                frontier.append(j)
    return dist


def build_topology(d: Deployment, rng: random.Random) -> Topology:
    positions = deploy(d, rng)
    neighbors = build_neighbors(positions, d.tx_radius)
    return Topology(positions, neighbors, hop_distances(neighbors), d.tx_radius)


def covering_nodes(event_pos: tuple[float, float], positions: dict[int, tuple[float, float]],
                   sensing_radius: float) -> set[int]:
    """Non-sink nodes within sensing range of an event position."""
    ex, ey = event_pos
    covering = set()
    for node_id, (x, y) in positions.items():
        if node_id == SINK_ID:
            continue
        if math.hypot(x - ex, y - ey) <= sensing_radius:
            covering.add(node_id)
    return covering


def nearest_to_centroid(d: Deployment, positions: dict[int, tuple[float, float]]) -> int | None:
    """The non-sink node closest to the area centroid, ties to the lowest
    id; None when the deployment holds only the sink."""
    cx, cy = d.width / 2.0, d.height / 2.0
    best = None
    best_dist = math.inf
    for node_id in sorted(positions):
        if node_id == SINK_ID:
            continue
        x, y = positions[node_id]
        dist = math.hypot(x - cx, y - cy)
        if dist < best_dist:
            best = node_id
            best_dist = dist
    return best
