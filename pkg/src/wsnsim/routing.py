"""Next-hop selection: the candidate rule (strict hop progress toward the
sink) and the two policies under comparison.

Random draws uniformly from the candidates.  Selective scores each
candidate from its last beacon report, alpha * residual-fraction minus
beta * busy-degree, and takes the argmax; ties go to the lowest id.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .network import UNREACHABLE


@dataclass
class NeighborInfo:
    """What a node believes about one neighbor, updated only by beacons.

    Until a first beacon arrives the entry assumes a fresh, idle node;
    between beacons the information is simply stale.
    """

    residual: float
    busy: float = 0.0
    report_time: float = -1.0


@dataclass(frozen=True)
class RandomPolicy:
    name = "random"
    uses_beacons = False


@dataclass(frozen=True)
class SelectivePolicy:
    alpha: float = 1.0
    beta: float = 1.0
    name = "selective"
    uses_beacons = True


RoutingPolicy = RandomPolicy | SelectivePolicy


def candidates(node_id: int, neighbors: dict[int, set[int]], hop_dist: dict[int, int],
               alive: set[int]) -> list[int]:
    """Alive neighbors strictly closer to the sink, ascending by id."""
    own = hop_dist[node_id]
    if own == UNREACHABLE:
        return []
    found = [
        j for j in neighbors[node_id]
        if j in alive and hop_dist[j] != UNREACHABLE and hop_dist[j] < own
    ]
    found.sort()
    return found


def select_next_hop_random(cands: list[int], rng: random.Random) -> int | None:
    if not cands:
        return None
    return cands[rng.randrange(len(cands))]


def select_next_hop_selective(cands: list[int], info: dict[int, NeighborInfo],
                              capacity: float, alpha: float, beta: float) -> int | None:
    """Argmax of alpha * residual/capacity - beta * busy over the reported
    neighbor state; ties broken by lowest id (the list is sorted)."""
    if not cands:
        return None
    best = None
    best_score = None
    for c in cands:
        entry = info.get(c)
        if entry is None:
            score = alpha  # residual assumed full, busy assumed zero
        else:
            score = alpha * (entry.residual / capacity) - beta * entry.busy
        if best_score is None or score > best_score:
            best = c
            best_score = score
    return best
