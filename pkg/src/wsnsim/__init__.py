"""Deterministic wireless-sensor-network simulator with per-cause energy
ledgers: every joule a node spends is attributed to exactly one spending
cause, enabling reproducible routing-policy comparisons and radius sweeps."""

from .energy import (
    Constituent,
    EnergyLedger,
    EnergyParams,
    PowerState,
    StateTransition,
    SubCategory,
    UnitKind,
    rx_energy,
    state_energy,
    transition_energy,
    tx_energy,
)
from .network import Deployment, Topology
from .node import Packet, PacketClass, SensorNode
from .routing import NeighborInfo, RandomPolicy, SelectivePolicy
from .simulator import SimConfig, SimResult, attribution, run

__version__ = "0.1.0"

__all__ = [
    "Constituent",
    "Deployment",
    "EnergyLedger",
    "EnergyParams",
    "NeighborInfo",
    "Packet",
    "PacketClass",
    "PowerState",
    "RandomPolicy",
    "SelectivePolicy",
    "SensorNode",
    "SimConfig",
    "SimResult",
    "StateTransition",
    "SubCategory",
    "Topology",
    "UnitKind",
    "attribution",
    "run",
    "rx_energy",
    "state_energy",
    "transition_energy",
    "tx_energy",
]
