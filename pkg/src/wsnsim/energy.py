"""Energy bookkeeping primitives: hardware units, power states, cost tables
and the per-node ledger that attributes every joule to one spending cause.

The ledger is the simulator's central output.  Each entry is keyed by a
(constituent, sub-category) pair; a joule is never split between entries,
so the ledger total always reconciles against the battery drain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum


class UnitKind(IntEnum):
    """Hardware unit of a sensor node."""

    PROCESSING = 0
    SENSING = 1
    MEMORY = 2
    TRANSCEIVER = 3


class PowerState(IntEnum):
    """Power state of a single hardware unit."""

    SLEEP = 0
    AWAKE = 1
    ACTIVE = 2
    IDLE = 3


class StateTransition(Enum):
    """Legal state switches; each unit walks its own copy of the diagram."""

    IDLE_TO_SLEEP = (PowerState.IDLE, PowerState.SLEEP)
    SLEEP_TO_AWAKE = (PowerState.SLEEP, PowerState.AWAKE)
    AWAKE_TO_ACTIVE = (PowerState.AWAKE, PowerState.ACTIVE)
    ACTIVE_TO_IDLE = (PowerState.ACTIVE, PowerState.IDLE)
    IDLE_TO_ACTIVE = (PowerState.IDLE, PowerState.ACTIVE)

    @property
    def source(self) -> PowerState:
        return self.value[0]

    @property
    def target(self) -> PowerState:
        return self.value[1]


_TRANSITION_BY_PAIR = {t.value: t for t in StateTransition}


def transition_for(source: PowerState, target: PowerState) -> StateTransition:
    """Look up the transition for a (source, target) pair.

    Raises TransitionError for pairs outside the state diagram
    (e.g. Sleep -> Active).
    """
    try:
        return _TRANSITION_BY_PAIR[(source, target)]
    except KeyError:
        raise TransitionError(f"illegal transition {source.name} -> {target.name}") from None


class TransitionError(ValueError):
    """A state switch that the unit state diagram does not allow."""


class Constituent(Enum):
    """Top-level energy attribution category."""

    INDIVIDUAL = "individual"
    LOCAL = "local"
    GLOBAL = "global"
    SINK = "sink"
    ENVIRONMENT = "environment"


class SubCategory(Enum):
    """Fine-grained spending cause; each belongs to exactly one constituent."""

    # individual: keeping the node itself running
    STATE_DWELL = ("individual", "state_dwell")
    TRANSITION = ("individual", "transition")
    PACKET_PROCESSING = ("individual", "packet_processing")
    # local: coexistence with immediate neighbours
    MON = ("local", "mon")
    SEC = ("local", "sec")
    IDLE_LISTEN = ("local", "idle_listen")
    LOCAL_PROTO = ("local", "local_proto")
    COLL = ("local", "coll")
    OHEAR = ("local", "ohear")
    # global: moving data across the whole network
    TOPO = ("global", "topo")
    ROUTE = ("global", "route")
    GLOBAL_PROTO = ("global", "global_proto")
    PKT_LS = ("global", "pktls")
    # sink: obeying the collector's control traffic
    SNK = ("sink", "snk")
    # environment: harvested energy, credited (negative)
    HARVEST = ("environment", "harvest")

    @property
    def constituent(self) -> Constituent:
        return Constituent(self.value[0])

    @property
    def label(self) -> str:
        return self.value[1]


class ContractError(ValueError):
    """A caller violated an operation precondition."""


@dataclass
class EnergyLedger:
    """Map (constituent, sub-category) -> joules, implicit zero when absent.

    All entries are >= 0 except HARVEST, which is accumulated negative so
    that total() equals the net battery drain it explains.
    """

    entries: dict[SubCategory, float] = field(default_factory=dict)

    def charge(self, sub: SubCategory, amount: float) -> None:
        """Accumulate `amount` joules under `sub`.

        Amounts are given positive; HARVEST is stored negated (a credit).
        """
        if amount < 0.0:
            raise ContractError(f"negative charge {amount!r} to {sub.name}")
        if sub is SubCategory.HARVEST:
            amount = -amount
        self.entries[sub] = self.entries.get(sub, 0.0) + amount

    def get(self, sub: SubCategory) -> float:
        return self.entries.get(sub, 0.0)

    def total(self) -> float:
        return sum(self.entries.values())

    def constituent_total(self, constituent: Constituent) -> float:
        return sum(v for k, v in self.entries.items() if k.constituent is constituent)

    def as_rows(self) -> list[tuple[str, str, float]]:
        """Nonzero entries as (constituent, subcategory, joules), enum order."""
        return [
            (sub.constituent.value, sub.label, self.entries[sub])
            for sub in SubCategory
            if self.entries.get(sub, 0.0) != 0.0
        ]


# (unit, state) -> watts, and (unit, transition) -> joules.
PowerTable = dict[UnitKind, dict[PowerState, float]]
TransitionTable = dict[UnitKind, dict[StateTransition, float]]


def _zero_power_table() -> PowerTable:
    return {u: {s: 0.0 for s in PowerState} for u in UnitKind}


def _zero_transition_table() -> TransitionTable:
    return {u: {w: 0.0 for w in StateTransition} for u in UnitKind}


@dataclass(frozen=True)
class EnergyParams:
    """The simulator's physics table.

    state_power and transition_cost may be given sparsely; missing cells
    default to zero.  Validation enforces non-negativity and, per unit,
    the ordering active >= idle >= sleep.
    """

    state_power: PowerTable = field(default_factory=_zero_power_table)
    transition_cost: TransitionTable = field(default_factory=_zero_transition_table)
    tx_elec: float = 4.0e-7          # J/byte, transmit electronics
    rx_elec: float = 4.0e-7          # J/byte, receive electronics
    tx_amp: float = 8.0e-10          # J/(byte * m^beta), amplifier
    path_loss_exponent: float = 2.0
    sensing_power_coeff: float = 4.5e-5  # W/m^2; sensing active power = coeff * r_s^2
    bitrate: float = 2000.0          # bytes/second
    header_bytes: int = 8            # bytes decoded when overhearing
    battery_capacity: float = 0.15   # joules
    harvest_rate: float = 0.0        # watts; 0 disables harvesting

    def __post_init__(self):
        full_power = _zero_power_table()
        for unit, states in self.state_power.items():
            for state, watts in states.items():
                full_power[UnitKind(unit)][PowerState(state)] = float(watts)
        full_cost = _zero_transition_table()
        for unit, trans in self.transition_cost.items():
            for w, joules in trans.items():
                full_cost[UnitKind(unit)][w] = float(joules)
        object.__setattr__(self, "state_power", full_power)
        object.__setattr__(self, "transition_cost", full_cost)
        self._validate()

    def _validate(self) -> None:
        for unit in UnitKind:
            states = self.state_power[unit]
            for state, watts in states.items():
                if watts < 0.0:
                    raise ContractError(f"state_power[{unit.name}][{state.name}] must be >= 0")
            if not (
                states[PowerState.ACTIVE]
                >= states[PowerState.IDLE]
                >= states[PowerState.SLEEP]
                >= 0.0
            ):
                raise ContractError(
                    f"state_power[{unit.name}] must satisfy active >= idle >= sleep >= 0"
                )
            for w, joules in self.transition_cost[unit].items():
                if joules < 0.0:
                    raise ContractError(f"transition_cost[{unit.name}][{w.name}] must be >= 0")
        for name in ("tx_elec", "rx_elec", "tx_amp", "path_loss_exponent",
                     "sensing_power_coeff", "harvest_rate"):
            if getattr(self, name) < 0.0:
                raise ContractError(f"{name} must be >= 0")
        if self.header_bytes < 0:
            raise ContractError("header_bytes must be >= 0")
        if self.bitrate <= 0.0:
            raise ContractError("bitrate must be > 0")
        if self.battery_capacity <= 0.0:
            raise ContractError("battery_capacity must be > 0")

    def power(self, unit: UnitKind, state: PowerState) -> float:
        return self.state_power[unit][state]


def state_energy(unit: UnitKind, state: PowerState, duration: float,
                 params: EnergyParams) -> float:
    """Energy of dwelling in `state` for `duration` seconds: P * t."""
    if duration < 0.0:
        raise ContractError(f"negative dwell duration {duration!r}")
    return params.state_power[unit][state] * duration


def transition_energy(unit: UnitKind, transition: StateTransition,
                      params: EnergyParams) -> float:
    """Energy of one state switch, straight from the cost table."""
    return params.transition_cost[unit][transition]


def tx_energy(nbytes: float, distance: float, params: EnergyParams) -> float:
    """Transmit cost: electronics per byte plus amplifier scaling with
    distance ** path_loss_exponent."""
    return params.tx_elec * nbytes + params.tx_amp * nbytes * distance ** params.path_loss_exponent


def rx_energy(nbytes: float, params: EnergyParams) -> float:
    """Receive cost: electronics per byte."""
    return params.rx_elec * nbytes


def charge(ledger: EnergyLedger, sub: SubCategory, amount: float) -> EnergyLedger:
    """Accumulate a (positive) amount into the ledger; see EnergyLedger.charge."""
    ledger.charge(sub, amount)
    return ledger
