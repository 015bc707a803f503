"""Sensor node state: per-unit power states, dwell clocks, battery and
ledger.  Dwell energy is settled lazily; settle() advances every unit to
a common timestamp, so between settles the node drains at one constant
power and its exact death time can be solved in closed form.

The battery is stored as accumulated expenditure (`spent`) rather than a
decremented level so that charges stay precise even for the sink, whose
capacity is many orders of magnitude above a single charge.
"""

from __future__ import annotations

from enum import Enum

from .energy import (
    ContractError,
    EnergyLedger,
    EnergyParams,
    PowerState,
    SubCategory,
    UnitKind,
    transition_for,
)


class PacketClass(Enum):
    SENSED_DATA = "sensed_data"
    NEIGHBOR_MONITOR = "neighbor_monitor"
    SECURITY = "security"
    LOCAL_CONTROL = "local_control"
    GLOBAL_CONTROL = "global_control"
    SINK_CONTROL = "sink_control"
    ACK = "ack"


#: which packet-overhead counter a class feeds; SINK_CONTROL feeds none
COUNTER_GROUP = {
    PacketClass.SENSED_DATA: "global",
    PacketClass.GLOBAL_CONTROL: "global",
    PacketClass.NEIGHBOR_MONITOR: "local",
    PacketClass.SECURITY: "local",
    PacketClass.LOCAL_CONTROL: "local",
    PacketClass.SINK_CONTROL: None,
}


class Packet:
    """One frame in flight.  `cls` is fixed at creation; each relay hop
    clones the packet with a new sender, so per-hop retry state never
    leaks across hops.  Acks carry the class they confirm in `inherits`
    so their energy lands in the same ledger cell."""

    __slots__ = ("pid", "cls", "origin", "sender", "next_hop", "size", "hops",
                 "attempts", "inherits", "acked", "event_id")

    def __init__(self, pid: int, cls: PacketClass, origin: int, sender: int,
                 next_hop: int, size: int, hops: int = 0,
                 inherits: PacketClass | None = None, event_id: int | None = None):
        if size <= 0:
            raise ContractError("packet size must be > 0")
        self.pid = pid
        self.cls = cls
        self.origin = origin
        self.sender = sender
        self.next_hop = next_hop
        self.size = size
        self.hops = hops
        self.attempts = 0
        self.inherits = inherits
        self.acked = False
        self.event_id = event_id          # environmental event that produced it

    @property
    def effective_class(self) -> PacketClass:
        return self.inherits if self.cls is PacketClass.ACK else self.cls


# Dwell attribution: transceiver idle time is the cost of listening on an
# open channel and belongs to the local constituent; every other dwell is
# the node merely existing.  The split is fixed so no joule lands twice.
def dwell_subcategory(unit: UnitKind, state: PowerState) -> SubCategory:
    if unit is UnitKind.TRANSCEIVER and state is PowerState.IDLE:
        return SubCategory.IDLE_LISTEN
    return SubCategory.STATE_DWELL


# transmitter scheduling states
TX_IDLE = 0        # nothing to send
TX_SCHEDULED = 1   # a send is booked on the event queue
TX_WAITING = 2     # frame in the air or awaiting its ack


class SensorNode:
    """One node's mutable simulation state.  Owned by a single run."""

    __slots__ = ("node_id", "x", "y", "capacity", "spent", "unit_state",
                 "last_settle", "dwell_secs", "ledger", "alive", "death_time",
                 "queue", "queue_capacity", "tx_state", "pending_beacon",
                 "counts", "retry_count", "seen", "neighbor_info", "epoch",
                 "airing", "sensed_events")

    def __init__(self, node_id: int, x: float, y: float, capacity: float,
                 queue_capacity: int):
        self.node_id = node_id
        self.x = x
        self.y = y
        self.capacity = capacity
        self.spent = 0.0
        self.unit_state = [PowerState.IDLE] * len(UnitKind)
        self.last_settle = 0.0
        # dwell_secs[unit][state] accumulates observed durations
        self.dwell_secs = [[0.0] * len(PowerState) for _ in UnitKind]
        self.ledger = EnergyLedger()
        self.alive = True
        self.death_time: float | None = None
        self.queue: list[Packet] = []
        self.queue_capacity = queue_capacity
        self.tx_state = TX_IDLE
        self.pending_beacon = False
        # packet-engagement counters keyed 'individual' / 'local' / 'global'
        self.counts = {"individual": 0, "local": 0, "global": 0}
        self.retry_count: dict[int, int] = {}
        self.seen: dict[int, float] = {}        # relayed pkt id -> time
        self.neighbor_info: dict[int, object] = {}
        self.epoch = 0                          # bumped on battery/power change
        self.airing = 0                         # frames currently on the air
        self.sensed_events: dict[int, float] = {}   # observation cache

    @property
    def battery(self) -> float:
        return self.capacity - self.spent

    # -- dwell / battery ------------------------------------------------

    def dwell_power(self, params: EnergyParams) -> float:
        table = params.state_power
        states = self.unit_state
        return (
            table[UnitKind.PROCESSING][states[0]]
            + table[UnitKind.SENSING][states[1]]
            + table[UnitKind.MEMORY][states[2]]
            + table[UnitKind.TRANSCEIVER][states[3]]
        )

    def settle(self, now: float, params: EnergyParams) -> None:
        """Charge dwell energy for [last_settle, now] and advance the clock.

        If the battery cannot fund the whole interval the node dies at the
        exact instant it empties; dwell clocks stop there.
        """
        if not self.alive:
            return
        dt = now - self.last_settle
        if dt <= 0.0:
            return
        remaining = self.capacity - self.spent
        if remaining <= 0.0:      # exhausted to within float rounding
            self.spent = self.capacity
            self._die(self.last_settle)
            return
        table = params.state_power
        total_power = self.dwell_power(params)
        if total_power * dt >= remaining and total_power > 0.0:
            dt = remaining / total_power
            dying = True
        else:
            dying = False
        ledger = self.ledger
        for unit in UnitKind:
            state = self.unit_state[unit]
            self.dwell_secs[unit][state] += dt
            watts = table[unit][state]
            if watts > 0.0:
                amt = watts * dt
                ledger.charge(dwell_subcategory(unit, state), amt)
                self.spent += amt
        if dying:
            self.spent = self.capacity
            self._die(self.last_settle + dt)
        else:
            self.last_settle = now

    def _die(self, when: float) -> None:
        self.alive = False
        self.death_time = when
        self.last_settle = when
        self.epoch += 1

    def spend(self, amount: float, sub: SubCategory, now: float) -> float:
        """Instantaneous charge; returns the joules actually taken.

        A node that cannot fund the full amount spends what is left and
        dies at `now`.  Dead nodes spend nothing.
        """
        if not self.alive or amount <= 0.0:
            return 0.0
        self.epoch += 1
        remaining = self.capacity - self.spent
        if amount >= remaining:
            self.ledger.charge(sub, remaining)
            self.spent = self.capacity
            self._die(now)
            return remaining
        self.ledger.charge(sub, amount)
        self.spent += amount
        return amount

    def drain(self, amount: float, now: float = 0.0) -> None:
        """Bare battery decrement; ledger entries are the caller's concern."""
        if amount < 0.0:
            raise ContractError("drain amount must be >= 0")
        if not self.alive or amount == 0.0:
            return
        self.epoch += 1
        remaining = self.capacity - self.spent
        if amount >= remaining:
            self.spent = self.capacity
            self._die(now)
        else:
            self.spent += amount

    def harvest(self, dt: float, params: EnergyParams, now: float) -> float:
        """Credit harvested energy for a dt-second interval, capped at the
        battery's headroom.  Returns the credited joules.  Dead nodes do
        not revive."""
        if dt < 0.0:
            raise ContractError("harvest interval must be >= 0")
        if not self.alive or params.harvest_rate <= 0.0:
            return 0.0
        credit = params.harvest_rate * dt
        if credit > self.spent:
            credit = self.spent   # headroom: capacity - battery == spent
        if credit > 0.0:
            self.epoch += 1
            self.spent -= credit
            self.ledger.charge(SubCategory.HARVEST, credit)
        return credit

    # -- unit state machine ---------------------------------------------

    def apply_transition(self, unit: UnitKind, target: PowerState, now: float,
                         params: EnergyParams) -> bool:
        """Switch `unit` to `target` at time `now`.

        Settles dwell first (the ending state's energy is charged), then
        charges the switch cost.  Illegal (current, target) pairs raise
        TransitionError; on a dead node this is a no-op returning False.
        """
        if not self.alive:
            return False
        transition = transition_for(self.unit_state[unit], target)
        self.settle(now, params)
        if not self.alive:                      # settling may have killed it
            return False
        self.unit_state[unit] = target
        self.epoch += 1
        cost = params.transition_cost[unit][transition]
        if cost > 0.0:
            self.spend(cost, SubCategory.TRANSITION, now)
        return self.alive

    # -- queue ------------------------------------------------------------

    def busy_degree(self) -> float:
        """Transmit-queue occupancy in [0, 1]; the selective policy's load
        signal."""
        return len(self.queue) / self.queue_capacity

    def queue_full(self) -> bool:
        return len(self.queue) >= self.queue_capacity

    def count_packet(self, group: str | None) -> None:
        if group is not None:
            self.counts[group] += 1

    def elapsed_alive(self, horizon: float) -> float:
        return self.death_time if self.death_time is not None else horizon
