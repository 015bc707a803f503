"""Deterministic discrete-event engine.

Events are executed in (time, sequence) order; all randomness flows from
four independently seeded streams (deployment, traffic, policy, mac), so
a run is a pure function of (config, seed) and two policies compared
under one seed see identical deployments and event streams.

Attribution rules are centralised in `attribution`; every joule a node
spends lands in exactly one (constituent, sub-category) ledger cell.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .energy import (
    Constituent,
    ContractError,
    EnergyLedger,
    EnergyParams,
    PowerState,
    SubCategory,
    UnitKind,
    rx_energy,
    tx_energy,
)
from .network import SINK_ID, UNREACHABLE, Deployment, build_topology, nearest_to_centroid
from .node import (
    COUNTER_GROUP,
    Packet,
    PacketClass,
    SensorNode,
    TX_IDLE,
    TX_SCHEDULED,
    TX_WAITING,
)
from .routing import (
    NeighborInfo,
    RandomPolicy,
    RoutingPolicy,
    SelectivePolicy,
    select_next_hop_random,
    select_next_hop_selective,
)

SINK_CAPACITY = 1.0e9   # joules; the sink is effectively mains-powered

_MIX = 0x9E3779B97F4A7C15


def _hash_unit(a: int, b: int, c: int, d: int) -> float:
    """Deterministic stateless uniform draw in [0, 1).

    MAC-layer jitters hash the (seed, node, frame, attempt) identity
    instead of consuming a shared stream, so matched-seed runs under
    different policies keep identical timing wherever their routing
    coincides (common-random-numbers variance reduction)."""
    x = (a * 0xBF58476D1CE4E5B9 ^ b * 0x94D049BB133111EB ^ c * _MIX ^ d) & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 31
    return (x >> 11) * (1.0 / (1 << 53))


class Role(Enum):
    """How a node engages with a packet; the attribution table key."""

    SEND = "send"
    RETRY_SEND = "retry_send"
    RECEIVE = "receive"
    COLLIDED_RECEIVE = "collided_receive"
    OVERFLOW_RECEIVE = "overflow_receive"
    DUPLICATE_RECEIVE = "duplicate_receive"
    OVERHEAR = "overhear"
    TOPO_SEND = "topo_send"
    TOPO_RECEIVE = "topo_receive"


_CLASS_CELL = {
    PacketClass.SENSED_DATA: (Constituent.GLOBAL, SubCategory.ROUTE),
    PacketClass.NEIGHBOR_MONITOR: (Constituent.LOCAL, SubCategory.MON),
    PacketClass.SECURITY: (Constituent.LOCAL, SubCategory.SEC),
    PacketClass.LOCAL_CONTROL: (Constituent.LOCAL, SubCategory.LOCAL_PROTO),
    PacketClass.GLOBAL_CONTROL: (Constituent.GLOBAL, SubCategory.GLOBAL_PROTO),
    PacketClass.SINK_CONTROL: (Constituent.SINK, SubCategory.SNK),
}


def attribution(cls: PacketClass, role: Role) -> tuple[Constituent, SubCategory]:
    """Map a packet engagement to its single ledger cell.

    `cls` is the effective class: for acks, the class of the packet they
    confirm.  Role-specific waste (collisions, overheard headers, queue
    overflow, duplicates, retransmissions) overrides the class cell; the
    initial topology flood has its own cell regardless of class.
    """
    if cls is PacketClass.ACK:
        raise ContractError("attribution requires the effective class, not ACK")
    if role is Role.COLLIDED_RECEIVE:
        return (Constituent.LOCAL, SubCategory.COLL)
    if role is Role.OVERHEAR:
        return (Constituent.LOCAL, SubCategory.OHEAR)
    if role in (Role.OVERFLOW_RECEIVE, Role.DUPLICATE_RECEIVE, Role.RETRY_SEND):
        return (Constituent.GLOBAL, SubCategory.PKT_LS)
    if role in (Role.TOPO_SEND, Role.TOPO_RECEIVE):
        return (Constituent.GLOBAL, SubCategory.TOPO)
    return _CLASS_CELL[cls]


# event kinds, ordered ints keep heap tuples cheap
EV_ENV = 0
EV_SENSE_END = 1
EV_TX_START = 2
EV_TX_END = 3
EV_ACK_TIMEOUT = 4
EV_BEACON_DUE = 5
EV_SINK_CONTROL = 6
EV_HARVEST = 7
EV_DEATH_CHECK = 8
EV_REQUERY_CHECK = 9

_EV_NAMES = {
    EV_ENV: "env",
    EV_SENSE_END: "sense_end",
    EV_TX_START: "tx_start",
    EV_TX_END: "tx_end",
    EV_ACK_TIMEOUT: "ack_timeout",
    EV_BEACON_DUE: "beacon_due",
    EV_SINK_CONTROL: "sink_control",
    EV_HARVEST: "harvest",
    EV_DEATH_CHECK: "death_check",
    EV_REQUERY_CHECK: "requery_check",
}


class Transmission:
    __slots__ = ("sender", "receiver", "packet", "start", "end", "dist")

    def __init__(self, sender: int, receiver: int, packet: Packet,
                 start: float, end: float, dist: float):
        self.sender = sender
        self.receiver = receiver     # -1 for broadcast
        self.packet = packet
        self.start = start
        self.end = end
        self.dist = dist


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs besides the seed."""

    deployment: Deployment = field(default_factory=Deployment)
    params: EnergyParams = field(default_factory=EnergyParams)
    policy: RoutingPolicy = field(default_factory=SelectivePolicy)
    event_rate: float = 0.5            # environmental events / second
    data_packet_bytes: int = 64
    max_events: int = 50_000           # cap on generated environmental events
    events: tuple[tuple[float, float, float], ...] | None = None  # scripted (t, x, y)
    beacon_bytes: int = 16
    ack_bytes: int = 8
    control_bytes: int = 32
    t_mon: float = 15.0                # beacon period (selective only)
    t_sink: float = 120.0              # periodic sink control period
    queue_capacity: int = 4
    max_retries: int = 3
    forward_delay: float = 0.25        # queue service latency per frame
    tx_jitter: float = 0.15            # uniform extra service delay
    backoff_base: float = 0.3          # retry backoff per attempt
    backoff_jitter: float = 0.2
    ack_guard: float = 0.05
    max_sim_time: float = 600.0
    harvest_tick: float = 60.0
    miss_requery: bool = True          # sink re-queries undelivered events
    requery_deadline: float = 30.0     # grace period before a re-query
    requery_max: int = 3               # re-query attempts per event

    def validate(self) -> None:
        if self.event_rate < 0.0:
            raise ContractError("event_rate must be >= 0")
        for name in ("data_packet_bytes", "beacon_bytes", "ack_bytes",
                     "control_bytes", "queue_capacity", "max_events"):
            if getattr(self, name) <= 0:
                raise ContractError(f"{name} must be > 0")
        for name in ("t_mon", "t_sink", "forward_delay", "backoff_base",
                     "max_sim_time", "harvest_tick", "requery_deadline"):
            if getattr(self, name) <= 0.0:
                raise ContractError(f"{name} must be > 0")
        for name in ("tx_jitter", "backoff_jitter", "ack_guard"):
            if getattr(self, name) < 0.0:
                raise ContractError(f"{name} must be >= 0")
        if self.max_retries < 0:
            raise ContractError("max_retries must be >= 0")
        if self.requery_max < 0:
            raise ContractError("requery_max must be >= 0")
        if self.events is not None:
            for ev in self.events:
                t, x, y = ev
                if t < 0.0:
                    raise ContractError("scripted event times must be >= 0")
                if not (0.0 <= x <= self.deployment.width
                        and 0.0 <= y <= self.deployment.height):
                    raise ContractError("scripted event positions must lie inside the area")

    def effective_params(self) -> EnergyParams:
        """Params with the sensing-unit active power derived from the
        sensing radius (coeff * r_s^2); revalidates the power ordering."""
        power = {u: dict(v) for u, v in self.params.state_power.items()}
        power[UnitKind.SENSING][PowerState.ACTIVE] = (
            self.params.sensing_power_coeff * self.deployment.sensing_radius ** 2
        )
        return replace(self.params, state_power=power)


@dataclass
class SimResult:
    monitored_node: int | None
    lifetime: float
    censored: bool
    end_time: float
    node_ids: list[int]
    ledgers: dict[int, EnergyLedger]
    lifetimes: dict[int, float]          # per node: death time or end_time
    node_censored: dict[int, bool]
    packet_counts: dict[int, dict[str, int]]
    initial_battery: dict[int, float]
    final_battery: dict[int, float]
    generated: int
    delivered: int
    dropped: int
    drop_causes: dict[str, int]
    requeries: int
    dwell_secs: dict[int, list[list[float]]]

    def ledger_total(self) -> float:
        return sum(led.total() for led in self.ledgers.values())

    def battery_drain_total(self) -> float:
        return sum(self.initial_battery[i] - self.final_battery[i] for i in self.node_ids)


class _Run:
    """Single simulation execution; built fresh per run() call."""

    def __init__(self, config: SimConfig, seed: int, trace=None):
        config.validate()
        self.config = config
        self.params = config.effective_params()
        self.seed = seed
        self.trace = trace
        self.rng_deploy = random.Random(f"{seed}|deploy")
        self.rng_events = random.Random(f"{seed}|events")
        self.rng_policy = random.Random(f"{seed}|policy")

        d = config.deployment
        self.topology = build_topology(d, self.rng_deploy)
        positions = self.topology.positions
        self.nodes: dict[int, SensorNode] = {}
        for node_id, (x, y) in positions.items():
            cap = SINK_CAPACITY if node_id == SINK_ID else self.params.battery_capacity
            self.nodes[node_id] = SensorNode(node_id, x, y, cap, config.queue_capacity)
        self.monitored = nearest_to_centroid(d, positions)

        # sorted adjacency and pair distances for deterministic iteration
        self.nbrs: dict[int, list[int]] = {
            i: sorted(js) for i, js in self.topology.neighbors.items()
        }
        self.pair_dist: dict[tuple[int, int], float] = {}
        for i, js in self.nbrs.items():
            for j in js:
                if i < j:
                    dist = self.topology.distance(i, j)
                    self.pair_dist[(i, j)] = dist
                    self.pair_dist[(j, i)] = dist
        hop = self.topology.hop_dist
        self.cand_base: dict[int, list[int]] = {
            i: [j for j in js if hop[j] != UNREACHABLE and hop[j] < hop[i]]
            if hop[i] != UNREACHABLE else []
            for i, js in self.nbrs.items()
        }

        self.heap: list = []
        self.seq = 0
        self.now = 0.0
        self.recent_tx: list[Transmission] = []
        self.max_airtime = max(config.data_packet_bytes, config.beacon_bytes,
                               config.ack_bytes, config.control_bytes) / self.params.bitrate
        self.generated = 0
        self.dropped = 0
        self.delivered = 0
        self.drop_causes = {"stranded": 0, "retry_exhausted": 0,
                            "overflow_relay": 0, "overflow_origin": 0}
        self.requeries = 0
        self.next_pid = 0
        self.env_emitted = 0
        self.arrived_events: set[int] = set()
        self.monitored_epoch = -1
        self.death_check_version = 0
        self.selective = isinstance(config.policy, SelectivePolicy)

    # -- plumbing ---------------------------------------------------------

    def push(self, time: float, kind: int, a=None, b=None) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (time, self.seq, kind, a, b))

    def emit_trace(self, time: float, seq: int, kind: int, node: int, detail: str) -> None:
        self.trace.write(f"{time:.9f}\t{seq}\t{_EV_NAMES[kind]}\t{node}\t{detail}\n")

    def new_pid(self) -> int:
        self.next_pid += 1
        return self.next_pid

    def dist(self, i: int, j: int) -> float:
        return self.pair_dist[(i, j)]

    def airtime(self, nbytes: int) -> float:
        return nbytes / self.params.bitrate

    def proc_cost(self, nbytes: int) -> float:
        return (self.params.state_power[UnitKind.PROCESSING][PowerState.ACTIVE]
                * nbytes / self.params.bitrate)

    def charge_packet(self, node: SensorNode, amount: float, cls: PacketClass,
                      role: Role) -> None:
        _, sub = attribution(cls, role)
        node.spend(amount, sub, self.now)

    def charge_processing(self, node: SensorNode, nbytes: int) -> None:
        cost = self.proc_cost(nbytes)
        if cost > 0.0:
            node.spend(cost, SubCategory.PACKET_PROCESSING, self.now)
        node.count_packet("individual")

    # -- initial schedule ---------------------------------------------------

    def prime(self) -> None:
        cfg = self.config
        self.topology_flood()
        if cfg.events is not None:
            for t, x, y in cfg.events:
                if t <= cfg.max_sim_time:
                    self.env_emitted += 1
                    self.push(t, EV_ENV, (x, y), self.env_emitted)
        elif cfg.event_rate > 0.0:
            self.schedule_next_env(0.0)
        if self.selective:
            n = cfg.deployment.node_count
            for node_id in range(1, n):
                phase = cfg.t_mon * node_id / n
                if phase <= cfg.max_sim_time:
                    self.push(phase, EV_BEACON_DUE, node_id)
        if cfg.t_sink <= cfg.max_sim_time:
            self.push(cfg.t_sink, EV_SINK_CONTROL)
        if self.params.harvest_rate > 0.0 and cfg.harvest_tick <= cfg.max_sim_time:
            self.push(cfg.harvest_tick, EV_HARVEST)

    def schedule_next_env(self, now: float) -> None:
        cfg = self.config
        if self.env_emitted >= cfg.max_events:
            return
        gap = self.rng_events.expovariate(cfg.event_rate)
        x = self.rng_events.uniform(0.0, cfg.deployment.width)
        y = self.rng_events.uniform(0.0, cfg.deployment.height)
        t = now + gap
        if t <= cfg.max_sim_time:
            self.env_emitted += 1
            self.push(t, EV_ENV, (x, y), self.env_emitted)

    # -- instant control sweeps --------------------------------------------

    def flood(self, cls: PacketClass, send_role: Role, recv_role: Role,
              requery_event: int | None = None) -> None:
        """Network-wide broadcast sweep rooted at the sink, modelled as an
        atomic energy pass: every reached alive node rebroadcasts once.
        The first copy a node hears is decoded in full (and processed);
        further copies are recognised by their header alone.  A re-query
        sweep names a missing environmental event, and any reached node
        that still holds that observation queues it for retransmission."""
        params = self.params
        cfg = self.config
        nbytes = cfg.control_bytes
        rx_amt = rx_energy(nbytes, params)
        rx_dup = rx_energy(min(params.header_bytes, nbytes), params)
        tx_amt = tx_energy(nbytes, cfg.deployment.tx_radius, params)
        group = COUNTER_GROUP[cls]
        now = self.now
        reached = {SINK_ID}
        frontier = [SINK_ID]
        while frontier:
            next_frontier = []
            for u in frontier:
                sender = self.nodes[u]
                sender.settle(now, params)
                if not sender.alive:
                    continue
                self.charge_packet(sender, tx_amt, cls, send_role)
                sender.count_packet(group)
                if not sender.alive:
                    continue
                for j in self.nbrs[u]:
                    rcv = self.nodes[j]
                    rcv.settle(now, params)
                    if not rcv.alive:
                        continue
                    if j in reached:
                        self.charge_packet(rcv, rx_dup, cls, recv_role)
                        continue
                    self.charge_packet(rcv, rx_amt, cls, recv_role)
                    rcv.count_packet(group)
                    if not rcv.alive:
                        continue
                    reached.add(j)
                    self.charge_processing(rcv, nbytes)
                    if not rcv.alive:
                        continue
                    next_frontier.append(j)
                    if requery_event is not None and requery_event in rcv.sensed_events:
                        self.resend_observation(rcv, requery_event)
            frontier = next_frontier

    def resend_observation(self, node: SensorNode, event_id: int) -> None:
        """A sensing origin answers a re-query from its stored observation;
        no new capture happens, only packet preparation and queueing."""
        cfg = self.config
        self.charge_processing(node, cfg.data_packet_bytes)
        if not node.alive:
            return
        self.generated += 1
        packet = Packet(self.new_pid(), PacketClass.SENSED_DATA, node.node_id,
                        node.node_id, -1, cfg.data_packet_bytes, event_id=event_id)
        self.enqueue_data(node, packet)

    def topology_flood(self) -> None:
        self.flood(PacketClass.GLOBAL_CONTROL, Role.TOPO_SEND, Role.TOPO_RECEIVE)

    def sink_sweep(self, requery_event: int | None = None) -> None:
        self.flood(PacketClass.SINK_CONTROL, Role.SEND, Role.RECEIVE,
                   requery_event=requery_event)

    # -- queue service -------------------------------------------------------

    def service(self, node: SensorNode) -> None:
        """Book the next send if the transmitter is free and work exists."""
        if node.tx_state != TX_IDLE or not node.alive:
            return
        if node.pending_beacon:
            pid, attempt = -1, node.counts["local"]
        elif node.queue:
            head = node.queue[0]
            pid, attempt = head.pid, head.attempts
        else:
            return
        cfg = self.config
        delay = cfg.forward_delay
        if cfg.tx_jitter > 0.0:
            delay += cfg.tx_jitter * _hash_unit(self.seed, node.node_id, pid, attempt)
        node.tx_state = TX_SCHEDULED
        self.push(self.now + delay, EV_TX_START, node.node_id)

    def resolve_tx(self, node: SensorNode, pop_head: bool) -> None:
        """Release the transmitter after an ack, drop or beacon and move on."""
        if pop_head and node.queue:
            node.queue.pop(0)
        node.tx_state = TX_IDLE
        self.service(node)

    def enqueue_data(self, node: SensorNode, packet: Packet) -> bool:
        """Append a data packet, or drop it when the queue is full."""
        if node.queue_full():
            self.dropped += 1
            self.drop_causes["overflow_origin"] += 1
            node.count_packet(COUNTER_GROUP[packet.cls])
            return False
        node.queue.append(packet)
        self.service(node)
        return True

    # -- event handlers --------------------------------------------------------

    def handle_env(self, pos: tuple[float, float], event_id: int) -> None:
        params = self.params
        cfg = self.config
        r_s = cfg.deployment.sensing_radius
        ex, ey = pos
        for node_id in range(1, cfg.deployment.node_count):
            node = self.nodes[node_id]
            if not node.alive:
                continue
            dx = node.x - ex
            dy = node.y - ey
            if dx * dx + dy * dy > r_s * r_s:
                continue
            node.settle(self.now, params)
            if not node.alive:
                continue
            if node.unit_state[UnitKind.SENSING] is not PowerState.IDLE:
                continue   # busy capturing a previous event
            if node.apply_transition(UnitKind.SENSING, PowerState.ACTIVE, self.now, params):
                self.push(self.now + self.airtime(cfg.data_packet_bytes),
                          EV_SENSE_END, (node_id, event_id))
        if cfg.miss_requery and cfg.requery_max > 0:
            # the sink re-queries any event whose data never arrives,
            # whether unsensed or lost along the way
            self.push(self.now + cfg.requery_deadline, EV_REQUERY_CHECK, event_id, 1)
        if cfg.events is None:
            self.schedule_next_env(self.now)

    def handle_sense_end(self, payload: tuple[int, int]) -> None:
        node_id, event_id = payload
        node = self.nodes[node_id]
        params = self.params
        node.settle(self.now, params)
        if not node.alive:
            return
        if not node.apply_transition(UnitKind.SENSING, PowerState.IDLE, self.now, params):
            return
        cfg = self.config
        self.charge_processing(node, cfg.data_packet_bytes)
        if not node.alive:
            return
        self.generated += 1
        node.sensed_events[event_id] = self.now
        if len(node.sensed_events) > 64:
            horizon = self.now - cfg.requery_deadline * (cfg.requery_max + 1)
            node.sensed_events = {e: t for e, t in node.sensed_events.items()
                                  if t >= horizon}
        packet = Packet(self.new_pid(), PacketClass.SENSED_DATA, node_id, node_id,
                        -1, cfg.data_packet_bytes, event_id=event_id)
        self.enqueue_data(node, packet)

    def pick_next_hop(self, node: SensorNode) -> int | None:
        cands = [j for j in self.cand_base[node.node_id] if self.nodes[j].alive]
        if not cands:
            return None
        policy = self.config.policy
        if isinstance(policy, RandomPolicy):
            return select_next_hop_random(cands, self.rng_policy)
        return select_next_hop_selective(cands, node.neighbor_info,
                                         self.params.battery_capacity,
                                         policy.alpha, policy.beta)

    def begin_transmission(self, sender: SensorNode, packet: Packet, receiver: int,
                           dist: float, cls_role: Role) -> None:
        params = self.params
        cost = tx_energy(packet.size, dist, params)
        self.charge_packet(sender, cost, packet.effective_class, cls_role)
        sender.count_packet(COUNTER_GROUP[packet.effective_class])
        if not sender.alive:
            return   # died mid-send: nothing leaves the antenna
        if sender.airing == 0:
            sender.apply_transition(UnitKind.TRANSCEIVER, PowerState.ACTIVE,
                                    self.now, params)
            if not sender.alive:
                return
        sender.airing += 1
        end = self.now + self.airtime(packet.size)
        tx = Transmission(sender.node_id, receiver, packet, self.now, end, dist)
        self.recent_tx.append(tx)
        self.push(end, EV_TX_END, tx)

    def handle_tx_start(self, node_id: int) -> None:
        node = self.nodes[node_id]
        if node.tx_state != TX_SCHEDULED:
            return
        params = self.params
        node.settle(self.now, params)
        if not node.alive:
            return
        cfg = self.config
        if node.pending_beacon:
            node.pending_beacon = False
            node.tx_state = TX_WAITING
            beacon = Packet(self.new_pid(), PacketClass.NEIGHBOR_MONITOR, node_id,
                            node_id, -1, cfg.beacon_bytes)
            self.charge_processing(node, cfg.beacon_bytes)
            if node.alive:
                self.begin_transmission(node, beacon, -1, cfg.deployment.tx_radius,
                                        Role.SEND)
            return
        if not node.queue:
            node.tx_state = TX_IDLE
            return
        packet = node.queue[0]
        next_hop = self.pick_next_hop(node)
        if next_hop is None:
            # stranded: no alive neighbor closer to the sink; a route-repair
            # probe goes out (and is heard) before the frame is abandoned
            self.route_repair_probe(node)
            self.dropped += 1
            self.drop_causes["stranded"] += 1
            node.count_packet(COUNTER_GROUP[packet.effective_class])
            node.retry_count.pop(packet.pid, None)
            self.resolve_tx(node, pop_head=True)
            return
        packet.attempts += 1
        packet.next_hop = next_hop
        node.retry_count[packet.pid] = packet.attempts
        node.tx_state = TX_WAITING
        if self.selective:
            # local belief update: the chosen relay just got more work, so
            # it looks busier until its next beacon says otherwise
            info = node.neighbor_info.get(next_hop)
            if info is None:
                info = NeighborInfo(self.params.battery_capacity)
                node.neighbor_info[next_hop] = info
            info.busy = min(1.0, info.busy + 1.0 / cfg.queue_capacity)
        role = Role.SEND if packet.attempts == 1 else Role.RETRY_SEND
        airtime = self.airtime(packet.size)
        timeout = 2.0 * airtime + self.airtime(cfg.ack_bytes) + cfg.ack_guard
        self.push(self.now + timeout, EV_ACK_TIMEOUT, node_id, packet)
        self.begin_transmission(node, packet, next_hop, self.dist(node_id, next_hop), role)

    def route_repair_probe(self, node: SensorNode) -> None:
        params = self.params
        cfg = self.config
        cost = tx_energy(cfg.control_bytes, cfg.deployment.tx_radius, params)
        node.spend(cost, SubCategory.PKT_LS, self.now)
        if not node.alive:
            return
        header_amt = rx_energy(params.header_bytes, params)
        if header_amt <= 0.0:
            return
        for j in self.nbrs[node.node_id]:
            listener = self.nodes[j]
            listener.settle(self.now, params)
            if listener.alive:
                listener.spend(header_amt, SubCategory.OHEAR, self.now)

    def corrupted_at(self, tx: Transmission, receiver: int) -> bool:
        """True when another overlapping transmission reaches `receiver`."""
        nbrs_of = self.nbrs
        for other in self.recent_tx:
            if other is tx or other.sender == tx.sender or other.sender == receiver:
                continue
            if other.start < tx.end and other.end > tx.start:
                if receiver in nbrs_of[other.sender]:
                    return True
        return False

    def prune_recent(self) -> None:
        horizon = self.now - 4.0 * self.max_airtime
        if self.recent_tx and self.recent_tx[0].end < horizon:
            self.recent_tx = [t for t in self.recent_tx if t.end >= horizon]

    def handle_tx_end(self, tx: Transmission) -> None:
        params = self.params
        sender = self.nodes[tx.sender]
        sender.settle(self.now, params)
        self.prune_recent()
        if sender.airing > 0:
            sender.airing -= 1
        if not sender.alive:
            return   # died in the air: the frame never completed
        if sender.airing == 0:
            sender.apply_transition(UnitKind.TRANSCEIVER, PowerState.IDLE,
                                    self.now, params)
            if not sender.alive:
                return
        packet = tx.packet
        if tx.receiver == -1:
            self.deliver_broadcast(tx)
            if packet.cls is PacketClass.NEIGHBOR_MONITOR:
                self.resolve_tx(sender, pop_head=False)
            return
        self.deliver_unicast(tx)
        self.overhear(tx)

    def deliver_broadcast(self, tx: Transmission) -> None:
        """Beacon reception at every alive neighbor of the sender."""
        params = self.params
        sender = self.nodes[tx.sender]
        payload_residual = sender.battery
        payload_busy = sender.busy_degree()
        rx_amt = rx_energy(tx.packet.size, params)
        group = COUNTER_GROUP[tx.packet.cls]
        for j in self.nbrs[tx.sender]:
            rcv = self.nodes[j]
            rcv.settle(self.now, params)
            if not rcv.alive:
                continue
            if self.corrupted_at(tx, j):
                self.charge_packet(rcv, rx_amt, tx.packet.cls, Role.COLLIDED_RECEIVE)
                rcv.count_packet(group)
                continue
            self.charge_packet(rcv, rx_amt, tx.packet.cls, Role.RECEIVE)
            rcv.count_packet(group)
            if not rcv.alive:
                continue
            self.charge_processing(rcv, tx.packet.size)
            info = rcv.neighbor_info.get(tx.sender)
            if info is None:
                rcv.neighbor_info[tx.sender] = NeighborInfo(
                    payload_residual, payload_busy, self.now)
            else:
                info.residual = payload_residual
                info.busy = payload_busy
                info.report_time = self.now

    def send_ack(self, acker: SensorNode, data: Packet, dest: int) -> None:
        # an ack shares the pid of the frame it confirms
        cfg = self.config
        ack = Packet(data.pid, PacketClass.ACK, acker.node_id, acker.node_id,
                     dest, cfg.ack_bytes, inherits=data.effective_class)
        self.begin_transmission(acker, ack, dest, self.dist(acker.node_id, dest),
                                Role.SEND)

    def deliver_unicast(self, tx: Transmission) -> None:
        params = self.params
        packet = tx.packet
        rcv = self.nodes[tx.receiver]
        rcv.settle(self.now, params)
        if not rcv.alive:
            return   # no ack: the sender will time out
        rx_amt = rx_energy(packet.size, params)
        eff_cls = packet.effective_class
        group = COUNTER_GROUP[eff_cls]
        if self.corrupted_at(tx, tx.receiver):
            self.charge_packet(rcv, rx_amt, eff_cls, Role.COLLIDED_RECEIVE)
            rcv.count_packet(group)
            return
        if packet.cls is PacketClass.ACK:
            self.charge_packet(rcv, rx_amt, eff_cls, Role.RECEIVE)
            rcv.count_packet(group)
            if rcv.alive:
                self.charge_processing(rcv, packet.size)
            self.finish_acked(rcv, packet)
            return
        if packet.pid in rcv.seen:
            # the relay already handled this frame; its ack was lost
            self.charge_packet(rcv, rx_amt, eff_cls, Role.DUPLICATE_RECEIVE)
            rcv.count_packet(group)
            if rcv.alive:
                self.send_ack(rcv, packet, tx.sender)
            return
        if tx.receiver != SINK_ID and rcv.queue_full():
            self.charge_packet(rcv, rx_amt, eff_cls, Role.OVERFLOW_RECEIVE)
            rcv.count_packet(group)
            self.dropped += 1
            self.drop_causes["overflow_relay"] += 1
            return   # nothing buffered, so nothing acked
        self.charge_packet(rcv, rx_amt, eff_cls, Role.RECEIVE)
        rcv.count_packet(group)
        if not rcv.alive:
            return
        self.charge_processing(rcv, packet.size)
        if not rcv.alive:
            return
        rcv.seen[packet.pid] = self.now
        if tx.receiver == SINK_ID:
            self.delivered += 1
            if packet.event_id is not None:
                self.arrived_events.add(packet.event_id)
        else:
            relayed = Packet(packet.pid, packet.cls, packet.origin, tx.receiver,
                             -1, packet.size, hops=packet.hops + 1,
                             event_id=packet.event_id)
            self.enqueue_data(rcv, relayed)
        self.send_ack(rcv, packet, tx.sender)

    def finish_acked(self, original_sender: SensorNode, ack: Packet) -> None:
        """Clean ack reception: mark the head frame done and move on."""
        if not original_sender.queue:
            return
        head = original_sender.queue[0]
        if head.pid != ack.pid:
            return   # stale ack for an already-resolved frame
        head.acked = True
        original_sender.retry_count.pop(head.pid, None)
        self.resolve_tx(original_sender, pop_head=True)

    def overhear(self, tx: Transmission) -> None:
        params = self.params
        amt = rx_energy(params.header_bytes, params)
        if amt <= 0.0:
            return
        for j in self.nbrs[tx.sender]:
            if j == tx.receiver:
                continue
            bystander = self.nodes[j]
            bystander.settle(self.now, params)
            if bystander.alive:
                bystander.spend(amt, SubCategory.OHEAR, self.now)

    def handle_ack_timeout(self, node_id: int, packet: Packet) -> None:
        node = self.nodes[node_id]
        if not node.alive or packet.acked:
            return
        if not node.queue or node.queue[0] is not packet:
            return   # already resolved (dropped or superseded)
        if node.tx_state != TX_WAITING:
            return
        cfg = self.config
        if packet.attempts > cfg.max_retries:
            self.dropped += 1
            self.drop_causes["retry_exhausted"] += 1
            node.count_packet(COUNTER_GROUP[packet.effective_class])
            node.retry_count.pop(packet.pid, None)
            self.resolve_tx(node, pop_head=True)
            return
        backoff = cfg.backoff_base * packet.attempts
        if cfg.backoff_jitter > 0.0:
            backoff += cfg.backoff_jitter * _hash_unit(
                self.seed, node_id + 0x10000, packet.pid, packet.attempts)
        node.tx_state = TX_SCHEDULED
        self.push(self.now + backoff, EV_TX_START, node_id)

    def handle_beacon_due(self, node_id: int) -> None:
        node = self.nodes[node_id]
        if not node.alive:
            return
        node.pending_beacon = True
        self.service(node)
        nxt = self.now + self.config.t_mon
        if nxt <= self.config.max_sim_time:
            self.push(nxt, EV_BEACON_DUE, node_id)

    def handle_sink_control(self) -> None:
        self.sink_sweep()
        nxt = self.now + self.config.t_sink
        if nxt <= self.config.max_sim_time:
            self.push(nxt, EV_SINK_CONTROL)

    def handle_requery_check(self, event_id: int, attempt: int) -> None:
        if event_id in self.arrived_events:
            self.arrived_events.discard(event_id)
            return
        self.requeries += 1
        self.sink_sweep(requery_event=event_id)
        if attempt < self.config.requery_max:
            self.push(self.now + self.config.requery_deadline,
                      EV_REQUERY_CHECK, event_id, attempt + 1)

    def handle_harvest(self) -> None:
        params = self.params
        tick = self.config.harvest_tick
        for node_id in range(1, self.config.deployment.node_count):
            node = self.nodes[node_id]
            if node.alive:
                node.settle(self.now, params)
                if node.alive:
                    node.harvest(tick, params, self.now)
        nxt = self.now + tick
        if nxt <= self.config.max_sim_time:
            self.push(nxt, EV_HARVEST)

    # -- monitored-node death projection ------------------------------------

    def reproject_death(self) -> None:
        if self.monitored is None:
            return
        node = self.nodes[self.monitored]
        if not node.alive:
            return
        self.monitored_epoch = node.epoch
        power = node.dwell_power(self.params)
        if power <= 0.0:
            return
        t_star = node.last_settle + (node.capacity - node.spent) / power
        if t_star <= self.config.max_sim_time:
            self.death_check_version += 1
            self.push(t_star, EV_DEATH_CHECK, self.monitored, self.death_check_version)

    def handle_death_check(self, node_id: int, version: int) -> None:
        if version != self.death_check_version:
            return
        node = self.nodes[node_id]
        node.settle(self.now, self.params)

    # -- main loop ----------------------------------------------------------

    def run(self) -> SimResult:
        cfg = self.config
        self.prime()
        monitored = self.nodes[self.monitored] if self.monitored is not None else None
        if monitored is not None:
            self.reproject_death()
        heap = self.heap
        while heap:
            if monitored is not None and not monitored.alive:
                break
            time, seq, kind, a, b = heapq.heappop(heap)
            if time > cfg.max_sim_time:
                break
            self.now = time
            if self.trace is not None:
                self.emit_trace(time, seq, kind,
                                a if isinstance(a, int) else -1,
                                _EV_NAMES[kind])
            if kind == EV_TX_END:
                self.handle_tx_end(a)
            elif kind == EV_TX_START:
                self.handle_tx_start(a)
            elif kind == EV_ACK_TIMEOUT:
                self.handle_ack_timeout(a, b)
            elif kind == EV_ENV:
                self.handle_env(a, b)
            elif kind == EV_SENSE_END:
                self.handle_sense_end(a)
            elif kind == EV_REQUERY_CHECK:
                self.handle_requery_check(a, b)
            elif kind == EV_BEACON_DUE:
                self.handle_beacon_due(a)
            elif kind == EV_SINK_CONTROL:
                self.handle_sink_control()
            elif kind == EV_HARVEST:
                self.handle_harvest()
            elif kind == EV_DEATH_CHECK:
                self.handle_death_check(a, b)
            if monitored is not None and monitored.epoch != self.monitored_epoch:
                if monitored.alive:
                    self.reproject_death()
        # close out every node at the end of observation
        if monitored is not None and not monitored.alive:
            end_time = monitored.death_time
        else:
            end_time = cfg.max_sim_time
        for node in self.nodes.values():
            node.settle(end_time, self.params)
        return self._result(end_time)

    def _result(self, end_time: float) -> SimResult:
        cfg = self.config
        node_ids = sorted(self.nodes)
        monitored = self.nodes[self.monitored] if self.monitored is not None else None
        if monitored is not None and monitored.death_time is not None:
            lifetime = monitored.death_time
            censored = False
        else:
            lifetime = cfg.max_sim_time
            censored = True
        return SimResult(
            monitored_node=self.monitored,
            lifetime=lifetime,
            censored=censored,
            end_time=end_time,
            node_ids=node_ids,
            ledgers={i: self.nodes[i].ledger for i in node_ids},
            lifetimes={
                i: (self.nodes[i].death_time
                    if self.nodes[i].death_time is not None else end_time)
                for i in node_ids
            },
            node_censored={i: self.nodes[i].death_time is None for i in node_ids},
            packet_counts={i: dict(self.nodes[i].counts) for i in node_ids},
            initial_battery={
                i: (SINK_CAPACITY if i == SINK_ID else self.params.battery_capacity)
                for i in node_ids
            },
            final_battery={i: self.nodes[i].battery for i in node_ids},
            generated=self.generated,
            delivered=self.delivered,
            dropped=self.dropped,
            drop_causes=dict(self.drop_causes),
            requeries=self.requeries,
            dwell_secs={i: self.nodes[i].dwell_secs for i in node_ids},
        )


def run(config: SimConfig, seed: int, trace=None) -> SimResult:
    """Execute one simulation; identical (config, seed) gives an identical
    result.  `trace` is an optional writable text stream receiving one
    line per executed event."""
    return _Run(config, seed, trace).run()
