"""JSON configuration: documented defaults, strict validation and the
mapping onto Deployment / EnergyParams / SimConfig.

Every key has a default, unknown keys are rejected, and every violated
constraint is reported with its dotted key path, so a config error can
be fixed from the message alone.  An empty document is a valid config.
"""

from __future__ import annotations

import json
from typing import Any

from .energy import EnergyParams, PowerState, StateTransition, UnitKind
from .network import Deployment
from .routing import RandomPolicy, SelectivePolicy
from .simulator import SimConfig


class ConfigError(ValueError):
    """Malformed or constraint-violating configuration document."""


_UNITS = ["processing", "sensing", "memory", "transceiver"]
_STATES = ["sleep", "awake", "active", "idle"]
_TRANSITIONS = ["idle_to_sleep", "sleep_to_awake", "awake_to_active",
                "active_to_idle", "idle_to_active"]

_UNIT_BY_NAME = {
    "processing": UnitKind.PROCESSING,
    "sensing": UnitKind.SENSING,
    "memory": UnitKind.MEMORY,
    "transceiver": UnitKind.TRANSCEIVER,
}
_STATE_BY_NAME = {
    "sleep": PowerState.SLEEP,
    "awake": PowerState.AWAKE,
    "active": PowerState.ACTIVE,
    "idle": PowerState.IDLE,
}
_TRANSITION_BY_NAME = {
    "idle_to_sleep": StateTransition.IDLE_TO_SLEEP,
    "sleep_to_awake": StateTransition.SLEEP_TO_AWAKE,
    "awake_to_active": StateTransition.AWAKE_TO_ACTIVE,
    "active_to_idle": StateTransition.ACTIVE_TO_IDLE,
    "idle_to_active": StateTransition.IDLE_TO_ACTIVE,
}

# default power draw in watts per (unit, state); sensing active is derived
# at run time from sensing_power_coeff * sensing_radius^2
_DEFAULT_STATE_POWER = {
    "processing": {"sleep": 0.0, "awake": 2.0e-6, "active": 2.0e-3, "idle": 5.0e-6},
    "sensing": {"sleep": 0.0, "awake": 1.0e-6, "active": 0.0, "idle": 0.0},
    "memory": {"sleep": 0.0, "awake": 1.0e-6, "active": 5.0e-4, "idle": 2.0e-6},
    "transceiver": {"sleep": 2.0e-7, "awake": 5.0e-6, "active": 2.0e-5, "idle": 2.0e-5},
}

# default switch cost in joules per (unit, transition)
_DEFAULT_TRANSITION_COST = {
    "processing": {t: 1.0e-7 for t in _TRANSITIONS},
    "sensing": {"idle_to_sleep": 1.0e-7, "sleep_to_awake": 2.0e-7,
                "awake_to_active": 5.0e-7, "active_to_idle": 2.0e-7,
                "idle_to_active": 5.0e-7},
    "memory": {t: 1.0e-7 for t in _TRANSITIONS},
    "transceiver": {"idle_to_sleep": 5.0e-7, "sleep_to_awake": 2.0e-6,
                    "awake_to_active": 1.0e-6, "active_to_idle": 5.0e-7,
                    "idle_to_active": 1.0e-6},
}

# leaf kinds: pos / nonneg numbers, ints, bool
_SCHEMA: dict[str, dict[str, tuple[Any, str]]] = {
    "deployment": {
        "width": (200.0, "pos_float"),
        "height": (200.0, "pos_float"),
        "node_count": (100, "pos_int"),
        "sink_x": (100.0, "nonneg_float"),
        "sink_y": (100.0, "nonneg_float"),
        "tx_radius": (45.0, "pos_float"),
        "sensing_radius": (20.0, "pos_float"),
    },
    "energy": {
        "tx_elec": (4.0e-7, "nonneg_float"),
        "rx_elec": (4.0e-7, "nonneg_float"),
        "tx_amp": (8.0e-10, "nonneg_float"),
        "path_loss_exponent": (2.0, "nonneg_float"),
        "sensing_power_coeff": (1.0e-5, "nonneg_float"),
        "bitrate": (8000.0, "pos_float"),
        "header_bytes": (8, "nonneg_int"),
        "battery_capacity": (0.04, "pos_float"),
        "harvest_rate": (0.0, "nonneg_float"),
    },
    "traffic": {
        "event_rate": (2.0, "nonneg_float"),
        "data_packet_bytes": (64, "pos_int"),
        "max_events": (50_000, "pos_int"),
    },
    "protocol": {
        "selective_alpha": (1.0, "nonneg_float"),
        "selective_beta": (1.0, "nonneg_float"),
        "beacon_bytes": (8, "pos_int"),
        "ack_bytes": (8, "pos_int"),
        "control_bytes": (16, "pos_int"),
        "t_mon": (15.0, "pos_float"),
        "t_sink": (120.0, "pos_float"),
        "queue_capacity": (8, "pos_int"),
        "max_retries": (3, "nonneg_int"),
        "forward_delay": (0.8, "pos_float"),
        "tx_jitter": (0.5, "nonneg_float"),
        "backoff_base": (0.4, "pos_float"),
        "backoff_jitter": (0.3, "nonneg_float"),
        "ack_guard": (0.02, "nonneg_float"),
    },
    "experiment": {
        "max_sim_time": (600.0, "pos_float"),
        "harvest_tick": (60.0, "pos_float"),
        "miss_requery": (True, "bool"),
        "requery_deadline": (60.0, "pos_float"),
        "requery_max": (3, "nonneg_int"),
    },
}


def _check_leaf(path: str, value: Any, kind: str) -> Any:
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: must be a boolean")
        return value
    if kind in ("pos_int", "nonneg_int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: must be an integer")
        if kind == "pos_int" and value <= 0:
            raise ConfigError(f"{path}: must be > 0")
        if kind == "nonneg_int" and value < 0:
            raise ConfigError(f"{path}: must be >= 0")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: must be a number")
    value = float(value)
    if kind == "pos_float" and value <= 0.0:
        raise ConfigError(f"{path}: must be > 0")
    if kind == "nonneg_float" and value < 0.0:
        raise ConfigError(f"{path}: must be >= 0")
    return value


def _check_table(path: str, raw: Any, names: list[str], default: dict) -> dict:
    """Validate a unit -> name -> value nested table."""
    result = {u: dict(default[u]) for u in _UNITS}
    if raw is None:
        return result
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: must be an object")
    for unit, entries in raw.items():
        if unit not in _UNITS:
            raise ConfigError(f"unknown key: {path}.{unit}")
        if not isinstance(entries, dict):
            raise ConfigError(f"{path}.{unit}: must be an object")
        for name, value in entries.items():
            if name not in names:
                raise ConfigError(f"unknown key: {path}.{unit}.{name}")
            result[unit][name] = _check_leaf(f"{path}.{unit}.{name}", value,
                                             "nonneg_float")
    return result


def _check_events(raw: Any) -> tuple | None:
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ConfigError("traffic.events: must be a list of [time, x, y] triples")
    events = []
    for i, item in enumerate(raw):
        if (not isinstance(item, list) or len(item) != 3
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in item)):
            raise ConfigError(f"traffic.events[{i}]: must be a [time, x, y] triple")
        events.append((float(item[0]), float(item[1]), float(item[2])))
    return tuple(events)


def validate_document(doc: Any) -> dict:
    """Check a parsed JSON document against the schema and fill defaults.

    Returns a plain dict with every key present.  Raises ConfigError with
    the offending dotted key path on the first violation found.
    """
    if not isinstance(doc, dict):
        raise ConfigError("top level: must be a JSON object")
    for section in doc:
        if section not in _SCHEMA:
            raise ConfigError(f"unknown key: {section}")
    out: dict[str, Any] = {}
    for section, keys in _SCHEMA.items():
        raw_section = doc.get(section, {})
        if not isinstance(raw_section, dict):
            raise ConfigError(f"{section}: must be an object")
        known_extra = {"energy": ("state_power", "transition_cost"),
                       "traffic": ("events",)}.get(section, ())
        for key in raw_section:
            if key not in keys and key not in known_extra:
                raise ConfigError(f"unknown key: {section}.{key}")
        filled = {}
        for key, (default, kind) in keys.items():
            if key in raw_section:
                filled[key] = _check_leaf(f"{section}.{key}", raw_section[key], kind)
            else:
                filled[key] = default
        out[section] = filled
    out["energy"]["state_power"] = _check_table(
        "energy.state_power", doc.get("energy", {}).get("state_power"),
        _STATES, _DEFAULT_STATE_POWER)
    out["energy"]["transition_cost"] = _check_table(
        "energy.transition_cost", doc.get("energy", {}).get("transition_cost"),
        _TRANSITIONS, _DEFAULT_TRANSITION_COST)
    out["traffic"]["events"] = _check_events(doc.get("traffic", {}).get("events"))
    return out


def default_document() -> dict:
    """The fully defaulted configuration document."""
    return validate_document({})


def build_config(doc: dict, policy: str = "selective") -> SimConfig:
    """Turn a validated document into a SimConfig.

    Cross-field invariants (power ordering, sink inside the area, ...)
    are enforced by the constructed objects; their messages are rewrapped
    with the config section for context.
    """
    dep = doc["deployment"]
    en = doc["energy"]
    tr = doc["traffic"]
    pr = doc["protocol"]
    ex = doc["experiment"]
    state_power = {
        _UNIT_BY_NAME[u]: {_STATE_BY_NAME[s]: v for s, v in states.items()}
        for u, states in en["state_power"].items()
    }
    transition_cost = {
        _UNIT_BY_NAME[u]: {_TRANSITION_BY_NAME[t]: v for t, v in trans.items()}
        for u, trans in en["transition_cost"].items()
    }
    try:
        deployment = Deployment(
            width=dep["width"], height=dep["height"], node_count=dep["node_count"],
            sink_x=dep["sink_x"], sink_y=dep["sink_y"], tx_radius=dep["tx_radius"],
            sensing_radius=dep["sensing_radius"],
        )
    except ValueError as exc:
        raise ConfigError(f"deployment: {exc}") from None
    try:
        params = EnergyParams(
            state_power=state_power, transition_cost=transition_cost,
            tx_elec=en["tx_elec"], rx_elec=en["rx_elec"], tx_amp=en["tx_amp"],
            path_loss_exponent=en["path_loss_exponent"],
            sensing_power_coeff=en["sensing_power_coeff"], bitrate=en["bitrate"],
            header_bytes=en["header_bytes"], battery_capacity=en["battery_capacity"],
            harvest_rate=en["harvest_rate"],
        )
    except ValueError as exc:
        raise ConfigError(f"energy: {exc}") from None
    config = SimConfig(
        deployment=deployment,
        params=params,
        policy=make_policy(policy, pr["selective_alpha"], pr["selective_beta"]),
        event_rate=tr["event_rate"],
        data_packet_bytes=tr["data_packet_bytes"],
        max_events=tr["max_events"],
        events=tr["events"],
        beacon_bytes=pr["beacon_bytes"],
        ack_bytes=pr["ack_bytes"],
        control_bytes=pr["control_bytes"],
        t_mon=pr["t_mon"],
        t_sink=pr["t_sink"],
        queue_capacity=pr["queue_capacity"],
        max_retries=pr["max_retries"],
        forward_delay=pr["forward_delay"],
        tx_jitter=pr["tx_jitter"],
        backoff_base=pr["backoff_base"],
        backoff_jitter=pr["backoff_jitter"],
        ack_guard=pr["ack_guard"],
        max_sim_time=ex["max_sim_time"],
        harvest_tick=ex["harvest_tick"],
        miss_requery=ex["miss_requery"],
        requery_deadline=ex["requery_deadline"],
        requery_max=ex["requery_max"],
    )
    try:
        config.validate()
        config.effective_params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config


def make_policy(name: str, alpha: float = 1.0, beta: float = 1.0):
    if name == "random":
        return RandomPolicy()
    if name == "selective":
        return SelectivePolicy(alpha=alpha, beta=beta)
    raise ConfigError(f"unknown policy {name!r} (expected 'random' or 'selective')")


def load_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return validate_document(doc)


def load_config(path: str, policy: str = "selective") -> SimConfig:
    """Read, default, validate and materialise a configuration file."""
    return build_config(load_document(path), policy)
