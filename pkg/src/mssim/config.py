"""Simulation configuration: defaults, JSON loading, validation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

from .engine import SimTime
from .errors import ConfigError, ParseError, ValidationError
from .gateway import LbPolicy
from .instance import DeadlineVariant, QueueKind, QueuePolicy
from .workload import (
    ArrivalModel,
    CommunicationModel,
    DepthModel,
    ExecModel,
    ExecUnit,
    RoutingModel,
    WorkloadModel,
)

_DURATION_RE = re.compile(r"^\s*(\d+)\s*(us|ms|s|h)?\s*$")
_UNIT_US = {"us": 1, "ms": 1_000, "s": 1_000_000, "h": 3_600_000_000, None: 1}


def parse_duration(value: Union[int, str], field_path: str = "duration") -> SimTime:
    """Integer microseconds, or a string with suffix us/ms/s/h."""
    if isinstance(value, int):
        return value
    m = _DURATION_RE.match(str(value))
    if not m:
        raise ValidationError(field_path, f"not a duration: {value!r}")
    return int(m.group(1)) * _UNIT_US[m.group(2)]


DEFAULT_WEIGHTS = (0.62, 0.18, 0.08, 0.12)


@dataclass
class SimConfig:
    end_time: SimTime = 24 * 3_600_000_000  # 24 h
    seed: int = 1
    sla: SimTime = 4_000_000  # 4 s
    arrival: ArrivalModel = field(default_factory=lambda: ArrivalModel(1066))
    exec_model: ExecModel = field(
        default_factory=lambda: ExecModel(mu=4.13, sigma=3.48, unit=ExecUnit.MILLIS)
    )
    depth: DepthModel = field(
        default_factory=lambda: DepthModel(outcomes=((0, 0.5), (2, 0.5)))
    )
    routing: RoutingModel = field(
        default_factory=lambda: RoutingModel(call_probabilities=DEFAULT_WEIGHTS)
    )
    communication: CommunicationModel = field(
        default_factory=lambda: CommunicationModel(comm_probabilities=DEFAULT_WEIGHTS)
    )
    lb_policy: LbPolicy = LbPolicy.ROUND_ROBIN
    queue_policy: QueuePolicy = field(
        default_factory=lambda: QueuePolicy(QueueKind.FCFS)
    )
    microservices: tuple[int, ...] = (4, 2, 1, 1)  # instance count per microservice
    utilization_interval: SimTime = 3_600_000_000  # 1 h
    imbalance_interval: SimTime = 300_000_000  # 5 min
    drain: bool = True
    trace_in: Optional[str] = None
    trace_out: Optional[str] = None

    def workload(self) -> WorkloadModel:
        return WorkloadModel(
            arrival=self.arrival,
            exec=self.exec_model,
            depth=self.depth,
            routing=self.routing,
            communication=self.communication,
            sla=self.sla,
        )

    def validate(self) -> None:
        if self.end_time <= 0:
            raise ValidationError("end_time", "must be > 0")
        if not self.microservices:
            raise ValidationError("microservices", "must list at least one microservice")
        if any(c < 1 for c in self.microservices):
            raise ValidationError("microservices", "instance counts must be >= 1")
        if self.utilization_interval <= 0:
            raise ValidationError("utilization_interval", "must be > 0")
        if self.imbalance_interval <= 0:
            raise ValidationError("imbalance_interval", "must be > 0")
        try:
            self.workload().validate(len(self.microservices))
        except ConfigError as e:
            raise ValidationError("workload", str(e)) from e


_QUEUE_KINDS = {
    "fcfs": (QueueKind.FCFS, None),
    "shortest_first": (QueueKind.SHORTEST_FIRST, None),
    "fair_share": (QueueKind.FAIR_SHARE, None),
    "eds": (QueueKind.EARLY_DEADLINE, DeadlineVariant.EDS),
    "exds": (QueueKind.EARLY_DEADLINE, DeadlineVariant.EXDS),
}


def _queue_policy_from(value: Any, path: str) -> QueuePolicy:
    if isinstance(value, str):
        kind_name, quantum = value, 500
    elif isinstance(value, dict):
        kind_name = value.get("kind", "fcfs")
        quantum = parse_duration(value.get("quantum", 500), f"{path}.quantum")
    else:
        raise ValidationError(path, f"expected string or object, got {type(value).__name__}")
    if kind_name not in _QUEUE_KINDS:
        raise ValidationError(path, f"unknown queue policy {kind_name!r}")
    kind, variant = _QUEUE_KINDS[kind_name]
    if quantum <= 0:
        raise ValidationError(f"{path}.quantum", "must be > 0")
    return QueuePolicy(kind=kind, quantum=quantum, variant=variant)


def _lb_policy_from(value: Any, path: str) -> LbPolicy:
    try:
        return LbPolicy(value)
    except ValueError:
        raise ValidationError(path, f"unknown load balancer {value!r}") from None


def _depth_from(value: Any, path: str) -> DepthModel:
    if not isinstance(value, dict) or not value:
        raise ValidationError(path, "expected a non-empty {depth: probability} object")
    try:
        outcomes = tuple(sorted((int(k), float(v)) for k, v in value.items()))
    except (TypeError, ValueError):
        raise ValidationError(path, "keys must be integers, values numbers") from None
    return DepthModel(outcomes=outcomes)


def config_from_dict(doc: dict) -> SimConfig:
    """Build a validated SimConfig, filling built-in defaults for absent keys."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "config must be a JSON object")
    cfg = SimConfig()
    known = {
        "end_time", "seed", "sla", "arrival", "exec", "depth", "routing",
        "communication", "lb_policy", "queue_policy", "microservices",
        "utilization_interval", "imbalance_interval", "drain",
        "trace_in", "trace_out",
    }
    for key in doc:
        if key not in known:
            raise ValidationError(key, "unknown config key")

    if "end_time" in doc:
        cfg.end_time = parse_duration(doc["end_time"], "end_time")
    if "seed" in doc:
        if not isinstance(doc["seed"], int):
            raise ValidationError("seed", "must be an integer")
        cfg.seed = doc["seed"]
    if "sla" in doc:
        cfg.sla = parse_duration(doc["sla"], "sla")
    if "arrival" in doc:
        mean = doc["arrival"].get("mean_interarrival")
        if mean is None:
            raise ValidationError("arrival.mean_interarrival", "required")
        cfg.arrival = ArrivalModel(parse_duration(mean, "arrival.mean_interarrival"))
    if "exec" in doc:
        e = doc["exec"]
        try:
            unit = ExecUnit(e.get("unit", "ms"))
        except ValueError:
            raise ValidationError("exec.unit", f"unknown unit {e.get('unit')!r}") from None
        cfg.exec_model = ExecModel(
            mu=float(e.get("mu", 4.13)), sigma=float(e.get("sigma", 3.48)), unit=unit
        )
    if "depth" in doc:
        cfg.depth = _depth_from(doc["depth"], "depth")
    if "microservices" in doc:
        ms = doc["microservices"]
        if not isinstance(ms, list) or not all(isinstance(c, int) for c in ms):
            raise ValidationError("microservices", "must be a list of instance counts")
        cfg.microservices = tuple(ms)
    n_ms = len(cfg.microservices)
    if "routing" in doc:
        r = doc["routing"]
        cfg.routing = RoutingModel(
            call_probabilities=tuple(float(w) for w in r.get("call_probabilities", [])),
            fanout=int(r.get("fanout", 1)),
        )
    elif n_ms != len(cfg.routing.call_probabilities):
        cfg.routing = RoutingModel(call_probabilities=(1.0 / n_ms,) * n_ms)
    if "communication" in doc:
        c = doc["communication"]
        cfg.communication = CommunicationModel(
            comm_probabilities=tuple(float(w) for w in c.get("comm_probabilities", [])),
            fanout=int(c.get("fanout", 1)),
        )
    elif n_ms != len(cfg.communication.comm_probabilities):
        cfg.communication = CommunicationModel(comm_probabilities=(1.0 / n_ms,) * n_ms)
    if "lb_policy" in doc:
        cfg.lb_policy = _lb_policy_from(doc["lb_policy"], "lb_policy")
    if "queue_policy" in doc:
        cfg.queue_policy = _queue_policy_from(doc["queue_policy"], "queue_policy")
    if "utilization_interval" in doc:
        cfg.utilization_interval = parse_duration(
            doc["utilization_interval"], "utilization_interval"
        )
    if "imbalance_interval" in doc:
        cfg.imbalance_interval = parse_duration(
            doc["imbalance_interval"], "imbalance_interval"
        )
    if "drain" in doc:
        if not isinstance(doc["drain"], bool):
            raise ValidationError("drain", "must be a boolean")
        cfg.drain = doc["drain"]
    if "trace_in" in doc:
        cfg.trace_in = doc["trace_in"]
    if "trace_out" in doc:
        cfg.trace_out = doc["trace_out"]

    try:
        cfg.validate()
    except ValidationError:
        raise
    except ConfigError as e:
        raise ValidationError("<config>", str(e)) from e
    return cfg


def load_config(path: Union[str, Path]) -> SimConfig:
    """Load and validate a JSON config file; absent keys take built-in defaults."""
    text = Path(path).read_text(encoding="utf-8")
    if text.strip() == "":
        doc: dict = {}
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e}") from e
    return config_from_dict(doc)
