"""mssim: deterministic discrete-event simulator for microservice applications."""

from .config import SimConfig, load_config
from .engine import Engine, Event, EventKind, RngStream, make_streams
from .gateway import LbPolicy, Registry
from .instance import DeadlineVariant, QueueKind, QueuePolicy
from .metrics import (
    RequestRecord,
    SimReport,
    ecdf,
    imbalance,
    ks_distance,
    percentile,
    slowdown,
    utilization,
    write_ecdf_csv,
    write_requests_csv,
)
from .oracle import Mg1Params, OracleStage, brute_force_schedule, mg1_fcfs_mean_wait
from .simulation import SimResult, Simulation, run_simulation
from .workload import (
    ArrivalModel,
    CommunicationModel,
    DepthModel,
    ExecModel,
    ExecUnit,
    RoutingModel,
    WorkloadModel,
    export_trace,
    read_trace_csv,
    replay_trace,
    write_trace_csv,
)

__all__ = [
    "ArrivalModel",
    "CommunicationModel",
    "DeadlineVariant",
    "DepthModel",
    "Engine",
    "Event",
    "EventKind",
    "ExecModel",
    "ExecUnit",
    "LbPolicy",
    "Mg1Params",
    "OracleStage",
    "QueueKind",
    "QueuePolicy",
    "Registry",
    "RequestRecord",
    "RngStream",
    "RoutingModel",
    "SimConfig",
    "SimReport",
    "SimResult",
    "Simulation",
    "WorkloadModel",
    "brute_force_schedule",
    "ecdf",
    "export_trace",
    "imbalance",
    "ks_distance",
    "load_config",
    "make_streams",
    "mg1_fcfs_mean_wait",
    "percentile",
    "read_trace_csv",
    "replay_trace",
    "run_simulation",
    "slowdown",
    "utilization",
    "write_ecdf_csv",
    "write_requests_csv",
    "write_trace_csv",
]

__version__ = "0.1.0"
