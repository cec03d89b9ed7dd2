"""Usage monitor: per-request records, utilization, imbalance, ECDF, report."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import SimTime
from .errors import EmptyInput, InvalidMetric
from .model import InstanceId, MicroserviceId


@dataclass(slots=True)
class RequestRecord:
    request_id: int
    scope: str  # "client" or "stage"
    created_at: SimTime  # creation (client) or arrival at instance (stage)
    completed_at: SimTime
    total: SimTime  # completed_at - created_at
    exec: SimTime  # critical-path exec (client) or stage exec (stage)
    wait: SimTime  # total - exec
    slowdown: float


def slowdown(total: SimTime, exec_time: SimTime) -> float:
    """Total time in system divided by pure execution time; 1.0 means no queueing."""
    if exec_time <= 0:
        raise InvalidMetric("execution time must be > 0")
    if total < exec_time:
        raise InvalidMetric(f"total {total} < exec {exec_time}")
    return total / exec_time


def make_record(
    request_id: int, scope: str, created_at: SimTime, completed_at: SimTime, exec_time: SimTime
) -> RequestRecord:
    total = completed_at - created_at
    return RequestRecord(
        request_id=request_id,
        scope=scope,
        created_at=created_at,
        completed_at=completed_at,
        total=total,
        exec=exec_time,
        wait=total - exec_time,
        slowdown=slowdown(total, exec_time),
    )


def utilization(busy_in_window: Sequence[SimTime], window_us: SimTime) -> float:
    """Sum of instance busy time in the window / (window length x instance count)."""
    if window_us <= 0 or not busy_in_window:
        raise InvalidMetric("utilization needs a non-empty window and instance set")
    return float(sum(busy_in_window)) / (window_us * len(busy_in_window))


def imbalance(per_interval_utils: np.ndarray) -> float:
    """Mean over intervals of the population std of per-instance utilization.

    `per_interval_utils` has shape (instances, intervals).
    """
    arr = np.asarray(per_interval_utils, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise InvalidMetric("imbalance needs at least 2 instances")
    if arr.shape[1] < 1:
        raise InvalidMetric("imbalance needs at least 1 sampling interval")
    return float(arr.std(axis=0, ddof=0).mean())


def ecdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Sorted unique x with F(x) = fraction of values <= x; F(max) == 1."""
    if len(values) == 0:
        raise EmptyInput("ecdf of empty input")
    arr = np.sort(np.asarray(values, dtype=float))
    xs, counts = np.unique(arr, return_counts=True)
    fs = np.cumsum(counts) / arr.size
    return list(zip(xs.tolist(), fs.tolist()))


def percentile(values: Sequence[float], q: float) -> float:
    """Empirical quantile: smallest x with F(x) >= q."""
    if len(values) == 0:
        raise EmptyInput("percentile of empty input")
    return float(np.quantile(np.asarray(values, dtype=float), q, method="inverted_cdf"))


def ks_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Kolmogorov distance between two empirical distributions."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptyInput("ks distance of empty sample")
    xs = np.concatenate([a, b])
    fa = np.searchsorted(a, xs, side="right") / a.size
    fb = np.searchsorted(b, xs, side="right") / b.size
    return float(np.abs(fa - fb).max())


@dataclass
class SimReport:
    """Aggregate results of one simulation run."""

    client_requests: int
    stage_requests: int
    end_time: SimTime
    drain_until: SimTime
    seed: int
    lb_policy: str
    queue_policy: str
    client_slowdown: Optional[dict] = None  # mean / p50 / p99
    stage_slowdown: Optional[dict] = None
    utilization_by_ms: dict = field(default_factory=dict)
    imbalance_by_ms: dict = field(default_factory=dict)

    def to_json(self) -> str:
        """Deterministic serialization with stable key ordering."""
        doc = {
            "client_requests": self.client_requests,
            "stage_requests": self.stage_requests,
            "end_time_us": self.end_time,
            "drain_until_us": self.drain_until,
            "seed": self.seed,
            "lb_policy": self.lb_policy,
            "queue_policy": self.queue_policy,
            "slowdown": {
                "client": self.client_slowdown,
                "stage": self.stage_slowdown,
            },
            "utilization": {str(k): v for k, v in sorted(self.utilization_by_ms.items())},
            "imbalance": {str(k): v for k, v in sorted(self.imbalance_by_ms.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class MetricsCollector:
    """Single-threaded recorder fed by the engine; finalization is pure."""

    def __init__(self, instance_ids: Sequence[InstanceId]):
        self.instance_ids = list(instance_ids)
        self.client_records: list[RequestRecord] = []
        self.stage_records: list[RequestRecord] = []
        # snapshot series: (time, cumulative busy per instance)
        self.util_snapshots: list[tuple[SimTime, list[SimTime]]] = []
        self.imbalance_snapshots: list[tuple[SimTime, list[SimTime]]] = []

    def record_client(
        self, request_id: int, created_at: SimTime, completed_at: SimTime, exec_time: SimTime
    ) -> None:
        self.client_records.append(
            make_record(request_id, "client", created_at, completed_at, exec_time)
        )

    def record_stage(
        self, request_id: int, arrived_at: SimTime, completed_at: SimTime, exec_time: SimTime
    ) -> None:
        self.stage_records.append(
            make_record(request_id, "stage", arrived_at, completed_at, exec_time)
        )

    def snapshot(self, kind: str, at: SimTime, busy_cum: list[SimTime]) -> None:
        series = self.util_snapshots if kind == "util" else self.imbalance_snapshots
        series.append((at, busy_cum))

    # -- finalization --------------------------------------------------------

    def _window_utils(
        self, snapshots: list[tuple[SimTime, list[SimTime]]]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Per-instance utilization per window, from cumulative busy snapshots.

        Returns (utils with shape (instances, windows), window lengths).
        """
        n = len(self.instance_ids)
        if not snapshots:
            return np.zeros((n, 0)), np.zeros(0)
        times = np.array([0] + [t for t, _ in snapshots], dtype=float)
        busy = np.vstack(
            [np.zeros(n)] + [np.asarray(b, dtype=float) for _, b in snapshots]
        )
        lengths = np.diff(times)
        deltas = np.diff(busy, axis=0).T  # (instances, windows)
        keep = lengths > 0
        return deltas[:, keep] / lengths[keep], lengths[keep]

    def utilization_by_ms(self) -> dict[MicroserviceId, float]:
        """Mean over sampling windows of each microservice's utilization."""
        utils, _ = self._window_utils(self.util_snapshots)
        if utils.shape[1] == 0:
            return {}
        out: dict[MicroserviceId, float] = {}
        for ms in sorted({i.ms for i in self.instance_ids}):
            rows = [k for k, inst in enumerate(self.instance_ids) if inst.ms == ms]
            out[ms] = float(utils[rows].sum(axis=0).mean() / len(rows))
        return out

    def imbalance_by_ms(self) -> dict[MicroserviceId, float]:
        """Imbalance for every microservice with at least two instances."""
        utils, _ = self._window_utils(self.imbalance_snapshots)
        if utils.shape[1] == 0:
            return {}
        out: dict[MicroserviceId, float] = {}
        for ms in sorted({i.ms for i in self.instance_ids}):
            rows = [k for k, inst in enumerate(self.instance_ids) if inst.ms == ms]
            if len(rows) < 2:
                continue
            out[ms] = imbalance(utils[rows])
        return out

    def finalize_report(
        self,
        end_time: SimTime,
        drain_until: SimTime,
        seed: int,
        lb_policy: str,
        queue_policy: str,
    ) -> SimReport:
        def summary(records: list[RequestRecord]) -> Optional[dict]:
            if not records:
                return None
            vals = [r.slowdown for r in records]
            return {
                "mean": float(np.mean(vals)),
                "p50": percentile(vals, 0.50),
                "p99": percentile(vals, 0.99),
            }

        return SimReport(
            client_requests=len(self.client_records),
            stage_requests=len(self.stage_records),
            end_time=end_time,
            drain_until=drain_until,
            seed=seed,
            lb_policy=lb_policy,
            queue_policy=queue_policy,
            client_slowdown=summary(self.client_records),
            stage_slowdown=summary(self.stage_records),
            utilization_by_ms=self.utilization_by_ms(),
            imbalance_by_ms=self.imbalance_by_ms(),
        )


REQUESTS_CSV_HEADER = [
    "request_id",
    "scope",
    "created_at",
    "completed_at",
    "total_us",
    "exec_us",
    "wait_us",
    "slowdown",
]


def write_requests_csv(records: Sequence[RequestRecord], fp: io.TextIOBase) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(REQUESTS_CSV_HEADER)
    for r in records:
        writer.writerow(
            [
                r.request_id,
                r.scope,
                r.created_at,
                r.completed_at,
                r.total,
                r.exec,
                r.wait,
                repr(r.slowdown),
            ]
        )


def write_ecdf_csv(values: Sequence[float], fp: io.TextIOBase) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["x", "f"])
    for x, f in ecdf(values):
        writer.writerow([repr(x), repr(f)])
