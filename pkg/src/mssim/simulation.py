"""Experiment execution: wires engine, gateway, instances, and metrics together.

Arrivals are admitted up to end_time; when draining is enabled, admitted
requests run to completion past the cutoff (the report keeps the drain
span separate). Trace rows are recorded at stage invocation time, so the
export of a run replays to the same schedule under identical policies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .config import SimConfig
from .engine import Engine, Event, EventKind, SimTime, make_streams
from .errors import ConfigError
from .gateway import (
    LbPolicy,
    Registry,
    select_greedy,
    select_least_connection,
)
from .instance import (
    DeadlineVariant,
    InstanceState,
    QueueKind,
    QueuedStage,
    assign_deadlines,
)
from .metrics import MetricsCollector, RequestRecord, SimReport
from .model import (
    CallNode,
    ClientRequest,
    InstanceId,
    critical_path_exec,
    stage_count,
)
from .workload import TraceRow, build_client_request


@dataclass(slots=True)
class _LiveRequest:
    """Per-client-request bookkeeping while its stages are in flight."""

    request_id: int
    created_at: SimTime
    crit_exec: SimTime
    pending: int  # stages not yet completed


@dataclass
class SimResult:
    report: SimReport
    client_records: list[RequestRecord]
    stage_records: list[RequestRecord]
    trace_rows: list[TraceRow]

    @property
    def records(self) -> list[RequestRecord]:
        return self.client_records + self.stage_records


def _queue_policy_name(cfg: SimConfig) -> str:
    qp = cfg.queue_policy
    if qp.kind is QueueKind.EARLY_DEADLINE:
        return qp.variant.value
    return qp.kind.value


class Simulation:
    def __init__(
        self,
        cfg: SimConfig,
        replay: Optional[Sequence[ClientRequest]] = None,
        collect_trace: Optional[bool] = None,
    ):
        cfg.validate()
        self.cfg = cfg
        self.engine = Engine()
        self.registry = Registry()
        self.instances: dict[InstanceId, InstanceState] = {}
        # instances are deployed before the simulation starts; no scaling
        for ms, count in enumerate(cfg.microservices):
            for slot in range(count):
                iid = InstanceId(ms, slot)
                self.registry.register(iid)
                self.instances[iid] = InstanceState(iid, cfg.queue_policy)
        self.collector = MetricsCollector(list(self.instances))
        self.trace_rows: list[TraceRow] = []
        if collect_trace is None:
            collect_trace = cfg.trace_out is not None
        self.collect_trace = collect_trace
        self._next_request_id = 0
        self._replay_iter: Optional[Iterator[ClientRequest]] = None
        if replay is not None:
            ordered = sorted(replay, key=lambda r: (r.created_at, r.request_id))
            self._replay_iter = iter(ordered)
            self.streams = None
        else:
            self.streams = make_streams(cfg.seed)
        self._deadline_variant: Optional[DeadlineVariant] = None
        if cfg.queue_policy.kind is QueueKind.EARLY_DEADLINE:
            self._deadline_variant = cfg.queue_policy.variant

    # -- event handlers --------------------------------------------------------

    def _dispatch_event(self, event: Event) -> None:
        kind = event.kind
        if kind is EventKind.EXECUTION_SLICE_COMPLETE:
            self._on_slice_complete(event)
        elif kind is EventKind.REQUEST_ARRIVAL:
            self._on_arrival(event)
        elif kind is EventKind.UTILIZATION_SAMPLE:
            self._on_sample(event)

    def _schedule_next_arrival(self, now: SimTime) -> None:
        if self._replay_iter is not None:
            req = next(self._replay_iter, None)
            if req is not None and req.created_at <= self.cfg.end_time:
                self.engine.schedule(
                    Event(req.created_at, EventKind.REQUEST_ARRIVAL, req)
                )
        else:
            from .workload import sample_interarrival

            gap = sample_interarrival(self.cfg.arrival, self.streams["arrival"])
            if now + gap <= self.cfg.end_time:
                self.engine.schedule(
                    Event(now + gap, EventKind.REQUEST_ARRIVAL, None)
                )

    def _on_arrival(self, event: Event) -> None:
        now = self.engine.now
        self._schedule_next_arrival(now)
        req: Optional[ClientRequest] = event.payload
        if req is None:
            req = build_client_request(
                self._next_request_id, now, self.cfg.workload(), self.streams
            )
            self._next_request_id += 1
        if self._deadline_variant is not None:
            if req.sla <= 0:  # replayed trees carry no SLA of their own
                req.sla = self.cfg.sla
            assign_deadlines(req, self._deadline_variant)
        live = _LiveRequest(
            request_id=req.request_id,
            created_at=req.created_at,
            crit_exec=critical_path_exec(req),
            pending=stage_count(req),
        )
        for root in req.root_stages:
            self._dispatch_stage(root, live, now)

    def _select_instance(self, ms: int, now: SimTime) -> InstanceId:
        if self.cfg.lb_policy is LbPolicy.ROUND_ROBIN:
            return self.registry.select_round_robin(ms)
        views = [
            self.instances[iid].load_view(now) for iid in self.registry.instances(ms)
        ]
        if self.cfg.lb_policy is LbPolicy.LEAST_CONNECTION:
            return select_least_connection(views)
        return select_greedy(views)

    def _dispatch_stage(self, node: CallNode, live: _LiveRequest, now: SimTime) -> None:
        stage = node.stage
        iid = self._select_instance(stage.target, now)
        stage.arrival_at_instance = now  # zero gateway delay
        if self.collect_trace:
            self.trace_rows.append(
                TraceRow(
                    request_id=stage.request_id,
                    timestamp=now,
                    called_ms=stage.target,
                    exetime=stage.exec_time,
                    hops_done=stage.depth,
                    called_by=stage.called_by,
                )
            )
        state = self.instances[iid]
        item = QueuedStage(stage=stage, children=tuple(node.children), client=live)
        slice_end = state.enqueue(item, now)
        if slice_end is not None:
            self.engine.schedule(
                Event(slice_end, EventKind.EXECUTION_SLICE_COMPLETE, state)
            )

    def _on_slice_complete(self, event: Event) -> None:
        now = self.engine.now
        state: InstanceState = event.payload
        completed, next_end = state.finish_slice(now)
        if completed is not None:
            stage = completed.stage
            self.collector.record_stage(
                stage.request_id, stage.arrival_at_instance, now, stage.exec_time
            )
            live: _LiveRequest = completed.client
            # forward-only asynchronous communication: children go out now,
            # the instance is already free
            for child in completed.children:
                self._dispatch_stage(child, live, now)
            live.pending -= 1
            if live.pending == 0:
                self.collector.record_client(
                    live.request_id, live.created_at, now, live.crit_exec
                )
        if next_end is not None:
            self.engine.schedule(
                Event(next_end, EventKind.EXECUTION_SLICE_COMPLETE, state)
            )

    def _on_sample(self, event: Event) -> None:
        now = self.engine.now
        kind, interval = event.payload
        busy = [self.instances[iid].busy_time_until(now) for iid in self.collector.instance_ids]
        self.collector.snapshot(kind, now, busy)
        nxt = now + interval
        if nxt <= self.cfg.end_time:
            self.engine.schedule(
                Event(nxt, EventKind.UTILIZATION_SAMPLE, (kind, interval))
            )
        elif now < self.cfg.end_time:
            # final partial window up to the cutoff
            self.engine.schedule(
                Event(self.cfg.end_time, EventKind.UTILIZATION_SAMPLE, (kind, interval))
            )

    # -- run ---------------------------------------------------------------------

    def run(self) -> SimResult:
        cfg = self.cfg
        self._schedule_next_arrival(0)
        for kind, interval in (
            ("util", cfg.utilization_interval),
            ("imb", cfg.imbalance_interval),
        ):
            first = min(interval, cfg.end_time)
            self.engine.schedule(
                Event(first, EventKind.UTILIZATION_SAMPLE, (kind, interval))
            )
        self.engine.run_until(cfg.end_time, self._dispatch_event)
        drain_until = cfg.end_time
        if cfg.drain:
            drain_until = max(cfg.end_time, self.engine.drain(self._dispatch_event))
        report = self.collector.finalize_report(
            end_time=cfg.end_time,
            drain_until=drain_until,
            seed=cfg.seed,
            lb_policy=cfg.lb_policy.value,
            queue_policy=_queue_policy_name(cfg),
        )
        return SimResult(
            report=report,
            client_records=self.collector.client_records,
            stage_records=self.collector.stage_records,
            trace_rows=sorted(
                self.trace_rows, key=lambda r: (r.timestamp, r.request_id, r.hops_done)
            ),
        )


def run_simulation(
    cfg: SimConfig,
    replay: Optional[Sequence[ClientRequest]] = None,
    collect_trace: Optional[bool] = None,
) -> SimResult:
    """Run one simulation; replay bypasses all workload samplers."""
    if replay is None and cfg.trace_in is not None:
        from .workload import read_trace_csv, replay_trace

        with open(cfg.trace_in, encoding="utf-8") as fp:
            replay = replay_trace(read_trace_csv(fp))
    return Simulation(cfg, replay=replay, collect_trace=collect_trace).run()
