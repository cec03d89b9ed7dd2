"""Independent validation oracles.

Closed-form M/G/1 mean wait (Pollaczek-Khinchine) and a brute-force
single-instance scheduler that time-steps at 1 us resolution, sharing no
code with the event engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import UnstableSystem
from .instance import QueueKind, QueuePolicy


@dataclass(frozen=True)
class Mg1Params:
    lam: float  # arrival rate, 1/us
    es: float  # mean service time, us
    es2: float  # second moment of service time, us^2


def mg1_fcfs_mean_wait(p: Mg1Params) -> float:
    """Mean FCFS queueing delay: lambda * E[S^2] / (2 * (1 - rho))."""
    rho = p.lam * p.es
    if rho >= 1.0:
        raise UnstableSystem(f"rho = {rho:.4f} >= 1")
    return p.lam * p.es2 / (2.0 * (1.0 - rho))


@dataclass(frozen=True)
class OracleStage:
    """One stage of a brute-force scenario; request_id doubles as the tie id."""

    arrival: int
    exec_time: int
    request_id: int
    deadline: Optional[int] = None


def brute_force_schedule(
    stages: Sequence[OracleStage], policy: QueuePolicy
) -> list[tuple[int, int]]:
    """Per-stage (first start, completion) on a single instance.

    Direct 1 us time-stepping, independent of the event engine. At each
    microsecond: admit arrivals (starting immediately when idle), then end
    a finished slice, then pick the next stage per policy.
    """
    n = len(stages)
    assert n <= 100, "oracle is for small scenarios only"
    if n == 0:
        return []

    remaining = [s.exec_time for s in stages]
    order = sorted(range(n), key=lambda i: (stages[i].arrival, i))
    queue: list[int] = []  # indices, insertion order
    first_start: list[Optional[int]] = [None] * n
    completion: list[Optional[int]] = [None] * n
    fair_share = policy.kind is QueueKind.FAIR_SHARE

    def pick() -> int:
        if fair_share:
            pos = 0
        elif policy.kind is QueueKind.FCFS:
            pos = min(
                range(len(queue)),
                key=lambda j: (stages[queue[j]].arrival, stages[queue[j]].request_id, j),
            )
        elif policy.kind is QueueKind.SHORTEST_FIRST:
            pos = min(
                range(len(queue)),
                key=lambda j: (
                    remaining[queue[j]],
                    stages[queue[j]].arrival,
                    stages[queue[j]].request_id,
                    j,
                ),
            )
        else:  # early deadline
            pos = min(
                range(len(queue)),
                key=lambda j: (
                    stages[queue[j]].deadline,
                    stages[queue[j]].arrival,
                    stages[queue[j]].request_id,
                    j,
                ),
            )
        return queue.pop(pos)

    def start(idx: int, t: int) -> int:
        if first_start[idx] is None:
            first_start[idx] = t
        return min(remaining[idx], policy.quantum) if fair_share else remaining[idx]

    t = 0
    next_i = 0
    running: Optional[int] = None
    slice_left = 0
    done = 0
    while done < n:
        # admissions; an idle instance starts the newcomer immediately
        while next_i < n and stages[order[next_i]].arrival == t:
            queue.append(order[next_i])
            next_i += 1
            if running is None:
                running = pick()
                slice_left = start(running, t)
        # slice completion
        if running is not None and slice_left == 0:
            if remaining[running] == 0:
                completion[running] = t
                done += 1
            else:
                queue.append(running)  # fair-share requeue at the tail
            running = None
        if running is None and queue:
            running = pick()
            slice_left = start(running, t)
        if done == n:
            break
        t += 1
        if running is not None:
            remaining[running] -= 1
            slice_left -= 1

    return [(first_start[i], completion[i]) for i in range(n)]  # type: ignore[misc]
