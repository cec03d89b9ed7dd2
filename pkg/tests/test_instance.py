import pytest

from mssim.errors import ConfigError, WrongTarget
from mssim.instance import (
    DeadlineVariant,
    InstanceState,
    QueueKind,
    QueuePolicy,
    QueuedStage,
    assign_deadlines_eds,
    assign_deadlines_exds,
)
from mssim.model import CallNode, ClientRequest, InstanceId, StageRequest, iter_nodes


def stage(exec_time, rid=0, arrival=0, deadline=None, target=0):
    return StageRequest(
        request_id=rid,
        target=target,
        exec_time=exec_time,
        depth=0,
        arrival_at_instance=arrival,
        deadline=deadline,
    )


def instance(kind=QueueKind.FCFS, quantum=500, variant=None):
    return InstanceState(InstanceId(0, 0), QueuePolicy(kind, quantum=quantum, variant=variant))


def enq(state, st, now):
    st.arrival_at_instance = now
    return state.enqueue(QueuedStage(stage=st), now)


def test_enqueue_to_idle_starts_immediately():
    inst = instance()
    end = enq(inst, stage(1000), 10)
    assert end == 1010
    assert inst.current is not None


def test_enqueue_to_busy_queues_without_preemption():
    inst = instance()
    enq(inst, stage(1000, rid=0), 0)
    assert enq(inst, stage(5, rid=1), 1) is None
    assert len(inst.queue) == 1
    assert inst.current.stage.request_id == 0


def test_wrong_target_rejected():
    inst = instance()
    with pytest.raises(WrongTarget):
        enq(inst, stage(100, target=3), 0)


def test_fcfs_picks_earliest_arrival():
    inst = instance(QueueKind.FCFS)
    enq(inst, stage(10, rid=9, arrival=0), 0)  # starts
    enq(inst, stage(10, rid=1, arrival=1), 1)
    enq(inst, stage(10, rid=2, arrival=2), 2)
    inst.finish_slice(10)
    assert inst.current.stage.request_id == 1


def test_shortest_first_picks_minimum_remaining():
    inst = instance(QueueKind.SHORTEST_FIRST)
    enq(inst, stage(1, rid=0), 0)  # occupies the instance
    enq(inst, stage(5000, rid=1), 0)
    enq(inst, stage(200, rid=2), 0)
    enq(inst, stage(1000, rid=3), 0)
    inst.finish_slice(1)
    assert inst.current.stage.request_id == 2


def test_early_deadline_picks_earliest_deadline():
    inst = instance(QueueKind.EARLY_DEADLINE)
    enq(inst, stage(1, rid=0), 0)
    enq(inst, stage(10, rid=1, deadline=9000), 0)  # arrives first
    enq(inst, stage(10, rid=2, deadline=7000), 0)
    inst.finish_slice(1)
    assert inst.current.stage.request_id == 2


def test_pick_tie_breaks_by_arrival_then_request_id():
    inst = instance(QueueKind.SHORTEST_FIRST)
    enq(inst, stage(1, rid=0), 0)
    enq(inst, stage(10, rid=7, arrival=0), 0)
    enq(inst, stage(10, rid=3, arrival=0), 0)
    inst.finish_slice(1)
    assert inst.current.stage.request_id == 3


def test_run_to_completion_single_slice():
    inst = instance(QueueKind.FCFS)
    end = enq(inst, stage(1000), 0)
    completed, nxt = inst.finish_slice(end)
    assert completed is not None and completed.stage.remaining == 0
    assert nxt is None
    assert inst.busy_accum == 1000


def test_fair_share_slices_and_requeues():
    inst = instance(QueueKind.FAIR_SHARE, quantum=500)
    end = enq(inst, stage(1200), 0)
    assert end == 500
    completed, nxt = inst.finish_slice(500)
    assert completed is None and nxt == 1000  # requeued, picked again alone
    completed, nxt = inst.finish_slice(1000)
    assert completed is None and nxt == 1200
    completed, nxt = inst.finish_slice(1200)
    assert completed is not None and nxt is None
    assert inst.busy_accum == 1200


def test_fair_share_short_job_single_slice():
    inst = instance(QueueKind.FAIR_SHARE, quantum=500)
    assert enq(inst, stage(300), 0) == 300
    completed, _ = inst.finish_slice(300)
    assert completed is not None


def test_fair_share_requeue_goes_to_tail():
    inst = instance(QueueKind.FAIR_SHARE, quantum=500)
    enq(inst, stage(1200, rid=0), 0)
    enq(inst, stage(300, rid=1), 0)
    _, nxt = inst.finish_slice(500)  # rid 0 requeued behind rid 1
    assert inst.current.stage.request_id == 1
    completed, _ = inst.finish_slice(nxt)
    assert completed.stage.request_id == 1


def test_work_conservation_and_busy_accounting():
    inst = instance(QueueKind.FAIR_SHARE, quantum=500)
    enq(inst, stage(700, rid=0), 0)
    enq(inst, stage(600, rid=1), 0)
    total = 0
    now = 0
    while inst.current is not None:
        now = inst.slice_end
        before = inst.busy_accum
        _, nxt = inst.finish_slice(now)
        total += inst.busy_accum - before
        if inst.current is not None:
            assert len(inst.queue) >= 0  # never idle with non-empty queue
    assert total == inst.busy_accum == 1300
    assert now == 1300


def test_load_view_mid_slice():
    inst = instance(QueueKind.FCFS)
    enq(inst, stage(1000, rid=0), 0)
    enq(inst, stage(400, rid=1), 0)
    v = inst.load_view(300)
    assert v.current_remaining == 700
    assert v.queued_count == 1 and v.queued_exec_sum == 400
    assert inst.busy_time_until(300) == 300


# --- deadline assignment ------------------------------------------------------


def chain_request(execs, created_at=0, sla=3000):
    root = CallNode(stage=StageRequest(request_id=0, target=0, exec_time=execs[0], depth=0))
    node = root
    for d in range(1, len(execs)):
        child = CallNode(
            stage=StageRequest(
                request_id=0, target=d % 2 + 1, exec_time=execs[d], depth=d,
                called_by=node.stage.target,
            )
        )
        node.children = [child]
        node = child
    return ClientRequest(
        request_id=0, created_at=created_at, sla=sla,
        max_depth=len(execs) - 1, root_stages=[root],
    )


def deadlines(req):
    return [n.stage.deadline for n in iter_nodes(req)]


def test_eds_depth_two_worked_example():
    req = chain_request([1000, 1000, 1000], created_at=6000, sla=3000)
    assign_deadlines_eds(req)
    assert deadlines(req) == [7000, 8000, 9000]


def test_eds_depth_zero_gets_full_sla():
    req = chain_request([1000], created_at=6000, sla=3000)
    assign_deadlines_eds(req)
    assert deadlines(req) == [9000]


def test_eds_single_stage_at_origin():
    req = chain_request([1000], created_at=0, sla=3000)
    assign_deadlines_eds(req)
    assert deadlines(req) == [3000]


def test_eds_parallel_tree_divides_by_max_depth():
    # one root with a depth-1 child, plus a second root with no children:
    # the shallow root still gets the max-depth division
    deep = chain_request([100, 100])
    shallow = CallNode(stage=StageRequest(request_id=0, target=2, exec_time=100, depth=0))
    deep.root_stages.append(shallow)
    assign_deadlines_eds(deep)
    assert shallow.stage.deadline == deep.created_at + 1500  # sla/2, not full sla


def test_eds_requires_positive_sla():
    req = chain_request([100], sla=0)
    with pytest.raises(ConfigError):
        assign_deadlines_eds(req)


def test_exds_proportional_worked_example():
    req = chain_request([500, 1000, 500], created_at=100, sla=3000)
    assign_deadlines_exds(req)
    assert deadlines(req) == [100 + 750, 100 + 2250, 100 + 3000]


def test_exds_equal_execs_collapse_to_eds():
    for execs in ([1000, 1000, 1000], [77, 77]):
        a = chain_request(list(execs), created_at=40, sla=3000)
        b = chain_request(list(execs), created_at=40, sla=3000)
        assign_deadlines_eds(a)
        assign_deadlines_exds(b)
        assert deadlines(a) == deadlines(b)


def test_exds_single_stage_gets_full_sla():
    req = chain_request([123], created_at=7, sla=3000)
    assign_deadlines_exds(req)
    assert deadlines(req) == [3007]


def test_exds_parallel_uses_level_max_exec():
    req = chain_request([100, 300])
    sibling = CallNode(
        stage=StageRequest(request_id=0, target=2, exec_time=100, depth=1, called_by=0)
    )
    req.root_stages[0].children.append(sibling)
    assign_deadlines_exds(req)
    # levels: max(100), max(300, 100) -> prefixes 100, 400 of total 400
    ds = deadlines(req)
    assert ds[0] == 750  # 3000 * 100/400
    assert ds[1] == 3000 and ds[2] == 3000
