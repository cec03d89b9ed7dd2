import io
import math

import numpy as np
import pytest

from mssim.errors import EmptyInput, InvalidMetric
from mssim.metrics import (
    MetricsCollector,
    ecdf,
    imbalance,
    ks_distance,
    make_record,
    percentile,
    slowdown,
    utilization,
    write_requests_csv,
)
from mssim.model import InstanceId


def test_slowdown_arithmetic():
    assert slowdown(2000, 1000) == 2.0
    assert slowdown(1000, 1000) == 1.0


def test_slowdown_rejects_impossible_inputs():
    with pytest.raises(InvalidMetric):
        slowdown(500, 1000)
    with pytest.raises(InvalidMetric):
        slowdown(500, 0)


def test_record_identity_total_eq_wait_plus_exec():
    r = make_record(1, "stage", created_at=100, completed_at=450, exec_time=200)
    assert r.total == r.wait + r.exec == 350
    assert r.slowdown == 350 / 200


def test_utilization_saturated_and_idle():
    assert utilization([1000], 1000) == 1.0
    assert utilization([1000, 0], 1000) == 0.5
    assert utilization([0, 0], 1000) == 0.0


def test_utilization_rejects_empty_window():
    with pytest.raises(InvalidMetric):
        utilization([], 100)
    with pytest.raises(InvalidMetric):
        utilization([1], 0)


def test_imbalance_identical_instances_is_zero():
    assert imbalance(np.array([[0.4, 0.6], [0.4, 0.6]])) == 0.0


def test_imbalance_polarized_pair_is_half():
    assert imbalance(np.array([[1.0, 1.0], [0.0, 0.0]])) == 0.5


def test_imbalance_is_mean_of_interval_stddevs():
    # intervals with population stddevs 0.2 and 0.4
    arr = np.array([[0.5, 0.9], [0.1, 0.1]])
    assert imbalance(arr) == pytest.approx(0.3)


def test_imbalance_needs_two_instances():
    with pytest.raises(InvalidMetric):
        imbalance(np.array([[0.5, 0.5]]))


def test_ecdf_basic():
    assert ecdf([1, 2, 3]) == [(1, 1 / 3), (2, 2 / 3), (3, 1.0)]
    assert ecdf([5, 5, 5]) == [(5, 1.0)]


def test_ecdf_non_decreasing_ends_at_one():
    rng = np.random.default_rng(1)
    pts = ecdf(rng.lognormal(1.0, 0.7, size=5000))
    fs = [f for _, f in pts]
    assert fs == sorted(fs)
    assert fs[-1] == 1.0


def test_ecdf_empty_rejected():
    with pytest.raises(EmptyInput):
        ecdf([])


def test_percentile_matches_analytic_lognormal_quantile():
    mu, sigma = 1.0, 0.7
    rng = np.random.default_rng(12)
    xs = rng.lognormal(mu, sigma, size=10_000)
    analytic = math.exp(mu + 2.3263478740408408 * sigma)
    assert abs(percentile(xs, 0.99) - analytic) / analytic < 0.05


def test_ks_distance_identical_samples_is_zero():
    xs = [1.0, 2.0, 5.0]
    assert ks_distance(xs, xs) == 0.0
    assert ks_distance([0.0], [1.0]) == 1.0


def test_collector_window_utilization_and_report():
    ids = [InstanceId(0, 0), InstanceId(0, 1)]
    col = MetricsCollector(ids)
    # instance 0 busy the whole first window, idle the second; instance 1 idle
    col.snapshot("util", 100, [100, 0])
    col.snapshot("util", 200, [100, 0])
    assert col.utilization_by_ms() == {0: pytest.approx(0.25)}
    col.snapshot("imb", 100, [100, 0])
    col.snapshot("imb", 200, [100, 0])
    assert col.imbalance_by_ms() == {0: pytest.approx(0.25)}  # mean of 0.5 and 0

    col.record_client(0, 0, 150, 100)
    col.record_stage(0, 0, 150, 100)
    col.record_stage(0, 10, 20, 10)
    report = col.finalize_report(200, 200, seed=3, lb_policy="round_robin", queue_policy="fcfs")
    assert report.stage_requests >= report.client_requests
    assert report.client_slowdown["mean"] == pytest.approx(1.5)


def test_report_serialization_is_deterministic():
    ids = [InstanceId(0, 0)]

    def build():
        col = MetricsCollector(ids)
        col.record_client(0, 0, 300, 100)
        col.snapshot("util", 100, [50])
        return col.finalize_report(100, 100, 1, "greedy", "fcfs").to_json()

    assert build() == build()


def test_empty_run_report_is_valid():
    col = MetricsCollector([InstanceId(0, 0)])
    report = col.finalize_report(100, 100, 1, "round_robin", "fcfs")
    assert report.client_requests == 0
    assert report.client_slowdown is None
    assert "client_requests" in report.to_json()


def test_requests_csv_shape():
    col = MetricsCollector([InstanceId(0, 0)])
    col.record_client(3, 10, 40, 20)
    buf = io.StringIO()
    write_requests_csv(col.client_records, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "request_id,scope,created_at,completed_at,total_us,exec_us,wait_us,slowdown"
    assert lines[1] == "3,client,10,40,30,20,10,1.5"
