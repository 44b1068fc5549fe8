import math
import random
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agentperf import ingest
from agentperf.model import TelemetrySample, TelemetryTrace, validate
from agentperf.telemetry import (
    MonitorConfig,
    RaplReader,
    TelemetryError,
    energy_consumed,
    measure_latencies,
    monitor,
    summarize,
)

ALLOC = str(Path(__file__).parent / "helpers" / "alloc.py")
GIB = 1 << 30


def trace(points, wall=None):
    samples = tuple(TelemetrySample(t, cpu, gpu, ram) for t, cpu, gpu, ram in points)
    return TelemetryTrace(samples, wall if wall is not None else samples[-1].t_s - samples[0].t_s)


def test_constant_power_hour():
    tr = trace([(float(t), 100.0, 0.0, 0) for t in range(3601)])
    assert energy_consumed(tr) == pytest.approx(0.1, abs=1e-12)


def test_linear_ramp_hour():
    tr = trace([(float(t), 100.0 * t / 3600, 0.0, 0) for t in range(3601)])
    assert energy_consumed(tr) == pytest.approx(0.05, abs=1e-12)


def test_gpu_power_counts_toward_energy():
    tr = trace([(0.0, 50.0, 50.0, 0), (3600.0, 50.0, 50.0, 0)])
    assert energy_consumed(tr) == pytest.approx(0.1)


def test_single_sample_energy_error():
    with pytest.raises(TelemetryError):
        energy_consumed(trace([(0.0, 1.0, 0.0, 0)]))


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 500), st.floats(0, 500)), min_size=3, max_size=40),
       st.integers(1, 38))
def test_energy_additive_over_split(steps, cut):
    t = 0.0
    pts = []
    for dt, cpu, gpu in steps:
        t += dt
        pts.append((t, cpu, gpu, 0))
    cut = min(cut, len(pts) - 2)
    whole = energy_consumed(trace(pts))
    left = energy_consumed(trace(pts[:cut + 1]))
    right = energy_consumed(trace(pts[cut:]))
    assert left + right == pytest.approx(whole, rel=1e-9, abs=1e-12)


def test_summary_ram_and_latency():
    s = summarize(trace([(0.0, 10.0, 0.0, 1_000_000_000), (1.0, 30.0, 0.0, 3_000_000_000)]), [10, 10, 10])
    assert s.mean_ram_gb == 2.0 and s.peak_ram_gb == 3.0
    assert s.mean_power_w == 20.0 and s.peak_power_w == 30.0
    assert s.inference_time_ms == (10.0, 0.0)


def test_summary_matches_single_pass_oracle():
    rng = random.Random(5)
    pts, t, p, ram = [], 0.0, 100.0, 2e9
    for _ in range(1000):
        t += rng.uniform(0.5, 1.5)
        p = max(0.0, p + rng.gauss(0, 5))
        ram = max(0.0, ram + rng.gauss(0, 1e7))
        pts.append((t, p, p / 4, int(ram)))
    s = summarize(trace(pts))
    n = len(pts)
    ram_sum = ram_max = pow_sum = pow_max = joules = 0.0
    for i, (ti, cpu, gpu, r) in enumerate(pts):
        ram_sum += r
        ram_max = max(ram_max, r)
        pow_sum += cpu + gpu
        pow_max = max(pow_max, cpu + gpu)
        if i:
            tp, cp, gp, _ = pts[i - 1]
            joules += (ti - tp) * (cpu + gpu + cp + gp) / 2
    assert s.mean_ram_gb == pytest.approx(ram_sum / n / 1e9, rel=1e-9)
    assert s.peak_ram_gb == pytest.approx(ram_max / 1e9, rel=1e-9)
    assert s.mean_power_w == pytest.approx(pow_sum / n, rel=1e-9)
    assert s.peak_power_w == pytest.approx(pow_max, rel=1e-9)
    assert s.energy_kwh == pytest.approx(joules / 3.6e6, rel=1e-9)
    assert s.wall_clock_hours == pytest.approx((pts[-1][0] - pts[0][0]) / 3600)


def test_peak_order_invariant():
    pts = [(float(i), float(w), 0.0, r) for i, (w, r) in enumerate([(5, 9), (50, 1), (7, 40)])]
    shuffled = [(float(i), w, 0.0, r) for i, (_, w, _, r) in enumerate(reversed(pts))]
    a, b = summarize(trace(pts)), summarize(trace(shuffled))
    assert (a.peak_power_w, a.peak_ram_gb) == (b.peak_power_w, b.peak_ram_gb)


def test_empty_trace_rejected():
    with pytest.raises(TelemetryError):
        summarize(TelemetryTrace((), 0.0))


def test_monitor_config_floor():
    with pytest.raises(ValueError):
        MonitorConfig(interval_s=0.01)


def test_rapl_reader_absent_root(tmp_path):
    assert not RaplReader(str(tmp_path)).available


def test_rapl_reader_counts_and_wraps(tmp_path):
    zone = tmp_path / "intel-rapl:0"
    zone.mkdir()
    (zone / "max_energy_range_uj").write_text("1000000\n")
    counter = zone / "energy_uj"
    counter.write_text("900000\n")
    r = RaplReader(str(tmp_path))
    assert r.available
    assert r.power(0.0) == 0.0
    counter.write_text("100000\n")  # wrapped: 0.2 J over 2 s
    assert r.power(2.0) == pytest.approx(0.1)


# --- live processes ----------------------------------------------------------

def test_monitor_sleep_wall_clock():
    tr, status = monitor(["sleep", "3"], MonitorConfig(interval_s=1.0, cpu_power_source="tdp_model", tdp_watts=40.0))
    assert status == 0
    assert len(tr.samples) >= 2
    assert 3.0 <= tr.wall_clock_s <= 3.5
    assert validate(tr) == []
    # degenerate integrator: constant nameplate watts over the whole lifetime
    assert energy_consumed(tr) * 3.6e6 == pytest.approx(40.0 * tr.wall_clock_s, rel=1e-12)
    assert summarize(tr).estimated


def test_monitor_overhead_budget():
    tr, _ = monitor(["sleep", "2"], MonitorConfig(interval_s=1.0, cpu_power_source="tdp_model"))
    assert tr.wall_clock_s <= 2.0 * 1.05


def test_monitor_reports_exit_status():
    _, status = monitor([sys.executable, "-c", "raise SystemExit(7)"], MonitorConfig(interval_s=0.1))
    assert status == 7


def test_monitor_spawn_failure():
    with pytest.raises(TelemetryError, match="spawn"):
        monitor(["/nonexistent/binary-xyz"])


def test_monitor_gpu_hook_and_failure_note():
    cfg = MonitorConfig(interval_s=0.2, cpu_power_source="tdp_model", gpu_power_command="echo 150.5")
    tr, _ = monitor(["sleep", "0.5"], cfg)
    assert {s.gpu_power_w for s in tr.samples} == {150.5}
    cfg = MonitorConfig(interval_s=0.2, cpu_power_source="tdp_model", gpu_power_command="echo watts")
    tr, status = monitor(["sleep", "0.5"], cfg)
    assert status == 0
    assert any("GPU power command failed" in n for n in tr.notes)


def test_monitor_peak_ram_one_gib():
    cfg = MonitorConfig(interval_s=0.2, cpu_power_source="tdp_model")
    base, _ = monitor([sys.executable, ALLOC, "0", "1.0"], cfg)
    loaded, status = monitor([sys.executable, ALLOC, str(GIB), "1.5"], cfg)
    assert status == 0
    baseline = max(s.ram_bytes for s in base.samples)
    peak = max(s.ram_bytes for s in loaded.samples)
    assert abs(peak - (baseline + GIB)) <= 0.1 * GIB


def test_monitor_counts_process_tree():
    code = f"import subprocess, sys; subprocess.run([sys.executable, {ALLOC!r}, str(256 << 20), '1.0'])"
    cfg = MonitorConfig(interval_s=0.2, cpu_power_source="tdp_model")
    tree, _ = monitor([sys.executable, "-c", code], cfg)
    solo, _ = monitor([sys.executable, "-c", code], MonitorConfig(interval_s=0.2, cpu_power_source="tdp_model",
                                                                 include_process_tree=False))
    assert max(s.ram_bytes for s in tree.samples) > max(s.ram_bytes for s in solo.samples) + (200 << 20)


def test_monitor_trace_serializes():
    tr, _ = monitor(["sleep", "0.3"], MonitorConfig(interval_s=0.1, cpu_power_source="tdp_model"))
    back = ingest.parse_telemetry(ingest.write_telemetry(tr).splitlines(keepends=True))
    assert back.samples == tr.samples
    assert back.wall_clock_s == tr.wall_clock_s


def test_latencies_known_sleep():
    lat = measure_latencies(["sleep", "0.05"], iterations=5)
    assert len(lat) == 5
    assert all(50.0 <= x <= 80.0 for x in lat)


def test_latencies_exclude_warmup():
    assert len(measure_latencies(["true"], iterations=3, warmup=2)) == 3


def test_latencies_scale_with_sleep():
    short = sum(measure_latencies(["sleep", "0.05"], 3)) / 3
    long = sum(measure_latencies(["sleep", "0.1"], 3)) / 3
    assert 1.5 < long / short < 2.5


def test_latencies_failure_aborts():
    with pytest.raises(TelemetryError):
        measure_latencies(["false"], 3)
