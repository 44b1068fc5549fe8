"""Subprocess resource monitoring and system metrics.

:func:`monitor` runs a command while a sampling loop records power draw and
resident memory of the child's process tree.  CPU power comes from the Linux
powercap (RAPL) energy counters when readable, otherwise from a constant
nameplate-watts model; GPU power comes from an optional external command
that prints watts.  :func:`summarize` turns a trace into the system metrics.

Peak RAM is the maximum over samples, so it is a lower bound on the true
instantaneous peak: spikes shorter than the sampling interval are missed.
"""

from __future__ import annotations

import glob
import logging
import math
import os
import shlex
import subprocess
import time
from dataclasses import dataclass

import numpy as np
import psutil

from .model import TelemetrySample, TelemetryTrace

log = logging.getLogger(__name__)

J_PER_KWH = 3.6e6
BYTES_PER_GB = 1e9
MIN_INTERVAL_S = 0.1


class TelemetryError(RuntimeError):
    pass


@dataclass(frozen=True)
class MonitorConfig:
    interval_s: float = 1.0
    cpu_power_source: str = "hardware_counter"
    tdp_watts: float = 65.0
    gpu_power_command: str | None = None
    include_process_tree: bool = True

    def __post_init__(self):
        if not self.interval_s >= MIN_INTERVAL_S:
            raise ValueError(f"interval_s must be >= {MIN_INTERVAL_S}, got {self.interval_s}")
        if self.cpu_power_source not in ("hardware_counter", "tdp_model"):
            raise ValueError(f"unknown cpu_power_source {self.cpu_power_source!r}")
        if not self.tdp_watts > 0:
            raise ValueError("tdp_watts must be positive")


@dataclass(frozen=True)
class SystemSummary:
    energy_kwh: float
    mean_power_w: float
    peak_power_w: float
    mean_gpu_power_w: float
    mean_ram_gb: float
    peak_ram_gb: float
    wall_clock_hours: float
    inference_time_ms: tuple[float, float] | None = None
    estimated: bool = False

    def as_metrics(self) -> dict[str, tuple[float, float | None]]:
        """Report rows for this summary (single run, so no spread)."""
        out = {
            "Energy Consumed (kWh)": (self.energy_kwh, None),
            "GPU Power Usage (W)": (self.mean_gpu_power_w, None),
            "Mean Power Draw (W)": (self.mean_power_w, None),
            "Peak Power Draw (W)": (self.peak_power_w, None),
            "Mean RAM Usage (GB)": (self.mean_ram_gb, None),
            "Peak RAM Usage (GB)": (self.peak_ram_gb, None),
            "Wall Clock Time (Hours)": (self.wall_clock_hours, None),
        }
        if self.inference_time_ms is not None:
            out["Inference Time (ms)"] = self.inference_time_ms
        return out


class RaplReader:
    """Package energy from ``/sys/class/powercap/intel-rapl:N/energy_uj``."""

    def __init__(self, root: str = "/sys/class/powercap"):
        self.paths = sorted(p for p in glob.glob(os.path.join(root, "intel-rapl:*", "energy_uj"))
                            if p.count(":") == 1)
        self.max_range = {}
        for p in self.paths:
            try:
                with open(os.path.join(os.path.dirname(p), "max_energy_range_uj")) as fh:
                    self.max_range[p] = int(fh.read())
            except (OSError, ValueError):
                self.max_range[p] = 2**32
        self._last: dict[str, int] | None = None
        self._last_t: float | None = None

    @property
    def available(self) -> bool:
        if not self.paths:
            return False
        try:
            self._read()
        except OSError:
            return False
        return True

    def _read(self) -> dict[str, int]:
        out = {}
        for p in self.paths:
            with open(p) as fh:
                out[p] = int(fh.read())
        return out

    def power(self, t: float) -> float:
        """Average watts since the previous call; 0 on the first call."""
        now = self._read()
        watts = 0.0
        if self._last is not None and t > self._last_t:
            joules = 0.0
            for p, uj in now.items():
                delta = uj - self._last[p]
                if delta < 0:  # counter wrapped
                    delta += self.max_range[p]
                joules += delta / 1e6
            watts = joules / (t - self._last_t)
        self._last, self._last_t = now, t
        return watts


def _tree_rss(proc: psutil.Process, include_tree: bool) -> int:
    total = 0
    procs = [proc]
    if include_tree:
        try:
            procs += proc.children(recursive=True)
        except psutil.Error:
            pass
    for p in procs:
        try:
            total += p.memory_info().rss
        except psutil.Error:
            pass
    return total


def _gpu_power(command: str, timeout: float) -> float:
    out = subprocess.run(shlex.split(command), capture_output=True, text=True, timeout=timeout, check=True)
    watts = float(out.stdout.strip())
    if not math.isfinite(watts) or watts < 0:
        raise ValueError(f"GPU power command printed {watts}")
    return watts


def monitor(command, config: MonitorConfig = MonitorConfig()) -> tuple[TelemetryTrace, int]:
    """Run ``command`` to completion while sampling; return ``(trace, exit status)``.

    A sample is taken right after spawn, every ``interval_s`` while the child
    runs, and once at exit.  The exit sample carries the last observed RAM
    (the exited child has none) so the trace spans the full wall clock.
    Sampler failures are recorded in ``trace.notes``; they never kill the child.
    """
    argv = list(command)
    if not argv:
        raise TelemetryError("empty command")
    notes: list[str] = []
    rapl = None
    if config.cpu_power_source == "hardware_counter":
        rapl = RaplReader()
        if not rapl.available:
            rapl = None
            notes.append("estimated: no readable hardware energy counter, using tdp_model")
    else:
        notes.append("estimated: tdp_model")

    try:
        start = time.monotonic()
        child = subprocess.Popen(argv)
    except OSError as exc:
        raise TelemetryError(f"failed to spawn {argv[0]!r}: {exc}") from exc
    try:
        ps_child = psutil.Process(child.pid)
    except psutil.Error:
        ps_child = None

    samples: list[TelemetrySample] = []
    last_ram = 0
    gpu_failed = False

    def take(t: float, alive: bool):
        nonlocal last_ram, gpu_failed
        if alive and ps_child is not None:
            ram = _tree_rss(ps_child, config.include_process_tree)
            last_ram = ram if ram else last_ram
        cpu = config.tdp_watts
        if rapl is not None:
            try:
                cpu = rapl.power(t)
            except OSError as exc:
                notes.append(f"t={t:.3f}: energy counter read failed: {exc}")
        gpu = 0.0
        if config.gpu_power_command and not gpu_failed:
            try:
                gpu = _gpu_power(config.gpu_power_command, config.interval_s)
            except (OSError, ValueError, subprocess.SubprocessError) as exc:
                notes.append(f"t={t:.3f}: GPU power command failed: {exc}")
                gpu_failed = True
        samples.append(TelemetrySample(t, cpu, gpu, last_ram))

    status = None
    try:
        take(0.0, True)
        while True:
            try:
                status = child.wait(timeout=config.interval_s)
                break
            except subprocess.TimeoutExpired:
                take(time.monotonic() - start, True)
    finally:
        if status is None:
            child.kill()
            status = child.wait()
    wall = time.monotonic() - start
    take(wall, False)
    if rapl is not None and len(samples) > 1:
        # first counter reading has no predecessor; back-fill it from the next
        s0, s1 = samples[0], samples[1]
        samples[0] = TelemetrySample(s0.t_s, s1.cpu_power_w, s0.gpu_power_w, s0.ram_bytes)
    return TelemetryTrace(tuple(samples), wall, tuple(notes)), status


def energy_consumed(trace: TelemetryTrace) -> float:
    """Trapezoidal integral of CPU + GPU power over time, in kWh."""
    if len(trace.samples) < 2:
        raise TelemetryError("energy integration needs at least 2 samples")
    t = np.array([s.t_s for s in trace.samples])
    p = np.array([s.cpu_power_w + s.gpu_power_w for s in trace.samples])
    joules = float(np.sum(np.diff(t) * (p[1:] + p[:-1]) / 2.0))
    return joules / J_PER_KWH


def summarize(trace: TelemetryTrace, inference_latencies_ms=None) -> SystemSummary:
    if not trace.samples:
        raise TelemetryError("empty trace")
    ram = np.array([s.ram_bytes for s in trace.samples], dtype=np.float64)
    power = np.array([s.cpu_power_w + s.gpu_power_w for s in trace.samples])
    gpu = np.array([s.gpu_power_w for s in trace.samples])
    energy = energy_consumed(trace) if len(trace.samples) >= 2 else 0.0
    latency = None
    if inference_latencies_ms is not None:
        lat = np.asarray(inference_latencies_ms, dtype=np.float64)
        if lat.size == 0:
            raise TelemetryError("empty latency list")
        latency = (float(lat.mean()), float(lat.std()))
    return SystemSummary(
        energy_kwh=energy,
        mean_power_w=float(power.mean()),
        peak_power_w=float(power.max()),
        mean_gpu_power_w=float(gpu.mean()),
        mean_ram_gb=float(ram.mean() / BYTES_PER_GB),
        peak_ram_gb=float(ram.max() / BYTES_PER_GB),
        wall_clock_hours=trace.wall_clock_s / 3600.0,
        inference_time_ms=latency,
        estimated=any(n.startswith("estimated") for n in trace.notes),
    )


def measure_latencies(command, iterations: int, warmup: int = 0) -> list[float]:
    """Wall-clock milliseconds of ``iterations`` runs of ``command`` after ``warmup`` discarded runs.

    Raises :class:`TelemetryError` if any run exits nonzero; no partial list is returned.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    argv = list(command)
    out = []
    for i in range(warmup + iterations):
        t0 = time.monotonic()
        try:
            rc = subprocess.run(argv).returncode
        except OSError as exc:
            raise TelemetryError(f"failed to run {argv[0]!r}: {exc}") from exc
        elapsed = (time.monotonic() - t0) * 1000.0
        if rc != 0:
            raise TelemetryError(f"step command exited {rc} on iteration {i}")
        if i >= warmup:
            out.append(elapsed)
    return out
