"""Energy and memory of a child process.

Runs a short Python workload under the monitor.  Without hardware energy
counters the CPU draw falls back to a nameplate model, and the summary says so.
"""

import sys

from agentperf.telemetry import MonitorConfig, monitor, summarize

workload = "x = bytearray(200 * 1024 * 1024); import time; time.sleep(1.5)"
trace, status = monitor([sys.executable, "-c", workload], MonitorConfig(interval_s=0.25))
for note in trace.notes:
    print("note:", note)

summary = summarize(trace)
print(f"exit status {status}, {len(trace.samples)} samples over {trace.wall_clock_s:.2f} s")
print(f"energy {summary.energy_kwh * 3.6e6:.1f} J, mean power {summary.mean_power_w:.1f} W"
      f"{' (estimated)' if summary.estimated else ''}")
print(f"peak RAM {summary.peak_ram_gb:.3f} GB, mean RAM {summary.mean_ram_gb:.3f} GB")
