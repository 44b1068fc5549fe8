"""Published Ariane netlist results (CircuitTraining-v0), averaged over ten seeds.

Used as a golden fixture for report rendering.  ``None`` spread means the
table printed a bare value.
"""

from __future__ import annotations

from .model import MetricReport
from .report import build_report

TASK = "Ariane"
ALGORITHMS = ("BC", "DDQN", "PPO")

ARIANE_TRAINING = {
    "BC": {
        "data_cost": {"Training Sample Cost": (48.28, None)},
        "application": {
            "Generalization (100 eps. [all tasks])": (-2.18, None),
            "Returns (100 eps.)": (-1.10, 0.04),
        },
        "system": {
            "Energy Consumed (kWh)": (0.11, 6.45e-04),
            "GPU Power Usage (W)": (211.35, 16.76),
            "Mean RAM Usage (GB)": (4.72, 0.53),
            "Peak RAM Usage (GB)": (5.25, 0.07),
            "Wall Clock Time (Hours)": (0.48, 2.61e-03),
        },
    },
    "DDQN": {
        "data_cost": {"Training Sample Cost": (0.0, None)},
        "application": {
            "Generalization (100 eps. [all tasks])": (-2.19, None),
            "Returns (100 eps.)": (-1.13, 0.04),
        },
        "reliability": {
            "Dispersion Across Runs (IQR)": (0.03, 0.03),
            "Dispersion Within Runs (IQR)": (0.02, 0.03),
            "Long Term Risk (CVaR)": (1.20, None),
            "Risk Across Runs (CVaR)": (-1.17, None),
            "Short Term Risk (CVaR)": (0.07, None),
        },
        "system": {
            "Energy Consumed (kWh)": (108.20, 4.29),
            "GPU Power Usage (W)": (585.98, 172.50),
            "Mean RAM Usage (GB)": (849.37, 64.85),
            "Peak RAM Usage (GB)": (889.56, 23.44),
            "Wall Clock Time (Hours)": (21.94, 0.90),
        },
    },
    "PPO": {
        "data_cost": {"Training Sample Cost": (0.0, None)},
        "application": {
            "Generalization (100 eps. [all tasks])": (-2.05, None),
            "Returns (100 eps.)": (-0.99, 7.25e-03),
        },
        "reliability": {
            "Dispersion Across Runs (IQR)": (0.04, 0.02),
            "Dispersion Within Runs (IQR)": (4.77e-03, 4.92e-03),
            "Long Term Risk (CVaR)": (0.03, None),
            "Risk Across Runs (CVaR)": (-1.03, None),
            "Short Term Risk (CVaR)": (0.01, None),
        },
        "system": {
            "Energy Consumed (kWh)": (120.53, 2.78),
            "GPU Power Usage (W)": (692.94, 120.08),
            "Mean RAM Usage (GB)": (834.05, 55.90),
            "Peak RAM Usage (GB)": (906.45, 68.01),
            "Wall Clock Time (Hours)": (23.95, 0.54),
        },
    },
}

ARIANE_INFERENCE = {
    "BC": {
        "reliability": {
            "Dispersion Across Rollouts (IQR)": (0.01, None),
            "Risk Across Rollouts (CVaR)": (-1.23, None),
        },
        "system": {
            "GPU Power Usage (W)": (136.91, 21.48),
            "Inference Time (ms)": (10.0, 0.46),
            "Mean RAM Usage (GB)": (2.19, 0.21),
            "Peak RAM Usage (GB)": (2.29, 0.01),
        },
    },
    "DDQN": {
        "reliability": {
            "Dispersion Across Rollouts (IQR)": (0.05, None),
            "Risk Across Rollouts (CVaR)": (-1.25, None),
        },
        "system": {
            "GPU Power Usage (W)": (69.50, 4.60),
            "Inference Time (ms)": (20.0, 2.69),
            "Mean RAM Usage (GB)": (2.15, 0.30),
            "Peak RAM Usage (GB)": (2.28, 0.13),
        },
    },
    "PPO": {
        "reliability": {
            "Dispersion Across Rollouts (IQR)": (0.01, None),
            "Risk Across Rollouts (CVaR)": (-1.01, None),
        },
        "system": {
            "GPU Power Usage (W)": (49.43, 30.29),
            "Inference Time (ms)": (20.0, 2.68),
            "Mean RAM Usage (GB)": (2.51, 0.49),
            "Peak RAM Usage (GB)": (2.71, 0.62),
        },
    },
}


def ariane_reports() -> list[MetricReport]:
    """Six reports: training then inference for BC, DDQN and PPO."""
    out = []
    for phase, table in (("training", ARIANE_TRAINING), ("inference", ARIANE_INFERENCE)):
        for algo in ALGORITHMS:
            out.append(build_report(phase, task_id=TASK, algorithm_id=algo, **table[algo]))
    return out
