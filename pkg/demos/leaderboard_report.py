"""From metric reports to a leaderboard table and a radar chart.

Uses the bundled Ariane results to render the comparison table, then
normalizes a few axes so that bigger is always better on a radar plot.
"""

import json

from agentperf.fixtures import ariane_reports
from agentperf.report import radar_data, render, submission_bundle

reports = ariane_reports()
print(render(reports, "markdown"))

training = [r for r in reports if r.phase == "training"]
axes = ["Returns (100 eps.)", "Energy Consumed (kWh)", "Wall Clock Time (Hours)", "Training Sample Cost"]
radar = radar_data(training, axes)
print("radar (1 = best on that axis):")
for algo, values in radar.series.items():
    print(f"  {algo:>5}: " + "  ".join(f"{v:.2f}" for v in values))

config = {"cpu_model": "AMD EPYC 7B12", "gpu_model": "NVIDIA A100", "framework": "TensorFlow 2.15",
          "runtime_version": "Python 3.10", "os": "Ubuntu 22.04", "num_seeds": 10,
          "hyperparameters": {"learning_rate": 3e-4}}
bundle = json.loads(submission_bundle(reports, config))
print(f"\nbundle {bundle['schema']} with {len(bundle['reports'])} reports")
