"""What a demonstration dataset really costs.

An imitation learner looks cheap if only its own training is counted.  Adding
the energy spent training the policies that produced its data changes the
ranking, which is the point of charging a training sample cost.
"""

from agentperf.datacost import (
    classify_expertise,
    fit_expertise_bands,
    total_energy_cost,
    training_sample_cost,
)
from agentperf.ingest import parse_dataset_manifest

manifest = """{"datasets": [
  {"dataset_id": "ariane-intermediate", "policy_train_energies_kwh": [48.28], "expertise": "intermediate"}
]}"""
(dataset,) = parse_dataset_manifest(manifest)
print(f"training sample cost of {dataset.dataset_id}: {training_sample_cost(dataset):.2f} kWh")

runs = {"BC": (training_sample_cost(dataset), 0.11), "DDQN": (0.0, 108.20), "PPO": (0.0, 120.53)}
for algo, (sample, own) in runs.items():
    cost = total_energy_cost(sample, own)
    print(f"{algo:>5}: own training {own:7.2f} kWh, total {cost.total_kwh:7.2f} kWh")

# Expertise of a demonstrator is judged against a population of agents.
population = [-1.31, -1.24, -1.18, -1.12, -1.05, -1.02, -0.99, -0.97]
bands = fit_expertise_bands(population)
print(f"\nbands: mean {bands.mean:.3f}, std {bands.std:.3f}")
for r in (-1.30, -1.10, -0.98):
    print(f"median return {r:+.2f} -> {classify_expertise(bands, r)}")
