"""Reliability of a learner across seeds, step by step.

Builds ten synthetic training curves, then walks through each reliability
metric so the numbers can be read next to the curves that produced them.
"""

import numpy as np

from agentperf.ingest import FixtureProfile, generate_fixture_runset
from agentperf.model import RolloutSet
from agentperf.reliability import (
    ReliabilityConfig,
    dispersion_across_runs,
    dispersion_within_runs,
    inference_metrics,
    long_term_risk,
    risk_across_runs,
    short_term_risk,
)

cfg = ReliabilityConfig()  # alpha 0.05, window 5

smooth = generate_fixture_runset(FixtureProfile(n=10, T=100, noise=0.01, seed=1))
jumpy = generate_fixture_runset(FixtureProfile(n=10, T=100, noise=0.2, seed=1))

print("metric                          smooth      jumpy")
for label, fn in [("dispersion within runs (IQR)", dispersion_within_runs),
                  ("dispersion across runs (IQR)", dispersion_across_runs)]:
    (a, _), (b, _) = fn(smooth, cfg), fn(jumpy, cfg)
    print(f"{label:<30}{a:>8.4f}{b:>11.4f}")
for label, fn in [("short-term risk (CVaR)", short_term_risk),
                  ("long-term risk (CVaR)", long_term_risk),
                  ("risk across runs (CVaR)", risk_across_runs)]:
    print(f"{label:<30}{fn(smooth, cfg):>8.4f}{fn(jumpy, cfg):>11.4f}")

# A flat curve has nothing to be unreliable about.
flat = generate_fixture_runset(FixtureProfile(n=3, T=20, shape="constant", start=0.5))
print("\nflat curves, short-term risk:", short_term_risk(flat, cfg))

# Rollouts of a trained policy: the worst 5% of returns sets the risk.
returns = np.random.default_rng(0).normal(-1.0, 0.05, 100)
for name, (value, _) in inference_metrics(RolloutSet("demo", "ppo", tuple(returns.tolist())), cfg).items():
    print(f"{name}: {value:.4f}")
