"""Training-sample cost accounting and dataset expertise bands.

Costs are kWh throughout.  A ``unit`` label can be carried alongside for
callers that account in other units, but nothing is converted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DatasetDescriptor

TRAINING_SAMPLE_COST = "Training Sample Cost"
TOTAL_ENERGY_COST = "Total Energy Cost (kWh)"
ENERGY_CONSUMED = "Energy Consumed (kWh)"


class CostError(ValueError):
    pass


@dataclass(frozen=True)
class CostBreakdown:
    training_sample_cost_kwh: float
    training_energy_kwh: float
    total_kwh: float
    unit: str = "kWh"


@dataclass(frozen=True)
class ExpertiseBands:
    mean: float
    std: float


def training_sample_cost(dataset: DatasetDescriptor) -> float:
    """Average energy spent training the policies that generated ``dataset``."""
    energies = dataset.policy_train_energies_kwh
    if not energies:
        raise CostError(f"dataset {dataset.dataset_id!r} lists no policy training energies")
    if any(e < 0 or not math.isfinite(e) for e in energies):
        raise CostError(f"dataset {dataset.dataset_id!r} has a negative or non-finite energy")
    # math.fsum keeps the mean independent of list order
    return math.fsum(energies) / len(energies)


def total_training_sample_cost(datasets) -> float:
    """Sum of per-dataset costs; zero for methods that use no offline data."""
    return math.fsum(training_sample_cost(d) for d in datasets)


def total_energy_cost(sample_cost_kwh: float, training_energy_kwh: float, unit: str = "kWh") -> CostBreakdown:
    for name, v in (("sample_cost_kwh", sample_cost_kwh), ("training_energy_kwh", training_energy_kwh)):
        if not math.isfinite(v) or v < 0:
            raise CostError(f"{name} must be finite and non-negative, got {v}")
    return CostBreakdown(sample_cost_kwh, training_energy_kwh, sample_cost_kwh + training_energy_kwh, unit)


def fit_expertise_bands(median_returns) -> ExpertiseBands:
    """Mean and population standard deviation of saved-policy median returns."""
    x = np.asarray(median_returns, dtype=np.float64)
    if x.size < 2:
        raise CostError("expertise bands need at least 2 median returns")
    if not np.all(np.isfinite(x)):
        raise CostError("median returns must be finite")
    return ExpertiseBands(float(x.mean()), float(x.std()))


def classify_expertise(bands: ExpertiseBands, median_return: float) -> str:
    """Label a policy by where its median return falls relative to the bands.

    expert: r >= mean + std; intermediate: mean - std <= r < mean + std;
    novice: r < mean - std.
    """
    if bands.std < 0:
        raise CostError("std must be non-negative")
    if median_return >= bands.mean + bands.std:
        return "expert"
    if median_return >= bands.mean - bands.std:
        return "intermediate"
    return "novice"
