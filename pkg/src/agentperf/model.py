"""Shared domain types and their validation.

All types are frozen dataclasses holding tuples, so they are safe to share
across threads.  Constructors do not check invariants; call :func:`validate`
to get the list of violations for any record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Mapping

import numpy as np

PHASES = ("training", "inference")
CATEGORIES = ("data_cost", "application", "reliability", "system")
EXPERTISE_LEVELS = ("novice", "intermediate", "expert")
PRIMITIVE_KINDS = ("active", "passive", "control")
CONTROL_PRIMITIVES = ("new_page", "stop")
CONFIG_FIELDS = ("cpu_model", "gpu_model", "framework", "runtime_version", "os")


@dataclass(frozen=True)
class MetricSpec:
    name: str
    category: str
    lower_is_better: bool
    # display decimals for the value cell; None means the default rule
    decimals: int | None = None


# Row names of the reference results table, plus three rows for the
# total-cost and power-draw figures the harness also reports.
METRIC_REGISTRY: dict[str, MetricSpec] = {
    m.name: m
    for m in (
        MetricSpec("Training Sample Cost", "data_cost", True),
        MetricSpec("Total Energy Cost (kWh)", "data_cost", True),
        MetricSpec("Generalization (100 eps. [all tasks])", "application", False),
        MetricSpec("Returns (100 eps.)", "application", False),
        MetricSpec("Dispersion Across Runs (IQR)", "reliability", True),
        MetricSpec("Dispersion Within Runs (IQR)", "reliability", True),
        MetricSpec("Long Term Risk (CVaR)", "reliability", True),
        MetricSpec("Risk Across Runs (CVaR)", "reliability", False),
        MetricSpec("Short Term Risk (CVaR)", "reliability", True),
        MetricSpec("Dispersion Across Rollouts (IQR)", "reliability", True),
        MetricSpec("Risk Across Rollouts (CVaR)", "reliability", False),
        MetricSpec("Energy Consumed (kWh)", "system", True),
        MetricSpec("GPU Power Usage (W)", "system", True),
        MetricSpec("Mean Power Draw (W)", "system", True),
        MetricSpec("Peak Power Draw (W)", "system", True),
        MetricSpec("Mean RAM Usage (GB)", "system", True),
        MetricSpec("Peak RAM Usage (GB)", "system", True),
        MetricSpec("Wall Clock Time (Hours)", "system", True),
        MetricSpec("Inference Time (ms)", "system", True, decimals=1),
    )
}


@dataclass(frozen=True)
class CurvePoint:
    step: int
    value: float
    wall_time_s: float | None = None


@dataclass(frozen=True)
class TrainingCurve:
    run_id: str
    points: tuple[CurvePoint, ...]

    @property
    def steps(self) -> np.ndarray:
        return np.array([p.step for p in self.points], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=np.float64)

    @classmethod
    def from_arrays(cls, run_id, steps, values) -> "TrainingCurve":
        return cls(run_id, tuple(CurvePoint(int(s), float(v)) for s, v in zip(steps, values)))


@dataclass(frozen=True)
class RunSet:
    task_id: str
    algorithm_id: str
    runs: tuple[TrainingCurve, ...]

    @property
    def n(self) -> int:
        return len(self.runs)


@dataclass(frozen=True)
class RolloutSet:
    task_id: str
    algorithm_id: str
    returns: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.returns)


@dataclass(frozen=True)
class TelemetrySample:
    t_s: float
    cpu_power_w: float
    gpu_power_w: float
    ram_bytes: int


@dataclass(frozen=True)
class TelemetryTrace:
    samples: tuple[TelemetrySample, ...]
    wall_clock_s: float
    # sampler failures and power-source caveats recorded during monitoring
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetDescriptor:
    dataset_id: str
    policy_train_energies_kwh: tuple[float, ...]
    expertise: str | None = None


@dataclass(frozen=True)
class MetricValue:
    value: float
    spread: float | None = None


@dataclass(frozen=True)
class MetricReport:
    phase: str
    task_id: str
    algorithm_id: str
    categories: Mapping[str, Mapping[str, MetricValue]] = field(default_factory=dict)

    def metrics(self) -> dict[str, MetricValue]:
        """Flatten categories into a single name -> value map."""
        out = {}
        for metrics in self.categories.values():
            out.update(metrics)
        return out


@dataclass(frozen=True)
class SubmissionBundle:
    cpu_model: str
    gpu_model: str
    framework: str
    runtime_version: str
    os: str
    num_seeds: int
    hyperparameters: Mapping[str, str]
    reports: tuple[MetricReport, ...]


@dataclass(frozen=True)
class PrimitiveDef:
    name: str
    kind: str


@dataclass(frozen=True)
class PageSpec:
    primitives: tuple[PrimitiveDef, ...]

    @property
    def n_active(self) -> int:
        return sum(1 for p in self.primitives if p.kind == "active")

    @property
    def n_passive(self) -> int:
        return sum(1 for p in self.primitives if p.kind == "passive")


@dataclass(frozen=True)
class WebsiteSpec:
    website_id: str
    seed: int
    pages: tuple[PageSpec, ...]
    difficulty_nats: float
    level: int | None  # None means unclassified


def _finite(x) -> bool:
    try:
        return math.isfinite(x)
    except TypeError:
        return False


@singledispatch
def validate(record) -> list[str]:
    """Return the invariant violations of ``record`` as ``"field: rule"`` strings.

    An empty list means the record is valid.  Validation never raises for
    malformed records; unsupported types yield a single violation.
    """
    return [f"record: unsupported type {type(record).__name__}"]


@validate.register
def _(curve: TrainingCurve) -> list[str]:
    out = []
    if not curve.run_id:
        out.append("run_id: non-empty")
    prev = None
    for i, p in enumerate(curve.points):
        if isinstance(p.step, bool) or not isinstance(p.step, (int, np.integer)) or p.step < 0:
            out.append(f"points[{i}].step: non-negative integer")
        elif prev is not None and p.step <= prev:
            out.append(f"points[{i}].step: steps strictly increasing ({prev} then {p.step})")
        if not isinstance(p.step, bool) and isinstance(p.step, (int, np.integer)):
            prev = p.step
        if not _finite(p.value):
            out.append(f"points[{i}].value: finite")
        if p.wall_time_s is not None and not _finite(p.wall_time_s):
            out.append(f"points[{i}].wall_time_s: finite")
    return out


@validate.register
def _(runset: RunSet) -> list[str]:
    out = []
    if not runset.runs:
        out.append("runs: at least one run")
    seen = set()
    for run in runset.runs:
        if run.run_id in seen:
            out.append(f"runs: run_ids unique ({run.run_id!r} repeated)")
        seen.add(run.run_id)
        out.extend(f"runs[{run.run_id}].{v}" for v in validate(run))
    return out


@validate.register
def _(rollouts: RolloutSet) -> list[str]:
    out = []
    if not rollouts.returns:
        out.append("returns: at least one rollout")
    for i, r in enumerate(rollouts.returns):
        if not _finite(r):
            out.append(f"returns[{i}]: finite")
    return out


@validate.register
def _(sample: TelemetrySample) -> list[str]:
    out = []
    for name in ("t_s", "cpu_power_w", "gpu_power_w", "ram_bytes"):
        v = getattr(sample, name)
        if not _finite(v):
            out.append(f"{name}: finite")
        elif v < 0:
            out.append(f"{name}: non-negative")
    return out


@validate.register
def _(trace: TelemetryTrace) -> list[str]:
    out = []
    for i, s in enumerate(trace.samples):
        out.extend(f"samples[{i}].{v}" for v in validate(s))
        if i and _finite(s.t_s) and _finite(trace.samples[i - 1].t_s) and s.t_s < trace.samples[i - 1].t_s:
            out.append(f"samples[{i}].t_s: non-decreasing")
    if not _finite(trace.wall_clock_s):
        out.append("wall_clock_s: finite")
    elif trace.samples:
        span = trace.samples[-1].t_s - trace.samples[0].t_s
        if _finite(span) and trace.wall_clock_s < span - 1e-9:
            out.append("wall_clock_s: at least the sampled span")
    return out


@validate.register
def _(ds: DatasetDescriptor) -> list[str]:
    out = []
    if not ds.dataset_id:
        out.append("dataset_id: non-empty")
    for i, e in enumerate(ds.policy_train_energies_kwh):
        if not _finite(e):
            out.append(f"policy_train_energies_kwh[{i}]: finite")
        elif e < 0:
            out.append(f"policy_train_energies_kwh[{i}]: non-negative")
    if ds.expertise is not None and ds.expertise not in EXPERTISE_LEVELS:
        out.append(f"expertise: one of {', '.join(EXPERTISE_LEVELS)}")
    return out


@validate.register
def _(report: MetricReport) -> list[str]:
    out = []
    if report.phase not in PHASES:
        out.append(f"phase: one of {', '.join(PHASES)}")
    for category, metrics in report.categories.items():
        if category not in CATEGORIES:
            out.append(f"categories: unknown category {category!r}")
            continue
        if report.phase == "inference" and category in ("data_cost", "application"):
            out.append(f"categories.{category}: N/A at inference")
        for name, mv in metrics.items():
            spec = METRIC_REGISTRY.get(name)
            if spec is None:
                out.append(f"categories.{category}: unknown metric {name!r}")
            elif spec.category != category:
                out.append(f"categories.{category}: metric {name!r} belongs to {spec.category}")
            if not _finite(mv.value):
                out.append(f"categories.{category}.{name}.value: finite")
            if mv.spread is not None and (not _finite(mv.spread) or mv.spread < 0):
                out.append(f"categories.{category}.{name}.spread: finite and non-negative")
    return out


@validate.register
def _(bundle: SubmissionBundle) -> list[str]:
    out = []
    for name in CONFIG_FIELDS:
        v = getattr(bundle, name)
        if not isinstance(v, str) or not v.strip():
            out.append(f"{name}: {name} non-empty")
    if isinstance(bundle.num_seeds, bool) or not isinstance(bundle.num_seeds, int) or bundle.num_seeds < 1:
        out.append("num_seeds: positive integer")
    for k, v in bundle.hyperparameters.items():
        if not isinstance(k, str) or not isinstance(v, str):
            out.append(f"hyperparameters[{k!r}]: string to string")
    for i, r in enumerate(bundle.reports):
        out.extend(f"reports[{i}].{v}" for v in validate(r))
    return out


@validate.register
def _(prim: PrimitiveDef) -> list[str]:
    out = []
    if not prim.name:
        out.append("name: non-empty")
    if prim.kind not in PRIMITIVE_KINDS:
        out.append(f"kind: one of {', '.join(PRIMITIVE_KINDS)}")
    elif (prim.kind == "control") != (prim.name in CONTROL_PRIMITIVES):
        out.append("kind: control primitives are exactly new_page and stop")
    return out


@validate.register
def _(page: PageSpec) -> list[str]:
    out = []
    for i, p in enumerate(page.primitives):
        out.extend(f"primitives[{i}].{v}" for v in validate(p))
        if p.kind == "control":
            out.append(f"primitives[{i}]: control primitives excluded from pages")
    if page.n_active + page.n_passive < 1:
        out.append("primitives: at least one non-control primitive")
    return out


@validate.register
def _(site: WebsiteSpec) -> list[str]:
    out = []
    if not site.website_id:
        out.append("website_id: non-empty")
    if isinstance(site.seed, bool) or not isinstance(site.seed, int) or not 0 <= site.seed < 2**64:
        out.append("seed: 64-bit unsigned")
    if not site.pages:
        out.append("pages: at least one page")
    total = 0.0
    for i, page in enumerate(site.pages):
        out.extend(f"pages[{i}].{v}" for v in validate(page))
        if page.n_active >= 1:
            total += -math.log(page.n_active / (page.n_active + page.n_passive))
        else:
            out.append(f"pages[{i}]: at least one active primitive")
    if not _finite(site.difficulty_nats) or site.difficulty_nats < 0:
        out.append("difficulty_nats: finite and non-negative")
    elif abs(site.difficulty_nats - total) > 1e-9:
        out.append("difficulty_nats: equals the sum of page difficulties")
    if site.level not in (1, 2, 3, None):
        out.append("level: one of 1, 2, 3 or unclassified")
    return out
