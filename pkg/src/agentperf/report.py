"""Metric reports: assembly, rendering, radar data and submission bundles.

Spreads are one standard deviation.  Numbers are formatted the way the
published results tables print them: two decimals, scientific notation with
two decimals for magnitudes below 0.01, and a bare ``0`` for exact zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import (
    CATEGORIES,
    CONFIG_FIELDS,
    METRIC_REGISTRY,
    PHASES,
    MetricReport,
    MetricValue,
    RolloutSet,
    SubmissionBundle,
    validate,
)

REPORT_SCHEMA = "a2report/1"
BUNDLE_SCHEMA = "a2bundle/1"
CATEGORY_LABELS = {
    "data_cost": "Data Cost",
    "application": "Application",
    "reliability": "Reliability",
    "system": "System",
}


class ReportError(ValueError):
    pass


def _metric_value(v) -> MetricValue:
    if isinstance(v, MetricValue):
        return v
    if isinstance(v, tuple):
        value, spread = v
        return MetricValue(float(value), None if spread is None else float(spread))
    return MetricValue(float(v))


def build_report(phase: str, data_cost=None, application=None, reliability=None, system=None, *,
                 task_id: str = "unknown", algorithm_id: str = "unknown") -> MetricReport:
    """Assemble a validated report.

    Each category argument maps metric name to a value, a ``(value, spread)``
    pair or a :class:`MetricValue`.  Data cost and application metrics are
    N/A at inference and rejected there.
    """
    if phase not in PHASES:
        raise ReportError(f"unknown phase {phase!r}")
    supplied = {"data_cost": data_cost, "application": application,
                "reliability": reliability, "system": system}
    categories = {}
    for cat, metrics in supplied.items():
        if not metrics:
            continue
        if phase == "inference" and cat in ("data_cost", "application"):
            raise ReportError(f"{CATEGORY_LABELS[cat]} metrics are N/A at inference: {', '.join(metrics)}")
        for name in metrics:
            spec = METRIC_REGISTRY.get(name)
            if spec is None:
                raise ReportError(f"unknown metric name {name!r}")
            if spec.category != cat:
                raise ReportError(f"metric {name!r} belongs to {spec.category}, not {cat}")
        categories[cat] = {name: _metric_value(v) for name, v in metrics.items()}
    report = MetricReport(phase, task_id, algorithm_id, categories)
    problems = validate(report)
    if problems:
        raise ReportError("; ".join(problems))
    return report


def mean_std(values) -> tuple[float, float]:
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ReportError("empty input")
    return float(x.mean()), float(x.std())


def task_performance(rollouts: RolloutSet) -> tuple[float, float]:
    """Mean return over rollouts with its (population) standard deviation."""
    return mean_std(rollouts.returns)


def generalization(per_task_means: Sequence[float]) -> float:
    """Sum of mean returns over all tasks, the trained task included."""
    if len(per_task_means) == 0:
        raise ReportError("generalization needs at least one task mean")
    return math.fsum(per_task_means)


def merge_reports(reports: Iterable[MetricReport]) -> list[MetricReport]:
    """Combine fragments sharing (task, algorithm, phase); a metric given twice is an error."""
    merged: dict[tuple[str, str, str], dict[str, dict[str, MetricValue]]] = {}
    for r in reports:
        key = (r.task_id, r.algorithm_id, r.phase)
        cats = merged.setdefault(key, {})
        for cat, metrics in r.categories.items():
            bucket = cats.setdefault(cat, {})
            for name, mv in metrics.items():
                if name in bucket:
                    raise ReportError(f"metric {name!r} given twice for {r.algorithm_id}/{r.phase}")
                bucket[name] = mv
    return [MetricReport(phase, task, algo, cats) for (task, algo, phase), cats in merged.items()]


# --- JSON ----------------------------------------------------------------------

def report_to_dict(report: MetricReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "phase": report.phase,
        "task_id": report.task_id,
        "algorithm_id": report.algorithm_id,
        "categories": {
            cat: {name: {"value": mv.value, "spread": mv.spread} for name, mv in metrics.items()}
            for cat, metrics in report.categories.items()
        },
    }


def report_from_dict(doc) -> MetricReport:
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA:
        raise ReportError(f"not an {REPORT_SCHEMA} document")
    for key in ("phase", "task_id", "algorithm_id"):
        if not isinstance(doc.get(key), str):
            raise ReportError(f"report field {key!r} must be a string")
    cats = doc.get("categories")
    if not isinstance(cats, dict):
        raise ReportError("report field 'categories' must be an object")
    categories = {}
    for cat, metrics in cats.items():
        if not isinstance(metrics, dict):
            raise ReportError(f"category {cat!r} must be an object")
        out = {}
        for name, cell in metrics.items():
            if not isinstance(cell, dict) or "value" not in cell:
                raise ReportError(f"metric {name!r} needs a 'value'")
            value, spread = cell["value"], cell.get("spread")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ReportError(f"metric {name!r} value must be a number")
            if spread is not None and (isinstance(spread, bool) or not isinstance(spread, (int, float))):
                raise ReportError(f"metric {name!r} spread must be a number or null")
            out[name] = MetricValue(float(value), None if spread is None else float(spread))
        categories[cat] = out
    report = MetricReport(doc["phase"], doc["task_id"], doc["algorithm_id"], categories)
    problems = validate(report)
    if problems:
        raise ReportError("; ".join(problems))
    return report


def load_reports(text: str) -> list[MetricReport]:
    """Parse a report document or a JSON list of them."""
    doc = json.loads(text)
    docs = doc if isinstance(doc, list) else [doc]
    return [report_from_dict(d) for d in docs]


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


# --- text rendering --------------------------------------------------------------

def format_number(x: float, decimals: int | None = None) -> str:
    if x == 0:
        return "0"
    if decimals is not None:
        return f"{x:.{decimals}f}"
    if abs(x) < 0.01:
        return f"{x:.2e}"
    return f"{x:.2f}"


def format_cell(mv: MetricValue | None, name: str | None = None) -> str:
    if mv is None:
        return "N/A"
    spec = METRIC_REGISTRY.get(name) if name else None
    text = format_number(mv.value, spec.decimals if spec else None)
    if mv.spread:
        text += f" ± {format_number(mv.spread)}"
    return text


def _check_one_task(reports: Sequence[MetricReport]) -> str:
    tasks = {r.task_id for r in reports}
    if len(tasks) > 1:
        raise ReportError(f"reports mix tasks: {', '.join(sorted(tasks))}")
    return tasks.pop() if tasks else ""


def _phase_table(task: str, phase: str, reports: Sequence[MetricReport]) -> list[str]:
    algos = list(dict.fromkeys(r.algorithm_id for r in reports))
    by_algo = {r.algorithm_id: r.metrics() for r in reports}
    lines = [f"### {task} ({phase.capitalize()})", ""]
    lines.append("| Category | Metric Name | " + " | ".join(algos) + " |")
    lines.append("|---|---|" + "---|" * len(algos))
    rows = 0
    for cat in CATEGORIES:
        names = sorted({n for r in reports for n in r.categories.get(cat, {})})
        for i, name in enumerate(names):
            label = CATEGORY_LABELS[cat] if i == 0 else ""
            cells = [format_cell(by_algo[a].get(name), name) for a in algos]
            lines.append(f"| {label} | {name} | " + " | ".join(cells) + " |")
            rows += 1
    if rows == 0:
        lines.append("| _empty_ | | " + " | ".join("" for _ in algos) + " |")
    lines.append("")
    return lines


def render(reports, fmt: str = "markdown") -> str:
    """Render one report or a list sharing a task as ``json``, ``csv`` or ``markdown``."""
    single = isinstance(reports, MetricReport)
    reports = [reports] if single else list(reports)
    task = _check_one_task(reports)
    if fmt == "json":
        docs = [report_to_dict(r) for r in reports]
        return _canonical(docs[0] if single else docs)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phase", "category", "metric", "algorithm", "value", "spread"])
        for r in reports:
            for cat in CATEGORIES:
                for name, mv in sorted(r.categories.get(cat, {}).items()):
                    spec = METRIC_REGISTRY.get(name)
                    w.writerow([r.phase, cat, name, r.algorithm_id,
                                format_number(mv.value, spec.decimals if spec else None),
                                "" if mv.spread is None else format_number(mv.spread)])
        return buf.getvalue()
    if fmt == "markdown":
        lines = []
        for phase in PHASES:
            group = [r for r in reports if r.phase == phase]
            if group:
                lines.extend(_phase_table(task, phase, group))
        return "\n".join(lines)
    raise ReportError(f"unknown format {fmt!r}")


# --- radar -------------------------------------------------------------------------

@dataclass(frozen=True)
class RadarData:
    axes: tuple[tuple[str, bool], ...]
    series: Mapping[str, tuple[float, ...]]

    def to_dict(self) -> dict:
        return {
            "axes": [{"metric": n, "lower_is_better": lib} for n, lib in self.axes],
            "series": {k: list(v) for k, v in self.series.items()},
        }


def radar_data(reports: Sequence[MetricReport], axes: Sequence[str]) -> RadarData:
    """Min-max normalize each axis across algorithms so that outward is better.

    Lower-is-better axes are flipped; an axis where every algorithm ties
    gives 1.0 to all.  Scaling is relative to the compared algorithms only.
    """
    algos = list(dict.fromkeys(r.algorithm_id for r in reports))
    if len(algos) < 2:
        raise ReportError("radar data needs at least 2 algorithms")
    if len(algos) != len(reports):
        raise ReportError("radar data needs one report per algorithm")
    if not axes:
        raise ReportError("no axes selected")
    metrics = {r.algorithm_id: r.metrics() for r in reports}
    axis_specs = []
    columns = []
    for name in axes:
        spec = METRIC_REGISTRY.get(name)
        if spec is None:
            raise ReportError(f"unknown metric {name!r}")
        missing = [a for a in algos if name not in metrics[a]]
        if missing:
            raise ReportError(f"metric {name!r} missing for {', '.join(missing)}")
        raw = np.array([metrics[a][name].value for a in algos])
        lo, hi = raw.min(), raw.max()
        if hi == lo:
            norm = np.ones_like(raw)
        else:
            norm = (raw - lo) / (hi - lo)
            if spec.lower_is_better:
                norm = 1.0 - norm
        axis_specs.append((name, spec.lower_is_better))
        columns.append(np.clip(norm, 0.0, 1.0))
    series = {a: tuple(float(col[i]) for col in columns) for i, a in enumerate(algos)}
    return RadarData(tuple(axis_specs), series)


# --- submission bundles ---------------------------------------------------------

def _missing_config(config: Mapping) -> list[str]:
    missing = [k for k in CONFIG_FIELDS if not isinstance(config.get(k), str) or not config.get(k).strip()]
    if "num_seeds" not in config:
        missing.append("num_seeds")
    if "hyperparameters" not in config:
        missing.append("hyperparameters")
    return missing


def submission_bundle(reports: Sequence[MetricReport], config: Mapping) -> str:
    """Serialize a leaderboard bundle; every missing config field is named in one error."""
    missing = _missing_config(config)
    if missing:
        raise ReportError("missing required config field(s): " + ", ".join(missing))
    seeds = config["num_seeds"]
    if isinstance(seeds, bool) or not isinstance(seeds, int) or seeds < 1:
        raise ReportError("num_seeds must be a positive integer")
    hp = config["hyperparameters"]
    if not isinstance(hp, dict):
        raise ReportError("hyperparameters must be an object")
    hp = {str(k): v if isinstance(v, str) else json.dumps(v) for k, v in hp.items()}
    bundle = SubmissionBundle(*(config[k] for k in CONFIG_FIELDS), seeds, hp, tuple(reports))
    problems = validate(bundle)
    if problems:
        raise ReportError("; ".join(problems))
    return _canonical(bundle_to_dict(bundle))


def bundle_to_dict(bundle: SubmissionBundle) -> dict:
    return {
        "schema": BUNDLE_SCHEMA,
        "config": {k: getattr(bundle, k) for k in CONFIG_FIELDS},
        "num_seeds": bundle.num_seeds,
        "hyperparameters": dict(bundle.hyperparameters),
        "reports": [report_to_dict(r) for r in bundle.reports],
    }


def bundle_from_dict(doc) -> SubmissionBundle:
    if not isinstance(doc, dict) or doc.get("schema") != BUNDLE_SCHEMA:
        raise ReportError(f"not an {BUNDLE_SCHEMA} document")
    config = doc.get("config")
    if not isinstance(config, dict):
        raise ReportError("bundle field 'config' must be an object")
    missing = [k for k in CONFIG_FIELDS if not isinstance(config.get(k), str) or not config[k].strip()]
    for key in ("num_seeds", "hyperparameters", "reports"):
        if key not in doc:
            missing.append(key)
    if missing:
        raise ReportError("missing required field(s): " + ", ".join(missing))
    if not isinstance(doc["reports"], list) or not isinstance(doc["hyperparameters"], dict):
        raise ReportError("bundle 'reports' must be a list and 'hyperparameters' an object")
    bundle = SubmissionBundle(
        *(config[k] for k in CONFIG_FIELDS), doc["num_seeds"], doc["hyperparameters"],
        tuple(report_from_dict(r) for r in doc["reports"]),
    )
    problems = validate(bundle)
    if problems:
        raise ReportError("; ".join(problems))
    return bundle
