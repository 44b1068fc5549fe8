"""Strict parsers and canonical writers for the harness's on-disk formats.

Every parser takes an iterable of text lines (an open file works) and
raises :class:`ParseError` carrying the physical line number of the
offending record.  Unknown fields are tolerated and counted in an optional
:class:`ParseSummary`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .model import (
    EXPERTISE_LEVELS,
    CurvePoint,
    DatasetDescriptor,
    RolloutSet,
    RunSet,
    TelemetrySample,
    TelemetryTrace,
    TrainingCurve,
)

log = logging.getLogger(__name__)

CURVE_FIELDS = {"run_id", "step", "value", "wall_time_s"}
ROLLOUT_FIELDS = {"return", "rollout_id"}
TELEMETRY_FIELDS = {"t_s", "cpu_power_w", "gpu_power_w", "ram_bytes"}
TRAILER_FIELDS = {"trailer", "wall_clock_s"}
DATASET_FIELDS = {"dataset_id", "policy_train_energies_kwh", "expertise"}


class ParseError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.message = message


@dataclass
class ParseSummary:
    records: int = 0
    unknown_fields: dict[str, int] = field(default_factory=dict)

    @property
    def warning_count(self) -> int:
        return sum(self.unknown_fields.values())


def _records(lines: Iterable[str], path: str, summary: ParseSummary | None, known: set[str]):
    """Yield ``(line_no, obj)`` for each non-blank JSONL line."""
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(path, line_no, f"malformed JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(path, line_no, "record must be a JSON object")
        _count_unknown(obj, known, summary)
        if summary is not None:
            summary.records += 1
        yield line_no, obj


def _count_unknown(obj: dict, known: set[str], summary: ParseSummary | None):
    for key in obj.keys() - known:
        if summary is not None:
            summary.unknown_fields[key] = summary.unknown_fields.get(key, 0) + 1
        log.debug("ignoring unknown field %r", key)


def _number(obj: dict, key: str, path: str, line: int, *, required: bool = True) -> float | None:
    if key not in obj:
        if required:
            raise ParseError(path, line, f"missing field {key!r}")
        return None
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(path, line, f"field {key!r} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ParseError(path, line, f"field {key!r} is not finite")
    return v


def _uint(obj: dict, key: str, path: str, line: int) -> int:
    if key not in obj:
        raise ParseError(path, line, f"missing field {key!r}")
    v = obj[key]
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0 or v >= 2**64:
        raise ParseError(path, line, f"field {key!r} must be an unsigned integer, got {v!r}")
    return v


def _string(obj: dict, key: str, path: str, line: int) -> str:
    if key not in obj:
        raise ParseError(path, line, f"missing field {key!r}")
    v = obj[key]
    if not isinstance(v, str) or not v:
        raise ParseError(path, line, f"field {key!r} must be a non-empty string")
    return v


def parse_training_curves(lines: Iterable[str], path: str = "<stream>", *, task_id: str = "unknown",
                          algorithm_id: str = "unknown", summary: ParseSummary | None = None) -> RunSet:
    runs: dict[str, dict[int, CurvePoint]] = {}
    for line, obj in _records(lines, path, summary, CURVE_FIELDS):
        run_id = _string(obj, "run_id", path, line)
        step = _uint(obj, "step", path, line)
        value = _number(obj, "value", path, line)
        wall = _number(obj, "wall_time_s", path, line, required=False)
        points = runs.setdefault(run_id, {})
        if step in points:
            raise ParseError(path, line, f"duplicate (run_id, step) = ({run_id!r}, {step})")
        points[step] = CurvePoint(step, value, wall)
    if not runs:
        raise ParseError(path, 1, "empty training-curve file")
    curves = tuple(TrainingCurve(rid, tuple(pts[s] for s in sorted(pts))) for rid, pts in runs.items())
    return RunSet(task_id, algorithm_id, curves)


def parse_rollouts(lines: Iterable[str], path: str = "<stream>", *, task_id: str = "unknown",
                   algorithm_id: str = "unknown", summary: ParseSummary | None = None) -> RolloutSet:
    returns = [_number(obj, "return", path, line) for line, obj in _records(lines, path, summary, ROLLOUT_FIELDS)]
    if not returns:
        raise ParseError(path, 1, "empty rollout file")
    return RolloutSet(task_id, algorithm_id, tuple(returns))


def parse_telemetry(lines: Iterable[str], path: str = "<stream>", *, summary: ParseSummary | None = None) -> TelemetryTrace:
    samples: list[TelemetrySample] = []
    wall_clock = None
    trailer_line = None
    for line, obj in _records(lines, path, summary, TELEMETRY_FIELDS | TRAILER_FIELDS):
        if trailer_line is not None:
            raise ParseError(path, line, f"record after trailer (line {trailer_line})")
        if obj.get("trailer") is True:
            trailer_line = line
            wall_clock = _number(obj, "wall_clock_s", path, line)
            if wall_clock < 0:
                raise ParseError(path, line, "wall_clock_s must be non-negative")
            continue
        t = _number(obj, "t_s", path, line)
        cpu = _number(obj, "cpu_power_w", path, line)
        gpu = _number(obj, "gpu_power_w", path, line)
        for name, v in (("t_s", t), ("cpu_power_w", cpu), ("gpu_power_w", gpu), ("ram_bytes", obj.get("ram_bytes"))):
            if _negative(v):
                raise ParseError(path, line, f"field {name!r} must be non-negative")
        ram = _uint(obj, "ram_bytes", path, line)
        if samples and t < samples[-1].t_s:
            raise ParseError(path, line, f"t_s decreases ({samples[-1].t_s} then {t})")
        samples.append(TelemetrySample(t, cpu, gpu, ram))
    if not samples:
        raise ParseError(path, 1, "empty telemetry file")
    span = samples[-1].t_s - samples[0].t_s
    if wall_clock is None:
        wall_clock = span
    elif wall_clock < span:
        raise ParseError(path, trailer_line, f"wall_clock_s {wall_clock} shorter than sampled span {span}")
    return TelemetryTrace(tuple(samples), wall_clock)


def _negative(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and v < 0


def _find_all(text: str, needle: str) -> list[int]:
    out, i = [], text.find(needle)
    while i >= 0:
        out.append(i)
        i = text.find(needle, i + 1)
    return out


def _line_of(text: str, needle: str, start: int = 0) -> int:
    idx = text.find(needle, start)
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 1


def parse_dataset_manifest(text_or_lines, path: str = "<stream>", *, require_energies: bool = True,
                           summary: ParseSummary | None = None) -> list[DatasetDescriptor]:
    """Parse a manifest document ``{"datasets": [...]}``.

    Line numbers for semantic errors point at the offending dataset entry.
    """
    text = text_or_lines if isinstance(text_or_lines, str) else "".join(text_or_lines)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"malformed JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("datasets"), list):
        raise ParseError(path, 1, "manifest must be an object with a 'datasets' list")
    out = []
    key_lines = [_line_of(text, '"dataset_id"', i) for i in _find_all(text, '"dataset_id"')]
    for i, entry in enumerate(doc["datasets"]):
        line = key_lines[i] if i < len(key_lines) else 1
        if not isinstance(entry, dict):
            raise ParseError(path, line, f"datasets[{i}] must be an object")
        _count_unknown(entry, DATASET_FIELDS, summary)
        ds_id = _string(entry, "dataset_id", path, line)
        energies = entry.get("policy_train_energies_kwh")
        if not isinstance(energies, list):
            raise ParseError(path, line, f"dataset {ds_id!r}: 'policy_train_energies_kwh' must be a list")
        vals = []
        for e in energies:
            if isinstance(e, bool) or not isinstance(e, (int, float)) or not math.isfinite(e):
                raise ParseError(path, line, f"dataset {ds_id!r}: energy {e!r} is not a finite number")
            if e < 0:
                raise ParseError(path, line, f"dataset {ds_id!r}: negative energy {e}")
            vals.append(float(e))
        if require_energies and not vals:
            raise ParseError(path, line, f"dataset {ds_id!r}: empty policy_train_energies_kwh")
        expertise = entry.get("expertise")
        if expertise is not None and expertise not in EXPERTISE_LEVELS:
            raise ParseError(path, line, f"dataset {ds_id!r}: expertise must be one of {EXPERTISE_LEVELS}")
        if summary is not None:
            summary.records += 1
        out.append(DatasetDescriptor(ds_id, tuple(vals), expertise))
    return out


def read(parser, path, **kwargs):
    """Run ``parser`` over the file at ``path`` with the path in error messages."""
    with open(path, encoding="utf-8") as fh:
        return parser(fh, str(path), **kwargs)


# --- canonical writers -------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _dumps(obj: dict) -> str:
    """Sorted-key compact JSON with floats written at 17 significant digits."""
    parts = []
    for key in sorted(obj):
        v = obj[key]
        if isinstance(v, float):
            enc = _fmt(v)
        else:
            enc = json.dumps(v)
        parts.append(f"{json.dumps(key)}: {enc}")
    return "{" + ", ".join(parts) + "}"


def write_training_curves(runset: RunSet) -> str:
    lines = []
    for run in runset.runs:
        for p in run.points:
            rec = {"run_id": run.run_id, "step": int(p.step), "value": float(p.value)}
            if p.wall_time_s is not None:
                rec["wall_time_s"] = float(p.wall_time_s)
            lines.append(_dumps(rec))
    return "".join(line + "\n" for line in lines)


def write_rollouts(rollouts: RolloutSet) -> str:
    return "".join(_dumps({"return": float(r)}) + "\n" for r in rollouts.returns)


def write_telemetry(trace: TelemetryTrace, *, trailer: bool = True) -> str:
    lines = [
        _dumps({"t_s": float(s.t_s), "cpu_power_w": float(s.cpu_power_w),
                "gpu_power_w": float(s.gpu_power_w), "ram_bytes": int(s.ram_bytes)})
        for s in trace.samples
    ]
    if trailer:
        lines.append(_dumps({"trailer": True, "wall_clock_s": float(trace.wall_clock_s)}))
    return "".join(line + "\n" for line in lines)


def write_dataset_manifest(datasets) -> str:
    entries = []
    for d in datasets:
        energies = "[" + ", ".join(_fmt(e) for e in d.policy_train_energies_kwh) + "]"
        parts = [f'"dataset_id": {json.dumps(d.dataset_id)}']
        if d.expertise is not None:
            parts.insert(0, f'"expertise": {json.dumps(d.expertise)}')
        parts.append(f'"policy_train_energies_kwh": {energies}')
        entries.append("    {" + ", ".join(parts) + "}")
    body = ",\n".join(entries)
    return '{"datasets": [\n' + body + "\n]}\n" if entries else '{"datasets": []}\n'


# --- synthetic fixtures ------------------------------------------------------

@dataclass(frozen=True)
class FixtureProfile:
    n: int = 10
    T: int = 100
    shape: str = "logistic"
    noise: float = 0.0
    seed: int = 0
    start: float = 0.0
    end: float = 1.0
    step_interval: int = 1000


def _base_curve(profile: FixtureProfile) -> np.ndarray:
    x = np.linspace(0.0, 1.0, profile.T)
    if profile.shape == "constant":
        return np.full(profile.T, profile.start)
    if profile.shape == "linear":
        return profile.start + (profile.end - profile.start) * x
    if profile.shape == "logistic":
        return profile.start + (profile.end - profile.start) / (1.0 + np.exp(-10.0 * (x - 0.5)))
    raise ValueError(f"unknown curve shape {profile.shape!r}")


def generate_fixture_runset(profile: FixtureProfile, task_id: str = "fixture", algorithm_id: str = "fixture") -> RunSet:
    """Base curve plus i.i.d. Gaussian noise of scale ``profile.noise`` per point.

    The noise draw does not depend on the scale, so profiles that differ only
    in ``noise`` share the same underlying standard-normal matrix.
    """
    if profile.n < 1 or profile.T < 2:
        raise ValueError("fixture needs n >= 1 and T >= 2")
    rng = np.random.Generator(np.random.PCG64(profile.seed))
    z = rng.standard_normal((profile.n, profile.T))
    base = _base_curve(profile)
    steps = np.arange(profile.T) * profile.step_interval
    runs = tuple(
        TrainingCurve.from_arrays(f"s{j}", steps, base + profile.noise * z[j])
        for j in range(profile.n)
    )
    return RunSet(task_id, algorithm_id, runs)


def write_text(path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return p
