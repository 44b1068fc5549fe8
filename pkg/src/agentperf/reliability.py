"""Reliability metrics over training curves and rollout returns.

Training metrics: dispersion within runs, short-term risk, long-term risk,
dispersion across runs and risk across runs.  Inference metrics: dispersion
and risk across rollouts.  All of them rest on two robust statistics,
:func:`iqr` (linear order-statistic interpolation) and :func:`cvar_lower`
(mean of the ``ceil(alpha * n)`` smallest values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RolloutSet, RunSet, TrainingCurve

DISPERSION_WITHIN_RUNS = "Dispersion Within Runs (IQR)"
SHORT_TERM_RISK = "Short Term Risk (CVaR)"
LONG_TERM_RISK = "Long Term Risk (CVaR)"
DISPERSION_ACROSS_RUNS = "Dispersion Across Runs (IQR)"
RISK_ACROSS_RUNS = "Risk Across Runs (CVaR)"
DISPERSION_ACROSS_ROLLOUTS = "Dispersion Across Rollouts (IQR)"
RISK_ACROSS_ROLLOUTS = "Risk Across Rollouts (CVaR)"

TRAINING_METRICS = (
    DISPERSION_ACROSS_RUNS,
    DISPERSION_WITHIN_RUNS,
    LONG_TERM_RISK,
    RISK_ACROSS_RUNS,
    SHORT_TERM_RISK,
)
INFERENCE_METRICS = (DISPERSION_ACROSS_ROLLOUTS, RISK_ACROSS_ROLLOUTS)


class MetricError(ValueError):
    """Raised when a metric's preconditions do not hold."""


@dataclass(frozen=True)
class ReliabilityConfig:
    alpha: float = 0.05
    window: int = 5
    final_tail_k: int = 1
    alignment: str = "interpolate"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise MetricError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.window < 3 or self.window % 2 == 0:
            raise MetricError(f"window must be an odd integer >= 3, got {self.window}")
        if self.final_tail_k < 1:
            raise MetricError(f"final_tail_k must be >= 1, got {self.final_tail_k}")
        if self.alignment not in ("strict", "interpolate"):
            raise MetricError(f"alignment must be 'strict' or 'interpolate', got {self.alignment!r}")


def _as_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise MetricError("empty input")
    return arr


def tail_count(alpha: float, n: int) -> int:
    """Number of tail elements ``ceil(alpha * n)``, clamped to ``[1, n]``.

    A 1e-9 slack absorbs float products such as ``0.07 * 100 == 7.000000000000001``.
    """
    return min(n, max(1, math.ceil(alpha * n - 1e-9)))


def quantile(values, q: float) -> float:
    """Linear interpolation between order statistics at position ``(n - 1) * q``."""
    x = np.sort(_as_array(values))
    pos = (x.size - 1) * q
    lo = int(math.floor(pos))
    hi = min(lo + 1, x.size - 1)
    frac = pos - lo
    if frac == 0.0:
        return float(x[lo])
    return float(x[lo] + frac * (x[hi] - x[lo]))


def iqr(values) -> float:
    x = _as_array(values)
    return max(0.0, quantile(x, 0.75) - quantile(x, 0.25))


def cvar_lower(values, alpha: float) -> float:
    """Mean of the ``ceil(alpha * n)`` smallest values (left-tail CVaR)."""
    if not 0.0 < alpha < 1.0:
        raise MetricError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.sort(_as_array(values))
    k = tail_count(alpha, x.size)
    return float(x[:k].sum() / k)


def cvar_upper(values, alpha: float) -> float:
    """Mean of the ``ceil(alpha * n)`` largest values."""
    if not 0.0 < alpha < 1.0:
        raise MetricError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.sort(_as_array(values))
    k = tail_count(alpha, x.size)
    return float(x[x.size - k:].sum() / k)


def detrend(curve: TrainingCurve) -> np.ndarray:
    """Checkpoint-to-checkpoint differences ``P_t - P_{t-1}``; steps are ignored."""
    if len(curve.points) < 2:
        raise MetricError(f"run {curve.run_id!r}: detrending needs at least 2 points")
    return np.diff(curve.values)


def drawdowns(curve: TrainingCurve) -> np.ndarray:
    """Running maximum minus current value, pointwise >= 0."""
    v = curve.values
    if v.size == 0:
        raise MetricError(f"run {curve.run_id!r}: no points")
    return np.maximum.accumulate(v) - v


def _sliding_iqr_mean(diffs: np.ndarray, window: int) -> float:
    windows = np.lib.stride_tricks.sliding_window_view(diffs, window)
    return float(np.mean([iqr(w) for w in windows]))


def dispersion_within_runs(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> tuple[float, float]:
    """Mean sliding-window IQR of each detrended run, then mean and std across runs.

    A run with T checkpoints has T - 1 differences and T - window full
    windows, so it needs at least ``window + 1`` checkpoints.
    """
    per_run = []
    for run in runset.runs:
        if len(run.points) < config.window + 1:
            raise MetricError(
                f"run {run.run_id!r} has {len(run.points)} checkpoints; "
                f"window {config.window} needs at least {config.window + 1}"
            )
        per_run.append(_sliding_iqr_mean(detrend(run), config.window))
    if not per_run:
        raise MetricError("no runs")
    arr = np.array(per_run)
    return float(arr.mean()), float(arr.std())


def short_term_risk(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> float:
    """Negated left-tail CVaR of the pooled detrended values.

    Positive when the worst changes are drops; negative for curves that only
    ever improve.  Not clamped.
    """
    if not runset.runs:
        raise MetricError("no runs")
    pooled = np.concatenate([detrend(run) for run in runset.runs])
    return 0.0 - cvar_lower(pooled, config.alpha)


def long_term_risk(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> float:
    """Upper-tail CVaR of pooled drawdowns from the running maximum."""
    if not runset.runs:
        raise MetricError("no runs")
    pooled = np.concatenate([drawdowns(run) for run in runset.runs])
    return cvar_upper(pooled, config.alpha)


def align_runs(runset: RunSet, mode: str = "interpolate") -> tuple[np.ndarray, np.ndarray]:
    """Put every run on a common step grid.

    Returns ``(grid, matrix)`` where ``matrix[j, i]`` is run ``j`` at ``grid[i]``.
    ``strict`` requires identical step sets; ``interpolate`` uses the union of
    steps inside the common range and interpolates each run linearly.
    """
    runs = runset.runs
    if len(runs) < 2:
        raise MetricError("alignment needs at least 2 runs")
    if mode == "strict":
        ref = runs[0].steps
        for run in runs[1:]:
            if not np.array_equal(run.steps, ref):
                raise MetricError(f"step mismatch between runs {runs[0].run_id!r} and {run.run_id!r}")
        if ref.size == 0:
            raise MetricError("empty grid after alignment")
        return ref.astype(np.float64), np.vstack([run.values for run in runs])
    if mode != "interpolate":
        raise MetricError(f"unknown alignment mode {mode!r}")
    for run in runs:
        if not run.points:
            raise MetricError(f"run {run.run_id!r} has no points")
    lo = max(int(run.steps[0]) for run in runs)
    hi = min(int(run.steps[-1]) for run in runs)
    union = np.unique(np.concatenate([run.steps for run in runs]))
    grid = union[(union >= lo) & (union <= hi)]
    if grid.size == 0:
        raise MetricError("empty overlap between runs")
    grid = grid.astype(np.float64)
    matrix = np.vstack([np.interp(grid, run.steps.astype(np.float64), run.values) for run in runs])
    return grid, matrix


def dispersion_across_runs(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> tuple[float, float]:
    """IQR across runs at each aligned grid point; mean and std over grid points."""
    _, matrix = align_runs(runset, config.alignment)
    per_point = np.array([iqr(matrix[:, i]) for i in range(matrix.shape[1])])
    return float(per_point.mean()), float(per_point.std())


def final_performance(curve: TrainingCurve, k: int = 1) -> float:
    if len(curve.points) < k:
        raise MetricError(f"run {curve.run_id!r} has fewer than final_tail_k={k} points")
    return float(curve.values[-k:].mean())


def risk_across_runs(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> float:
    """Left-tail CVaR of each run's final performance; higher is better."""
    if not runset.runs:
        raise MetricError("no runs")
    finals = [final_performance(run, config.final_tail_k) for run in runset.runs]
    return cvar_lower(finals, config.alpha)


def dispersion_across_rollouts(rollouts: RolloutSet) -> float:
    return iqr(rollouts.returns)


def risk_across_rollouts(rollouts: RolloutSet, config: ReliabilityConfig = ReliabilityConfig()) -> float:
    return cvar_lower(rollouts.returns, config.alpha)


def training_metrics(runset: RunSet, config: ReliabilityConfig = ReliabilityConfig()) -> dict[str, tuple[float, float | None]]:
    """All five training metrics keyed by their report row name.

    Dispersion across runs is only defined for two or more runs and is
    omitted for a single run.
    """
    out: dict[str, tuple[float, float | None]] = {}
    if runset.n >= 2:
        out[DISPERSION_ACROSS_RUNS] = dispersion_across_runs(runset, config)
    out[DISPERSION_WITHIN_RUNS] = dispersion_within_runs(runset, config)
    out[LONG_TERM_RISK] = (long_term_risk(runset, config), None)
    out[RISK_ACROSS_RUNS] = (risk_across_runs(runset, config), None)
    out[SHORT_TERM_RISK] = (short_term_risk(runset, config), None)
    return out


def inference_metrics(rollouts: RolloutSet, config: ReliabilityConfig = ReliabilityConfig()) -> dict[str, tuple[float, float | None]]:
    return {
        DISPERSION_ACROSS_ROLLOUTS: (dispersion_across_rollouts(rollouts), None),
        RISK_ACROSS_ROLLOUTS: (risk_across_rollouts(rollouts, config), None),
    }
