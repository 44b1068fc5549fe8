import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agentperf import ingest
from agentperf.ingest import FixtureProfile, ParseError, ParseSummary, generate_fixture_runset
from agentperf.model import RolloutSet, TelemetrySample, TelemetryTrace, validate
from agentperf.reliability import dispersion_within_runs
from agentperf.telemetry import energy_consumed


def jsonl(*records):
    return [json.dumps(r) + "\n" for r in records]


def test_minimal_training_curve_file():
    rs = ingest.parse_training_curves(jsonl({"run_id": "s0", "step": 0, "value": 1.0},
                                            {"run_id": "s0", "step": 1, "value": 2.0}))
    assert rs.n == 1
    assert [p.value for p in rs.runs[0].points] == [1.0, 2.0]
    assert validate(rs) == []


def test_training_curves_sorted_by_step():
    rs = ingest.parse_training_curves(jsonl({"run_id": "a", "step": 5, "value": 2.0},
                                            {"run_id": "a", "step": 1, "value": 1.0},
                                            {"run_id": "b", "step": 0, "value": 0.0}))
    assert [r.run_id for r in rs.runs] == ["a", "b"]
    assert list(rs.runs[0].steps) == [1, 5]


def test_nan_string_rejected_at_its_line():
    lines = jsonl({"run_id": "s0", "step": 0, "value": 1.0}, {"run_id": "s0", "step": 1, "value": "NaN"})
    with pytest.raises(ParseError) as exc:
        ingest.parse_training_curves(lines, "curves.jsonl")
    assert exc.value.line == 2
    assert "NaN" in lines[exc.value.line - 1]
    assert str(exc.value).startswith("curves.jsonl:2:")


def test_nan_literal_rejected():
    with pytest.raises(ParseError, match="not finite"):
        ingest.parse_training_curves(['{"run_id": "s0", "step": 0, "value": NaN}\n'])


@pytest.mark.parametrize("line, fragment", [
    ('{"run_id": "s0", "step": 0\n', "malformed JSON"),
    ('{"run_id": "s0", "value": 1.0}\n', "missing field 'step'"),
    ('{"run_id": "s0", "step": -1, "value": 1.0}\n', "unsigned"),
    ('[1, 2]\n', "JSON object"),
])
def test_training_curve_errors(line, fragment):
    lines = ['{"run_id": "s0", "step": 0, "value": 1.0}\n', "\n", line]
    with pytest.raises(ParseError, match=fragment) as exc:
        ingest.parse_training_curves(lines)
    assert exc.value.line == 3


def test_duplicate_run_step_is_an_error():
    lines = jsonl({"run_id": "s0", "step": 3, "value": 1.0}, {"run_id": "s0", "step": 3, "value": 2.0})
    with pytest.raises(ParseError, match="duplicate") as exc:
        ingest.parse_training_curves(lines)
    assert exc.value.line == 2


def test_unknown_fields_counted():
    summary = ParseSummary()
    ingest.parse_training_curves(jsonl({"run_id": "s0", "step": 0, "value": 1.0, "loss": 3},
                                       {"run_id": "s0", "step": 1, "value": 1.0, "loss": 2}), summary=summary)
    assert summary.unknown_fields == {"loss": 2}
    assert summary.warning_count == 2
    assert summary.records == 2


def test_fixture_round_trip_10_by_100():
    rs = generate_fixture_runset(FixtureProfile(n=10, T=100, noise=0.1, seed=3))
    text = ingest.write_training_curves(rs)
    back = ingest.parse_training_curves(text.splitlines(keepends=True), task_id="fixture", algorithm_id="fixture")
    assert back.n == 10 and all(len(r.points) == 100 for r in back.runs)
    assert back == rs
    assert ingest.write_training_curves(back) == text


# --- rollouts -----------------------------------------------------------------------

def test_rollouts_constant():
    ro = ingest.parse_rollouts(jsonl(*[{"return": -1.0}] * 100))
    assert ro.m == 100 and set(ro.returns) == {-1.0}


def test_rollouts_empty_file():
    with pytest.raises(ParseError, match="empty rollout file"):
        ingest.parse_rollouts([])


def test_rollouts_mean_survives_round_trip():
    rng = np.random.Generator(np.random.PCG64(11))
    draws = rng.normal(-1.0, 0.05, 100)
    text = ingest.write_rollouts(RolloutSet("t", "a", tuple(float(x) for x in draws)))
    ro = ingest.parse_rollouts(text.splitlines(keepends=True))
    assert abs(sum(ro.returns) / ro.m - float(np.mean(draws))) < 1e-12
    assert list(ro.returns) == draws.tolist()


def test_rollout_id_ignored_and_order_kept():
    ro = ingest.parse_rollouts(jsonl({"return": 3.0, "rollout_id": 9}, {"return": 1.0, "rollout_id": 1}))
    assert ro.returns == (3.0, 1.0)


# --- telemetry -------------------------------------------------------------------------

def sample(t, cpu=100.0, gpu=0.0, ram=0):
    return {"t_s": t, "cpu_power_w": cpu, "gpu_power_w": gpu, "ram_bytes": ram}


def test_telemetry_wall_clock_from_span():
    tr = ingest.parse_telemetry(jsonl(sample(0), sample(1), sample(2)))
    assert tr.wall_clock_s == 2.0
    assert validate(tr) == []


def test_telemetry_trailer_overrides_wall_clock():
    tr = ingest.parse_telemetry(jsonl(sample(0), sample(1), {"trailer": True, "wall_clock_s": 1.5}))
    assert tr.wall_clock_s == 1.5
    with pytest.raises(ParseError, match="after trailer"):
        ingest.parse_telemetry(jsonl(sample(0), {"trailer": True, "wall_clock_s": 1.0}, sample(1)))


def test_telemetry_negative_ram_rejected():
    with pytest.raises(ParseError, match="ram_bytes") as exc:
        ingest.parse_telemetry(jsonl(sample(0), sample(1, ram=-1)))
    assert exc.value.line == 2


def test_telemetry_decreasing_time_rejected():
    with pytest.raises(ParseError, match="decreases") as exc:
        ingest.parse_telemetry(jsonl(sample(0), sample(2), sample(1)))
    assert exc.value.line == 3


def test_telemetry_hour_at_100w_is_a_tenth_kwh():
    lines = jsonl(*[sample(float(t)) for t in range(3601)])
    assert energy_consumed(ingest.parse_telemetry(lines)) == pytest.approx(0.1, abs=1e-12)


def test_telemetry_round_trip():
    tr = TelemetryTrace(tuple(TelemetrySample(t * 0.5, 12.25 + t, 1.0 / 3.0, 1000 + t) for t in range(5)), 2.25)
    text = ingest.write_telemetry(tr)
    back = ingest.parse_telemetry(text.splitlines(keepends=True))
    assert back == tr
    assert ingest.write_telemetry(back) == text


# --- dataset manifest --------------------------------------------------------------------

def test_manifest_basic():
    (d,) = ingest.parse_dataset_manifest('{"datasets": [{"dataset_id": "d1", "policy_train_energies_kwh": [10, 20]}]}')
    assert d.dataset_id == "d1" and d.policy_train_energies_kwh == (10.0, 20.0)
    assert validate(d) == []


def test_manifest_singleton_energy():
    (d,) = ingest.parse_dataset_manifest(
        '{"datasets": [{"dataset_id": "ariane-intermediate", "policy_train_energies_kwh": [48.28], "expertise": "intermediate"}]}')
    assert d.policy_train_energies_kwh == (48.28,)
    assert d.expertise == "intermediate"


def test_manifest_negative_energy_line():
    text = '{"datasets": [\n  {"dataset_id": "ok", "policy_train_energies_kwh": [1]},\n  {"dataset_id": "bad", "policy_train_energies_kwh": [-2]}\n]}'
    with pytest.raises(ParseError, match="negative") as exc:
        ingest.parse_dataset_manifest(text)
    assert exc.value.line == 3


def test_manifest_empty_energies():
    text = '{"datasets": [{"dataset_id": "d", "policy_train_energies_kwh": []}]}'
    with pytest.raises(ParseError, match="empty"):
        ingest.parse_dataset_manifest(text)
    assert ingest.parse_dataset_manifest(text, require_energies=False)[0].policy_train_energies_kwh == ()


def test_manifest_round_trip():
    text = ingest.write_dataset_manifest(ingest.parse_dataset_manifest(
        '{"datasets": [{"dataset_id": "a", "policy_train_energies_kwh": [1.5, 2], "expertise": "novice"},'
        ' {"dataset_id": "b", "policy_train_energies_kwh": [0.1]}]}'))
    assert ingest.write_dataset_manifest(ingest.parse_dataset_manifest(text)) == text


# --- fixture generator ---------------------------------------------------------------------

def test_fixture_flat_curve():
    rs = generate_fixture_runset(FixtureProfile(n=1, T=5, shape="constant", start=0.0, noise=0.0))
    assert rs.n == 1 and list(rs.runs[0].values) == [0.0] * 5


def test_fixture_deterministic():
    p = FixtureProfile(n=3, T=10, noise=0.3, seed=99)
    assert generate_fixture_runset(p) == generate_fixture_runset(p)


def test_fixture_noise_raises_within_run_dispersion():
    noisy = generate_fixture_runset(FixtureProfile(n=10, T=100, shape="logistic", noise=0.1, seed=7))
    clean = generate_fixture_runset(FixtureProfile(n=10, T=100, shape="logistic", noise=0.0, seed=7))
    assert dispersion_within_runs(noisy)[0] > dispersion_within_runs(clean)[0]


@given(st.lists(st.floats(-1e9, 1e9, allow_nan=False), min_size=1, max_size=30))
def test_rollout_writer_round_trip(xs):
    ro = RolloutSet("unknown", "unknown", tuple(xs))
    text = ingest.write_rollouts(ro)
    assert ingest.parse_rollouts(text.splitlines(keepends=True)) == ro
