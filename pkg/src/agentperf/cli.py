"""Command-line front end.

Exit codes: 0 success, 1 validation or parse failure, 2 usage error,
3 the monitored child exited nonzero.  Diagnostics go to stderr; data goes
to stdout or the ``--out`` path.
"""

from __future__ import annotations

import argparse
import collections
import json
import sys
from pathlib import Path

from . import datacost, ingest, reliability, report, telemetry, webgen
from .model import validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_CHILD = 0, 1, 2, 3
SCHEMAS = ("training-curves", "rollouts", "telemetry", "manifest", "report", "bundle", "website")


class Failure(Exception):
    """A diagnosed failure that maps to an exit code."""

    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _err(msg: str):
    print(f"agentperf: {msg}", file=sys.stderr)


def _odd_window(text: str) -> int:
    try:
        w = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if w < 3 or w % 2 == 0:
        raise argparse.ArgumentTypeError(f"window must be an odd integer >= 3, got {w}")
    return w


def _alpha(text: str) -> float:
    a = float(text)
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {a}")
    return a


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _interval(text: str) -> float:
    v = float(text)
    if not v >= telemetry.MIN_INTERVAL_S:
        raise argparse.ArgumentTypeError(f"interval must be >= {telemetry.MIN_INTERVAL_S} s, got {v}")
    return v


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _emit(text: str, out: str | None):
    if out:
        ingest.write_text(out, text)
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise Failure(f"{path}: {exc.strerror}") from None


def _load_report_files(paths) -> list:
    out = []
    for p in paths:
        try:
            out.extend(report.load_reports(_read(p)))
        except json.JSONDecodeError as exc:
            raise Failure(f"{p}:{exc.lineno}: malformed JSON: {exc.msg}") from None
        except report.ReportError as exc:
            raise Failure(f"{p}: {exc}") from None
    return out


# --- commands --------------------------------------------------------------------

def cmd_metrics_reliability(args) -> int:
    if not args.runs and not args.rollouts:
        raise Failure("give at least one of --runs/--rollouts", EXIT_USAGE)
    config = reliability.ReliabilityConfig(args.alpha, args.window, args.final_tail_k, args.alignment)
    ids = dict(task_id=args.task_id, algorithm_id=args.algorithm_id)
    reports = []
    try:
        if args.runs:
            runset = ingest.read(ingest.parse_training_curves, args.runs, **ids)
            reports.append(report.build_report("training", reliability=reliability.training_metrics(runset, config), **ids))
        if args.rollouts:
            rollouts = ingest.read(ingest.parse_rollouts, args.rollouts, **ids)
            reports.append(report.build_report("inference", reliability=reliability.inference_metrics(rollouts, config), **ids))
    except OSError as exc:
        raise Failure(f"{exc.filename}: {exc.strerror}") from None
    except (ingest.ParseError, reliability.MetricError) as exc:
        raise Failure(str(exc)) from None
    _emit(report.render(reports[0] if len(reports) == 1 else reports, "json"), args.out)
    return EXIT_OK


def cmd_metrics_datacost(args) -> int:
    try:
        datasets = ingest.parse_dataset_manifest(_read(args.manifest), args.manifest)
        sample = datacost.total_training_sample_cost(datasets)
    except (ingest.ParseError, datacost.CostError) as exc:
        raise Failure(str(exc)) from None
    energy = args.train_energy_kwh
    if energy is None:
        _err("warning: --train-energy-kwh not given, assuming 0")
        energy = 0.0
    try:
        cost = datacost.total_energy_cost(sample, energy)
    except datacost.CostError as exc:
        raise Failure(str(exc)) from None
    rep = report.build_report(
        "training",
        data_cost={datacost.TRAINING_SAMPLE_COST: cost.training_sample_cost_kwh,
                   datacost.TOTAL_ENERGY_COST: cost.total_kwh},
        system={datacost.ENERGY_CONSUMED: cost.training_energy_kwh},
        task_id=args.task_id, algorithm_id=args.algorithm_id,
    )
    _emit(report.render(rep, "json"), args.out)
    return EXIT_OK


def cmd_monitor(args) -> int:
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise Failure("no command given after --", EXIT_USAGE)
    config = telemetry.MonitorConfig(
        interval_s=args.interval_s, cpu_power_source=args.cpu_power_source,
        tdp_watts=args.tdp_watts, gpu_power_command=args.gpu_power_cmd,
    )
    try:
        trace, status = telemetry.monitor(command, config)
    except telemetry.TelemetryError as exc:
        raise Failure(str(exc)) from None
    for note in trace.notes:
        _err(note)
    summary = telemetry.summarize(trace)
    doc = dict(vars(summary))
    doc["exit_status"] = status
    summary_text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out:
        ingest.write_text(args.out, ingest.write_telemetry(trace))
        summary_path = args.summary or str(Path(args.out).with_suffix(".summary.json"))
        ingest.write_text(summary_path, summary_text)
    elif args.summary:
        ingest.write_text(args.summary, summary_text)
    else:
        sys.stdout.write(summary_text)
    if args.report_out:
        rep = report.build_report(args.phase, system=summary.as_metrics(),
                                  task_id=args.task_id, algorithm_id=args.algorithm_id)
        ingest.write_text(args.report_out, report.render(rep, "json"))
    if status != 0:
        _err(f"monitored command exited with status {status}")
        return EXIT_CHILD
    return EXIT_OK


def cmd_webgen(args) -> int:
    registry = webgen.PrimitiveRegistry.default()
    if args.registry:
        try:
            registry = webgen.PrimitiveRegistry.from_json(_read(args.registry), args.registry)
        except webgen.WebgenError as exc:
            raise Failure(str(exc)) from None
    config = webgen.GenConfig(num_websites=args.num_websites, seed=args.seed, registry=registry,
                              level_filter=args.difficulty_level)
    try:
        sites = webgen.generate_websites(config)
    except webgen.WebgenError as exc:
        raise Failure(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for site in sites:
        (out / f"{site.website_id}.json").write_text(webgen.site_to_json(site), encoding="utf-8")
        if args.render_html:
            webgen.render_html(site, Path(args.render_html) / site.website_id)
    counts = collections.Counter(site.level for site in sites)
    for level in (1, 2, 3, None):
        label = f"level {level}" if level else "unclassified"
        print(f"{label}: {counts.get(level, 0)}")
    return EXIT_OK


def cmd_report(args) -> int:
    reports = report.merge_reports(_load_report_files(args.inputs))
    try:
        if args.format == "radar":
            if not args.axes:
                raise Failure("--format radar needs --axes", EXIT_USAGE)
            phase_reports = [r for r in reports if r.phase == args.phase]
            tasks = {r.task_id for r in phase_reports}
            if len(tasks) > 1:
                raise Failure(f"reports mix tasks: {', '.join(sorted(tasks))}")
            if len({r.algorithm_id for r in phase_reports}) < 2:
                raise Failure("radar needs reports for at least 2 algorithms", EXIT_USAGE)
            data = report.radar_data(phase_reports, args.axes)
            text = json.dumps(data.to_dict(), sort_keys=True, indent=2) + "\n"
        else:
            text = report.render(reports, args.format)
    except report.ReportError as exc:
        raise Failure(str(exc)) from None
    _emit(text, args.out)
    return EXIT_OK


def cmd_submit(args) -> int:
    reports = report.merge_reports(_load_report_files(args.report))
    try:
        config = json.loads(_read(args.config))
    except json.JSONDecodeError as exc:
        raise Failure(f"{args.config}:{exc.lineno}: malformed JSON: {exc.msg}") from None
    if not isinstance(config, dict):
        raise Failure(f"{args.config}: config must be a JSON object")
    try:
        text = report.submission_bundle(reports, config)
    except report.ReportError as exc:
        raise Failure(f"{args.config}: {exc}") from None
    _emit(text, args.out)
    return EXIT_OK


def _line_of(text: str, needle: str) -> int:
    idx = text.find(needle)
    return text.count("\n", 0, idx) + 1 if idx >= 0 else 1


def _validate_json_doc(text: str, path: str, loader) -> list[str]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return [f"{path}:{exc.lineno}: malformed JSON: {exc.msg}"]
    try:
        obj = loader(doc)
    except (report.ReportError, webgen.WebgenError, KeyError, TypeError, ValueError) as exc:
        msg = str(exc)
        quoted = [w for w in msg.split("'")[1::2] if w]
        line = _line_of(text, f'"{quoted[0]}"') if quoted else 1
        return [f"{path}:{line}: {msg}"]
    return [f"{path}:1: {v}" for v in obj]


def _check_reports(doc) -> list[str]:
    for d in doc if isinstance(doc, list) else [doc]:
        report.report_from_dict(d)
    return []


def _check_bundle(doc) -> list[str]:
    report.bundle_from_dict(doc)
    return []


def _load_website(doc):
    if not isinstance(doc, dict):
        raise webgen.WebgenError("website must be a JSON object")
    site = webgen.site_from_dict(doc)
    problems = validate(site)
    if not problems and site.level != webgen.difficulty_level(site):
        problems.append("level: matches difficulty_nats")
    return problems


def cmd_validate(args) -> int:
    path = args.file
    text = _read(path)
    lines = text.splitlines(keepends=True)
    problems: list[str] = []
    try:
        if args.schema == "training-curves":
            problems = [f"{path}:1: {v}" for v in validate(ingest.parse_training_curves(lines, path))]
        elif args.schema == "rollouts":
            problems = [f"{path}:1: {v}" for v in validate(ingest.parse_rollouts(lines, path))]
        elif args.schema == "telemetry":
            problems = [f"{path}:1: {v}" for v in validate(ingest.parse_telemetry(lines, path))]
        elif args.schema == "manifest":
            ingest.parse_dataset_manifest(text, path, require_energies=False)
        elif args.schema == "report":
            problems = _validate_json_doc(text, path, _check_reports)
        elif args.schema == "bundle":
            problems = _validate_json_doc(text, path, _check_bundle)
        elif args.schema == "website":
            problems = _validate_json_doc(text, path, _load_website)
    except ingest.ParseError as exc:
        problems = [str(exc)]
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_INVALID
    print(f"{path}: valid {args.schema}", file=sys.stderr)
    return EXIT_OK


def cmd_fixture(args) -> int:
    profile = ingest.FixtureProfile(n=args.n, T=args.T, shape=args.shape, noise=args.noise, seed=args.seed)
    runset = ingest.generate_fixture_runset(profile)
    _emit(ingest.write_training_curves(runset), args.out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="agentperf", description="Agent benchmarking metrics harness.",
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command_name", metavar="COMMAND", required=True)

    def ids(p):
        p.add_argument("--task-id", default="unknown", help="task identifier stored in the report")
        p.add_argument("--algorithm-id", default="unknown", help="algorithm identifier stored in the report")

    metrics = sub.add_parser("metrics", help="compute metric reports", formatter_class=fmt)
    msub = metrics.add_subparsers(dest="metrics_name", metavar="SUITE", required=True)

    p = msub.add_parser("reliability", help="reliability metrics from curves and/or rollouts", formatter_class=fmt)
    p.add_argument("--runs", help="training-curve JSONL file")
    p.add_argument("--rollouts", help="rollout JSONL file")
    p.add_argument("--alpha", type=_alpha, default=0.05, help="CVaR tail fraction")
    p.add_argument("--window", type=_odd_window, default=5, help="sliding window length (odd)")
    p.add_argument("--final-tail-k", type=_positive_int, default=1, help="trailing checkpoints averaged for final performance")
    p.add_argument("--alignment", choices=("strict", "interpolate"), default="interpolate", help="cross-run alignment mode")
    ids(p)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.set_defaults(func=cmd_metrics_reliability)

    p = msub.add_parser("datacost", help="training sample cost and total energy", formatter_class=fmt)
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--train-energy-kwh", type=float, default=None, help="energy of the learner's own training run (0 if omitted)")
    ids(p)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.set_defaults(func=cmd_metrics_datacost)

    p = sub.add_parser("monitor", help="run a command and record power/RAM telemetry", formatter_class=fmt)
    p.add_argument("--interval-s", type=_interval, default=1.0, help="sampling interval in seconds")
    p.add_argument("--out", help="telemetry JSONL output path (default: summary to stdout only)")
    p.add_argument("--summary", help="summary JSON path (default: <out>.summary.json)")
    p.add_argument("--gpu-power-cmd", default=None, help="command printing GPU watts, run once per sample")
    p.add_argument("--cpu-power-source", choices=("hardware_counter", "tdp_model"), default="hardware_counter",
                   help="CPU power source; falls back to tdp_model when counters are unreadable")
    p.add_argument("--tdp-watts", type=float, default=65.0, help="nameplate CPU watts for tdp_model")
    p.add_argument("--report-out", help="also write an a2report/1 with the system metrics")
    p.add_argument("--phase", choices=("training", "inference"), default="training", help="phase for --report-out")
    ids(p)
    p.add_argument("command", nargs=argparse.REMAINDER, help="command to run, after --")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("webgen", help="generate procedural websites", formatter_class=fmt)
    p.add_argument("--num-websites", type=_positive_int, default=1, help="number of websites")
    p.add_argument("--seed", type=_u64, default=0, help="64-bit generation seed")
    p.add_argument("--difficulty-level", type=int, choices=(1, 2, 3), default=None, help="keep only sites of this level")
    p.add_argument("--registry", default=None, help="primitive registry JSON overriding the default")
    p.add_argument("--render-html", default=None, help="directory for static HTML renderings")
    p.add_argument("--out", required=True, help="directory for WebsiteSpec JSON files")
    p.set_defaults(func=cmd_webgen)

    p = sub.add_parser("report", help="render reports as tables or radar data", formatter_class=fmt)
    p.add_argument("--inputs", nargs="+", required=True, help="a2report/1 JSON files")
    p.add_argument("--format", choices=("json", "csv", "markdown", "radar"), default="markdown", help="output format")
    p.add_argument("--axes", nargs="+", default=None, help="metric names for radar axes")
    p.add_argument("--phase", choices=("training", "inference"), default="training", help="phase used for radar data")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("submit", help="build a leaderboard submission bundle", formatter_class=fmt)
    p.add_argument("--report", nargs="+", required=True, help="a2report/1 JSON files")
    p.add_argument("--config", required=True, help="system configuration JSON")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.set_defaults(func=cmd_submit)

    p = sub.add_parser("validate", help="check a file against a harness schema", formatter_class=fmt)
    p.add_argument("--schema", required=True, choices=SCHEMAS, help="schema name")
    p.add_argument("--file", required=True, help="file to check")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fixture", help="write synthetic training curves", formatter_class=fmt)
    p.add_argument("--n", type=_positive_int, default=10, help="number of runs")
    p.add_argument("--T", type=_positive_int, default=100, help="checkpoints per run")
    p.add_argument("--shape", choices=("constant", "linear", "logistic"), default="logistic", help="base curve shape")
    p.add_argument("--noise", type=float, default=0.1, help="additive Gaussian noise scale")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Failure as exc:
        if exc.code == EXIT_USAGE:
            parser.print_usage(sys.stderr)
        _err(str(exc))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
