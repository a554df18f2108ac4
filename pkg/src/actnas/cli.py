"""Command-line front door.

Subcommands:

* bench-tables: build the per-layer replacement delta tables (latency and
  memory from device profiles or ingested measurement CSVs, accuracy from
  the training-free proxy) and write one CSV per (metric, device).
* search: run one search strategy over the tables and write a proposals
  JSON file.
* report: render the improvement table (text to stdout, CSV and a figure
  next to it with --out) for baselines and proposal files.
* nwot: score a single model with the training-free proxy.

Seeds resolve in this order: --seed flag, then the ACTNAS_SEED environment
variable, then 0.

Exit codes: 0 success, 2 configuration or input-file error, 3 infeasible
search (no assignment fits the budget), 4 estimator failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .activations import ActivationKind, parse_activation
from .devices import (DEFAULT_RUNS, MeasurementConfig, builtin_profile,
                      builtin_profile_names, load_profile)
from .errors import ActNasError, ConfigError, EstimatorError, NoFeasibleSolutionError
from .model import ModelSpec, builtin_model, builtin_model_names, load_model
from .nwot import DEFAULT_BATCH_SIZE, MiniBatch, score_model
from .report import build_report_rows, render_report_text, write_report_csv
from .search import (DEFAULT_RANDOM_ITERATIONS, Proposal, SearchConstraints,
                     SearchResult, evaluate_assignment, exact_search, lzcm_search,
                     naive_assignment, random_search, read_proposals, write_proposals)
from .tables import (CostMatrix, CostTable, Metric, build_accuracy_table,
                     build_latency_table, build_memory_table, read_table_csv,
                     table_filename, to_matrix, write_table_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_ESTIMATOR = 4

ENV_SEED = "ACTNAS_SEED"

_METRIC_CHOICES = [m.value for m in Metric]


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings shared by the subcommands."""

    seed: int
    batch_size: int = DEFAULT_BATCH_SIZE
    runs: int = DEFAULT_RUNS

    @property
    def weight_seed(self) -> int:
        return self.seed

    @property
    def batch_seed(self) -> int:
        return self.seed


def _resolve_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_SEED)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"{ENV_SEED} must be an integer, got {env!r}") from None


def _load_model(ref: str) -> ModelSpec:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        try:
            return load_model(path)
        except FileNotFoundError:
            raise ConfigError(f"model file not found: {ref}") from None
        except ValueError as exc:
            raise ConfigError(f"bad model file {ref}: {exc}") from exc
    try:
        return builtin_model(ref)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_profile(ref: str):
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        try:
            return load_profile(path)
        except FileNotFoundError:
            raise ConfigError(f"profile file not found: {ref}") from None
        except ValueError as exc:
            raise ConfigError(f"bad profile file {ref}: {exc}") from exc
    try:
        return builtin_profile(ref)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _read_table(path: Path) -> CostTable:
    if not path.exists():
        raise ConfigError(f"missing table file: {path}")
    try:
        return read_table_csv(path)
    except ValueError as exc:
        raise ConfigError(f"bad table file {path}: {exc}") from exc


def _load_matrix(tables_dir: Path, metric: Metric, device: str) -> CostMatrix:
    return to_matrix(_read_table(tables_dir / table_filename(metric, device)))


def _devices_in_dir(tables_dir: Path, metric: Metric) -> list[str]:
    prefix = f"{metric.value}_"
    return sorted(p.name[len(prefix):-len(".csv")]
                  for p in tables_dir.glob(f"{prefix}*.csv"))


def _parse_metric(value: str) -> Metric:
    try:
        return Metric(value)
    except ValueError:
        raise ConfigError(
            f"unknown metric {value!r}; expected one of: "
            f"{', '.join(_METRIC_CHOICES)}") from None


def _parse_activation_flag(value: str) -> ActivationKind:
    try:
        return parse_activation(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_bench_tables(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    config = RunConfig(seed=_resolve_seed(args.seed), batch_size=args.batch_size,
                       runs=args.runs)
    profiles = [_resolve_profile(ref) for ref in args.profile or []]
    measured: list[CostTable] = []
    for ref in args.measured or []:
        table = _read_table(Path(ref))
        if table.metric is Metric.ACCURACY:
            raise ConfigError(
                f"{ref}: accuracy tables are always rebuilt from the proxy scorer; "
                f"only latency/memory measurements can be ingested")
        measured.append(table)
    if not profiles and not measured:
        raise ConfigError("bench-tables needs at least one --profile or --measured")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    measurement = MeasurementConfig(runs=config.runs)
    for profile in profiles:
        for table in (build_latency_table(model, profile, measurement),
                      build_memory_table(model, profile)):
            path = out_dir / table_filename(table.metric, table.device)
            write_table_csv(table, path)
            written.append(path)
    for table in measured:
        path = out_dir / table_filename(table.metric, table.device)
        write_table_csv(table, path)
        written.append(path)

    batch = MiniBatch.generate(model.input_shape, n_samples=config.batch_size,
                               seed=config.batch_seed)
    devices: list[str] = []
    for name in [p.name for p in profiles] + [t.device for t in measured]:
        if name not in devices:
            devices.append(name)
    if not devices:
        devices = ["nwot"]
    accuracy = build_accuracy_table(model, batch, weight_seed=config.weight_seed,
                                    device=devices[0])
    for device in devices:
        table = replace(accuracy, device=device)
        path = out_dir / table_filename(Metric.ACCURACY, device)
        write_table_csv(table, path)
        written.append(path)

    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _default_budget_metric(objective: Metric) -> Metric:
    return Metric.ACCURACY if objective is not Metric.ACCURACY else Metric.LATENCY


def _pick_device(args: argparse.Namespace, tables_dir: Path, metric: Metric) -> str:
    if args.device:
        return args.device
    devices = _devices_in_dir(tables_dir, metric)
    if len(devices) == 1:
        return devices[0]
    if not devices:
        raise ConfigError(
            f"no {metric.value} tables found in {tables_dir}; run bench-tables first")
    raise ConfigError(
        f"multiple devices have {metric.value} tables ({', '.join(devices)}); "
        f"pick one with --device")


def cmd_search(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    tables_dir = Path(args.tables_dir)
    objective = _parse_metric(args.objective)
    budget_metric = (_parse_metric(args.budget_metric) if args.budget_metric
                     else _default_budget_metric(objective))
    try:
        constraints = SearchConstraints(objective_metric=objective,
                                        budget_metric=budget_metric,
                                        budget_value=args.budget)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    device = _pick_device(args, tables_dir, objective)
    needed = [objective, budget_metric]
    if args.method == "lzcm" and Metric.ACCURACY not in needed:
        needed.append(Metric.ACCURACY)
    matrices = {metric: _load_matrix(tables_dir, metric, device)
                for metric in needed}
    for metric, matrix in matrices.items():
        if matrix.n_layers != model.n_layers:
            raise ConfigError(
                f"{metric.value} table covers {matrix.n_layers} layers but the "
                f"model has {model.n_layers}")

    seed = _resolve_seed(args.seed)
    if args.method == "exact":
        result = exact_search(matrices, constraints, top_k=args.top_k,
                              diversity_d=args.diversity)
    elif args.method == "random":
        proposal = random_search(matrices, constraints,
                                 iterations=args.iterations, seed=seed)
        result = SearchResult(proposals=(proposal,))
    elif args.method == "lzcm":
        base = _parse_activation_flag(args.lzcm_base)
        alt = _parse_activation_flag(args.lzcm_alt)
        raw = lzcm_search(matrices[Metric.ACCURACY], base=base, alt=alt)
        result = SearchResult(proposals=(
            evaluate_assignment(raw.assignment, matrices, constraints),))
    elif args.method == "naive":
        early = _parse_activation_flag(args.naive_early)
        rest = _parse_activation_flag(args.naive_rest)
        raw = naive_assignment(model, k=args.naive_k, early=early, rest=rest)
        result = SearchResult(proposals=(
            evaluate_assignment(raw.assignment, matrices, constraints),))
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown method {args.method!r}")

    out_path = Path(args.out)
    write_proposals(out_path, args.method, constraints, result)
    for proposal in result.proposals:
        names = ",".join(k.value for k in proposal.assignment)
        print(f"rank {proposal.rank}: objective_total={proposal.objective_total!r} "
              f"budget_total={proposal.budget_total!r} assignment={names}")
    if result.truncated:
        print("truncated: diversity cuts exhausted the feasible space")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    tables_dir = Path(args.tables_dir)
    metric = _parse_metric(args.objective)
    if args.devices:
        devices = [d.strip() for d in args.devices.split(",") if d.strip()]
    else:
        devices = _devices_in_dir(tables_dir, metric)
    if not devices:
        raise ConfigError(
            f"no {metric.value} tables found in {tables_dir}; run bench-tables first")
    matrices = {device: _load_matrix(tables_dir, metric, device)
                for device in devices}

    baseline_labels = [b.strip() for b in args.baselines.split(",") if b.strip()]
    if not baseline_labels:
        raise ConfigError("no baseline labels given")
    baselines = [(label, _parse_activation_flag(label)) for label in baseline_labels]

    candidates: list[tuple[str, tuple[ActivationKind, ...]]] = []
    labels_seen = set(label for label, _ in baselines)
    for ref in args.proposals or []:
        path = Path(ref)
        if not path.exists():
            raise ConfigError(f"proposals file not found: {path}")
        try:
            proposal_set = read_proposals(path)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad proposals file {path}: {exc}") from exc
        for proposal in proposal_set.result.proposals:
            label = f"{proposal_set.method}{proposal.rank}"
            if label in labels_seen:
                label = f"{path.stem}-{label}"
            labels_seen.add(label)
            candidates.append((label, proposal.assignment))

    try:
        rows = build_report_rows(matrices, baselines, candidates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = render_report_text(rows, metric, baseline_labels)
    sys.stdout.write(text)

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "report.csv"
        write_report_csv(rows, metric, baseline_labels, csv_path)
        from .figures import render_report_figure  # deferred: pulls in matplotlib
        figure_path = out_dir / "report.png"
        render_report_figure(rows, metric, figure_path)
        print(f"wrote {csv_path}")
        print(f"wrote {figure_path}")
    return EXIT_OK


def cmd_nwot(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    config = RunConfig(seed=_resolve_seed(args.seed), batch_size=args.batch_size)
    batch = MiniBatch.generate(model.input_shape, n_samples=config.batch_size,
                               seed=config.batch_seed)
    try:
        score = score_model(model, batch, weight_seed=config.weight_seed)
    except ValueError as exc:
        raise EstimatorError(f"proxy scoring failed: {exc}") from exc
    print(f"score={score.value!r} degenerate={score.degenerate} "
          f"samples={batch.n_samples} units={model.total_elements} "
          f"weight_seed={config.weight_seed} batch_seed={config.batch_seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actnas",
        description="Search per-layer activation assignments under latency, "
                    "accuracy, and memory budgets.",
        epilog="exit codes: 0 success, 2 config error, 3 infeasible search, "
               "4 estimator failure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench-tables",
                           help="build per-layer replacement delta tables")
    bench.add_argument("--model", required=True,
                       help="model JSON file or a builtin name "
                            f"({', '.join(builtin_model_names())})")
    bench.add_argument("--profile", action="append",
                       help="device profile: a JSON file or a builtin name "
                            f"({', '.join(builtin_profile_names())}); repeatable")
    bench.add_argument("--measured", action="append",
                       help="pre-measured latency/memory table CSV to ingest; repeatable")
    bench.add_argument("--out", required=True, help="output directory for table CSVs")
    bench.add_argument("--seed", type=int, default=None,
                       help=f"global seed (default: ${ENV_SEED} or 0)")
    bench.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE,
                       help="proxy mini-batch size")
    bench.add_argument("--runs", type=int, default=DEFAULT_RUNS,
                       help="latency simulation runs to average")
    bench.set_defaults(handler=cmd_bench_tables)

    search = sub.add_parser("search", help="search assignments over built tables")
    search.add_argument("--model", required=True,
                        help="model JSON file or a builtin name "
                             f"({', '.join(builtin_model_names())})")
    search.add_argument("--tables-dir", required=True,
                        help="directory holding bench-tables output")
    search.add_argument("--device", default=None,
                        help="device tag of the tables to use (default: the only one)")
    search.add_argument("--method", required=True,
                        choices=["lzcm", "naive", "random", "exact"])
    search.add_argument("--objective", default=Metric.LATENCY.value,
                        choices=_METRIC_CHOICES, help="metric to minimize")
    search.add_argument("--budget-metric", default=None, choices=_METRIC_CHOICES,
                        help="constrained metric (default: accuracy, or latency "
                             "when the objective is accuracy)")
    search.add_argument("--budget", type=float, default=math.inf,
                        help="cap on the oriented budget delta total "
                             "(default: unbounded)")
    search.add_argument("--top-k", type=int, default=1,
                        help="proposals to return (exact method)")
    search.add_argument("--diversity", type=int, default=3,
                        help="minimum slots any two proposals differ in (exact method)")
    search.add_argument("--seed", type=int, default=None,
                        help=f"global seed (default: ${ENV_SEED} or 0)")
    search.add_argument("--iterations", type=int, default=DEFAULT_RANDOM_ITERATIONS,
                        help="random-search iterations")
    search.add_argument("--lzcm-base", default=ActivationKind.SILU.value,
                        help="lzcm base activation")
    search.add_argument("--lzcm-alt", default=ActivationKind.RELU.value,
                        help="lzcm alternative activation")
    search.add_argument("--naive-k", type=int, default=3,
                        help="naive method: early slot count")
    search.add_argument("--naive-early", default=ActivationKind.RELU.value,
                        help="naive method: activation for the first k slots")
    search.add_argument("--naive-rest", default=ActivationKind.SILU.value,
                        help="naive method: activation for the remaining slots")
    search.add_argument("--out", default="proposals.json",
                        help="output proposals JSON path")
    search.set_defaults(handler=cmd_search)

    report = sub.add_parser("report",
                            help="render the improvement table and figure")
    report.add_argument("--tables-dir", required=True,
                        help="directory holding bench-tables output")
    report.add_argument("--objective", default=Metric.LATENCY.value,
                        choices=_METRIC_CHOICES, help="metric to report")
    report.add_argument("--devices", default=None,
                        help="comma-separated device tags (default: all found)")
    report.add_argument("--baselines", default="hardswish,silu",
                        help="comma-separated uniform-activation baselines")
    report.add_argument("--proposals", action="append",
                        help="proposals JSON from the search subcommand; repeatable")
    report.add_argument("--out", default=None,
                        help="directory for report.csv and report.png")
    report.set_defaults(handler=cmd_report)

    nwot = sub.add_parser("nwot", help="score one model with the training-free proxy")
    nwot.add_argument("--model", required=True,
                      help="model JSON file or a builtin name "
                           f"({', '.join(builtin_model_names())})")
    nwot.add_argument("--seed", type=int, default=None,
                      help=f"global seed (default: ${ENV_SEED} or 0)")
    nwot.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE,
                      help="proxy mini-batch size")
    nwot.set_defaults(handler=cmd_nwot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoFeasibleSolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EstimatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except ActNasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
