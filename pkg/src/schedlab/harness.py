"""Experiment orchestration: run scheduler comparisons, aggregate, re-aggregate.

An experiment trains one MLP per (scheduler section, seed) pair on the
configured task, always from the same seed-derived initialization and batch
order, so runs differ only through the learning-rate schedule. Outputs under
the chosen directory:

    config.ini                      canonical copy of the experiment config
    runs/<label>__s<seed>__steps.csv    per-step lr / train loss / train acc
    runs/<label>__s<seed>__epochs.csv   per-epoch test acc / test loss
    runs/<label>__s<seed>__model.bin    final flat parameter vector
    runs.csv                        one row per run (+ curvature when probed)
    summary.csv                     per-scheduler mean/std test accuracy
    pairs.csv                       paired t-test for every scheduler pair
    fig_test_acc.csv                per-epoch test accuracy, one column per scheduler
    fig_train_loss.csv              per-step train loss, one column per scheduler
    fig_lr.csv                      per-step learning rate, one column per scheduler

Figure tables use each scheduler's first-seed run. ``report_from_dir``
rebuilds every aggregate byte for byte from the per-run files alone, so a
finished directory can be re-summarized without retraining.

All floats are written with ``repr`` and parsed back with ``float``, which
round-trips exactly; rerunning the same config therefore reproduces every
output file byte-identically.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from schedlab.config import (
    CosineSection,
    ExperimentConfig,
    ExponentialSection,
    PlateauSection,
    VolschedSection,
    parse_config,
    serialize_config,
)
from schedlab.datasets import BlobSpec, Dataset, SpiralSpec, make_blobs, make_spirals
from schedlab.hessian import EigenResult, model_probe, top_eigenvalue
from schedlab.schedulers import (
    CosineAnnealing,
    ExponentialDecay,
    LrScheduler,
    ReduceOnPlateau,
    VolatilityScheduler,
)
from schedlab.stats import mean, paired_t_test, sample_stdev
from schedlab.training import RunRecord, save_theta, train_run, write_csv, write_run_csvs

__all__ = [
    "RunStats",
    "AggregateReport",
    "build_datasets",
    "build_section_scheduler",
    "run_experiment",
    "sweep_w",
    "report_from_dir",
]

_SKIP_DIVERGED = "skipped: diverged run in pair"
_SKIP_FEW_SEEDS = "skipped: need at least 2 seeds"
_NOTE_DEGENERATE = "degenerate: zero-variance differences"


@dataclass(frozen=True)
class RunStats:
    """Neutral per-run summary; buildable from a live record or from disk."""

    label: str
    seed: int
    final_test_acc: float
    diverged: bool
    max_lr: float
    eigen: Optional[EigenResult]
    epoch_rows: tuple
    step_rows: tuple


@dataclass(frozen=True)
class AggregateReport:
    labels: tuple[str, ...]
    stats: tuple[RunStats, ...]

    @property
    def any_diverged(self) -> bool:
        return any(s.diverged for s in self.stats)

    def by_label(self, label: str) -> tuple[RunStats, ...]:
        return tuple(s for s in self.stats if s.label == label)


def build_datasets(config: ExperimentConfig) -> tuple[Dataset, Dataset]:
    t = config.task
    if t.dataset == "blobs":
        train_spec = BlobSpec(classes=t.classes, per_class=t.train_per_class,
                              center_spread=t.center_spread, noise=t.noise,
                              seed=t.data_seed)
        test_spec = replace(train_spec, per_class=t.test_per_class)
        return make_blobs(train_spec, "train"), make_blobs(test_spec, "test")
    train_spec = SpiralSpec(per_class=t.train_per_class, noise=t.noise,
                            turns=t.turns, seed=t.data_seed)
    test_spec = replace(train_spec, per_class=t.test_per_class)
    return make_spirals(train_spec, "train"), make_spirals(test_spec, "test")


def build_section_scheduler(config: ExperimentConfig, section) -> LrScheduler:
    sched_config = config.scheduler_config(section)
    if isinstance(section, VolschedSection):
        return VolatilityScheduler(sched_config)
    if isinstance(section, CosineSection):
        return CosineAnnealing(sched_config)
    if isinstance(section, ExponentialSection):
        return ExponentialDecay(sched_config, gamma=section.gamma)
    if isinstance(section, PlateauSection):
        return ReduceOnPlateau(sched_config, mode=section.mode,
                               factor=section.factor, patience=section.patience)
    raise TypeError(f"unknown scheduler section {section!r}")


def _execute_run(config: ExperimentConfig, section, seed: int, label: str):
    """Run one (scheduler, seed) cell. Top-level so process pools can pickle it."""
    train, test = build_datasets(config)
    scheduler = build_section_scheduler(config, section)
    record = train_run(
        train, test, config.layer_sizes, scheduler,
        epochs=config.run.epochs, batch_size=config.run.batch_size,
        momentum=config.optimizer.momentum,
        weight_decay=config.optimizer.weight_decay,
        seed=seed, label=label,
    )
    eigen = None
    if config.run.probe_hessian and not record.diverged:
        probe = model_probe(config.layer_sizes, record.final_theta, train, seed=seed)
        eigen = top_eigenvalue(probe)
    return record, eigen


def _stats_from_record(record: RunRecord, eigen: Optional[EigenResult]) -> RunStats:
    return RunStats(
        label=record.scheduler, seed=record.seed,
        final_test_acc=record.final_test_acc, diverged=record.diverged,
        max_lr=record.max_lr, eigen=eigen,
        epoch_rows=tuple(record.epochs), step_rows=tuple(record.steps),
    )


def _run_grid(config: ExperimentConfig, cells, jobs: int):
    """Execute (section, label) x seed cells, preserving submission order."""
    tasks = [(section, label, seed)
             for section, label in cells for seed in config.run.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_execute_run, config, section, seed, label)
                       for section, label, seed in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_execute_run(config, section, seed, label)
                   for section, label, seed in tasks]
    return results


def _write_run_files(out_dir: str, record: RunRecord) -> None:
    runs_dir = os.path.join(out_dir, "runs")
    os.makedirs(runs_dir, exist_ok=True)
    stem = os.path.join(runs_dir, f"{record.scheduler}__s{record.seed}")
    write_run_csvs(record, stem + "__steps.csv", stem + "__epochs.csv")
    save_theta(stem + "__model.bin", record.final_theta)


def run_experiment(config: ExperimentConfig, out_dir: str, jobs: int = 1) -> AggregateReport:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.ini"), "w", encoding="utf-8", newline="") as fh:
        fh.write(serialize_config(config))

    cells = [(section, section.name) for section in config.schedulers]
    results = _run_grid(config, cells, jobs)
    stats = []
    for record, eigen in results:
        _write_run_files(out_dir, record)
        stats.append(_stats_from_record(record, eigen))

    labels = tuple(label for _, label in cells)
    report = AggregateReport(labels=labels, stats=tuple(stats))
    _write_runs_csv(out_dir, report)
    _write_aggregates(out_dir, report)
    return report


def sweep_w(config: ExperimentConfig, w_values, out_dir: str, jobs: int = 1) -> AggregateReport:
    """Cosine baseline plus one volatility run per w, sharing seeds and data.

    Emits the per-run files and ``sweep_summary.csv`` with the highest
    learning rate each setting reached.
    """
    w_values = [float(w) for w in w_values]
    if not w_values:
        raise ValueError("sweep needs at least one w value")
    base_vol = None
    for section in config.schedulers:
        if isinstance(section, VolschedSection):
            base_vol = section
            break
    if base_vol is None:
        raise ValueError("sweep needs a [volsched] section in the config")

    os.makedirs(out_dir, exist_ok=True)
    cells = [(CosineSection(), "cosine")]
    for w in w_values:
        cells.append((replace(base_vol, weight_w=w), f"w_{w:g}"))

    results = _run_grid(config, cells, jobs)
    stats = []
    for record, eigen in results:
        _write_run_files(out_dir, record)
        stats.append(_stats_from_record(record, eigen))

    labels = tuple(label for _, label in cells)
    report = AggregateReport(labels=labels, stats=tuple(stats))

    rows = []
    for label in labels:
        runs = report.by_label(label)
        finals = [s.final_test_acc for s in runs
                  if not s.diverged and not math.isnan(s.final_test_acc)]
        acc_mean = mean(finals) if finals else None
        acc_std = (sample_stdev(finals) if len(finals) > 1
                   else 0.0 if finals else None)
        peak = max(s.max_lr for s in runs)
        rows.append((label, acc_mean, acc_std, len(finals), peak))
    write_csv(os.path.join(out_dir, "sweep_summary.csv"),
              ("label", "mean_acc", "std_acc", "n_seeds", "max_lr"), rows)
    _write_figure_csvs(out_dir, report)
    return report


# --- aggregation ------------------------------------------------------------

def _write_runs_csv(out_dir: str, report: AggregateReport) -> None:
    rows = []
    for s in report.stats:
        if s.eigen is None:
            lam = it = res = conv = None
        else:
            lam, it = s.eigen.lambda_max, s.eigen.iterations
            res, conv = s.eigen.residual, s.eigen.converged
        rows.append((s.label, s.seed, s.final_test_acc, s.diverged, s.max_lr,
                     lam, it, res, conv))
    write_csv(os.path.join(out_dir, "runs.csv"),
              ("scheduler", "seed", "final_test_acc", "diverged", "max_lr",
               "lambda_max", "iterations", "residual", "converged"), rows)


def _write_aggregates(out_dir: str, report: AggregateReport) -> None:
    _write_summary_csv(out_dir, report)
    _write_pairs_csv(out_dir, report)
    _write_figure_csvs(out_dir, report)


def _write_summary_csv(out_dir: str, report: AggregateReport) -> None:
    probed = any(s.eigen is not None for s in report.stats)
    header = ["scheduler", "mean_acc", "std_acc", "n_seeds", "single_seed", "formatted_pct"]
    if probed:
        header += ["lambda_mean", "lambda_std"]
    rows = []
    for label in report.labels:
        runs = report.by_label(label)
        finals = [s.final_test_acc for s in runs
                  if not s.diverged and not math.isnan(s.final_test_acc)]
        single = len(finals) == 1
        if not finals:
            row = [label, None, None, 0, single, ""]
        else:
            # single-seed runs report std 0 with the flag set, not a failure
            m = mean(finals)
            sd = sample_stdev(finals) if len(finals) > 1 else 0.0
            row = [label, m, sd, len(finals), single, f"{m * 100:.2f}±{sd * 100:.1f}"]
        if probed:
            lams = [s.eigen.lambda_max for s in runs
                    if s.eigen is not None and s.eigen.converged]
            row += [mean(lams) if lams else None,
                    sample_stdev(lams) if len(lams) > 1 else None]
        rows.append(tuple(row))
    write_csv(os.path.join(out_dir, "summary.csv"), tuple(header), rows)


def _write_pairs_csv(out_dir: str, report: AggregateReport) -> None:
    rows = []
    for i, a in enumerate(report.labels):
        for b in report.labels[i + 1:]:
            runs_a = {s.seed: s for s in report.by_label(a)}
            runs_b = {s.seed: s for s in report.by_label(b)}
            seeds = [seed for seed in runs_a if seed in runs_b]
            usable = [seed for seed in seeds
                      if not runs_a[seed].diverged and not runs_b[seed].diverged
                      and not math.isnan(runs_a[seed].final_test_acc)
                      and not math.isnan(runs_b[seed].final_test_acc)]
            if len(usable) < len(seeds):
                rows.append((a, b, None, None, None, _SKIP_DIVERGED))
                continue
            if len(usable) < 2:
                rows.append((a, b, None, None, None, _SKIP_FEW_SEEDS))
                continue
            xs = [runs_a[seed].final_test_acc for seed in usable]
            ys = [runs_b[seed].final_test_acc for seed in usable]
            try:
                result = paired_t_test(xs, ys)
            except ValueError:
                rows.append((a, b, None, None, None, _NOTE_DEGENERATE))
                continue
            rows.append((a, b, result.t, result.dof, result.p, ""))
    write_csv(os.path.join(out_dir, "pairs.csv"),
              ("a", "b", "t", "dof", "p", "note"), rows)


def _first_seed_run(report: AggregateReport, label: str) -> Optional[RunStats]:
    runs = report.by_label(label)
    return runs[0] if runs else None


def _write_figure_csvs(out_dir: str, report: AggregateReport) -> None:
    # every figure table is keyed by optimizer step so columns align across
    # files; test accuracy lands on the last step of its epoch
    acc_series = {}
    loss_series = {}
    lr_series = {}
    for label in report.labels:
        run = _first_seed_run(report, label)
        if run is None:
            continue
        epoch_end = {}
        for row in run.step_rows:
            epoch_end[row[1]] = max(row[0], epoch_end.get(row[1], 0))
        acc_series[label] = {epoch_end[row[0]]: row[1] for row in run.epoch_rows}
        loss_series[label] = {row[0]: row[3] for row in run.step_rows}
        lr_series[label] = {row[0]: row[2] for row in run.step_rows}

    def table(path, series):
        keys = sorted(set().union(*series.values())) if series else []
        rows = []
        for key in keys:
            rows.append((key, *(series[label].get(key) for label in report.labels)))
        write_csv(path, ("step", *report.labels), rows)

    table(os.path.join(out_dir, "fig_test_acc.csv"), acc_series)
    table(os.path.join(out_dir, "fig_train_loss.csv"), loss_series)
    table(os.path.join(out_dir, "fig_lr.csv"), lr_series)


# --- re-aggregation from a finished directory -------------------------------

def _parse_cell(raw: str):
    if raw == "":
        return None
    if raw == "true":
        return True
    if raw == "false":
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [tuple(_parse_cell(cell) for cell in row) for row in reader]


def report_from_dir(out_dir: str) -> AggregateReport:
    """Rebuild summary.csv, pairs.csv and the figure tables from per-run files.

    Requires config.ini and runs.csv; raises FileNotFoundError when either
    is absent. Output bytes match what run_experiment wrote.
    """
    with open(os.path.join(out_dir, "config.ini"), "r", encoding="utf-8", newline="") as fh:
        config = parse_config(fh.read())
    _, rows = _read_csv(os.path.join(out_dir, "runs.csv"))
    stats = []
    for label, seed, final_acc, diverged, max_lr, lam, it, res, conv in rows:
        stem = os.path.join(out_dir, "runs", f"{label}__s{seed}")
        _, epoch_rows = _read_csv(stem + "__epochs.csv")
        _, step_rows = _read_csv(stem + "__steps.csv")
        eigen = None
        if lam is not None:
            eigen = EigenResult(lambda_max=float(lam), iterations=int(it),
                                residual=float(res), converged=bool(conv),
                                negative_curvature=float(lam) < 0.0)
        stats.append(RunStats(
            label=label, seed=int(seed),
            final_test_acc=float(final_acc) if final_acc is not None else float("nan"),
            diverged=bool(diverged),
            max_lr=float(max_lr) if max_lr is not None else float("nan"),
            eigen=eigen, epoch_rows=tuple(epoch_rows), step_rows=tuple(step_rows)))

    labels = tuple(section.name for section in config.schedulers)
    report = AggregateReport(labels=labels, stats=tuple(stats))
    _write_aggregates(out_dir, report)
    return report
