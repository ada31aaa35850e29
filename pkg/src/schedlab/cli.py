"""Command-line front end.

Subcommands:

    simulate   generate a synthetic accuracy trace (single process or regimes)
    train      one scheduler, one seed, full per-step/per-epoch output
    compare    every configured scheduler across all seeds, with aggregates
    sweep-w    cosine baseline plus volatility runs over several w values
    hessian    sharpest-direction curvature of a saved model
    report     rebuild aggregate CSVs from a finished output directory

Exit codes: 0 success, 1 bad config or arguments, 2 a training run diverged,
3 missing or unreadable files.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from schedlab.config import ConfigError, parse_config
from schedlab.harness import (
    build_datasets,
    build_section_scheduler,
    report_from_dir,
    run_experiment,
    sweep_w,
)
from schedlab.hessian import eigen_csv_rows, model_probe, top_eigenvalue
from schedlab.tracesim import GbmParams, RegimeSegment, RegimeSpec, gbm_trace, regime_trace, write_trace_csv
from schedlab.training import load_theta, save_theta, train_run, write_csv, write_run_csvs

__all__ = ["main"]


def _load_config(path: str):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_config(fh.read())


def _apply_overrides(config, args):
    if getattr(args, "seeds", None):
        seeds = tuple(int(s) for s in args.seeds.split(","))
        config = replace(config, run=replace(config.run, seeds=seeds))
    return config


def _resolve_out(config, args) -> str:
    out = args.out or config.run.out
    if not out:
        raise ConfigError("no output directory: pass --out or set out in [run]", 0)
    return out


def _find_section(config, name: str):
    for section in config.schedulers:
        if section.name == name:
            return section
    configured = ", ".join(s.name for s in config.schedulers)
    raise ConfigError(f"scheduler {name!r} not in config (configured: {configured})", 0)


def _parse_segments(raw: str):
    segments = []
    for part in raw.split(","):
        fields = part.split(":")
        if len(fields) != 3:
            raise ValueError(f"segment {part!r} is not LENGTH:MU:SIGMA")
        segments.append(RegimeSegment(length=int(fields[0]), mu=float(fields[1]),
                                      sigma=float(fields[2])))
    return tuple(segments)


def cmd_simulate(args) -> int:
    if args.kind == "gbm":
        params = GbmParams(s0=args.s0, mu=args.mu, sigma=args.sigma,
                           dt=args.dt, steps=args.steps, seed=args.seed)
        values = gbm_trace(params)
    else:
        if not args.segments:
            raise ConfigError("regime simulation needs --segments", 0)
        spec = RegimeSpec(segments=_parse_segments(args.segments),
                          s0=args.s0, dt=args.dt, seed=args.seed)
        values = regime_trace(spec)
    if args.out:
        write_trace_csv(values, args.out)
    else:
        sys.stdout.write("accuracy\n")
        for v in values:
            sys.stdout.write(repr(float(v)) + "\n")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args.config)
    section = _find_section(config, args.scheduler)
    seed = args.seed if args.seed is not None else config.run.seeds[0]
    out = _resolve_out(config, args)

    os.makedirs(out, exist_ok=True)
    train, test = build_datasets(config)
    scheduler = build_section_scheduler(config, section)
    record = train_run(
        train, test, config.layer_sizes, scheduler,
        epochs=config.run.epochs, batch_size=config.run.batch_size,
        momentum=config.optimizer.momentum,
        weight_decay=config.optimizer.weight_decay,
        seed=seed, label=section.name,
    )
    stem = os.path.join(out, f"{section.name}__s{seed}")
    write_run_csvs(record, stem + "__steps.csv", stem + "__epochs.csv")
    save_theta(stem + "__model.bin", record.final_theta)
    print(f"scheduler={section.name} seed={seed} "
          f"final_test_acc={record.final_test_acc!r} diverged={str(record.diverged).lower()}")
    return 2 if record.diverged else 0


def cmd_compare(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    out = _resolve_out(config, args)
    report = run_experiment(config, out, jobs=args.jobs)
    for label in report.labels:
        finals = [s.final_test_acc for s in report.by_label(label) if not s.diverged]
        shown = ",".join(repr(v) for v in finals) or "all-diverged"
        print(f"{label}: {shown}")
    print(f"wrote aggregates to {out}")
    return 2 if report.any_diverged else 0


def cmd_sweep_w(args) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    out = _resolve_out(config, args)
    w_values = [float(part) for part in args.w.split(",") if part.strip()]
    report = sweep_w(config, w_values, out, jobs=args.jobs)
    print(f"wrote sweep results to {out}")
    return 2 if report.any_diverged else 0


def cmd_hessian(args) -> int:
    config = _load_config(args.config)
    theta = load_theta(args.theta)
    train, _ = build_datasets(config)
    probe = model_probe(config.layer_sizes, theta, train, fd_base=args.fd_base,
                        tol=args.tol, max_iters=args.max_iters, seed=args.seed)
    result = top_eigenvalue(probe)
    header, rows = eigen_csv_rows(result)
    if args.out:
        write_csv(args.out, header, rows)
    else:
        print(" ".join(f"{name}={_show(value)}" for name, value in zip(header, rows[0])))
    return 0


def _show(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_report(args) -> int:
    report_from_dir(args.out)
    print(f"rebuilt aggregates in {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schedlab",
                                     description="learning-rate scheduling laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic accuracy trace")
    p.add_argument("--kind", choices=("gbm", "regime"), default="gbm")
    p.add_argument("--s0", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segments", help="regime list LENGTH:MU:SIGMA,LENGTH:MU:SIGMA,...")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("train", help="train one scheduler on one seed")
    p.add_argument("--config", required=True)
    p.add_argument("--scheduler", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("compare", help="run every configured scheduler across seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seeds", help="comma-separated override of [run] seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("sweep-w", help="volatility-weight sensitivity sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--w", required=True, help="comma-separated w values")
    p.add_argument("--out")
    p.add_argument("--seeds", help="comma-separated override of [run] seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_sweep_w)

    p = sub.add_parser("hessian", help="top curvature of a saved model")
    p.add_argument("--config", required=True)
    p.add_argument("--theta", required=True, help="saved flat parameter vector")
    p.add_argument("--fd-base", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_hessian)

    p = sub.add_parser("report", help="rebuild aggregates from per-run files")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
