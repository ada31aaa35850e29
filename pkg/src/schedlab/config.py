"""Line-oriented experiment configs: ``key = value`` under ``[section]`` headers.

Sections are ``[task]``, ``[optimizer]``, ``[run]``, and one per scheduler
(``[volsched]``, ``[cosine]``, ``[exponential]``, ``[plateau]``). A scheduler
participates in an experiment exactly when its section appears; ``[task]``
and ``[run]`` are required. Blank lines and lines starting with ``#`` or
``;`` are ignored. Every parse problem reports the offending line number.

Key reference (defaults in parentheses):

    [task]       dataset (blobs|spirals), classes (8), train_per_class (500),
                 test_per_class (125), center_spread (5.0), noise (1.0),
                 turns (1.75), hidden (32,32; empty for a linear model),
                 data_seed (7)
    [optimizer]  base_lr (0.1), momentum (0.9), weight_decay (1e-4),
                 eta_min (1e-4), warmup_epochs (1), start_factor (0.01)
    [run]        epochs (40), batch_size (64), seeds (8,42,123),
                 probe_hessian (false), out (unset)
    [volsched]   w (0.05), N (50), epsilon (1e-8), max_lr_cap (none)
    [exponential] gamma (0.95)
    [plateau]    mode (max), factor (0.5), patience (10)
    [cosine]     no keys
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from schedlab.schedulers import SchedulerConfig

__all__ = [
    "ConfigError",
    "TaskSpec",
    "OptimizerSpec",
    "RunSpec",
    "VolschedSection",
    "CosineSection",
    "ExponentialSection",
    "PlateauSection",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
]


class ConfigError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


@dataclass(frozen=True)
class TaskSpec:
    dataset: str = "blobs"
    classes: int = 8
    train_per_class: int = 500
    test_per_class: int = 125
    center_spread: float = 5.0
    noise: float = 1.0
    turns: float = 1.75
    hidden: tuple[int, ...] = (32, 32)
    data_seed: int = 7


@dataclass(frozen=True)
class OptimizerSpec:
    base_lr: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 1e-4
    eta_min: float = 1e-4
    warmup_epochs: int = 1
    start_factor: float = 0.01


@dataclass(frozen=True)
class RunSpec:
    epochs: int = 40
    batch_size: int = 64
    seeds: tuple[int, ...] = (8, 42, 123)
    probe_hessian: bool = False
    out: Optional[str] = None


@dataclass(frozen=True)
class VolschedSection:
    window_n: int = 50
    weight_w: float = 0.05
    epsilon: float = 1e-8
    max_lr_cap: Optional[float] = None

    name = "volsched"


@dataclass(frozen=True)
class CosineSection:
    name = "cosine"


@dataclass(frozen=True)
class ExponentialSection:
    gamma: float = 0.95

    name = "exponential"


@dataclass(frozen=True)
class PlateauSection:
    mode: str = "max"
    factor: float = 0.5
    patience: int = 10

    name = "plateau"


_SCHEDULER_SECTIONS = ("volsched", "cosine", "exponential", "plateau")


@dataclass(frozen=True)
class ExperimentConfig:
    task: TaskSpec
    optimizer: OptimizerSpec
    run: RunSpec
    schedulers: tuple

    @property
    def n_train(self) -> int:
        return self.task.classes * self.task.train_per_class

    @property
    def n_test(self) -> int:
        return self.task.classes * self.task.test_per_class

    @property
    def steps_per_epoch(self) -> int:
        return -(-self.n_train // self.run.batch_size)

    @property
    def t_max(self) -> int:
        return self.run.epochs * self.steps_per_epoch

    @property
    def warmup_steps(self) -> int:
        return self.optimizer.warmup_epochs * self.steps_per_epoch

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (2, *self.task.hidden, self.task.classes)

    def scheduler_config(self, section=None) -> SchedulerConfig:
        vol = section if isinstance(section, VolschedSection) else None
        if vol is None:
            for s in self.schedulers:
                if isinstance(s, VolschedSection):
                    vol = s
                    break
        if vol is None:
            vol = VolschedSection(window_n=min(50, self.t_max - 1))
        return SchedulerConfig(
            base_lr=self.optimizer.base_lr,
            t_max=self.t_max,
            eta_min=self.optimizer.eta_min,
            window_n=vol.window_n,
            weight_w=vol.weight_w,
            epsilon=vol.epsilon,
            warmup_steps=self.warmup_steps,
            start_factor=self.optimizer.start_factor,
            max_lr_cap=vol.max_lr_cap,
        )


# --- value parsers ----------------------------------------------------------

def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {raw!r}")
    return value


def _parse_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def _parse_int_list(raw: str) -> tuple[int, ...]:
    if raw == "":
        return ()
    return tuple(_parse_int(part.strip()) for part in raw.split(","))


def _parse_optional_float(raw: str) -> Optional[float]:
    if raw == "none":
        return None
    return _parse_float(raw)


def _parse_choice(raw: str, choices) -> str:
    if raw not in choices:
        raise ValueError(f"expected one of {', '.join(choices)}, got {raw!r}")
    return raw


_TASK_KEYS = {
    "dataset": ("dataset", lambda raw: _parse_choice(raw, ("blobs", "spirals"))),
    "classes": ("classes", _parse_int),
    "train_per_class": ("train_per_class", _parse_int),
    "test_per_class": ("test_per_class", _parse_int),
    "center_spread": ("center_spread", _parse_float),
    "noise": ("noise", _parse_float),
    "turns": ("turns", _parse_float),
    "hidden": ("hidden", _parse_int_list),
    "data_seed": ("data_seed", _parse_int),
}

_OPTIMIZER_KEYS = {
    "base_lr": ("base_lr", _parse_float),
    "momentum": ("momentum", _parse_float),
    "weight_decay": ("weight_decay", _parse_float),
    "eta_min": ("eta_min", _parse_float),
    "warmup_epochs": ("warmup_epochs", _parse_int),
    "start_factor": ("start_factor", _parse_float),
}

_RUN_KEYS = {
    "epochs": ("epochs", _parse_int),
    "batch_size": ("batch_size", _parse_int),
    "seeds": ("seeds", _parse_int_list),
    "probe_hessian": ("probe_hessian", _parse_bool),
    "out": ("out", lambda raw: raw),
}

_VOLSCHED_KEYS = {
    "w": ("weight_w", _parse_float),
    "N": ("window_n", _parse_int),
    "epsilon": ("epsilon", _parse_float),
    "max_lr_cap": ("max_lr_cap", _parse_optional_float),
}

_EXPONENTIAL_KEYS = {
    "gamma": ("gamma", _parse_float),
}

_PLATEAU_KEYS = {
    "mode": ("mode", lambda raw: _parse_choice(raw, ("max", "min"))),
    "factor": ("factor", _parse_float),
    "patience": ("patience", _parse_int),
}

_SECTION_SCHEMAS = {
    "task": (_TASK_KEYS, TaskSpec),
    "optimizer": (_OPTIMIZER_KEYS, OptimizerSpec),
    "run": (_RUN_KEYS, RunSpec),
    "volsched": (_VOLSCHED_KEYS, VolschedSection),
    "cosine": ({}, CosineSection),
    "exponential": (_EXPONENTIAL_KEYS, ExponentialSection),
    "plateau": (_PLATEAU_KEYS, PlateauSection),
}


def _scan(text: str):
    """Split config text into {section: {key: (raw, line)}} plus section lines."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    section_lines: dict[str, int] = {}
    order: list[str] = []
    current = None
    lineno = 0
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip()
            if name not in _SECTION_SCHEMAS:
                raise ConfigError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno)
            sections[name] = {}
            section_lines[name] = lineno
            order.append(name)
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key appears before any section header", lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        value = raw_value.strip()
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in section [{current}]", lineno)
        sections[current][key] = (value, lineno)
    return sections, section_lines, order, lineno


def _build_section(name: str, entries: dict[str, tuple[str, int]]):
    keys, cls = _SECTION_SCHEMAS[name]
    obj = cls()
    provided = set()
    for key, (raw, lineno) in entries.items():
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in section [{name}]", lineno)
        field, parser = keys[key]
        try:
            value = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r} in section [{name}]: {exc}", lineno) from None
        obj = replace(obj, **{field: value})
        provided.add(field)
    return obj, provided


def parse_config(text: str) -> ExperimentConfig:
    sections, section_lines, order, last_line = _scan(text)
    eof = max(last_line, 1)

    if "task" not in sections:
        raise ConfigError("missing required section [task]", eof)
    if "run" not in sections:
        raise ConfigError("missing required section [run]", eof)

    task, task_provided = _build_section("task", sections["task"])
    optimizer, _ = _build_section("optimizer", sections.get("optimizer", {}))
    run, _ = _build_section("run", sections["run"])

    scheduler_names = [name for name in order if name in _SCHEDULER_SECTIONS]
    if not scheduler_names:
        raise ConfigError("no schedulers configured", eof)
    schedulers = []
    for name in scheduler_names:
        section, _ = _build_section(name, sections[name])
        schedulers.append(section)

    if task.dataset == "spirals":
        if "classes" in task_provided and task.classes != 2:
            raise ConfigError("spirals task is binary; classes must be 2",
                              section_lines["task"])
        task = replace(task, classes=2)

    config = ExperimentConfig(task=task, optimizer=optimizer, run=run,
                              schedulers=tuple(schedulers))
    _validate(config, section_lines)
    return config


def _validate(config: ExperimentConfig, section_lines: dict[str, int]) -> None:
    task_line = section_lines.get("task", 1)
    opt_line = section_lines.get("optimizer", task_line)
    run_line = section_lines.get("run", task_line)

    t = config.task
    if t.classes < 2:
        raise ConfigError("classes must be at least 2", task_line)
    if t.train_per_class < 1 or t.test_per_class < 1:
        raise ConfigError("per-class counts must be positive", task_line)
    if t.center_spread <= 0 or t.noise < 0 or t.turns <= 0:
        raise ConfigError("task geometry values out of range", task_line)
    if any(h < 1 for h in t.hidden):
        raise ConfigError("hidden layer sizes must be positive", task_line)

    o = config.optimizer
    if o.base_lr <= 0:
        raise ConfigError("base_lr must be positive", opt_line)
    if not (0.0 <= o.momentum < 1.0):
        raise ConfigError("momentum must lie in [0, 1)", opt_line)
    if o.weight_decay < 0:
        raise ConfigError("weight_decay must be non-negative", opt_line)
    if not (0.0 <= o.eta_min <= o.base_lr):
        raise ConfigError("eta_min must lie in [0, base_lr]", opt_line)
    if o.warmup_epochs < 0:
        raise ConfigError("warmup_epochs must be non-negative", opt_line)
    if not (0.0 < o.start_factor <= 1.0):
        raise ConfigError("start_factor must lie in (0, 1]", opt_line)

    r = config.run
    if r.epochs < 1:
        raise ConfigError("epochs must be positive", run_line)
    if r.batch_size < 1:
        raise ConfigError("batch_size must be positive", run_line)
    if not r.seeds:
        raise ConfigError("seeds must list at least one seed", run_line)
    if len(set(r.seeds)) != len(r.seeds):
        raise ConfigError("seeds must be distinct", run_line)
    if o.warmup_epochs >= r.epochs:
        raise ConfigError("warmup_epochs must be smaller than epochs", opt_line)
    if config.t_max < 3:
        raise ConfigError("schedule too short: epochs x steps-per-epoch must be at least 3", run_line)

    for section in config.schedulers:
        line = section_lines.get(section.name, run_line)
        try:
            config.scheduler_config(section)
        except ValueError as exc:
            raise ConfigError(f"[{section.name}] {exc}", line) from None
        if isinstance(section, ExponentialSection) and not (0.0 < section.gamma < 1.0):
            raise ConfigError("[exponential] gamma must lie in (0, 1)", line)
        if isinstance(section, PlateauSection):
            if not (0.0 < section.factor < 1.0):
                raise ConfigError("[plateau] factor must lie in (0, 1)", line)
            if section.patience < 0:
                raise ConfigError("[plateau] patience must be non-negative", line)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = []
    t = config.task
    lines.append("[task]")
    lines.append(f"dataset = {t.dataset}")
    lines.append(f"classes = {t.classes}")
    lines.append(f"train_per_class = {t.train_per_class}")
    lines.append(f"test_per_class = {t.test_per_class}")
    lines.append(f"center_spread = {_fmt(t.center_spread)}")
    lines.append(f"noise = {_fmt(t.noise)}")
    lines.append(f"turns = {_fmt(t.turns)}")
    lines.append(f"hidden = {_fmt(t.hidden)}")
    lines.append(f"data_seed = {t.data_seed}")
    lines.append("")
    o = config.optimizer
    lines.append("[optimizer]")
    lines.append(f"base_lr = {_fmt(o.base_lr)}")
    lines.append(f"momentum = {_fmt(o.momentum)}")
    lines.append(f"weight_decay = {_fmt(o.weight_decay)}")
    lines.append(f"eta_min = {_fmt(o.eta_min)}")
    lines.append(f"warmup_epochs = {o.warmup_epochs}")
    lines.append(f"start_factor = {_fmt(o.start_factor)}")
    lines.append("")
    r = config.run
    lines.append("[run]")
    lines.append(f"epochs = {r.epochs}")
    lines.append(f"batch_size = {r.batch_size}")
    lines.append(f"seeds = {_fmt(r.seeds)}")
    lines.append(f"probe_hessian = {_fmt(r.probe_hessian)}")
    if r.out is not None:
        lines.append(f"out = {r.out}")
    for section in config.schedulers:
        lines.append("")
        lines.append(f"[{section.name}]")
        if isinstance(section, VolschedSection):
            lines.append(f"w = {_fmt(section.weight_w)}")
            lines.append(f"N = {section.window_n}")
            lines.append(f"epsilon = {_fmt(section.epsilon)}")
            if section.max_lr_cap is not None:
                lines.append(f"max_lr_cap = {_fmt(section.max_lr_cap)}")
        elif isinstance(section, ExponentialSection):
            lines.append(f"gamma = {_fmt(section.gamma)}")
        elif isinstance(section, PlateauSection):
            lines.append(f"mode = {section.mode}")
            lines.append(f"factor = {_fmt(section.factor)}")
            lines.append(f"patience = {section.patience}")
    lines.append("")
    return "\n".join(lines)
