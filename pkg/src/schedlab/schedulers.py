"""Learning-rate schedulers built around accuracy-volatility feedback.

The centrepiece is :class:`VolatilityScheduler`, a multiplicative scheduler
that watches per-batch training accuracy, compares the long-run and recent
volatility of its log-returns, and nudges the learning rate up when recent
volatility collapses (a plateau) or down when it spikes. A cosine correction
factor keeps the multiplicative trajectory anchored to plain cosine annealing
whenever the volatility signal is neutral. Cosine annealing, exponential
decay, and reduce-on-plateau baselines sit behind the same stepping contract
and the same linear warmup rule, so comparisons are like-for-like.

Accuracies are fractions in [0, 1] everywhere in this package.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

__all__ = [
    "SchedulerConfig",
    "RunningMoments",
    "AccuracyStream",
    "LrScheduler",
    "VolatilityScheduler",
    "CosineAnnealing",
    "ExponentialDecay",
    "ReduceOnPlateau",
    "build_scheduler",
    "cosine_decay",
    "cosine_correction",
    "signed_log_multiplier",
    "vol_ratio_multiplier",
    "clamped_update",
    "cosine_baseline_lr",
    "exponential_baseline_lr",
    "SCHEDULER_NAMES",
]

SCHEDULER_NAMES = ("volsched", "cosine", "exponential", "plateau")


@dataclass(frozen=True)
class SchedulerConfig:
    """Shared schedule parameters plus the volatility-specific knobs.

    ``window_n`` is both the volatility window and the update cadence: the
    volatility scheduler recomputes its multiplier every ``window_n``
    post-warmup steps. ``weight_w`` scales how hard the multiplier reacts to
    a given volatility ratio; 0 disables the feedback entirely and leaves
    pure cosine annealing. ``warmup_steps`` linear-warmup steps are shared by
    every scheduler and do not count toward the update cadence.
    """

    base_lr: float
    t_max: int
    eta_min: float = 1e-4
    window_n: int = 50
    weight_w: float = 0.05
    epsilon: float = 1e-8
    warmup_steps: int = 0
    start_factor: float = 0.01
    max_lr_cap: Optional[float] = None

    def __post_init__(self):
        if not (self.base_lr > 0.0 and math.isfinite(self.base_lr)):
            raise ValueError(f"base_lr must be positive, got {self.base_lr!r}")
        if self.t_max < 1:
            raise ValueError(f"t_max must be a positive step count, got {self.t_max!r}")
        if not (0.0 <= self.eta_min <= self.base_lr):
            raise ValueError(
                f"eta_min must lie in [0, base_lr], got {self.eta_min!r} with base_lr {self.base_lr!r}"
            )
        if self.window_n < 2:
            raise ValueError(f"window_n must be at least 2, got {self.window_n!r}")
        if self.window_n >= self.t_max:
            raise ValueError(
                f"window_n must be smaller than t_max, got {self.window_n!r} >= {self.t_max!r}"
            )
        if self.weight_w < 0.0 or not math.isfinite(self.weight_w):
            raise ValueError(f"weight_w must be non-negative, got {self.weight_w!r}")
        if not (self.epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.warmup_steps < 0:
            raise ValueError(f"warmup_steps must be non-negative, got {self.warmup_steps!r}")
        if self.warmup_steps >= self.t_max:
            raise ValueError(
                f"warmup_steps must be smaller than t_max, got {self.warmup_steps!r} >= {self.t_max!r}"
            )
        if not (0.0 < self.start_factor <= 1.0):
            raise ValueError(f"start_factor must lie in (0, 1], got {self.start_factor!r}")
        if self.max_lr_cap is not None and self.max_lr_cap <= 0.0:
            raise ValueError(f"max_lr_cap must be positive when set, got {self.max_lr_cap!r}")


def cosine_decay(t: float, t_max: float) -> float:
    """Base decay 1 + cos(pi t / t_max).

    Evaluated as 2 cos^2(pi t / (2 t_max)), which is the same quantity but
    keeps full relative accuracy near t = t_max where the plain form loses
    all significant digits to cancellation.
    """
    c = math.cos((math.pi * t) / (2.0 * t_max))
    return 2.0 * c * c


def cosine_correction(t_cur: int, t_max: int, n: int) -> float:
    """Cosine decay accrued over the last ``n`` steps: g(t_cur) / g(t_cur - n).

    This is the factor a plain cosine schedule would have applied between the
    previous update and now; multiplying it into the learning rate keeps the
    volatility scheduler on the cosine trajectory when its multiplier is 1.
    Returns exactly 0 at t_cur = t_max (the cosine endpoint), which sends the
    learning rate to its floor.
    """
    if t_cur <= 0 or t_cur > t_max:
        raise ValueError(f"t_cur must lie in (0, t_max], got {t_cur!r} with t_max {t_max!r}")
    if n < 1 or t_cur - n < 0:
        raise ValueError(f"elapsed step count must lie in [1, t_cur], got {n!r}")
    if t_cur == t_max:
        return 0.0
    denom = cosine_decay(t_cur - n, t_max)
    if denom < 1e-12:
        # previous update sat at the cosine zero; let the floor take over
        return 0.0
    return cosine_decay(t_cur, t_max) / denom


def signed_log_multiplier(rho: float, w: float) -> float:
    """Map a volatility ratio to a multiplier: 1 + sgn(rho - 1) ln(1 + w |rho - 1|).

    Odd around rho = 1, exactly 1 there, and log-damped on both sides so a
    wild ratio cannot produce a wild learning-rate swing.
    """
    if rho <= 0.0 or not math.isfinite(rho):
        raise ValueError(f"volatility ratio must be positive, got {rho!r}")
    if w < 0.0:
        raise ValueError(f"weight must be non-negative, got {w!r}")
    delta = rho - 1.0
    return 1.0 + math.copysign(math.log1p(w * abs(delta)), delta)


def clamped_update(lr: float, multiplier: float, correction: float,
                   eta_min: float, max_lr_cap: Optional[float] = None) -> float:
    """Apply one multiplicative update and clamp into [eta_min, max_lr_cap]."""
    new_lr = lr * multiplier * correction
    if max_lr_cap is not None and new_lr > max_lr_cap:
        new_lr = max_lr_cap
    if new_lr < eta_min:
        new_lr = eta_min
    return new_lr


class RunningMoments:
    """Streaming mean/variance accumulator (Welford), sample (n-1) convention."""

    __slots__ = ("count", "mean", "_m2")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        return self._m2 / (self.count - 1)

    def std(self) -> float:
        return math.sqrt(self.variance())


class AccuracyStream:
    """Log-return statistics over a stream of per-batch accuracies.

    Each accuracy is clipped below at ``epsilon`` before the log-return is
    taken, so an exact zero cannot blow up the logarithm. ``running_all``
    accumulates every return seen; ``recent_returns`` keeps the last
    ``window_n`` of them.
    """

    __slots__ = ("window_n", "epsilon", "count", "running_all", "recent_returns", "last_clipped")

    def __init__(self, window_n: int, epsilon: float):
        if window_n < 2:
            raise ValueError(f"window_n must be at least 2, got {window_n!r}")
        if not (epsilon > 0.0):
            raise ValueError(f"epsilon must be positive, got {epsilon!r}")
        self.window_n = window_n
        self.epsilon = epsilon
        self.count = 0
        self.running_all = RunningMoments()
        self.recent_returns = deque(maxlen=window_n)
        self.last_clipped = None

    def observe(self, accuracy: float) -> None:
        if not (0.0 <= accuracy <= 1.0):
            raise ValueError(f"batch accuracy must lie in [0, 1], got {accuracy!r}")
        clipped = accuracy if accuracy > self.epsilon else self.epsilon
        if self.count > 0:
            r = math.log(clipped / self.last_clipped)
            self.running_all.push(r)
            self.recent_returns.append(r)
        self.last_clipped = clipped
        self.count += 1

    @property
    def ready(self) -> bool:
        """True once at least window_n log-returns exist."""
        return self.count >= self.window_n + 1

    def sigma_all(self) -> float:
        return self.running_all.std()

    def sigma_recent(self) -> float:
        xs = self.recent_returns
        n = len(xs)
        if n < 2:
            return 0.0
        m = sum(xs) / n
        acc = 0.0
        for x in xs:
            d = x - m
            acc += d * d
        return math.sqrt(acc / (n - 1))


def vol_ratio_multiplier(stream: AccuracyStream, w: float, epsilon: float) -> float:
    """Multiplier from the ratio of long-run to recent return volatility.

    Both volatilities are floored at ``epsilon`` before the ratio, so a
    perfectly flat window (zero recent volatility) yields a large but finite
    ratio instead of a division by zero, and a degenerate stream where both
    are flat yields ratio 1 and multiplier 1.
    """
    if stream.count < stream.window_n + 1:
        raise ValueError(
            f"insufficient history: need at least {stream.window_n + 1} observations, "
            f"have {stream.count}"
        )
    sigma_all = stream.sigma_all()
    if sigma_all < epsilon:
        sigma_all = epsilon
    sigma_recent = stream.sigma_recent()
    if sigma_recent < epsilon:
        sigma_recent = epsilon
    return signed_log_multiplier(sigma_all / sigma_recent, w)


class LrScheduler:
    """Stepping contract shared by every scheduler here.

    Per optimizer step the training loop calls ``observe_batch(acc)`` with
    the accuracy it just measured on the incoming batch, then ``step()`` to
    get the learning rate for that step. ``observe_epoch(metric)`` is called
    once at the end of each epoch with the held-out metric. Schedulers that
    ignore a signal simply inherit the no-op.
    """

    name = "base"

    def __init__(self, config: SchedulerConfig):
        self.config = config
        self.step_count = 0

    def observe_batch(self, accuracy: float) -> None:
        pass

    def observe_epoch(self, metric: float) -> None:
        pass

    def step(self) -> float:
        raise NotImplementedError

    def _warmup_lr(self, i: int) -> Optional[float]:
        cfg = self.config
        if i < cfg.warmup_steps:
            frac = cfg.start_factor + (1.0 - cfg.start_factor) * (i / cfg.warmup_steps)
            return cfg.base_lr * frac
        return None


class VolatilityScheduler(LrScheduler):
    """Multiplicative scheduler driven by the accuracy volatility ratio.

    Every ``window_n`` post-warmup steps the learning rate is multiplied by
    M * alpha, where M comes from :func:`vol_ratio_multiplier` (1 until
    enough history exists) and alpha is the cosine correction for the steps
    just elapsed. Between updates the rate holds still. If t_max does not
    divide evenly, the final short window still applies a correction over the
    actual number of elapsed steps. Warmup-era accuracies never enter the
    volatility stream.
    """

    name = "volsched"

    def __init__(self, config: SchedulerConfig):
        super().__init__(config)
        self.current_lr = config.base_lr
        self.stream = AccuracyStream(config.window_n, config.epsilon)
        self._last_update = config.warmup_steps

    def observe_batch(self, accuracy: float) -> None:
        if self.step_count < self.config.warmup_steps:
            # ramp-era accuracies would poison the long-run volatility
            if not (0.0 <= accuracy <= 1.0):
                raise ValueError(f"batch accuracy must lie in [0, 1], got {accuracy!r}")
            return
        self.stream.observe(accuracy)

    def step(self) -> float:
        i = self.step_count
        self.step_count = i + 1
        cfg = self.config
        ws = cfg.warmup_steps
        if i < ws:
            lr = cfg.base_lr * (cfg.start_factor + (1.0 - cfg.start_factor) * (i / ws))
            self.current_lr = lr
            return lr
        if i == ws:
            self.current_lr = cfg.base_lr
        t = i + 1
        if t > cfg.t_max:
            t = cfg.t_max
        if (t - ws) % cfg.window_n == 0 or t == cfg.t_max:
            elapsed = t - self._last_update
            if elapsed > 0:
                if self.stream.ready:
                    m = vol_ratio_multiplier(self.stream, cfg.weight_w, cfg.epsilon)
                else:
                    m = 1.0
                alpha = cosine_correction(t, cfg.t_max, elapsed)
                self.current_lr = clamped_update(
                    self.current_lr, m, alpha, cfg.eta_min, cfg.max_lr_cap
                )
                self._last_update = t
        return self.current_lr


def cosine_baseline_lr(t: int, cfg: SchedulerConfig) -> float:
    """Plain warmup + cosine annealing rate at 0-based step ``t``."""
    if t < 0 or t > cfg.t_max:
        raise ValueError(f"step must lie in [0, t_max], got {t!r}")
    if t < cfg.warmup_steps:
        frac = cfg.start_factor + (1.0 - cfg.start_factor) * (t / cfg.warmup_steps)
        return cfg.base_lr * frac
    if t == cfg.t_max:
        return cfg.eta_min
    return cfg.eta_min + (cfg.base_lr - cfg.eta_min) * 0.5 * cosine_decay(t, cfg.t_max)


def exponential_baseline_lr(epoch: int, cfg: SchedulerConfig, gamma: float = 0.95) -> float:
    """Per-epoch exponential decay base_lr * gamma^epoch, floored at eta_min.

    Warmup composition happens in :class:`ExponentialDecay`; this is just the
    decay curve itself.
    """
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch!r}")
    lr = cfg.base_lr * gamma ** epoch
    return lr if lr > cfg.eta_min else cfg.eta_min


class CosineAnnealing(LrScheduler):
    """Warmup plus cosine annealing under the shared stepping contract.

    The k-th call returns the rate for optimizer step k, matching the
    volatility scheduler's step numbering so the two trajectories line up
    row-for-row in figure output: ramp values during warmup, then the
    closed-form cosine value at t = k, reaching eta_min exactly at t_max.
    """

    name = "cosine"

    def step(self) -> float:
        i = self.step_count
        self.step_count = i + 1
        warm = self._warmup_lr(i)
        if warm is not None:
            return warm
        t = i + 1
        if t > self.config.t_max:
            t = self.config.t_max
        return cosine_baseline_lr(t, self.config)


class ExponentialDecay(LrScheduler):
    """Decays once per epoch; epochs are counted from observe_epoch calls."""

    name = "exponential"

    def __init__(self, config: SchedulerConfig, gamma: float = 0.95):
        super().__init__(config)
        if not (0.0 < gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {gamma!r}")
        self.gamma = gamma
        self.epoch = 0

    def observe_epoch(self, metric: float) -> None:
        self.epoch += 1

    def step(self) -> float:
        i = self.step_count
        self.step_count = i + 1
        warm = self._warmup_lr(i)
        if warm is not None:
            return warm
        return exponential_baseline_lr(self.epoch, self.config, self.gamma)


class ReduceOnPlateau(LrScheduler):
    """Cuts the rate by ``factor`` once the held-out metric stalls.

    An epoch counts as bad when the metric fails to strictly improve on the
    best seen so far. Strictly more than ``patience`` consecutive bad epochs
    triggers a reduction and resets the counter; an improvement resets the
    counter and the best.
    """

    name = "plateau"

    def __init__(self, config: SchedulerConfig, mode: str = "max",
                 factor: float = 0.5, patience: int = 10):
        super().__init__(config)
        if mode not in ("max", "min"):
            raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
        if not (0.0 < factor < 1.0):
            raise ValueError(f"factor must lie in (0, 1), got {factor!r}")
        if patience < 0:
            raise ValueError(f"patience must be non-negative, got {patience!r}")
        self.mode = mode
        self.factor = factor
        self.patience = patience
        self.current_lr = config.base_lr
        self.best = None
        self.bad_epochs = 0

    def observe_epoch(self, metric: float) -> None:
        if self.best is None:
            improved = True
        elif self.mode == "max":
            improved = metric > self.best
        else:
            improved = metric < self.best
        if improved:
            self.best = metric
            self.bad_epochs = 0
            return
        self.bad_epochs += 1
        if self.bad_epochs > self.patience:
            reduced = self.current_lr * self.factor
            self.current_lr = reduced if reduced > self.config.eta_min else self.config.eta_min
            self.bad_epochs = 0

    def step(self) -> float:
        i = self.step_count
        self.step_count = i + 1
        warm = self._warmup_lr(i)
        if warm is not None:
            return warm
        return self.current_lr


def build_scheduler(name: str, config: SchedulerConfig, **params) -> LrScheduler:
    """Construct a scheduler by its short name ('volsched', 'cosine', ...)."""
    if name == "volsched":
        cls = VolatilityScheduler
    elif name == "cosine":
        cls = CosineAnnealing
    elif name == "exponential":
        cls = ExponentialDecay
    elif name == "plateau":
        cls = ReduceOnPlateau
    else:
        raise ValueError(f"unknown scheduler {name!r}; expected one of {SCHEDULER_NAMES}")
    return cls(config, **params)
