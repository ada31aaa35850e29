"""SGD training loop wired to the scheduler stepping contract.

The loop is scheduler-agnostic: anything with observe_batch / step /
observe_epoch can drive it. Per batch it measures loss, gradient, and
accuracy at the current parameters, feeds the accuracy to the scheduler,
asks for the step's learning rate, and applies one heavy-ball SGD update
(v' = momentum v + grad + weight_decay theta; theta' = theta - lr v';
Nesterov is deliberately not implemented). A batch loss above the
divergence threshold, or a non-finite one, flags the run as diverged and
halts it instead of crashing.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from schedlab.datasets import Dataset
from schedlab.mlp import MlpModel, init_theta, loss_grad_accuracy, forward
from schedlab.schedulers import LrScheduler

__all__ = [
    "SgdState",
    "sgd_step",
    "RunRecord",
    "train_run",
    "evaluate",
    "save_theta",
    "load_theta",
    "write_csv",
    "write_run_csvs",
]

_TAG_SHUFFLE = 4

DIVERGENCE_LOSS = 1e3


@dataclass
class SgdState:
    velocity: np.ndarray
    momentum: float = 0.9
    weight_decay: float = 1e-4
    # nesterov variant intentionally absent

    def __post_init__(self):
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum!r}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be non-negative, got {self.weight_decay!r}")


def sgd_step(theta, velocity, grad, lr, momentum, weight_decay):
    """One heavy-ball update; returns (theta', velocity')."""
    v = momentum * velocity + grad + weight_decay * theta
    return theta - lr * v, v


@dataclass
class RunRecord:
    """Everything one training run produced.

    ``steps`` rows are (step, epoch, lr, train_loss, train_acc) with step
    counting from 1; ``epochs`` rows are (epoch, test_acc, test_loss) with
    epoch counting from 0.
    """

    scheduler: str
    seed: int
    steps: list = field(default_factory=list)
    epochs: list = field(default_factory=list)
    diverged: bool = False
    initial_theta: np.ndarray | None = None
    final_theta: np.ndarray | None = None

    @property
    def final_test_acc(self) -> float:
        if not self.epochs:
            return float("nan")
        return self.epochs[-1][1]

    @property
    def max_lr(self) -> float:
        if not self.steps:
            return float("nan")
        return max(row[2] for row in self.steps)


def evaluate(model: MlpModel, dataset: Dataset):
    """Full-set mean cross-entropy and accuracy, no gradient."""
    logits, _ = forward(model, dataset.inputs)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(dataset.labels))
    loss = float(np.mean(log_norm - shifted[rows, dataset.labels]))
    acc = float(np.mean(np.argmax(logits, axis=1) == dataset.labels))
    return loss, acc


def train_run(train: Dataset, test: Dataset, layer_sizes, scheduler: LrScheduler, *,
              epochs: int, batch_size: int, momentum: float = 0.9,
              weight_decay: float = 1e-4, seed: int = 0,
              divergence_loss: float = DIVERGENCE_LOSS,
              label: str | None = None) -> RunRecord:
    """Train an MLP under the given scheduler and record the whole run.

    ``seed`` controls initialization and the per-epoch shuffle, nothing
    else; two runs with equal inputs produce bit-identical records. The
    last partial batch of an epoch is kept.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be positive, got {epochs!r}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be positive, got {batch_size!r}")

    theta = init_theta(layer_sizes, seed)
    record = RunRecord(scheduler=label or scheduler.name, seed=seed,
                       initial_theta=theta.copy())
    state = SgdState(velocity=np.zeros_like(theta), momentum=momentum,
                     weight_decay=weight_decay)
    shuffle_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((seed, _TAG_SHUFFLE))))

    n = train.n
    step = 0
    halted = False
    for epoch in range(epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            model = MlpModel(layer_sizes, theta)
            loss, grad, acc = loss_grad_accuracy(model, train.inputs[idx], train.labels[idx])
            if not np.isfinite(loss) or loss > divergence_loss:
                step += 1
                record.steps.append((step, epoch, float("nan"), loss, acc))
                record.diverged = True
                halted = True
                break
            scheduler.observe_batch(acc)
            lr = scheduler.step()
            theta, state.velocity = sgd_step(theta, state.velocity, grad, lr,
                                             state.momentum, state.weight_decay)
            step += 1
            record.steps.append((step, epoch, lr, loss, acc))
        if halted:
            break
        model = MlpModel(layer_sizes, theta)
        test_loss, test_acc = evaluate(model, test)
        scheduler.observe_epoch(test_acc)
        record.epochs.append((epoch, test_acc, test_loss))

    record.final_theta = theta
    return record


# --- flat parameter vector serialization -----------------------------------
# Layout: 8-byte little-endian unsigned count, then count little-endian
# float64 values in the documented weights-then-biases order.

def save_theta(path, theta: np.ndarray) -> None:
    flat = np.ascontiguousarray(theta, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", flat.size))
        fh.write(flat.tobytes())


def load_theta(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated header")
        (count,) = struct.unpack("<Q", header)
        payload = fh.read(8 * count)
        if len(payload) != 8 * count:
            raise ValueError(f"{path}: expected {count} float64 values")
        trailing = fh.read(1)
        if trailing:
            raise ValueError(f"{path}: trailing bytes after payload")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    """Deterministic CSV: repr for floats, 'true'/'false' for booleans."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header))
        fh.write("\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row))
            fh.write("\n")


def write_run_csvs(record: RunRecord, steps_path, epochs_path) -> None:
    write_csv(steps_path, ("step", "epoch", "lr", "train_loss", "train_acc"), record.steps)
    write_csv(epochs_path, ("epoch", "test_acc", "test_loss"), record.epochs)
