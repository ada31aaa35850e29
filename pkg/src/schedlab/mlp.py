"""Small tanh MLP with hand-written backprop on a flat parameter vector.

Parameter layout, which other tools rely on when reading the vector
directly: all weight matrices first, in layer order, each stored row-major
with shape (fan_in, fan_out); then all bias vectors, again in layer order.
Total length is sum(fan_in * fan_out + fan_out) over consecutive layer
pairs. Hidden activations are tanh, the output layer is linear, and the
loss is mean softmax cross-entropy over the batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["MlpModel", "param_count", "init_theta", "theta_views", "forward", "loss_grad_accuracy"]

_TAG_INIT = 3


@dataclass
class MlpModel:
    layer_sizes: tuple[int, ...]
    theta: np.ndarray

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be positive, got {self.layer_sizes!r}")
        expected = param_count(self.layer_sizes)
        if self.theta.shape != (expected,):
            raise ValueError(
                f"theta has shape {self.theta.shape}, expected ({expected},) "
                f"for layers {self.layer_sizes!r}"
            )


def param_count(layer_sizes) -> int:
    return sum(fi * fo + fo for fi, fo in zip(layer_sizes[:-1], layer_sizes[1:]))


def init_theta(layer_sizes, seed: int) -> np.ndarray:
    """Glorot-uniform weights, U(+-sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, _TAG_INIT))))
    theta = np.zeros(param_count(layer_sizes))
    offset = 0
    for fi, fo in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = math.sqrt(6.0 / (fi + fo))
        theta[offset:offset + fi * fo] = rng.uniform(-limit, limit, fi * fo)
        offset += fi * fo
    # bias region stays zero
    return theta


def theta_views(model: MlpModel):
    """Weight and bias views into the flat vector, no copies."""
    sizes = model.layer_sizes
    weights, biases = [], []
    offset = 0
    for fi, fo in zip(sizes[:-1], sizes[1:]):
        weights.append(model.theta[offset:offset + fi * fo].reshape(fi, fo))
        offset += fi * fo
    for fo in sizes[1:]:
        biases.append(model.theta[offset:offset + fo])
        offset += fo
    return weights, biases


def _forward_cached(model: MlpModel, x: np.ndarray):
    if x.ndim != 2 or x.shape[1] != model.layer_sizes[0]:
        raise ValueError(
            f"batch has shape {x.shape}, expected (n, {model.layer_sizes[0]})"
        )
    if x.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    weights, biases = theta_views(model)
    activations = [x]
    h = x
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.tanh(h @ w + b)
        activations.append(h)
    logits = h @ weights[-1] + biases[-1]
    return weights, biases, activations, logits


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: MlpModel, x: np.ndarray):
    """Returns (logits, probabilities); probability rows sum to 1."""
    _, _, _, logits = _forward_cached(model, x)
    return logits, _softmax(logits)


def loss_grad_accuracy(model: MlpModel, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy loss, its gradient in theta layout, and batch accuracy.

    Accuracy is the argmax match rate; ties resolve to the lowest class
    index. The loss uses a shifted log-sum-exp so large logits stay finite.
    """
    weights, biases, activations, logits = _forward_cached(model, x)
    n, k = logits.shape
    y = np.asarray(y)
    if y.shape != (n,):
        raise ValueError(f"labels have shape {y.shape}, expected ({n},)")
    if y.min() < 0 or y.max() >= k:
        raise ValueError(f"labels must lie in [0, {k - 1}]")

    rows = np.arange(n)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_norm - shifted[rows, y]))
    accuracy = float(np.mean(np.argmax(logits, axis=1) == y))

    probs = _softmax(logits)
    delta = probs
    delta[rows, y] -= 1.0
    delta /= n

    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            a = activations[layer]
            delta = (delta @ weights[layer].T) * (1.0 - a * a)

    grad = np.concatenate([g.ravel() for g in grad_w] + grad_b)
    return loss, grad, accuracy
