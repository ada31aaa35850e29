"""Curvature probe: top Hessian eigenvalue via matrix-free power iteration.

Hessian-vector products are taken by central finite differences of the
gradient, (grad(theta + h v) - grad(theta - h v)) / (2 h), so nothing ever
materializes the Hessian. The probe works against any gradient oracle; for
trained models the oracle is the cross-entropy gradient over the full
training set in its stored order (weight decay is an optimizer detail and
is excluded from the probed loss surface).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from schedlab.datasets import Dataset
from schedlab.mlp import MlpModel, loss_grad_accuracy

__all__ = ["HessianProbe", "EigenResult", "model_probe", "hvp", "top_eigenvalue", "eigen_csv_rows"]

_RESTART_LIMIT = 3


@dataclass
class HessianProbe:
    theta: np.ndarray
    grad_fn: Callable[[np.ndarray], np.ndarray]
    fd_base: float = 1e-4
    tol: float = 1e-4
    max_iters: int = 200
    seed: int = 0

    def __post_init__(self):
        if not (self.fd_base > 0.0):
            raise ValueError(f"fd_base must be positive, got {self.fd_base!r}")
        if not (self.tol > 0.0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters!r}")
        if self.theta.ndim != 1 or self.theta.size == 0:
            raise ValueError("theta must be a non-empty flat vector")

    @property
    def fd_epsilon(self) -> float:
        # scaled to the parameter magnitude so huge weights do not starve the difference
        return self.fd_base * (1.0 + float(np.max(np.abs(self.theta))))


@dataclass(frozen=True)
class EigenResult:
    lambda_max: float
    iterations: int
    residual: float
    converged: bool
    negative_curvature: bool


def model_probe(layer_sizes, theta: np.ndarray, train: Dataset, **kwargs) -> HessianProbe:
    """Probe whose loss surface is full-train-set cross-entropy at theta."""
    sizes = tuple(layer_sizes)
    x, y = train.inputs, train.labels

    def grad_fn(params: np.ndarray) -> np.ndarray:
        _, grad, _ = loss_grad_accuracy(MlpModel(sizes, params), x, y)
        return grad

    return HessianProbe(theta=theta, grad_fn=grad_fn, **kwargs)


def hvp(probe: HessianProbe, v: np.ndarray) -> np.ndarray:
    """Finite-difference Hessian-vector product at the probe's theta.

    Callers should pass a unit vector; the step h = fd_epsilon then probes
    a fixed-size neighbourhood regardless of direction.
    """
    h = probe.fd_epsilon
    plus = probe.grad_fn(probe.theta + h * v)
    minus = probe.grad_fn(probe.theta - h * v)
    return (plus - minus) / (2.0 * h)


def _unit_start(n: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def top_eigenvalue(probe: HessianProbe) -> EigenResult:
    """Dominant Hessian eigenvalue by power iteration with Rayleigh quotients.

    Iterates v <- H v / ||H v||, reading off lambda = v . H v, and stops once
    successive estimates agree to |lambda_k - lambda_{k-1}| <=
    tol * max(1, |lambda_k|), or at max_iters. A product with ||H v|| below
    tol signals a near-flat start direction; the probe restarts from a fresh
    seeded direction up to three times before giving up. A negative final
    estimate is reported as-is with the negative-curvature flag set.
    """
    n = probe.theta.size
    for attempt in range(_RESTART_LIMIT + 1):
        v = _unit_start(n, probe.seed + attempt)
        hv = hvp(probe, v)
        norm = float(np.linalg.norm(hv))
        if norm < probe.tol:
            continue
        lam = float(v @ hv)
        iterations = 0
        converged = False
        restart = False
        for k in range(1, probe.max_iters + 1):
            v = hv / norm
            hv = hvp(probe, v)
            norm = float(np.linalg.norm(hv))
            lam_new = float(v @ hv)
            iterations = k
            if abs(lam_new - lam) <= probe.tol * max(1.0, abs(lam_new)):
                lam = lam_new
                converged = True
                break
            lam = lam_new
            if norm < probe.tol:
                restart = True
                break
        if restart:
            continue
        residual = float(np.linalg.norm(hv - lam * v))
        return EigenResult(lambda_max=lam, iterations=iterations, residual=residual,
                           converged=converged, negative_curvature=lam < 0.0)
    # every start direction collapsed: the operator is numerically flat
    return EigenResult(lambda_max=0.0, iterations=0, residual=0.0,
                       converged=False, negative_curvature=False)


def eigen_csv_rows(result: EigenResult):
    """Header and single row for the probe's CSV output."""
    header = ("lambda_max", "iterations", "residual", "converged")
    row = (result.lambda_max, result.iterations, result.residual, result.converged)
    return header, [row]
