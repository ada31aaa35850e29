"""Synthetic accuracy traces from geometric Brownian motion.

These traces stand in for a training run's per-batch accuracy stream, which
lets scheduler behaviour be checked against a process whose volatility is
known by construction instead of against a live model. Gaussian draws come
from numpy's PCG64 generator (64-bit, seedable), so a given seed reproduces
a trace bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GbmParams", "RegimeSegment", "RegimeSpec", "gbm_trace", "regime_trace", "write_trace_csv"]


@dataclass(frozen=True)
class GbmParams:
    s0: float
    mu: float
    sigma: float
    dt: float
    steps: int
    seed: int

    def __post_init__(self):
        if not (self.s0 > 0.0):
            raise ValueError(f"s0 must be positive, got {self.s0!r}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma!r}")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps!r}")


@dataclass(frozen=True)
class RegimeSegment:
    length: int
    mu: float
    sigma: float

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"segment length must be at least 1, got {self.length!r}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma!r}")


@dataclass(frozen=True)
class RegimeSpec:
    segments: tuple[RegimeSegment, ...]
    s0: float = 0.5
    dt: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if len(self.segments) == 0:
            raise ValueError("regime spec needs at least one segment")
        if not (self.s0 > 0.0):
            raise ValueError(f"s0 must be positive, got {self.s0!r}")
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")


def _log_increments(rng, mu: float, sigma: float, dt: float, n: int) -> np.ndarray:
    z = rng.standard_normal(n)
    return (mu - 0.5 * sigma * sigma) * dt + sigma * np.sqrt(dt) * z


def gbm_trace(params: GbmParams) -> np.ndarray:
    """Exact exponential-Euler GBM path: S_{t+1} = S_t exp((mu - sigma^2/2) dt + sigma sqrt(dt) Z).

    Returns steps + 1 values including S_0. Strictly positive throughout.
    """
    rng = np.random.Generator(np.random.PCG64(params.seed))
    inc = _log_increments(rng, params.mu, params.sigma, params.dt, params.steps)
    log_path = np.concatenate(([0.0], np.cumsum(inc)))
    return params.s0 * np.exp(log_path)


def regime_trace(spec: RegimeSpec) -> np.ndarray:
    """Concatenated GBM segments with per-segment drift and volatility.

    The underlying process evolves unclipped; output values are capped at 1
    so the trace can serve as an accuracy stream (values stay in (0, 1] once
    s0 <= 1). A single segment reproduces :func:`gbm_trace` capped at 1. One
    generator is seeded once and consumed across segments in order.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    pieces = [np.zeros(1)]
    total = 0.0
    for seg in spec.segments:
        inc = _log_increments(rng, seg.mu, seg.sigma, spec.dt, seg.length)
        pieces.append(total + np.cumsum(inc))
        total = pieces[-1][-1]
    log_path = np.concatenate(pieces)
    return np.minimum(spec.s0 * np.exp(log_path), 1.0)


def write_trace_csv(values, path) -> None:
    """Single-column CSV with header ``accuracy``, one value per line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("accuracy\n")
        for v in values:
            fh.write(repr(float(v)))
            fh.write("\n")
