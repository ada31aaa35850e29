"""schedlab: a small laboratory for learning-rate schedules.

The volatility-responsive scheduler watches the dispersion of per-batch
training accuracy and widens or narrows the learning rate against a cosine
annealing backbone; classic cosine, exponential, and reduce-on-plateau
schedules ride along as baselines, all driven by the same training harness,
synthetic trace generator, curvature probe, and paired significance tests.
"""

from schedlab.schedulers import (
    AccuracyStream,
    CosineAnnealing,
    ExponentialDecay,
    LrScheduler,
    ReduceOnPlateau,
    SchedulerConfig,
    VolatilityScheduler,
    build_scheduler,
    clamped_update,
    cosine_correction,
    cosine_decay,
    signed_log_multiplier,
    vol_ratio_multiplier,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyStream",
    "CosineAnnealing",
    "ExponentialDecay",
    "LrScheduler",
    "ReduceOnPlateau",
    "SchedulerConfig",
    "VolatilityScheduler",
    "build_scheduler",
    "clamped_update",
    "cosine_correction",
    "cosine_decay",
    "signed_log_multiplier",
    "vol_ratio_multiplier",
    "__version__",
]
