"""Paired-comparison statistics with no statistics library underneath.

The paired t-test's two-sided p-value comes from the Student-t CDF expressed
through the regularized incomplete beta function, which is evaluated here
with the classic continued-fraction scheme (modified Lentz). The fraction is
iterated until the running product moves by less than 1e-12, comfortably
inside the documented 1e-10 relative accuracy target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["mean", "sample_stdev", "betainc", "student_t_two_sided_p", "PairedTTest", "paired_t_test"]


def mean(values) -> float:
    xs = list(values)
    if not xs:
        raise ValueError("mean of empty sequence")
    return math.fsum(xs) / len(xs)


def sample_stdev(values) -> float:
    """Sample standard deviation, n-1 denominator."""
    xs = list(values)
    if len(xs) < 2:
        raise ValueError(f"sample stdev needs at least 2 values, got {len(xs)}")
    m = math.fsum(xs) / len(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def _beta_cf(a: float, b: float, x: float) -> float:
    # continued fraction for the incomplete beta, modified Lentz iteration
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            return h
    raise ArithmeticError("incomplete beta continued fraction failed to converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive, got a={a!r}, b={b!r}")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (a * math.log(x) + b * math.log1p(-x)
                - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
    front = math.exp(ln_front)
    # the fraction converges fastest below the distribution's mode
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, dof: int) -> float:
    """Two-sided tail probability of Student's t with ``dof`` degrees."""
    if dof < 1:
        raise ValueError(f"dof must be positive, got {dof!r}")
    if t == 0.0:
        return 1.0
    x = dof / (dof + t * t)
    return betainc(dof / 2.0, 0.5, x)


@dataclass(frozen=True)
class PairedTTest:
    t: float
    dof: int
    p: float


def paired_t_test(a, b) -> PairedTTest:
    """Paired t-test on equal-length samples.

    t = mean(d) / (stdev(d) / sqrt(n)) over the differences d = a - b, with
    n - 1 degrees of freedom. Zero-variance differences are refused: that
    pairing carries no usable noise estimate.
    """
    xs = [float(v) for v in a]
    ys = [float(v) for v in b]
    if len(xs) != len(ys):
        raise ValueError(f"paired samples must have equal length, got {len(xs)} and {len(ys)}")
    if len(xs) < 2:
        raise ValueError(f"paired t-test needs at least 2 pairs, got {len(xs)}")
    d = [x - y for x, y in zip(xs, ys)]
    sd = sample_stdev(d)
    if sd == 0.0:
        raise ValueError("degenerate pairing: differences have zero variance")
    n = len(d)
    t = mean(d) / (sd / math.sqrt(n))
    dof = n - 1
    return PairedTTest(t=t, dof=dof, p=student_t_two_sided_p(t, dof))
