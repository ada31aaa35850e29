import math
import random

import mpmath
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from schedlab.stats import PairedTTest, betainc, mean, paired_t_test, sample_stdev, student_t_two_sided_p


# --- moments --------------------------------------------------------------------

def test_mean_and_stdev_basics():
    assert mean([1.0, 2.0, 3.0]) == 2.0
    assert sample_stdev([1.0, 1.0, 1.0]) == 0.0
    assert math.isclose(sample_stdev([1.0, 2.0, 3.0]), 1.0, rel_tol=1e-15)


def test_mean_rejects_empty():
    with pytest.raises(ValueError):
        mean([])
    with pytest.raises(ValueError):
        sample_stdev([5.0])


def test_stdev_is_shift_stable():
    # catastrophic cancellation check: same spread around a huge offset
    base = [1.0, 2.0, 3.0, 4.0]
    shifted = [x + 1e4 for x in base]
    assert math.isclose(sample_stdev(shifted), sample_stdev(base), rel_tol=1e-12)


@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=2, max_size=60))
def test_stdev_matches_stdlib(xs):
    import statistics
    ref = statistics.stdev(xs)
    assert math.isclose(sample_stdev(xs), ref, rel_tol=1e-12, abs_tol=1e-12)


# --- incomplete beta --------------------------------------------------------------

def test_betainc_edges():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0


def test_betainc_symmetric_midpoint():
    assert math.isclose(betainc(2.5, 2.5, 0.5), 0.5, rel_tol=1e-12)


def test_betainc_against_scipy_grid():
    for a in (0.5, 1.0, 2.0, 3.5, 10.0, 50.0):
        for b in (0.5, 1.0, 2.0, 3.5, 10.0, 50.0):
            for x in (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
                ref = scipy.special.betainc(a, b, x)
                assert math.isclose(betainc(a, b, x), ref, rel_tol=1e-10, abs_tol=1e-300)


def test_betainc_against_mpmath_extremes():
    cases = [(0.5, 0.5, 1e-6), (25.0, 0.5, 0.999), (0.5, 25.0, 0.001), (100.0, 100.0, 0.45)]
    with mpmath.workdps(50):
        for a, b, x in cases:
            ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
            assert math.isclose(betainc(a, b, x), ref, rel_tol=1e-10)


@given(st.floats(min_value=0.5, max_value=20), st.floats(min_value=0.5, max_value=20),
       st.floats(min_value=0.001, max_value=0.999), st.floats(min_value=0.001, max_value=0.999))
def test_betainc_monotone_in_x(a, b, x1, x2):
    lo, hi = sorted((x1, x2))
    assert betainc(a, b, lo) <= betainc(a, b, hi) + 1e-14


@given(st.floats(min_value=0.5, max_value=20), st.floats(min_value=0.5, max_value=20),
       st.floats(min_value=0.001, max_value=0.999))
def test_betainc_reflection(a, b, x):
    assert math.isclose(betainc(a, b, x), 1.0 - betainc(b, a, 1.0 - x),
                        rel_tol=0.0, abs_tol=1e-12)


def test_betainc_validation():
    with pytest.raises(ValueError):
        betainc(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        betainc(1.0, -1.0, 0.5)
    with pytest.raises(ValueError):
        betainc(1.0, 1.0, 1.5)


# --- t tail ------------------------------------------------------------------------

def test_t_zero_gives_one():
    assert student_t_two_sided_p(0.0, 5) == 1.0


def test_t_tail_known_value():
    # dof=1 is a Cauchy: P(|T| > 1) = 1/2
    assert math.isclose(student_t_two_sided_p(1.0, 1), 0.5, rel_tol=1e-12)


def test_t_tail_against_scipy():
    for t in (0.1, 0.5, 1.0, 2.0, 3.5, 7.0, 20.0):
        for dof in (1, 2, 4, 9, 30, 200):
            ref = 2.0 * scipy.stats.t.sf(t, dof)
            assert math.isclose(student_t_two_sided_p(t, dof), ref, rel_tol=1e-9)


@given(st.floats(min_value=-50, max_value=50), st.integers(min_value=1, max_value=500))
def test_t_tail_symmetry_and_range(t, dof):
    p = student_t_two_sided_p(t, dof)
    assert 0.0 <= p <= 1.0
    assert math.isclose(p, student_t_two_sided_p(-t, dof), rel_tol=0.0, abs_tol=1e-15)


@given(st.floats(min_value=0.01, max_value=30), st.floats(min_value=0.01, max_value=30),
       st.integers(min_value=1, max_value=100))
def test_t_tail_monotone_in_magnitude(t1, t2, dof):
    lo, hi = sorted((t1, t2))
    assert student_t_two_sided_p(hi, dof) <= student_t_two_sided_p(lo, dof) + 1e-14


def test_t_tail_validation():
    with pytest.raises(ValueError):
        student_t_two_sided_p(1.0, 0)


# --- paired test ---------------------------------------------------------------------

def test_paired_t_hand_worked_example():
    a = [1.0, 2.0, 3.0, 4.0, 5.0]
    b = [0.0, 1.0, 2.0, 3.0, 3.5]
    # d = [1,1,1,1,1.5]: mean 1.1, stdev sqrt(0.05), t = 1.1/(sqrt(0.05)/sqrt(5)) = 11
    result = paired_t_test(a, b)
    assert result.dof == 4
    assert math.isclose(result.t, 11.0, rel_tol=1e-12)
    ref = scipy.stats.ttest_rel(a, b)
    assert math.isclose(result.t, float(ref.statistic), rel_tol=1e-12)
    assert math.isclose(result.p, float(ref.pvalue), rel_tol=1e-9)


def test_paired_t_matches_scipy_random_samples():
    rng = random.Random(33)
    for _ in range(25):
        n = rng.randint(2, 40)
        a = [rng.gauss(0.5, 0.2) for _ in range(n)]
        b = [x + rng.gauss(0.05, 0.1) for x in a]
        result = paired_t_test(a, b)
        ref = scipy.stats.ttest_rel(a, b)
        assert math.isclose(result.t, float(ref.statistic), rel_tol=1e-10)
        assert math.isclose(result.p, float(ref.pvalue), rel_tol=1e-8, abs_tol=1e-300)


def test_paired_t_antisymmetric():
    a = [0.7, 0.72, 0.69, 0.75]
    b = [0.68, 0.71, 0.70, 0.72]
    fwd = paired_t_test(a, b)
    rev = paired_t_test(b, a)
    assert math.isclose(fwd.t, -rev.t, rel_tol=1e-15)
    assert math.isclose(fwd.p, rev.p, rel_tol=1e-12)


def test_paired_t_location_invariance():
    a = [0.7, 0.72, 0.69, 0.75]
    b = [0.68, 0.71, 0.70, 0.72]
    base = paired_t_test(a, b)
    shifted = paired_t_test([x + 5.0 for x in a], [y + 5.0 for y in b])
    assert math.isclose(base.t, shifted.t, rel_tol=1e-9)


def test_paired_t_rejects_degenerate_and_bad_shapes():
    with pytest.raises(ValueError, match="zero variance"):
        paired_t_test([1.0, 2.0, 3.0], [0.5, 1.5, 2.5])
    with pytest.raises(ValueError):
        paired_t_test([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        paired_t_test([1.0], [0.5])


def test_result_is_frozen():
    r = PairedTTest(t=1.0, dof=3, p=0.39)
    with pytest.raises(AttributeError):
        r.t = 2.0
