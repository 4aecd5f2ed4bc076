from __future__ import annotations

import math
import random

import pytest
import scipy.special
import scipy.stats

from webwatt import stats


def test_betainc_against_reference():
    rng = random.Random(7)
    for _ in range(500):
        a = rng.uniform(0.2, 80)
        b = rng.uniform(0.2, 80)
        x = rng.random()
        got = stats.betainc_reg(a, b, x)
        ref = float(scipy.special.betainc(a, b, x))
        assert abs(got - ref) < 1e-10, (a, b, x)


def test_welch_identical_samples():
    result = stats.welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert result.t == 0.0
    assert result.p_two_sided == pytest.approx(1.0)


def test_welch_against_reference_small_case():
    result = stats.welch_t_test([1.0, 2.0, 3.0], [2.0, 3.0, 4.0])
    ref = scipy.stats.ttest_ind([1, 2, 3], [2, 3, 4], equal_var=False)
    assert result.t == pytest.approx(ref.statistic, abs=1e-9)
    assert result.p_two_sided == pytest.approx(ref.pvalue, abs=1e-9)
    assert result.df == pytest.approx(ref.df, abs=1e-9)


def test_welch_randomized_against_reference():
    rng = random.Random(123)
    for _ in range(50):
        nx = rng.randint(3, 50)
        ny = rng.randint(3, 50)
        x = [rng.gauss(rng.uniform(-2, 2), rng.uniform(0.5, 3)) for _ in range(nx)]
        y = [rng.gauss(rng.uniform(-2, 2), rng.uniform(0.5, 3)) for _ in range(ny)]
        got = stats.welch_t_test(x, y)
        ref = scipy.stats.ttest_ind(x, y, equal_var=False)
        assert got.t == pytest.approx(ref.statistic, abs=1e-9)
        assert got.p_two_sided == pytest.approx(ref.pvalue, abs=1e-9)
        assert got.df == pytest.approx(ref.df, abs=1e-9)


def test_welch_antisymmetry():
    rng = random.Random(5)
    x = [rng.gauss(0, 1) for _ in range(10)]
    y = [rng.gauss(1, 2) for _ in range(14)]
    fwd = stats.welch_t_test(x, y)
    rev = stats.welch_t_test(y, x)
    assert fwd.t == pytest.approx(-rev.t)
    assert fwd.p_two_sided == pytest.approx(rev.p_two_sided)
    assert fwd.df == pytest.approx(rev.df)


def test_welch_degenerate_zero_variance():
    result = stats.welch_t_test([0.0, 0.0], [0.0, 0.0])
    assert result.degenerate
    assert result.t == 0.0 and result.p_two_sided == 1.0

    result = stats.welch_t_test([1.0, 1.0], [2.0, 2.0])
    assert result.degenerate
    assert result.p_two_sided == 0.0
    assert math.isinf(result.t)


def test_welch_sample_size_validation():
    with pytest.raises(ValueError):
        stats.welch_t_test([1.0], [1.0, 2.0])


def test_t_ppf_against_reference():
    for df in (1, 2, 3, 10, 29, 120):
        for q in (0.9, 0.95, 0.975, 0.995):
            got = stats.student_t_ppf(q, df)
            ref = float(scipy.stats.t.ppf(q, df))
            assert got == pytest.approx(ref, abs=1e-8), (q, df)


def test_mean_ci_hand_case():
    ci = stats.mean_ci95([10.0, 12.0, 14.0])
    assert ci.mean == pytest.approx(12.0)
    assert ci.sd == pytest.approx(2.0)
    assert ci.low == pytest.approx(7.03, abs=0.01)
    assert ci.high == pytest.approx(16.97, abs=0.01)


def test_mean_ci_zero_variance():
    ci = stats.mean_ci95([10.0, 10.0, 10.0])
    assert (ci.low, ci.high) == (10.0, 10.0)


def test_mean_ci_single_sample_omitted():
    ci = stats.mean_ci95([4.2])
    assert ci.omitted and ci.low == ci.high == 4.2


def test_lower_median_convention():
    assert stats.lower_median([1.0, 2.0, 3.0]) == 2.0
    assert stats.lower_median([1.0, 2.0, 3.0, 4.0]) == 2.0  # lower of the two
    with pytest.raises(ValueError):
        stats.lower_median([])
