"""Sample statistics: Welch's t-test and Student-t confidence intervals.

p-values come from the regularized incomplete beta function evaluated with
a Lentz continued fraction (absolute error well below 1e-10), so results
are reproducible without a stats dependency. The t quantile used for
confidence intervals is obtained by bisecting the same CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MAX_ITER = 500
_EPS = 1e-15
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return betainc_reg(df / 2.0, 0.5, x)


def student_t_cdf(t: float, df: float) -> float:
    half_sf = student_t_sf_two_sided(abs(t), df) / 2.0
    return 1.0 - half_sf if t >= 0 else half_sf


def student_t_ppf(q: float, df: float) -> float:
    """Quantile by bisection; q in (0, 1)."""
    if not 0 < q < 1:
        raise ValueError("q must be in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -student_t_ppf(1.0 - q, df)
    lo, hi = 0.0, 1.0
    while student_t_cdf(hi, df) < q:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if student_t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    return (lo + hi) / 2.0


def mean(xs: list[float]) -> float:
    # fsum: exact accumulation, so statistics are permutation-invariant
    return math.fsum(xs) / len(xs)


def sample_sd(xs: list[float]) -> float:
    n = len(xs)
    if n < 2:
        return 0.0
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (n - 1))


def lower_median(xs: list[float]) -> float:
    """Median with the lower-of-two convention for even-sized samples."""
    if not xs:
        raise ValueError("median of empty sample")
    ordered = sorted(xs)
    return ordered[(len(ordered) - 1) // 2]


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_two_sided: float
    degenerate: bool = False


def welch_t_test(x: list[float], y: list[float]) -> WelchResult:
    """Two-sample t-test without the equal-variance assumption;
    degrees of freedom by Welch-Satterthwaite."""
    nx, ny = len(x), len(y)
    if nx < 2 or ny < 2:
        raise ValueError("each sample needs at least 2 observations")
    mx, my = mean(x), mean(y)
    vx = math.fsum((v - mx) ** 2 for v in x) / (nx - 1)
    vy = math.fsum((v - my) ** 2 for v in y) / (ny - 1)
    if vx == 0.0 and vy == 0.0:
        if mx == my:
            return WelchResult(t=0.0, df=float(nx + ny - 2), p_two_sided=1.0,
                               degenerate=True)
        sign = 1.0 if mx > my else -1.0
        return WelchResult(t=sign * math.inf, df=float(nx + ny - 2),
                           p_two_sided=0.0, degenerate=True)
    se2 = vx / nx + vy / ny
    t = (mx - my) / math.sqrt(se2)
    df = se2 * se2 / (
        (vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1)
    )
    return WelchResult(t=t, df=df, p_two_sided=student_t_sf_two_sided(abs(t), df))


@dataclass(frozen=True)
class MeanCI:
    mean: float
    sd: float
    low: float
    high: float
    omitted: bool = False


def mean_ci95(xs: list[float]) -> MeanCI:
    """mean +/- t(0.975, n-1) * sd / sqrt(n); omitted flag when n < 2."""
    m = mean(xs)
    if len(xs) < 2:
        return MeanCI(mean=m, sd=0.0, low=m, high=m, omitted=True)
    sd = sample_sd(xs)
    half = student_t_ppf(0.975, len(xs) - 1) * sd / math.sqrt(len(xs))
    return MeanCI(mean=m, sd=sd, low=m - half, high=m + half)
