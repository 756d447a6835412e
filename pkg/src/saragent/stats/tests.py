"""Statistical test battery used by the evaluation report.

All functions are pure and operate on plain sequences. p-values come from the
in-package distribution kernels so results are reproducible bit-for-bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .distributions import (
    chi2_sf,
    f_ppf,
    f_sf,
    noncentral_f_cdf,
    studentized_range_sf,
)
from .special import norm_ppf, norm_sf


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _check_groups(groups: Sequence[Sequence[float]], min_size: int = 2) -> None:
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    for i, g in enumerate(groups):
        if len(g) < min_size:
            raise ValueError(f"group {i} has fewer than {min_size} values")


def anova_oneway(groups: Sequence[Sequence[float]]) -> tuple[float, int, int, float]:
    """One-way fixed-effects ANOVA. Returns (F, df_between, df_within, p)."""
    _check_groups(groups)
    k = len(groups)
    n_total = sum(len(g) for g in groups)
    grand = sum(sum(g) for g in groups) / n_total
    ss_between = sum(len(g) * (_mean(g) - grand) ** 2 for g in groups)
    ss_within = sum(sum((x - _mean(g)) ** 2 for x in g) for g in groups)
    df1 = k - 1
    df2 = n_total - k
    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0, df1, df2, 1.0
        return math.inf, df1, df2, 0.0
    f = (ss_between / df1) / (ss_within / df2)
    return f, df1, df2, f_sf(f, df1, df2)


def anova_from_summary(
    means: Sequence[float], sds: Sequence[float], ns: Sequence[int]
) -> float:
    """F statistic reconstructed from per-group summary statistics."""
    if not (len(means) == len(sds) == len(ns)):
        raise ValueError("means, sds and ns must have equal length")
    if len(means) < 2:
        raise ValueError("need at least 2 groups")
    if any(n < 2 for n in ns):
        raise ValueError("every group size must be >= 2")
    n_total = sum(ns)
    k = len(means)
    grand = sum(n * m for n, m in zip(ns, means)) / n_total
    ms_between = sum(n * (m - grand) ** 2 for n, m in zip(ns, means)) / (k - 1)
    ms_within = sum((n - 1) * s * s for n, s in zip(ns, sds)) / (n_total - k)
    if ms_within == 0.0:
        return 0.0 if ms_between == 0.0 else math.inf
    return ms_between / ms_within


@dataclass(frozen=True)
class TukeyPair:
    group_a: int
    group_b: int
    mean_diff: float
    q: float
    p_adj: float
    significant: bool


def tukey_hsd(groups: Sequence[Sequence[float]], alpha: float = 0.05) -> list[TukeyPair]:
    """Tukey-Kramer pairwise comparisons after a one-way ANOVA."""
    _check_groups(groups)
    k = len(groups)
    n_total = sum(len(g) for g in groups)
    df2 = n_total - k
    ms_within = sum(sum((x - _mean(g)) ** 2 for x in g) for g in groups) / df2
    means = [_mean(g) for g in groups]
    pairs: list[TukeyPair] = []
    for i in range(k):
        for j in range(i + 1, k):
            diff = means[i] - means[j]
            se = math.sqrt(ms_within / 2.0 * (1.0 / len(groups[i]) + 1.0 / len(groups[j])))
            if se == 0.0:
                q = 0.0 if diff == 0.0 else math.inf
            else:
                q = abs(diff) / se
            p = 1.0 if q == 0.0 else (0.0 if math.isinf(q) else studentized_range_sf(q, k, df2))
            pairs.append(TukeyPair(i, j, diff, q, p, p < alpha))
    return pairs


def chi_square_independence(
    table: Sequence[Sequence[float]],
) -> tuple[float, int, float]:
    """Pearson chi-square test of independence on an r x c count table."""
    r = len(table)
    if r < 2 or any(len(row) != len(table[0]) for row in table):
        raise ValueError("table must be rectangular with at least 2 rows")
    c = len(table[0])
    if c < 2:
        raise ValueError("table must have at least 2 columns")
    row_sums = [sum(row) for row in table]
    col_sums = [sum(row[j] for row in table) for j in range(c)]
    total = sum(row_sums)
    if total <= 0:
        raise ValueError("table is empty")
    chi2 = 0.0
    for i in range(r):
        for j in range(c):
            expected = row_sums[i] * col_sums[j] / total
            if expected <= 0.0:
                raise ValueError(f"expected count is zero at cell ({i}, {j})")
            chi2 += (table[i][j] - expected) ** 2 / expected
    df = (r - 1) * (c - 1)
    return chi2, df, chi2_sf(chi2, df)


def cramers_v(chi2: float, n: int, r: int, c: int) -> float:
    """Effect size for an r x c contingency table."""
    if n <= 0 or min(r, c) < 2:
        raise ValueError("need n > 0 and at least a 2x2 table")
    return math.sqrt(chi2 / (n * min(r - 1, c - 1)))


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float:
    """Standardized mean difference with pooled standard deviation."""
    if len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least 2 values")
    ma, mb = _mean(a), _mean(b)
    var_a = sum((x - ma) ** 2 for x in a) / (len(a) - 1)
    var_b = sum((x - mb) ** 2 for x in b) / (len(b) - 1)
    pooled = ((len(a) - 1) * var_a + (len(b) - 1) * var_b) / (len(a) + len(b) - 2)
    if pooled == 0.0:
        if ma == mb:
            return 0.0
        raise ValueError("zero pooled variance with unequal means")
    return (ma - mb) / math.sqrt(pooled)


def _midranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def _exact_u_counts(n1: int, n2: int) -> list[int]:
    """Null distribution counts of U for tie-free samples (recurrence build)."""
    prev = [[0] * (n1 * n2 + 1) for _ in range(n1 + 1)]
    # counts[m][u] for current n; start with n = 0
    counts = [[0] * (n1 * n2 + 1) for _ in range(n1 + 1)]
    for m in range(n1 + 1):
        counts[m][0] = 1
    for n in range(1, n2 + 1):
        prev, counts = counts, prev
        for u in range(n1 * n2 + 1):
            counts[0][u] = 1 if u == 0 else 0
        for m in range(1, n1 + 1):
            row = counts[m]
            row_m1 = counts[m - 1]
            prow = prev[m]
            for u in range(n1 * n2 + 1):
                total = prow[u]
                if u >= n:
                    total += row_m1[u - n]
                row[u] = total
    return counts[n1]


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test.

    U is reported for the first sample. Tie-free samples with both sizes
    <= 20 get the exact null distribution; larger or tied samples use the
    normal approximation with tie correction and continuity correction.
    """
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    pooled = list(a) + list(b)
    ranks = _midranks(pooled)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    n_total = n1 + n2
    has_ties = len(set(pooled)) != n_total
    mu = n1 * n2 / 2.0
    if not has_ties and max(n1, n2) <= 20:
        counts = _exact_u_counts(n1, n2)
        total = sum(counts)
        dev = abs(u1 - mu)
        p = sum(c for u, c in enumerate(counts) if abs(u - mu) >= dev - 1e-12) / total
        return u1, min(1.0, p)
    # tie-corrected normal approximation
    tie_term = 0.0
    seen: dict[float, int] = {}
    for v in pooled:
        seen[v] = seen.get(v, 0) + 1
    for t in seen.values():
        tie_term += t ** 3 - t
    sigma_sq = n1 * n2 / 12.0 * ((n_total + 1) - tie_term / (n_total * (n_total - 1)))
    if sigma_sq <= 0.0:
        return u1, 1.0
    dev = abs(u1 - mu)
    z = max(0.0, dev - 0.5) / math.sqrt(sigma_sq)
    return u1, min(1.0, 2.0 * norm_sf(z))


def rank_biserial(u: float, n1: int, n2: int) -> float:
    """Rank-biserial correlation paired with the U of the first sample."""
    if n1 <= 0 or n2 <= 0:
        raise ValueError("sample sizes must be positive")
    return 1.0 - 2.0 * u / (n1 * n2)


# Royston (1995) polynomial coefficients for the W weights.
_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)


def _sw_poly(coeffs: tuple[float, ...], x: float) -> float:
    total = 0.0
    for power, c in enumerate(coeffs):
        total += c * x ** power
    return total


def shapiro_wilk(sample: Sequence[float]) -> tuple[float, float]:
    """Shapiro-Wilk normality test via the Royston polynomial approximation."""
    n = len(sample)
    if n < 3 or n > 5000:
        raise ValueError("sample size must be within [3, 5000]")
    x = sorted(sample)
    if x[0] == x[-1]:
        raise ValueError("sample is constant")
    m = [norm_ppf((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)]
    ssm = sum(v * v for v in m)
    rsn = 1.0 / math.sqrt(n)
    if n > 5:
        a_n = _sw_poly(_SW_C1, rsn) + m[-1] / math.sqrt(ssm)
        a_n1 = _sw_poly(_SW_C2, rsn) + m[-2] / math.sqrt(ssm)
        phi = (ssm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
            1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2
        )
        a = [v / math.sqrt(phi) for v in m]
        a[-1] = a_n
        a[-2] = a_n1
        a[0] = -a_n
        a[1] = -a_n1
    elif n > 3:
        a_n = _sw_poly(_SW_C1, rsn) + m[-1] / math.sqrt(ssm)
        phi = (ssm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        a = [v / math.sqrt(phi) for v in m]
        a[-1] = a_n
        a[0] = -a_n
    else:
        a = [-math.sqrt(0.5), 0.0, math.sqrt(0.5)]
    mean_x = sum(x) / n
    ssd = sum((v - mean_x) ** 2 for v in x)
    w = sum(ai * xi for ai, xi in zip(a, x)) ** 2 / ssd
    w = min(w, 1.0)
    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        return w, min(1.0, max(0.0, p))
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        if gamma - math.log(1.0 - w) <= 0.0:
            return w, 0.0
        y = -math.log(gamma - math.log(1.0 - w))
        mu = 0.5440 - 0.39978 * n + 0.025054 * n ** 2 - 0.0006714 * n ** 3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n ** 2 - 0.0020322 * n ** 3)
    else:
        ln_n = math.log(n)
        y = math.log(1.0 - w)
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n ** 2 + 0.0038915 * ln_n ** 3
        sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n ** 2)
    z = (y - mu) / sigma
    return w, min(1.0, max(0.0, norm_sf(z)))


def levene(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Levene's test with median centering (Brown-Forsythe variant)."""
    _check_groups(groups)
    deviations = []
    for g in groups:
        s = sorted(g)
        n = len(s)
        med = s[n // 2] if n % 2 else 0.5 * (s[n // 2 - 1] + s[n // 2])
        deviations.append([abs(x - med) for x in g])
    w, _, _, p = anova_oneway(deviations)
    return w, p


def posthoc_power_anova(
    means: Sequence[float],
    sds: Sequence[float],
    ns: Sequence[int],
    alpha: float = 0.05,
) -> float:
    """Achieved power of a one-way ANOVA computed from group summaries."""
    if not (len(means) == len(sds) == len(ns)):
        raise ValueError("means, sds and ns must have equal length")
    if len(means) < 2:
        raise ValueError("need at least 2 groups")
    if any(n < 2 for n in ns) or any(s < 0 for s in sds):
        raise ValueError("invalid group summaries")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    k = len(means)
    n_total = sum(ns)
    df1 = k - 1
    df2 = n_total - k
    grand = sum(n * m for n, m in zip(ns, means)) / n_total
    sigma_sq = sum((n - 1) * s * s for n, s in zip(ns, sds)) / (n_total - k)
    if sigma_sq == 0.0:
        return 1.0 if any(m != grand for m in means) else alpha
    nc = sum(n * (m - grand) ** 2 for n, m in zip(ns, means)) / sigma_sq
    f_crit = f_ppf(1.0 - alpha, df1, df2)
    return 1.0 - noncentral_f_cdf(f_crit, df1, df2, nc)
