"""Distribution CDFs/tails built on the special-function kernels.

Includes the studentized range distribution (numeric double quadrature) used
for multiple-comparison adjustment, and the noncentral F CDF (Poisson mixture
of incomplete betas) used for power analysis.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .special import (
    norm_cdf_vec,
    norm_pdf_vec,
    reg_inc_beta,
    reg_inc_gamma_lower,
    reg_inc_gamma_upper,
)


def f_cdf(x: float, df1: float, df2: float) -> float:
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return reg_inc_beta(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2))


def f_sf(x: float, df1: float, df2: float) -> float:
    if x <= 0:
        return 1.0
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, df2 / (df1 * x + df2))


def f_ppf(p: float, df1: float, df2: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    lo, hi = 0.0, 1.0
    while f_cdf(hi, df1, df2) < p:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("F quantile bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f_cdf(mid, df1, df2) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chi2_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return reg_inc_gamma_lower(df / 2.0, x / 2.0)


def chi2_sf(x: float, df: float) -> float:
    if x <= 0:
        return 1.0
    return reg_inc_gamma_upper(df / 2.0, x / 2.0)


def t_sf(x: float, df: float) -> float:
    """Upper tail of Student's t."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    p = 0.5 * reg_inc_beta(df / 2.0, 0.5, df / (df + x * x))
    return p if x >= 0 else 1.0 - p


def noncentral_f_cdf(x: float, df1: float, df2: float, nc: float) -> float:
    """CDF of the noncentral F distribution via its Poisson mixture."""
    if x <= 0:
        return 0.0
    if nc < 0:
        raise ValueError("noncentrality must be non-negative")
    if nc == 0:
        return f_cdf(x, df1, df2)
    v = df1 * x / (df1 * x + df2)
    half = nc / 2.0
    # Sum Poisson-weighted terms outward from the modal index.
    j0 = int(half)
    log_w0 = -half + j0 * math.log(half) - math.lgamma(j0 + 1) if half > 0 else 0.0
    total = math.exp(log_w0) * reg_inc_beta(df1 / 2.0 + j0, df2 / 2.0, v)
    log_w = log_w0
    for j in range(j0 + 1, j0 + 20000):
        log_w += math.log(half) - math.log(j)
        term = math.exp(log_w) * reg_inc_beta(df1 / 2.0 + j, df2 / 2.0, v)
        total += term
        if math.exp(log_w) < 1e-16 and j > half:
            break
    log_w = log_w0
    for j in range(j0 - 1, -1, -1):
        log_w += math.log(j + 1) - math.log(half)
        term = math.exp(log_w) * reg_inc_beta(df1 / 2.0 + j, df2 / 2.0, v)
        total += term
        if math.exp(log_w) < 1e-16 and j < half:
            break
    return min(1.0, max(0.0, total))


# --- studentized range -----------------------------------------------------


@lru_cache(maxsize=4)
def _panel_nodes(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights over [a, b] as flat arrays."""
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mids[:, None] + half * base_x[None, :]).ravel()
    weights = np.broadcast_to(half * base_w[None, :], (panels, order)).ravel().copy()
    return nodes, weights


def _range_cdf_given_scale_vec(w, k: int):
    """P(range of k iid standard normals <= w) for an array of widths w."""
    w = np.asarray(w, dtype=float)
    z, zw = _panel_nodes(-8.0, 8.0, 16, 24)
    phi = norm_pdf_vec(z)
    big_phi = norm_cdf_vec(z)
    # shape (nw, nz)
    inner = big_phi[None, :] - norm_cdf_vec(z[None, :] - w[:, None])
    np.clip(inner, 0.0, 1.0, out=inner)
    vals = k * np.sum(zw * phi * inner ** (k - 1), axis=1)
    return np.where(w <= 0.0, 0.0, np.clip(vals, 0.0, 1.0))


def _chi_scale_upper(df: float, tail: float = 1e-13) -> float:
    """Upper cutoff for sqrt(chi^2_df / df) leaving at most `tail` mass."""
    hi = 2.0
    while chi2_sf(df * hi * hi, df) > tail:
        hi *= 2.0
        if hi > 1e3:
            break
    return hi


def studentized_range_cdf(q: float, k: int, df: float) -> float:
    """P(Q <= q) where Q is the studentized range of k groups with df error dof."""
    if k < 2:
        raise ValueError("need at least 2 groups")
    if q <= 0:
        return 0.0
    if df > 1e5:
        return float(_range_cdf_given_scale_vec(np.array([q]), k)[0])
    half_df = df / 2.0
    log_const = half_df * math.log(half_df) - math.lgamma(half_df) + math.log(2.0)
    if df >= 30.0:
        sigma = 1.0 / math.sqrt(2.0 * df)
        lo = max(0.0, 1.0 - 16.0 * sigma)
        hi = 1.0 + 16.0 * sigma
    else:
        lo, hi = 0.0, _chi_scale_upper(df)
    s, sw = _panel_nodes(lo, hi, 24, 24)
    positive = s > 0.0
    s = s[positive]
    sw = sw[positive]
    log_dens = log_const + (df - 1.0) * np.log(s) - half_df * s * s
    dens = np.exp(log_dens)
    vals = _range_cdf_given_scale_vec(q * s, k)
    return float(min(1.0, np.sum(sw * dens * vals)))


def studentized_range_sf(q: float, k: int, df: float) -> float:
    return max(0.0, 1.0 - studentized_range_cdf(q, k, df))


def studentized_range_ppf(p: float, k: int, df: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    lo, hi = 0.0, 2.0
    while studentized_range_cdf(hi, k, df) < p:
        hi *= 2.0
        if hi > 1e4:
            raise ArithmeticError("studentized range quantile bracket failed")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if studentized_range_cdf(mid, k, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
