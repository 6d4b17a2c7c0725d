"""Site-resolved charges, windowed contrast, thermalization times, and
the sudden-collapse model curve."""

from __future__ import annotations

import math

import numpy as np

from .engine import ZeroInitialContrast
from .models import Model


class WindowOutOfRange(Exception):
    pass


def charge_profile(model: Model, cells) -> np.ndarray:
    """Per-site charge of a configuration (b-charge, c-charge, or stars)."""
    charge = np.array(model.charge, dtype=np.int64)
    return charge[np.asarray(cells, dtype=np.int64)]


def contrast(profile_series: np.ndarray, t: int, window: int) -> float:
    """Two-pass definition: spatial mean of squared windowed site means.

    `profile_series` holds one charge profile per layer (layers, sites).
    """
    series = np.asarray(profile_series)
    if t < 0 or t + window > series.shape[0]:
        raise WindowOutOfRange(f"window [{t}, {t + window}) outside series of length {series.shape[0]}")
    means = series[t : t + window].mean(axis=0)
    return float(np.mean(means**2))


class ContrastAccumulator:
    """Streaming form of `contrast`: add one profile per layer."""

    def __init__(self, n_sites: int):
        self.sums = np.zeros(n_sites, dtype=np.int64)
        self.count = 0

    def add(self, profile) -> None:
        self.sums += profile
        self.count += 1

    def value(self) -> float:
        if self.count == 0:
            raise WindowOutOfRange("empty window")
        means = self.sums / self.count
        return float(np.mean(means**2))


def thermalization_time(times, contrasts, fraction: float = 0.1):
    """First sample time with contrast below fraction * contrast(0).

    Returns None when the series never crosses (not thermalized).
    """
    times = np.asarray(times)
    contrasts = np.asarray(contrasts)
    if len(contrasts) == 0 or contrasts[0] == 0:
        raise ZeroInitialContrast("initial contrast vanishes")
    below = np.nonzero(contrasts < fraction * contrasts[0])[0]
    return int(times[below[0]]) if len(below) else None


def collapse_curve(t: float, t_th: float, n_b0: float) -> float:
    """Sudden-collapse density profile: flat, then a logarithmic drop.

    Theta(t_th - t) * (n_b0 + log2(1 - t/t_th + 2^-n_b0 * t/t_th));
    equals n_b0 at t = 0 and 0 at t >= t_th.
    """
    if t_th <= 0:
        raise ValueError("t_th must be positive")
    if t >= t_th:
        return 0.0
    x = t / t_th
    return n_b0 + math.log2(1.0 - x + 2.0 ** (-n_b0) * x)


def censored_median(values, censored_at=None):
    """Median with right-censored entries treated as +infinity.

    `values` holds observed times with None (or the budget value flagged
    by the caller) marking censored runs; returns (median, exact) where
    exact=False means the median itself is censored (a lower bound).
    """
    obs = sorted(v for v in values if v is not None)
    n = len(values)
    if n == 0:
        raise ValueError("no observations")
    k = n // 2  # index of the upper median
    if len(obs) <= k:
        bound = censored_at if censored_at is not None else (obs[-1] if obs else 0.0)
        return float(bound), False
    if n % 2 == 1:
        return float(obs[k]), True
    return 0.5 * (obs[k - 1] + obs[k]), True


def spread_stats(values):
    """(median, IQR, sigma/mean) across seeds, for distribution width."""
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if len(arr) == 0:
        raise ValueError("no uncensored values")
    med = float(np.median(arr))
    iqr = float(np.percentile(arr, 75) - np.percentile(arr, 25))
    rel = float(np.std(arr) / np.mean(arr)) if np.mean(arr) > 0 else 0.0
    return med, iqr, rel
