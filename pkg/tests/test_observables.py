import math

import numpy as np
import pytest

from semichain import observables as obs
from semichain.engine import ZeroInitialContrast
from semichain.models import bs
from semichain.rng import SplitMix64


def test_charge_profile_examples():
    assert list(obs.charge_profile(bs.MODEL, bs.MODEL.parse("bBe"))) == [1, -1, 0]
    w = bs.w_large_core(2)
    assert obs.charge_profile(bs.MODEL, w).sum() == 0


def test_contrast_two_pass_vs_streaming():
    gen = SplitMix64(4).numpy_generator()
    series = gen.integers(-1, 2, size=(300, 24))
    for t, T in [(0, 50), (100, 128), (172, 128)]:
        direct = obs.contrast(series, t, T)
        acc = obs.ContrastAccumulator(24)
        for row in series[t : t + T]:
            acc.add(row)
        assert abs(direct - acc.value()) < 1e-12


def test_contrast_window_out_of_range():
    with pytest.raises(obs.WindowOutOfRange):
        obs.contrast(np.zeros((10, 4)), 5, 6)


def test_contrast_frozen_configuration():
    profile = np.array([1, -1, 0, 1])
    series = np.tile(profile, (40, 1))
    assert obs.contrast(series, 0, 40) == pytest.approx(np.mean(profile**2))


def test_thermalization_time_first_crossing():
    times = np.array([0, 10, 20, 30, 40])
    vals = np.array([1.0, 0.5, 0.25, 0.09, 0.01])
    assert obs.thermalization_time(times, vals, fraction=0.1) == 30
    assert obs.thermalization_time(times, vals, fraction=0.001) is None


def test_thermalization_time_monotone_in_fraction():
    gen = SplitMix64(6).numpy_generator()
    times = np.arange(50)
    vals = np.sort(gen.random(50))[::-1] + 1e-6
    crossings = []
    for frac in (0.5, 0.2, 0.1, 0.02):
        t = obs.thermalization_time(times, vals, fraction=frac)
        crossings.append(math.inf if t is None else t)
    assert crossings == sorted(crossings)


def test_thermalization_time_zero_initial():
    with pytest.raises(ZeroInitialContrast):
        obs.thermalization_time([0, 1], [0.0, 0.0])


def test_collapse_curve_endpoints():
    assert obs.collapse_curve(0.0, 100.0, 6.0) == pytest.approx(6.0)
    assert obs.collapse_curve(100.0, 100.0, 6.0) == 0.0
    assert obs.collapse_curve(250.0, 100.0, 6.0) == 0.0
    # exact zero also approached continuously: at t just below t_th the
    # logarithm tends to -n_b0
    assert obs.collapse_curve(99.999, 100.0, 6.0) == pytest.approx(0.0, abs=1e-3)


def test_collapse_curve_non_increasing():
    ts = np.linspace(0, 120, 200)
    vals = [obs.collapse_curve(t, 100.0, 8.0) for t in ts]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_censored_median():
    med, exact = obs.censored_median([3, 1, 2])
    assert (med, exact) == (2.0, True)
    med, exact = obs.censored_median([1, None, None], censored_at=100)
    assert med == 100.0 and not exact
    med, exact = obs.censored_median([1, 3, None, None], censored_at=50)
    assert med == 50.0 and not exact
    med, exact = obs.censored_median([1, 2, 3, None], censored_at=50)
    assert med == 2.5 and exact


def test_spread_stats():
    med, iqr, rel = obs.spread_stats([10.0, 20.0, 30.0, None])
    assert med == 20.0
    assert iqr == 10.0
    assert rel == pytest.approx(np.std([10, 20, 30]) / 20.0)
