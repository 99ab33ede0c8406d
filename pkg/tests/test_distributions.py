"""Arrival-process, visit-time, and statistics tests."""

import math

import numpy as np
import pytest

from ednetsim.distributions import (
    SLOT_MINUTES,
    ArrivalProcess,
    LosDistribution,
    rate_from_annual_count,
    summarize,
    t_critical,
)
from ednetsim.engine import RandomStreams


def test_rate_from_annual_count():
    assert rate_from_annual_count(2688) == pytest.approx(0.015342, abs=1e-6)
    assert rate_from_annual_count(0) == 0.0


def test_arrival_process_validation():
    with pytest.raises(ValueError):
        ArrivalProcess([0.1, 0.1])
    with pytest.raises(ValueError):
        ArrivalProcess([0.1, -0.1, 0.1])


def test_cumulative_intensity_piecewise():
    proc = ArrivalProcess([0.1, 0.0, 0.2])
    assert proc.cumulative_intensity(0.0) == 0.0
    assert proc.cumulative_intensity(480.0) == pytest.approx(48.0)
    assert proc.cumulative_intensity(960.0) == pytest.approx(48.0)  # dead slot
    assert proc.cumulative_intensity(1440.0) == pytest.approx(144.0)
    # mid-slot and next-day points
    assert proc.cumulative_intensity(240.0) == pytest.approx(24.0)
    assert proc.cumulative_intensity(1440.0 + 10.0) == pytest.approx(145.0)


def test_inversion_round_trip():
    proc = ArrivalProcess([0.05, 0.0, 0.2])
    rng = np.random.default_rng(3)
    u = np.sort(rng.uniform(0.0, 5 * proc.day_intensity, size=200))
    t = proc._invert(u)
    back = np.array([proc.cumulative_intensity(v) for v in t])
    assert np.allclose(back, u, atol=1e-9)
    # inverted times never land inside the zero-rate slot
    rem = t % 1440.0
    assert not np.any((rem >= 480.0) & (rem < 960.0))


def test_block_generation_matches_sequential():
    proc = ArrivalProcess([0.004, 0.0, 0.013])
    horizon = 60 * 1440.0
    block = proc.arrival_times(horizon, RandomStreams(11).get(0, "arrival-yellow"))

    rng = RandomStreams(11).get(0, "arrival-yellow")
    seq, t = [], 0.0
    while True:
        t += proc.sample_interarrival(t, rng)
        if t >= horizon:
            break
        seq.append(t)
    assert len(block) == len(seq)
    assert np.allclose(block, np.array(seq), atol=1e-8)


def test_arrival_times_sorted_and_in_range():
    proc = ArrivalProcess([0.02, 0.05, 0.01])
    times = proc.arrival_times(90 * 1440.0, np.random.default_rng(5))
    assert np.all(np.diff(times) > 0)
    assert times[0] >= 0.0 and times[-1] < 90 * 1440.0


def test_zero_rate_process():
    proc = ArrivalProcess([0.0, 0.0, 0.0])
    assert proc.day_intensity == 0.0
    assert proc.sample_interarrival(0.0, np.random.default_rng(1)) is None
    assert len(proc.arrival_times(1440.0, np.random.default_rng(1))) == 0


def test_nhpp_slot_counts_match_rates():
    # 1000 days of the three-slot profile; each slot's count within 2%
    counts = [875, 2688, 2279]
    proc = ArrivalProcess([rate_from_annual_count(c) for c in counts])
    days = 1000
    times = proc.arrival_times(days * 1440.0, RandomStreams(13).get(0, "arrival-yellow"))
    slots = ((times % 1440.0) // SLOT_MINUTES).astype(int)
    observed = np.bincount(slots, minlength=3)
    expected = np.array([rate_from_annual_count(c) * SLOT_MINUTES * days for c in counts])
    assert np.all(np.abs(observed - expected) / expected < 0.02)


def test_exponential_los():
    dist = LosDistribution("exponential", {"mean": 30.0})
    assert dist.quantile(0.0) == pytest.approx(1e-12)
    assert dist.quantile(1.0 - math.exp(-1.0)) == pytest.approx(30.0)
    rng = np.random.default_rng(8)
    draws = [dist.sample(rng) for _ in range(20000)]
    assert np.mean(draws) == pytest.approx(30.0, rel=0.03)


def test_lognormal_parameterizations_agree():
    by_moments = LosDistribution("lognormal", {"mean": 100.0, "cv": 0.8})
    mu, sigma = by_moments.params["mu"], by_moments.params["sigma"]
    direct = LosDistribution("lognormal", {"mu": mu, "sigma": sigma})
    for u in (0.1, 0.5, 0.9):
        assert by_moments.quantile(u) == pytest.approx(direct.quantile(u))
    # moments recovered by sampling
    rng = np.random.default_rng(2)
    draws = np.array([by_moments.sample(rng) for _ in range(40000)])
    assert draws.mean() == pytest.approx(100.0, rel=0.03)
    assert draws.std() / draws.mean() == pytest.approx(0.8, rel=0.05)


def test_gamma_mean_cv():
    dist = LosDistribution("gamma", {"mean": 60.0, "cv": 0.5})
    assert dist.params["shape"] == pytest.approx(4.0)
    assert dist.params["scale"] == pytest.approx(15.0)
    rng = np.random.default_rng(4)
    draws = np.array([dist.sample(rng) for _ in range(30000)])
    assert draws.mean() == pytest.approx(60.0, rel=0.03)


def test_weibull_quantile():
    dist = LosDistribution("weibull", {"shape": 2.0, "scale": 10.0})
    # median of Weibull(k, lam) is lam * ln(2)^(1/k)
    assert dist.quantile(0.5) == pytest.approx(10.0 * math.log(2.0) ** 0.5)


def test_empirical_los():
    dist = LosDistribution("empirical", {"values": [5.0, 10.0, 20.0]})
    assert dist.quantile(0.0) == 5.0
    assert dist.quantile(0.5) == 10.0
    assert dist.quantile(0.999) == 20.0


def test_quantile_monotone_in_u():
    for family, params in [
        ("exponential", {"mean": 30.0}),
        ("lognormal", {"mean": 100.0, "cv": 1.2}),
        ("gamma", {"mean": 45.0, "cv": 0.7}),
        ("weibull", {"shape": 1.5, "scale": 25.0}),
    ]:
        dist = LosDistribution(family, params)
        qs = [dist.quantile(u) for u in np.linspace(0.01, 0.99, 25)]
        assert all(a < b for a, b in zip(qs, qs[1:]))


def test_los_validation_errors():
    with pytest.raises(ValueError):
        LosDistribution("normal", {"mean": 1.0})
    with pytest.raises(ValueError):
        LosDistribution("exponential", {"mean": -3.0})
    with pytest.raises(ValueError):
        LosDistribution("lognormal", {"mean": 100.0})
    with pytest.raises(ValueError):
        LosDistribution("gamma", {"shape": 2.0})
    with pytest.raises(ValueError):
        LosDistribution("weibull", {"shape": 0.0, "scale": 1.0})
    with pytest.raises(ValueError):
        LosDistribution("empirical", {"values": []})
    with pytest.raises(ValueError):
        LosDistribution("empirical", {"values": [3.0, -1.0]})


def test_t_critical_values():
    assert t_critical(2) == pytest.approx(4.3027, abs=2e-4)
    assert t_critical(9) == pytest.approx(2.2622, abs=2e-4)
    assert t_critical(29) == pytest.approx(2.0452, abs=2e-4)
    assert t_critical(1) == pytest.approx(12.7062, abs=2e-4)


def test_summarize_hand_value():
    ci = summarize([10.0, 12.0, 14.0])
    assert ci.mean == pytest.approx(12.0)
    assert ci.n == 3
    assert ci.half_width == pytest.approx(4.3027 * 2.0 / math.sqrt(3.0), abs=1e-3)


def test_summarize_requires_two_values():
    with pytest.raises(ValueError):
        summarize([1.0])


def test_summarize_zero_variance():
    ci = summarize([7.0, 7.0, 7.0, 7.0])
    assert ci.mean == 7.0
    assert ci.half_width == 0.0
