"""Arrival-process generation, length-of-stay sampling, replication statistics.

Patient arrivals follow a nonhomogeneous Poisson process whose intensity
is piecewise constant over the three daily 8-hour staffing slots and
repeats every day.  Gaps are generated by cumulative-intensity inversion,
which is exact for piecewise-constant rates and consumes exactly one
Exp(1) draw per arrival.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaincinv, ndtri
from scipy.stats import t as student_t

SLOT_MINUTES = 480.0
SLOTS_PER_DAY = 3
DAY_MINUTES = 1440.0

LOS_FAMILIES = ("exponential", "lognormal", "gamma", "weibull", "empirical")


def rate_from_annual_count(count):
    """Per-minute arrival rate of a slot from its annual arrival count."""
    return count / (365.0 * SLOT_MINUTES)


class ArrivalProcess:
    """Day-periodic piecewise-constant-rate Poisson arrivals for one (ED, tag).

    `slot_rates` holds one per-minute rate per 8-hour slot.  If every
    rate is zero the process never produces an arrival and the sampling
    methods return None / an empty array.
    """

    def __init__(self, slot_rates):
        rates = [float(r) for r in slot_rates]
        if len(rates) != SLOTS_PER_DAY:
            raise ValueError(f"expected {SLOTS_PER_DAY} slot rates, got {len(rates)}")
        if any(r < 0 for r in rates):
            raise ValueError(f"arrival rates must be non-negative, got {rates}")
        self.slot_rates = rates
        # cumulative intensity at the end of each slot, from day start
        self._cum = np.cumsum([r * SLOT_MINUTES for r in rates])
        self.day_intensity = float(self._cum[-1])

    def cumulative_intensity(self, t):
        """Integral of the intensity over [0, t]."""
        days, rem = divmod(t, DAY_MINUTES)
        slot = min(int(rem // SLOT_MINUTES), SLOTS_PER_DAY - 1)
        before = self._cum[slot - 1] if slot > 0 else 0.0
        return (
            days * self.day_intensity
            + before
            + self.slot_rates[slot] * (rem - slot * SLOT_MINUTES)
        )

    def _invert(self, u):
        """Inverse of the cumulative intensity (vectorized)."""
        days, rem = np.divmod(u, self.day_intensity)
        slot = np.searchsorted(self._cum, rem, side="right")
        slot = np.minimum(slot, SLOTS_PER_DAY - 1)
        before = np.where(slot > 0, self._cum[slot - 1], 0.0)
        rates = np.asarray(self.slot_rates)[slot]
        return days * DAY_MINUTES + slot * SLOT_MINUTES + (rem - before) / rates

    def sample_interarrival(self, clock, rng):
        """Gap from `clock` to the next arrival, or None if all rates are zero.

        Draws E ~ Exp(1) and consumes intensity across slot boundaries
        until E is exhausted.
        """
        if self.day_intensity == 0.0:
            return None
        e = rng.exponential()
        t = clock
        while True:
            slot = int(t // SLOT_MINUTES) % SLOTS_PER_DAY
            slot_end = (math.floor(t / SLOT_MINUTES) + 1) * SLOT_MINUTES
            lam = self.slot_rates[slot]
            if lam > 0.0:
                capacity = lam * (slot_end - t)
                if e <= capacity:
                    return t + e / lam - clock
                e -= capacity
            t = slot_end

    def arrival_times(self, horizon, rng, start=0.0):
        """All arrival times in [start, horizon), strictly increasing.

        Equivalent to chaining `sample_interarrival`: the k-th arrival is
        the inverse cumulative intensity at the k-th partial sum of Exp(1)
        draws.  Both paths consume the random stream identically and
        agree up to floating-point rounding.
        """
        if self.day_intensity == 0.0 or horizon <= start:
            return np.empty(0)
        target = self.cumulative_intensity(horizon) - self.cumulative_intensity(start)
        n0 = int(target + 8.0 * math.sqrt(target + 1.0) + 16.0)
        acc = self.cumulative_intensity(start)
        out = []
        done = False
        n = max(64, n0)
        while not done:
            draws = rng.exponential(size=n)
            draws[0] += acc
            cum = np.cumsum(draws)
            acc = cum[-1]
            times = self._invert(cum)
            if times[-1] >= horizon:
                times = times[times < horizon]
                done = True
            out.append(times)
            n = max(64, n // 4)
        return np.concatenate(out) if len(out) > 1 else out[0]


@dataclass
class LosDistribution:
    """Length-of-stay distribution for one delay code (ED, slot, tag).

    Parameters are canonicalized at construction:

    - exponential: mean
    - lognormal:   mu/sigma of the underlying normal, or mean/cv
    - gamma:       shape/scale, or mean/cv
    - weibull:     shape/scale
    - empirical:   values (sampled uniformly)
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in LOS_FAMILIES:
            raise ValueError(
                f"unknown LOS family {self.family!r}; expected one of {LOS_FAMILIES}"
            )
        p = dict(self.params)
        if self.family == "exponential":
            mean = p.get("mean")
            if mean is None or mean <= 0:
                raise ValueError(f"exponential LOS needs a positive mean, got {p}")
            p = {"mean": float(mean)}
        elif self.family == "lognormal":
            if "mean" in p and "cv" in p:
                mean, cv = float(p["mean"]), float(p["cv"])
                if mean <= 0 or cv <= 0:
                    raise ValueError(f"lognormal mean/cv must be positive, got {p}")
                sigma2 = math.log(1.0 + cv * cv)
                p = {"mu": math.log(mean) - sigma2 / 2.0, "sigma": math.sqrt(sigma2)}
            elif "mu" in p and "sigma" in p:
                if float(p["sigma"]) <= 0:
                    raise ValueError(f"lognormal sigma must be positive, got {p}")
                p = {"mu": float(p["mu"]), "sigma": float(p["sigma"])}
            else:
                raise ValueError(f"lognormal LOS needs mean/cv or mu/sigma, got {p}")
        elif self.family == "gamma":
            if "mean" in p and "cv" in p:
                mean, cv = float(p["mean"]), float(p["cv"])
                if mean <= 0 or cv <= 0:
                    raise ValueError(f"gamma mean/cv must be positive, got {p}")
                p = {"shape": 1.0 / (cv * cv), "scale": mean * cv * cv}
            elif "shape" in p and "scale" in p:
                if float(p["shape"]) <= 0 or float(p["scale"]) <= 0:
                    raise ValueError(f"gamma shape/scale must be positive, got {p}")
                p = {"shape": float(p["shape"]), "scale": float(p["scale"])}
            else:
                raise ValueError(f"gamma LOS needs mean/cv or shape/scale, got {p}")
        elif self.family == "weibull":
            if "shape" not in p or "scale" not in p:
                raise ValueError(f"weibull LOS needs shape/scale, got {p}")
            if float(p["shape"]) <= 0 or float(p["scale"]) <= 0:
                raise ValueError(f"weibull shape/scale must be positive, got {p}")
            p = {"shape": float(p["shape"]), "scale": float(p["scale"])}
        else:  # empirical
            values = p.get("values")
            if not values:
                raise ValueError("empirical LOS needs a non-empty list of values")
            values = [float(v) for v in values]
            if any(v <= 0 for v in values):
                raise ValueError("empirical LOS values must be positive")
            p = {"values": values}
        self.params = p

    def quantile(self, u):
        """Inverse CDF at u in [0, 1); one uniform per sample."""
        p = self.params
        if self.family == "exponential":
            x = -p["mean"] * math.log(1.0 - u)
        elif self.family == "lognormal":
            x = math.exp(p["mu"] + p["sigma"] * ndtri(u)) if u > 0.0 else 0.0
        elif self.family == "gamma":
            x = float(gammaincinv(p["shape"], u)) * p["scale"]
        elif self.family == "weibull":
            x = p["scale"] * (-math.log(1.0 - u)) ** (1.0 / p["shape"])
        else:
            values = p["values"]
            return values[min(int(u * len(values)), len(values) - 1)]
        # u == 0 maps to the distribution's lower endpoint; keep samples positive
        return x if x > 0.0 else 1e-12

    def sample(self, rng):
        return self.quantile(rng.random())


def sample_los(dist, rng):
    """Positive duration drawn from the configured family."""
    return dist.sample(rng)


@dataclass
class MeanCI:
    """Sample mean with the half-width of its 95% Student-t interval."""

    mean: float
    half_width: float
    n: int


@lru_cache(maxsize=None)
def t_critical(df, level=0.975):
    """Student-t critical value at the given one-sided level."""
    return float(student_t.ppf(level, df))


def summarize(values):
    """Mean and 95% confidence half-width over per-replication values."""
    values = list(values)
    n = len(values)
    if n < 2:
        raise ValueError(f"need at least 2 replication values, got {n}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half_width = t_critical(n - 1) * math.sqrt(var / n)
    return MeanCI(mean=mean, half_width=half_width, n=n)
