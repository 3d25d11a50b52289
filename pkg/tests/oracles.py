"""Independent reference implementations used to check the package.

Everything in here is deliberately written the slow, obvious way (direct
summation, textbook closed forms, lattice backward induction) and shares
no code with ``longevity`` itself, so a bug in the package cannot hide in
its own test oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm


def settlement_value_by_summation(p: float, b: float, r: float, t: int) -> float:
    """Death-at-t position value as an explicit cash-flow sum."""
    a = 1.0 / (1.0 + r)
    return -p * sum(a**i for i in range(1, t + 1)) + b * a**t


def macaulay_by_summation(p: float, b: float, r: float, t: int) -> float:
    """Time-weighted cash-flow sum over present value, premium term positive."""
    a = 1.0 / (1.0 + r)
    numerator = p * sum(i * a**i for i in range(1, t + 1)) - t * b * a**t
    return numerator / settlement_value_by_summation(p, b, r, t)


def curtate_mean_from_rates(qx: np.ndarray, start_index: int = 0) -> float:
    """Mean whole-year death time by direct probability accumulation."""
    mean = 0.0
    alive = 1.0
    for k, q in enumerate(qx[start_index:], start=1):
        mean += k * alive * q
        alive *= 1.0 - q
    return mean


def bs_price(kind: str, s: float, k: float, r: float, vol: float, t: float) -> float:
    """Closed-form European option value."""
    d1 = (np.log(s / k) + (r + 0.5 * vol**2) * t) / (vol * np.sqrt(t))
    d2 = d1 - vol * np.sqrt(t)
    if kind == "call":
        return s * norm.cdf(d1) - k * np.exp(-r * t) * norm.cdf(d2)
    if kind == "put":
        return k * np.exp(-r * t) * norm.cdf(-d2) - s * norm.cdf(-d1)
    raise ValueError(kind)


def binomial_american_put(s: float, k: float, r: float, vol: float, t: float,
                          steps: int = 1000) -> float:
    """Cox-Ross-Rubinstein lattice value of an American put."""
    dt = t / steps
    u = np.exp(vol * np.sqrt(dt))
    d = 1.0 / u
    disc = np.exp(-r * dt)
    p = (np.exp(r * dt) - d) / (u - d)
    st = s * u ** np.arange(steps, -1, -1) * d ** np.arange(0, steps + 1)
    v = np.maximum(k - st, 0.0)
    for n in range(steps - 1, -1, -1):
        st = s * u ** np.arange(n, -1, -1) * d ** np.arange(0, n + 1)
        v = np.maximum(disc * (p * v[:-1] + (1.0 - p) * v[1:]), k - st)
    return float(v[0])
