"""Deterministic Monte Carlo machinery for mortality and index paths.

Reproducibility contract
------------------------
:class:`RngStream` wraps the counter-based Philox-4x64 bit generator keyed by
``(seed, stream_id)``.  The same pair always yields the same draw sequence,
on any platform, and distinct ``stream_id`` values give statistically
independent streams, so work can be fanned out and merged deterministically.

Uniform deviates are built from the top 53 bits of one 64-bit word each,
offset by half an ulp, so they lie strictly inside (0, 1) and are safe under
logarithms.  Normal deviates use the Box-Muller transform, one uniform pair
per normal (the cosine branch only), so the stream position after ``n``
normals is ``2n`` words regardless of batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lifetable import LifeTable, death_distribution

__all__ = [
    "RngStream",
    "box_muller",
    "SimSummary",
    "GbmParams",
    "sample_death_year",
    "sample_death_years",
    "sample_death_times",
    "simulate_deaths",
    "merge_summaries",
    "vole",
    "gbm_step",
    "gbm_terminal",
    "gbm_terminal_samples",
    "randomized_horizon_payoff",
]

_TWO_POW_53 = float(1 << 53)


class RngStream:
    """A named, reproducible stream of pseudo-random deviates.

    Parameters
    ----------
    seed : int
        Experiment-level seed, ``0 <= seed < 2**64``.
    stream_id : int
        Sub-stream identifier, ``0 <= stream_id < 2**64``.  Streams with the
        same seed and different ids are independent.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        for name, v in (("seed", seed), ("stream_id", stream_id)):
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {v!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, offset: int) -> "RngStream":
        """Fresh stream with the same seed and ``stream_id + offset``."""
        return RngStream(self.seed, self.stream_id + int(offset))

    def uniform(self, size: int) -> np.ndarray:
        """``size`` uniforms strictly inside (0, 1), one 64-bit word each."""
        if size < 0:
            raise ValueError("size must be >= 0")
        words = self._gen.integers(0, 2**64, size=size, dtype=np.uint64)
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) / _TWO_POW_53

    def normals(self, size: int) -> np.ndarray:
        """``size`` standard normals via Box-Muller, cosine branch.

        Consumes exactly ``2 * size`` uniforms (radius first, angle second
        for each deviate).
        """
        u = self.uniform(2 * size)
        y1, _ = box_muller(u[0::2], u[1::2])
        return y1


def box_muller(r1, r2):
    """Box-Muller transform of two independent uniform(0,1) deviates.

    Returns the pair ``(y1, y2)`` with
    ``y1 = sqrt(-2 log r1) * cos(2 pi r2)`` and
    ``y2 = sqrt(-2 log r1) * sin(2 pi r2)``; both are standard normal and
    independent, and ``y1**2 + y2**2 = -2 log r1`` exactly.
    Accepts scalars or arrays; inputs must lie strictly in (0, 1).
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if np.any(r1 <= 0.0) or np.any(r1 >= 1.0) or np.any(r2 <= 0.0) or np.any(r2 >= 1.0):
        raise ValueError("Box-Muller inputs must lie strictly inside (0, 1)")
    radius = np.sqrt(-2.0 * np.log(r1))
    angle = 2.0 * np.pi * r2
    y1 = radius * np.cos(angle)
    y2 = radius * np.sin(angle)
    if y1.ndim == 0:
        return float(y1), float(y2)
    return y1, y2


# ------------------------------------------------------- death sampling #

def _death_cdf(table: LifeTable, x: int) -> np.ndarray:
    probs = death_distribution(table, x)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return cdf


def _years_from_uniforms(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1) + 1


def sample_death_year(table: LifeTable, x: int, rng: RngStream) -> int:
    """Draw one curtate death year (1-based) by inverting the death CDF.

    Consumes exactly one uniform from the stream.
    """
    cdf = _death_cdf(table, x)
    u = rng.uniform(1)
    return int(_years_from_uniforms(cdf, u)[0])


def sample_death_years(table: LifeTable, x: int, n: int, rng: RngStream) -> np.ndarray:
    """Draw ``n`` curtate death years in one batch (``n`` uniforms)."""
    if n <= 0:
        raise ValueError("n must be positive")
    cdf = _death_cdf(table, x)
    return _years_from_uniforms(cdf, rng.uniform(n))


def sample_death_times(table: LifeTable, x: int, n: int, rng: RngStream) -> np.ndarray:
    """Draw ``n`` fractional death times under within-year uniformity.

    Each time is a curtate death year minus an independent uniform(0,1)
    fraction, so the values are continuous and positive.  Consumes ``n``
    uniforms for the years, then ``n`` for the fractions.
    """
    years = sample_death_years(table, x, n, rng).astype(float)
    return years - rng.uniform(n)


@dataclass(frozen=True)
class SimSummary:
    """Summary of a batch of simulated death years.

    ``histogram`` maps death year to count; ``mode`` is the smallest year
    attaining the maximum count; ``max_year`` is the largest observed year
    and is what the volatility measure normalises by.
    """

    n: int
    mode: int
    max_year: int
    mean: float
    histogram: dict[int, int] = field(repr=False)

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("summary needs n > 0")
        if sum(self.histogram.values()) != self.n:
            raise ValueError("histogram counts must sum to n")
        if self.mode not in self.histogram or self.max_year not in self.histogram:
            raise ValueError("mode and max_year must be observed years")


def _summary_from_histogram(hist: dict[int, int]) -> SimSummary:
    years = sorted(hist)
    n = sum(hist[y] for y in years)
    top = max(hist[y] for y in years)
    mode = min(y for y in years if hist[y] == top)
    mean = sum(y * hist[y] for y in years) / n
    return SimSummary(n=n, mode=mode, max_year=years[-1], mean=mean, histogram=hist)


def simulate_deaths(table: LifeTable, x: int, n: int, rng: RngStream) -> SimSummary:
    """Simulate ``n`` death years for a life aged ``x`` and summarise them."""
    years = sample_death_years(table, x, n, rng)
    values, counts = np.unique(years, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    return _summary_from_histogram(hist)


def merge_summaries(parts: list[tuple[int, SimSummary]]) -> SimSummary:
    """Merge per-stream summaries into one, canonically by ascending id.

    ``parts`` holds ``(stream_id, summary)`` pairs; ids must be distinct.
    Histograms add, and the merged mode/max/mean are recomputed from the
    combined histogram, so the result does not depend on the order in which
    the parts are supplied.
    """
    if not parts:
        raise ValueError("nothing to merge")
    ids = [sid for sid, _ in parts]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate stream ids in merge: {sorted(ids)}")
    hist: dict[int, int] = {}
    for _, summary in sorted(parts, key=lambda p: p[0]):
        for year, count in summary.histogram.items():
            hist[year] = hist.get(year, 0) + count
    return _summary_from_histogram(hist)


def vole(e_complete: float, max_death: float) -> float:
    """Volatility of life expectancy: ``1 - e_complete / max_death``.

    ``e_complete`` is the expected remaining lifetime and ``max_death`` the
    longest death year observed in simulation; the ratio of the two is the
    fraction of the worst case already expected, and one minus it lies in
    ``[0, 1)`` with 0 meaning a fully predictable lifetime.
    """
    if not (max_death > 0.0):
        raise ValueError("max_death must be positive")
    if not (0.0 < e_complete <= max_death):
        raise ValueError(
            f"need 0 < e_complete <= max_death, got {e_complete!r} vs {max_death!r}"
        )
    return 1.0 - e_complete / max_death


# ------------------------------------------------------------ GBM paths #

@dataclass(frozen=True)
class GbmParams:
    """Geometric Brownian motion: drift ``rate``, volatility ``sigma``, start ``s0``."""

    rate: float
    sigma: float
    s0: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        if self.s0 <= 0.0:
            raise ValueError("s0 must be positive")


def _lognormal_jump(params: GbmParams, s, dt: float, eps):
    """Exact lognormal update of value ``s`` over ``dt`` with shock ``eps``."""
    drift = (params.rate - 0.5 * params.sigma**2) * dt
    shock = params.sigma * math.sqrt(dt) * eps
    return s * np.exp(drift + shock)


def gbm_step(params: GbmParams, dt: float, eps) -> float | np.ndarray:
    """Advance the index from ``params.s0`` by ``dt`` via the exact update.

    ``s0 * exp((rate - sigma**2/2) dt + sigma sqrt(dt) eps)`` with ``eps``
    standard normal.  Exact in distribution for any ``dt``, so one long jump
    and many short ones agree in law.  ``eps`` may be a scalar or an array
    of shocks.
    """
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    out = _lognormal_jump(params, params.s0, dt, np.asarray(eps, dtype=float))
    return float(out) if out.ndim == 0 else out


def gbm_terminal(params: GbmParams, t: float, rng: RngStream) -> float:
    """One exact sample of the index at horizon ``t``; consumes one normal."""
    return float(gbm_terminal_samples(params, t, 1, rng)[0])


def gbm_terminal_samples(
    params: GbmParams, t: float, n: int, rng: RngStream, n_steps: int = 1
) -> np.ndarray:
    """Terminal index values at horizon ``t`` for ``n`` paths.

    Each path takes ``n_steps`` equal exact sub-steps.  Draw order is
    step-major: all paths' step-1 shocks, then all step-2 shocks, and so
    on, one normal per path per step.  ``n_steps = 1`` is the single-jump
    sampler, identical in law to any finer partition.
    """
    if t < 0.0:
        raise ValueError("horizon t must be >= 0")
    if n <= 0 or n_steps <= 0:
        raise ValueError("n and n_steps must be positive")
    s = np.full(n, params.s0)
    if t == 0.0:
        return s
    dt = t / n_steps
    for _ in range(n_steps):
        s = _lognormal_jump(params, s, dt, rng.normals(n))
    return s


def randomized_horizon_payoff(
    params: GbmParams,
    table: LifeTable,
    x: int,
    payoff: Callable[[float, int], float],
    n: int,
    rng: RngStream,
) -> tuple[float, float]:
    """Monte Carlo mean of a payoff evaluated at a mortality-random horizon.

    For each of ``n`` paths a death year ``T`` is drawn from the life table,
    the index is jumped to ``S_T`` in one exact GBM step, and
    ``payoff(S_T, T)`` is recorded; ``payoff`` is called once per path with
    scalar arguments.  Draw order: ``n`` death years first, then ``n``
    normals.  Returns the sample mean and its standard error.
    """
    if n < 2:
        raise ValueError("n must be >= 2 to estimate a standard error")
    years = sample_death_years(table, x, n, rng)
    eps = rng.normals(n)
    drift = (params.rate - 0.5 * params.sigma**2) * years
    shock = params.sigma * np.sqrt(years.astype(float)) * eps
    s_t = params.s0 * np.exp(drift + shock)
    values = np.array([float(payoff(s, int(year))) for s, year in zip(s_t, years)])
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n))
    return mean, stderr
