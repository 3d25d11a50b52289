"""Life-settlement valuation: present value, durations, and realized IRR.

A settlement position pays premiums each period while the insured lives and
collects the death benefit when they die.  With level premium ``p``, benefit
``b``, flat per-period rate ``r`` and discount factor ``a = 1/(1+r)``, death
at the end of period ``t`` is worth

    lsv(t) = a**t * (p/r + b) - p/r

which is the closed form of ``-p * (a + ... + a**t) + b * a**t``.  The value
falls monotonically in ``t``: each extra year of survival costs a premium
and defers the benefit.

Two duration notions are carried side by side.  The life-expectancy
duration is the elasticity ``t * lsv'(t) / lsv(t)``, measuring percentage
value change per percentage shift in expected time to death.  The Macaulay
duration follows the source convention of this toolkit's formulas verbatim:
the premium leg enters with positive sign and the benefit leg negative, so
benefit-dominated positions get negative durations (the textbook convention
is the negation of this one).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import DataError, NumericalError

__all__ = [
    "FlatPolicy",
    "PolicySchedule",
    "CashflowSeries",
    "lsv",
    "lsv_schedule",
    "lsv_dt",
    "le_duration",
    "macaulay_duration",
    "duration_derivative",
    "critical_time",
    "irr",
    "npv",
    "load_cashflows",
    "load_schedule",
]


@dataclass(frozen=True)
class FlatPolicy:
    """Level-premium policy: premium ``p >= 0``, benefit ``b > 0``, rate ``r > 0``."""

    p: float
    b: float
    r: float

    def __post_init__(self):
        if self.p < 0.0:
            raise ValueError("premium must be >= 0")
        if self.b <= 0.0:
            raise ValueError("death benefit must be positive")
        if self.r <= 0.0:
            raise ValueError("discount rate must be positive")

    @property
    def a(self) -> float:
        """One-period discount factor ``1/(1+r)``."""
        return 1.0 / (1.0 + self.r)


@dataclass(frozen=True)
class PolicySchedule:
    """Per-period premium and benefit vectors (period 1 first) at flat rate ``r``."""

    premiums: np.ndarray
    benefits: np.ndarray
    r: float

    def __post_init__(self):
        prem = np.asarray(self.premiums, dtype=float)
        ben = np.asarray(self.benefits, dtype=float)
        object.__setattr__(self, "premiums", prem)
        object.__setattr__(self, "benefits", ben)
        if prem.ndim != 1 or prem.size == 0 or prem.shape != ben.shape:
            raise ValueError("premium and benefit vectors must be 1-D, non-empty, same length")
        if np.any(prem < 0.0) or np.any(ben < 0.0):
            raise ValueError("schedule entries must be >= 0")
        if self.r <= 0.0:
            raise ValueError("discount rate must be positive")

    def __len__(self) -> int:
        return int(self.premiums.size)


@dataclass(frozen=True)
class CashflowSeries:
    """Signed flows indexed by period, ``flows[0]`` at time zero."""

    flows: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.flows, dtype=float)
        object.__setattr__(self, "flows", f)
        if f.ndim != 1 or f.size < 2:
            raise ValueError("need a 1-D series of at least two flows")
        if not (np.any(f > 0.0) and np.any(f < 0.0)):
            raise DataError("cash flows must contain at least one inflow and one outflow")


# --------------------------------------------------------------- values #

def lsv(pol: FlatPolicy, t: float) -> float:
    """Settlement value given death at the end of period ``t``.

    ``t = 0`` means immediate benefit with no premiums paid, so the value is
    ``b``.  Integer ``t`` is the contractual case; real ``t`` is accepted for
    the calculus helpers built on top.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    a = pol.a
    return a**t * (pol.p / pol.r + pol.b) - pol.p / pol.r


def lsv_schedule(s: PolicySchedule, t: int) -> float:
    """Schedule value for death in period ``t``: premiums ``1..t`` paid, benefit ``t`` collected."""
    if not (1 <= t <= len(s)) or int(t) != t:
        raise ValueError(f"t must be an integer in [1, {len(s)}], got {t!r}")
    t = int(t)
    a = 1.0 / (1.0 + s.r)
    disc = a ** np.arange(1, t + 1)
    return float(-np.dot(s.premiums[:t], disc) + s.benefits[t - 1] * disc[-1])


def lsv_dt(pol: FlatPolicy, t: float) -> float:
    """Sensitivity of the settlement value to the time of death.

    ``(p/r + b) * a**t * ln(a)``, the derivative of ``lsv`` in continuous
    ``t``.  Always negative: living longer always erodes the position.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    a = pol.a
    return (pol.p / pol.r + pol.b) * a**t * math.log(a)


def le_duration(pol: FlatPolicy, t: float) -> float:
    """Life-expectancy duration: elasticity of value to time of death.

    ``t * lsv_dt(t) / lsv(t)``.  Negative whenever the position has positive
    value, which is the healthy configuration; a positive reading flags a
    position whose value is already under water.
    """
    value = lsv(pol, t)
    if value == 0.0:
        raise ValueError(f"settlement value is zero at t={t}; duration undefined")
    return t * lsv_dt(pol, t) / value


# ------------------------------------------------------------ durations #

def _c_constant(pol: FlatPolicy) -> float:
    a = pol.a
    return a * pol.p / (a - 1.0) ** 2


def macaulay_duration(pol: FlatPolicy, t: int) -> float:
    """Macaulay duration of the death-at-``t`` position, source sign convention.

    Numerator: time-weighted premium leg minus ``t`` times the discounted
    benefit, divided by the position's present value ``lsv(t)``.  Closed form
    of the time-weighted premium sum:
    ``p/(a-1)**2 * (t*a**(t+2) - (t+1)*a**(t+1) + a)``.
    Note the sign convention: with no premiums the result is ``-t``, the
    negation of the textbook duration of a single inflow at ``t``.
    """
    if t < 1 or int(t) != t:
        raise ValueError("t must be an integer >= 1")
    t = int(t)
    value = lsv(pol, t)
    if value == 0.0:
        raise ValueError(f"present value is zero at t={t}; duration undefined")
    a = pol.a
    c = _c_constant(pol)
    numerator = t * a**t * (c * (a - 1.0) - pol.b) - a**t * c + c
    return numerator / value


def duration_derivative(pol: FlatPolicy, t: float) -> float:
    """Derivative of the Macaulay duration numerator in ``t``, over fixed value.

    Differentiates the closed-form numerator with the present value held
    constant, matching the construction of :func:`critical_time`:
    ``(a**t / P) * (t*K*ln(a) + K - C*ln(a))`` with ``C = a*p/(a-1)**2`` and
    ``K = C*(a-1) - b``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    value = lsv(pol, t)
    if value == 0.0:
        raise ValueError(f"present value is zero at t={t}; derivative undefined")
    a = pol.a
    c = _c_constant(pol)
    k = c * (a - 1.0) - pol.b
    log_a = math.log(a)
    return a**t * (t * k * log_a + k - c * log_a) / value


def critical_time(pol: FlatPolicy) -> float:
    """Time of death at which the duration's sensitivity crosses zero.

    ``t* = -1/ln(a) + a*p / (a*p*(a-1) - b*(a-1)**2)``.  At ``t*`` the braced
    factor of :func:`duration_derivative` vanishes.  With no premiums this
    collapses to ``-1/ln(a)``.
    """
    a = pol.a
    den = a * pol.p * (a - 1.0) - pol.b * (a - 1.0) ** 2
    if den == 0.0:
        raise ValueError("degenerate policy: critical-time denominator is zero")
    return -1.0 / math.log(a) + a * pol.p / den


# ------------------------------------------------------------------ IRR #

def npv(cf: CashflowSeries, rate: float) -> float:
    """Net present value of the series at a per-period ``rate > -1``."""
    if rate <= -1.0:
        raise ValueError("rate must exceed -1")
    x = 1.0 / (1.0 + rate)
    # Horner on ascending powers of the discount factor
    return float(np.polyval(cf.flows[::-1], x))


def _npv_derivative(cf: CashflowSeries, rate: float) -> float:
    periods = np.arange(cf.flows.size, dtype=float)
    x = 1.0 + rate
    return float(np.sum(-periods * cf.flows / x ** (periods + 1.0)))


def irr(cf: CashflowSeries) -> float:
    """Internal rate of return: the rate making the NPV zero.

    The rate axis is scanned with ``1 + r`` doubling from ``1e-3`` (that is,
    from ``r = -0.999``) up to ``1e6``; the first sign-change bracket is
    solved by bisection and polished with Newton steps, which makes the
    root returned the smallest one on that documented scan.  Convergence is
    accepted when ``|NPV| <= 1e-6 * sum(|flows|)``.
    """
    scale = float(np.sum(np.abs(cf.flows)))
    grid = [1e-3 * 2.0**k for k in range(41)]  # 1+r from 1e-3 past 1e6
    rates = [g - 1.0 for g in grid if g - 1.0 < 1e6]
    rates.append(1e6)
    values = [npv(cf, r) for r in rates]
    root = None
    for (r_lo, v_lo), (r_hi, v_hi) in zip(zip(rates, values), zip(rates[1:], values[1:])):
        if v_lo == 0.0:
            root = r_lo
            break
        if v_lo * v_hi < 0.0:
            root = float(brentq(lambda r: npv(cf, r), r_lo, r_hi, xtol=1e-13, rtol=1e-15))
            break
    else:
        if values and values[-1] == 0.0:
            root = rates[-1]
    if root is None:
        raise NumericalError("no IRR found in (-0.999, 1e6) on the bracket scan")
    for _ in range(8):  # Newton polish toward machine precision
        deriv = _npv_derivative(cf, root)
        if deriv == 0.0:
            break
        step = npv(cf, root) / deriv
        if not math.isfinite(step) or abs(step) > 0.5 * (1.0 + abs(root)):
            break
        root -= step
        if abs(step) < 1e-14 * (1.0 + abs(root)):
            break
    if abs(npv(cf, root)) > 1e-6 * scale:
        raise NumericalError(
            f"IRR polish failed: |NPV({root})| = {abs(npv(cf, root)):.3e} "
            f"exceeds 1e-6 * {scale:.3e}"
        )
    return root


# -------------------------------------------------------------- loading #

def load_cashflows(path: str | Path) -> CashflowSeries:
    """Read a cash-flow series from CSV with header ``period,amount``.

    Periods must be non-negative integers, strictly ascending; periods not
    listed are taken as zero flows.
    """
    path = Path(path)
    rows: list[tuple[int, float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != ["period", "amount"]:
            raise DataError(f"{path}: expected header 'period,amount', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                period = int(row[0])
                amount = float(row[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: could not parse {row!r}") from None
            if period < 0:
                raise DataError(f"{path}:{lineno}: period must be >= 0")
            if rows and period <= rows[-1][0]:
                raise DataError(f"{path}:{lineno}: periods must be strictly ascending")
            rows.append((period, amount))
    if len(rows) < 2:
        raise DataError(f"{path}: need at least two flows")
    flows = np.zeros(rows[-1][0] + 1)
    for period, amount in rows:
        flows[period] = amount
    try:
        return CashflowSeries(flows)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def load_schedule(path: str | Path, rate: float) -> PolicySchedule:
    """Read a policy schedule from CSV with header ``period,premium,benefit``.

    Periods must run ``1..T`` consecutively.  The discount rate is not part
    of the file format, so it is supplied alongside the path.
    """
    path = Path(path)
    premiums: list[float] = []
    benefits: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["period", "premium", "benefit"]
        if header is None or [c.strip().lower() for c in header] != expected:
            raise DataError(f"{path}: expected header 'period,premium,benefit', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                period = int(row[0])
                prem = float(row[1])
                ben = float(row[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: could not parse {row!r}") from None
            if period != len(premiums) + 1:
                raise DataError(
                    f"{path}:{lineno}: periods must run 1..T consecutively, got {period}"
                )
            premiums.append(prem)
            benefits.append(ben)
    if not premiums:
        raise DataError(f"{path}: no data rows")
    return PolicySchedule(np.array(premiums), np.array(benefits), rate)
