"""Longevity-risk valuation toolkit.

The pieces, bottom up: discrete life-table actuarial math
(:mod:`.lifetable`), a constant-intensity two-state mortality model
(:mod:`.markov`), reproducible mortality and index simulation
(:mod:`.simulate`), a quantile-based tail-index fit (:mod:`.stable`),
life-settlement valuation with durations and IRR (:mod:`.settlement`),
and an exponentially fitted finite-difference engine with option pricing
on top (:mod:`.fdm`, :mod:`.pricing`).  The ``longevity`` console script
in :mod:`.cli` fronts all of it.
"""

from .errors import DataError, NumericalError
from .fdm import (
    Mesh1D,
    TwoPointBVP,
    fitting_factor,
    layer_exact,
    solve_centered,
    solve_fitted,
    solve_upwind,
)
from .lifetable import (
    LifeTable,
    MortalityAssumptions,
    apply_assumptions,
    complete_expectation,
    death_distribution,
    lifetime_variance,
    load_table,
    sample_table,
    survival_probability,
)
from .markov import TwoStateModel, rate_from_mean
from .pricing import (
    MortalityOptionValue,
    PriceResult,
    price_american,
    price_european,
    price_mortality_option,
)
from .settlement import (
    CashflowSeries,
    FlatPolicy,
    PolicySchedule,
    critical_time,
    irr,
    le_duration,
    load_cashflows,
    load_schedule,
    lsv,
    lsv_schedule,
    macaulay_duration,
    npv,
)
from .simulate import (
    GbmParams,
    RngStream,
    box_muller,
    gbm_step,
    gbm_terminal,
    randomized_horizon_payoff,
    sample_death_year,
    simulate_deaths,
    vole,
)
from .stable import StableParams, alpha_age_profile, estimate_alpha

__all__ = [
    "DataError",
    "NumericalError",
    "Mesh1D",
    "TwoPointBVP",
    "fitting_factor",
    "layer_exact",
    "solve_centered",
    "solve_fitted",
    "solve_upwind",
    "LifeTable",
    "MortalityAssumptions",
    "apply_assumptions",
    "complete_expectation",
    "death_distribution",
    "lifetime_variance",
    "load_table",
    "sample_table",
    "survival_probability",
    "TwoStateModel",
    "rate_from_mean",
    "MortalityOptionValue",
    "PriceResult",
    "price_american",
    "price_european",
    "price_mortality_option",
    "CashflowSeries",
    "FlatPolicy",
    "PolicySchedule",
    "critical_time",
    "irr",
    "le_duration",
    "load_cashflows",
    "load_schedule",
    "lsv",
    "lsv_schedule",
    "macaulay_duration",
    "npv",
    "GbmParams",
    "RngStream",
    "box_muller",
    "gbm_step",
    "gbm_terminal",
    "randomized_horizon_payoff",
    "sample_death_year",
    "simulate_deaths",
    "vole",
    "StableParams",
    "alpha_age_profile",
    "estimate_alpha",
]
