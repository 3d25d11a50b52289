"""End-to-end acceptance checks, one per shipped guarantee.

Each test exercises one headline behaviour at its stated tolerance and
prints a single ``[ n/14] PASS`` or ``FAIL`` line (visible under
``pytest -s`` and in failure reports), so the whole board can be read at
a glance.  Tolerances are asserted as stated, never loosened here.
"""

import math
import subprocess
import sys
import time

import numpy as np
from scipy.stats import spearmanr

from longevity.fdm import (
    Mesh1D,
    TwoPointBVP,
    layer_exact,
    solve_centered,
    solve_fitted,
    solve_upwind,
)
from longevity.lifetable import lifetime_variance
from longevity.markov import TwoStateModel
from longevity.pricing import price_american, price_european
from longevity.settlement import irr
from longevity.simulate import (
    GbmParams,
    RngStream,
    box_muller,
    gbm_terminal_samples,
    sample_death_times,
)
from longevity.stable import StableParams, alpha_age_profile, estimate_alpha, log_char_function
from oracles import binomial_american_put, bs_price

TOTAL = 14


def report(index: int, ok: bool, text: str) -> None:
    label = "PASS" if ok else "FAIL"
    print(f"[{index:2d}/{TOTAL}] {label} {text}", flush=True)
    assert ok, f"acceptance check {index} failed: {text}"


def test_c01_settlement_ladder_internal_rates(irr_ladder):
    start = time.perf_counter()
    worst = max(abs(irr(flows) * 100.0 - expected * 100.0)
                for flows, expected in irr_ladder)
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-4 and elapsed < 1.0,
           f"eight deal IRRs within 0.0001 percentage points "
           f"(worst {worst:.2e} pp, {elapsed:.2f}s)")


def test_c02_fitted_scheme_is_exact_on_the_layer_problem():
    start = time.perf_counter()
    sigma = 0.01
    mesh = Mesh1D(0.0, 1.0, 101)
    bvp = TwoPointBVP(
        sigma=lambda x: np.full_like(x, sigma),
        mu=lambda x: np.full_like(x, 2.0),
        b_coef=lambda x: np.zeros_like(x),
        f=lambda x: np.zeros_like(x),
        beta0=1.0,
        beta1=0.0,
    )
    err = float(np.max(np.abs(solve_fitted(bvp, mesh) - layer_exact(sigma, mesh.points()))))
    elapsed = time.perf_counter() - start
    report(2, err <= 1e-10 and elapsed < 1.0,
           f"fitted solve reproduces the layer solution at mesh points "
           f"(max error {err:.2e}, {elapsed:.2f}s)")


def test_c03_centered_scheme_parity_limit_and_resolved_accuracy():
    # vanishing diffusion on an odd interval count: node values collapse
    # onto the alternating parity pattern and the oscillation flag fires
    mesh = Mesh1D(0.0, 1.0, 12)
    sol = solve_centered(1e-6, mesh)
    parity = (np.power(-1.0, np.arange(mesh.j_count)) + 1.0) / 2.0
    parity_err = float(np.max(np.abs(sol.values - parity)))
    flagged = sol.oscillatory
    # resolved regime: no flag, second-order decay
    errs = []
    for j in (100, 200):
        m = Mesh1D(0.0, 1.0, j + 1)
        s = solve_centered(1.0, m)
        errs.append(float(np.max(np.abs(s.values - layer_exact(1.0, m.points())))))
        assert not s.oscillatory
    ratio = errs[0] / errs[1]
    report(3, parity_err <= 1e-3 and flagged and ratio >= 3.4,
           f"centered scheme oscillates into the parity pattern when starved "
           f"(deviation {parity_err:.2e}, flagged) and is second order when "
           f"resolved (halving ratio {ratio:.2f})")


def test_c04_upwind_first_node_error_persists():
    mesh = Mesh1D(0.0, 1.0, 1001)
    sigma = mesh.h  # mesh ratio one
    sol = solve_upwind(sigma, mesh)
    signed = float(sol.values[1] - layer_exact(sigma, mesh.points()[1]))
    target = 1.0 / 3.0 - math.exp(-2.0)
    report(4, abs(signed - target) <= 1e-3,
           f"upwind overshoot at the first node stays {target:.6f} "
           f"(got {signed:.6f}) at mesh ratio one")


def manufactured_problem(scale: float):
    mu = lambda x: 6000.0 * (1.0 + 0.2 * np.sin(3.0 * x))
    sg = lambda x: scale * (0.5 + x * x)
    bb = lambda x: -(1.0 + x)
    star = lambda x: np.sin(np.pi * x) + 1.0 - x * x
    d1 = lambda x: np.pi * np.cos(np.pi * x) - 2.0 * x
    d2 = lambda x: -np.pi**2 * np.sin(np.pi * x) - 2.0
    f = lambda x: sg(x) * d2(x) + mu(x) * d1(x) + bb(x) * star(x)
    bvp = TwoPointBVP(sigma=sg, mu=mu, b_coef=bb, f=f, beta0=1.0, beta1=0.0)
    return bvp, star


def test_c05_fitted_convergence_is_uniform_in_the_diffusion():
    sizes = (64, 128, 256)
    constants = []
    for scale in (1.0, 1e-2, 1e-4, 1e-6):
        bvp, star = manufactured_problem(scale)
        worst = 0.0
        for j in sizes:
            mesh = Mesh1D(0.0, 1.0, j + 1)
            err = float(np.max(np.abs(solve_fitted(bvp, mesh) - star(mesh.points()))))
            worst = max(worst, err * j)
        constants.append(worst)
    spread = (max(constants) - min(constants)) / min(constants)
    report(5, spread < 0.25,
           f"first-order constant varies {spread:.1%} while the diffusion "
           f"scale sweeps six decades (limit 25%)")


def test_c06_european_prices_match_the_closed_form():
    start = time.perf_counter()
    strike, rate, vol, expiry = 100.0, 0.05, 0.2, 1.0
    call = price_european("call", strike, rate, vol, expiry)
    put = price_european("put", strike, rate, vol, expiry)
    worst_rel = max(
        abs(res.value_at(strike) - bs_price(kind, strike, strike, rate, vol, expiry))
        / bs_price(kind, strike, strike, rate, vol, expiry)
        for kind, res in (("call", call), ("put", put)))
    parity = max(
        abs(call.value_at(s) - put.value_at(s) - (s - strike * math.exp(-rate * expiry)))
        for s in (80.0, 100.0, 120.0))
    elapsed = time.perf_counter() - start
    report(6, worst_rel <= 1e-3 and parity <= 2e-3 * strike and elapsed < 5.0,
           f"European prices within 0.1% of the closed form "
           f"(worst {worst_rel:.2%}) and put-call parity holds to 0.2% "
           f"({elapsed:.2f}s)")


def test_c07_american_prices_are_consistent():
    strike, rate, vol, expiry = 100.0, 0.05, 0.2, 1.0
    put = price_american("put", strike, rate, vol, expiry)
    tree = binomial_american_put(strike, strike, rate, vol, expiry, steps=1000)
    put_rel = abs(put.value_at(strike) - tree) / tree
    intrinsic = np.maximum(strike - put.grid, 0.0)
    dominated = bool(np.all(put.values >= intrinsic - 1e-10))
    amer_call = price_american("call", strike, rate, vol, expiry)
    euro_call = price_european("call", strike, rate, vol, expiry)
    call_rel = (abs(amer_call.value_at(strike) - euro_call.value_at(strike))
                / euro_call.value_at(strike))
    report(7, put_rel <= 5e-3 and dominated and call_rel <= 2e-3,
           f"American put within 0.5% of a 1000-step binomial "
           f"({put_rel:.2%}), dominates intrinsic value at every node, and "
           f"the American call collapses to the European ({call_rel:.2%})")


def test_c08_exponential_lifetimes_from_inverse_sampling():
    rate = 0.08
    model = TwoStateModel(rate)
    times = model.sample_lifetime(RngStream(2026).uniform(10**6))
    mean_rel = abs(float(np.mean(times)) - 1.0 / rate) * rate
    var_rel = abs(float(np.var(times)) - 1.0 / rate**2) * rate**2
    grid = (0.5, 1.0, 2.0, 5.0, 10.0)
    memoryless = max(abs(model.survival(t + s) - model.survival(t) * model.survival(s))
                     for t in grid for s in grid)
    report(8, mean_rel <= 5e-3 and var_rel <= 2e-2 and memoryless <= 1e-12,
           f"a million inverse-CDF lifetimes match the exponential moments "
           f"(mean off {mean_rel:.2%}, variance off {var_rel:.2%}) and "
           f"survival is memoryless to 1e-12")


def test_c09_simulated_lifetime_variance_matches_the_table(bundled_table):
    x = 70
    times = sample_death_times(bundled_table, x, 10**6, RngStream(11))
    want = lifetime_variance(bundled_table, x, mode="corrected")
    mc_rel = abs(float(np.var(times)) - want) / want
    gap = (lifetime_variance(bundled_table, x, mode="corrected")
           - lifetime_variance(bundled_table, x, mode="as_written"))
    report(9, mc_rel <= 2e-2 and abs(gap + 0.25) <= 1e-12,
           f"Monte Carlo death-time variance within 2% of the closed form "
           f"({mc_rel:.2%}) and the centring discrepancy is one quarter")


def test_c10_box_muller_moments():
    rng = RngStream(77)
    y1, y2 = box_muller(rng.uniform(10**6), rng.uniform(10**6))
    z = np.concatenate([y1, y2])
    mean = float(np.mean(z))
    var = float(np.var(z))
    kurt = float(np.mean((z - mean) ** 4) / var**2 - 3.0)
    report(10, abs(mean) <= 5e-3 and abs(var - 1.0) <= 1e-2 and abs(kurt) <= 5e-2,
           f"a million Box-Muller pairs look standard normal "
           f"(mean {mean:+.4f}, variance {var:.4f}, excess kurtosis {kurt:+.4f})")


def test_c11_gbm_single_jump_agrees_with_substepping():
    params = GbmParams(rate=0.05, sigma=0.2, s0=100.0)
    n, t = 10**5, 1.0
    one = gbm_terminal_samples(params, t, n, RngStream(21))
    fine = gbm_terminal_samples(params, t, n, RngStream(22), n_steps=64)
    se = math.sqrt(np.var(one) / n + np.var(fine) / n)
    mean_gap = abs(float(np.mean(one) - np.mean(fine)))
    disc = math.exp(-params.rate * t) * one
    mart_gap = abs(float(np.mean(disc)) - params.s0)
    mart_se = float(np.std(disc)) / math.sqrt(n)
    report(11, mean_gap <= 3.0 * se and mart_gap <= 3.0 * mart_se,
           f"one exact jump and 64 sub-steps agree in mean "
           f"({mean_gap / se:.2f} standard errors) and the discounted index "
           f"is a martingale ({mart_gap / mart_se:.2f} standard errors)")


def test_c12_stability_index_recovery():
    normal = estimate_alpha(RngStream(2).normals(10**5))
    cauchy = estimate_alpha(np.tan(np.pi * (RngStream(3).uniform(10**5) - 0.5)))
    ts = np.linspace(-8.0, 8.0, 321)
    flat = log_char_function(StableParams(2.0, 0.0), ts)
    skewed = log_char_function(StableParams(2.0, 0.9), ts)
    beta_gap = float(np.max(np.abs(flat - skewed)))
    report(12, 1.95 <= normal <= 2.0 and 0.95 <= cauchy <= 1.05 and beta_gap <= 1e-15,
           f"index estimates land at {normal:.3f} for normal and "
           f"{cauchy:.3f} for Cauchy samples, and skew drops out at the "
           f"Gaussian endpoint (gap {beta_gap:.1e})")


def test_c13_tail_index_falls_with_age(bundled_table):
    profile = alpha_age_profile(bundled_table, list(range(60, 96, 5)),
                                20_000, RngStream(1234))
    ages = [age for age, _ in profile]
    alphas = [a for _, a in profile]
    rho = float(spearmanr(ages, alphas)[0])
    drop = alphas[0] - alphas[-1]
    report(13, rho < 0.0 and drop >= 0.2,
           f"tail index decreases with age on the bundled table "
           f"(rank correlation {rho:+.3f}, drop {drop:+.3f} from 60 to 95)")


SEEDED_COMMANDS = (
    ("simulate", "--age", "70", "--n", "2000", "--seed", "7"),
    ("simulate", "--age", "70", "--n", "2000", "--seed", "7", "--csv"),
    ("vole", "--age", "70", "--n", "2000", "--seed", "5"),
    ("alpha-profile", "--ages", "90..95", "--step", "5", "--n", "1000", "--seed", "3"),
    ("price-mortality-option", "--age", "70", "--premium", "100",
     "--benefit", "1000", "--policy-rate", "0.05", "--rate", "0.05",
     "--vole-sigma", "0.1", "--n", "500", "--seed", "9", "--grid", "50,50"),
)


def test_c14_every_seeded_command_is_byte_deterministic():
    ok = True
    for argv in SEEDED_COMMANDS:
        runs = [subprocess.run([sys.executable, "-m", "longevity", *argv],
                               capture_output=True, timeout=300)
                for _ in range(2)]
        ok = ok and runs[0].returncode == 0 and runs[1].returncode == 0 \
            and runs[0].stdout == runs[1].stdout and len(runs[0].stdout) > 0
    report(14, ok,
           f"{len(SEEDED_COMMANDS)} seeded invocations, run twice each, "
           f"produce byte-identical output")
