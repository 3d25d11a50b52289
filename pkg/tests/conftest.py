import numpy as np
import pytest

from longevity.lifetable import LifeTable, sample_table
from longevity.settlement import CashflowSeries

# Eight published settlement deals: purchase price at period 0, escalating
# premiums while the insured survives, a benefit in the death year, and the
# per-period return each one locks in.
PURCHASE = -958_446.94
PREMIUMS = [739_049.07, 802_335.09, 841_135.87, 887_803.04,
            939_592.16, 1_002_515.01, 1_050_658.79]
BENEFITS = [3_786_986.96, 4_606_486.64, 5_439_049.34, 6_329_574.37,
            7_268_100.10, 8_264_355.17, 9_000_000.00, 9_000_000.00]
EXPECTED_IRR = [2.951170, 0.840403, 0.427465, 0.267200,
                0.185144, 0.136855, 0.096556, 0.050508]


def deal_flows(k: int) -> list[float]:
    """Cash flows of deal ``k`` (1-based): death at the end of period ``k``."""
    return [PURCHASE] + [-p for p in PREMIUMS[:k - 1]] + [BENEFITS[k - 1]]


@pytest.fixture(scope="session")
def irr_ladder() -> list[tuple[CashflowSeries, float]]:
    return [(CashflowSeries(deal_flows(k)), EXPECTED_IRR[k - 1]) for k in range(1, 9)]


@pytest.fixture(scope="session")
def bundled_table() -> LifeTable:
    return sample_table()


@pytest.fixture
def tiny_table() -> LifeTable:
    # hand-checkable: half die each year, nobody passes the third
    return LifeTable(90, [0.5, 0.5, 1.0])


@pytest.fixture
def table_csv(tmp_path):
    """Write a small valid life-table CSV and return its path."""
    def write(qx, start_age=90, name="table.csv"):
        path = tmp_path / name
        lines = ["age,qx"] + [f"{start_age + i},{q}" for i, q in enumerate(qx)]
        path.write_text("\n".join(lines) + "\n")
        return path
    return write


@pytest.fixture
def rng_uniform_pairs():
    def draw(n, seed=2024):
        gen = np.random.Generator(np.random.PCG64(seed))
        return gen.random(n), gen.random(n)
    return draw
