import datetime as dt

import numpy as np
import pytest

from sentfolio.market_data import PriceSeries, align_panel
from sentfolio.sentiment import Lexicon


def make_prices(asset_id, closes, start=dt.date(2020, 1, 1), volumes=None):
    dates = [start + dt.timedelta(days=i) for i in range(len(closes))]
    volumes = volumes or [100.0] * len(closes)
    return PriceSeries(asset_id=asset_id, dates=dates,
                       adj_close=list(closes), volume=list(volumes))


@pytest.fixture
def lexicon():
    return Lexicon(valences={"good": 0.5, "great": 0.8, "bad": -0.5, "awful": -0.8})


@pytest.fixture
def five_asset_panel():
    """5 assets x 20 shared dates, deterministic prices, no sentiment."""
    rng = np.random.default_rng(7)
    series = []
    for i in range(5):
        closes = (10.0 * (i + 1) * np.exp(np.cumsum(rng.normal(0, 0.01, 20)))).tolist()
        series.append(make_prices(f"A{i}", closes))
    return align_panel(series)
