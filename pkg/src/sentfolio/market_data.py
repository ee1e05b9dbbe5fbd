"""Daily price ingestion, return computation, panel alignment and splitting."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    ConfigurationError,
    InsufficientDataError,
    ParseError,
    ValidationError,
)

# Per-asset feature column order used everywhere downstream.
FEATURE_NAMES = ("adj_close", "likes", "retweets", "comments", "volume", "ratio")

NEUTRAL_SENTIMENT = {"likes": 0.0, "retweets": 0.0, "comments": 0.0, "ratio": 1.0}


@dataclass
class PriceSeries:
    """Daily adjusted-close and volume history for one asset."""

    asset_id: str
    dates: list[dt.date]
    adj_close: list[float]
    volume: list[float]

    def __post_init__(self):
        if not (len(self.dates) == len(self.adj_close) == len(self.volume)):
            raise ValidationError(f"{self.asset_id}: column lengths differ")
        for i in range(1, len(self.dates)):
            if self.dates[i] <= self.dates[i - 1]:
                raise ValidationError(
                    f"{self.asset_id}: dates not strictly increasing at {self.dates[i]}"
                )
        for d, p in zip(self.dates, self.adj_close):
            if not (p > 0) or not math.isfinite(p):
                raise ValidationError(f"{self.asset_id}: non-positive adj_close on {d}")
        for d, v in zip(self.dates, self.volume):
            if v < 0:
                raise ValidationError(f"{self.asset_id}: negative volume on {d}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class ReturnSeries:
    """Gross (p_t / p_{t-1}) and simple returns derived from a PriceSeries."""

    asset_id: str
    dates: list[dt.date]
    gross: list[float]
    simple: list[float]


@dataclass
class SplitSpec:
    """Chronological train/validation/test proportions."""

    train_frac: float = 0.7
    val_frac: float = 0.1
    test_frac: float = 0.2

    def __post_init__(self):
        for f in (self.train_frac, self.val_frac, self.test_frac):
            if f < 0.0 or f >= 1.0:
                raise ConfigurationError(f"split fraction {f} outside [0,1)")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-12:
            raise ConfigurationError(f"split fractions sum to {total}, expected 1")


@dataclass
class AlignedPanel:
    """Inner-joined daily panel: prices, volume and sentiment features per asset.

    ``features[asset]`` maps each name in FEATURE_NAMES to a float array over
    ``dates``.  With 5 assets the stacked feature width is 30.
    """

    dates: list[dt.date]
    assets: list[str]
    features: dict[str, dict[str, np.ndarray]] = field(repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    @property
    def n_features(self) -> int:
        return len(self.assets) * len(FEATURE_NAMES)

    def feature_matrix(self) -> np.ndarray:
        """Rows = dates, columns = per-asset blocks in FEATURE_NAMES order."""
        cols = []
        for asset in self.assets:
            for name in FEATURE_NAMES:
                cols.append(np.asarray(self.features[asset][name], dtype=float))
        return np.column_stack(cols)

    def price_matrix(self) -> np.ndarray:
        """(n_rows, n_assets) adjusted closes."""
        return np.column_stack(
            [np.asarray(self.features[a]["adj_close"], dtype=float) for a in self.assets]
        )

    def price_column_indices(self) -> list[int]:
        """Column positions of adj_close inside feature_matrix()."""
        step = len(FEATURE_NAMES)
        return [i * step for i in range(len(self.assets))]

    def slice(self, start: int, stop: int) -> "AlignedPanel":
        feats = {
            a: {name: np.asarray(arr)[start:stop].copy() for name, arr in cols.items()}
            for a, cols in self.features.items()
        }
        return AlignedPanel(dates=self.dates[start:stop], assets=list(self.assets), features=feats)


def load_prices(path: str | Path, asset_id: str | None = None) -> PriceSeries:
    """Parse one per-asset CSV with columns date, adj_close, volume.

    Rows are sorted by date; duplicate dates and non-positive prices are
    rejected with the offending line named.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"price file not found: {path}")
    asset = asset_id or path.stem
    rows: list[tuple[dt.date, float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"date", "adj_close", "volume"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ParseError(f"{path}: header must contain {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                date = dt.date.fromisoformat(row["date"].strip())
                price = float(row["adj_close"])
                volume = float(row["volume"])
            except (ValueError, AttributeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed row ({exc})") from exc
            if not price > 0:
                raise ValidationError(f"{path}:{lineno}: non-positive adj_close {price}")
            if volume < 0:
                raise ValidationError(f"{path}:{lineno}: negative volume {volume}")
            rows.append((date, price, volume))
    rows.sort(key=lambda r: r[0])
    for i in range(1, len(rows)):
        if rows[i][0] == rows[i - 1][0]:
            raise ValidationError(f"{path}: duplicate date {rows[i][0]}")
    return PriceSeries(
        asset_id=asset,
        dates=[r[0] for r in rows],
        adj_close=[r[1] for r in rows],
        volume=[r[2] for r in rows],
    )


def write_prices(series: PriceSeries, path: str | Path) -> None:
    """Inverse of load_prices; used for round-trip checks and fixtures."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "adj_close", "volume"])
        for d, p, v in zip(series.dates, series.adj_close, series.volume):
            writer.writerow([d.isoformat(), repr(p), repr(v)])


def compute_returns(prices: PriceSeries) -> ReturnSeries:
    """Gross returns p_t/p_{t-1}; one fewer row than the price series."""
    if len(prices) < 2:
        raise InsufficientDataError(
            f"{prices.asset_id}: need at least 2 rows to compute returns"
        )
    gross = [
        prices.adj_close[i + 1] / prices.adj_close[i] for i in range(len(prices) - 1)
    ]
    return ReturnSeries(
        asset_id=prices.asset_id,
        dates=prices.dates[1:],
        gross=gross,
        simple=[g - 1.0 for g in gross],
    )


def align_panel(
    prices: list[PriceSeries],
    daily_sentiment: dict[str, dict[dt.date, dict[str, float]]] | None = None,
) -> AlignedPanel:
    """Inner-join price series on shared dates and attach daily sentiment rows.

    ``daily_sentiment[asset][date]`` may carry any of likes/retweets/comments/
    ratio; missing assets, dates or keys fall back to neutral defaults
    (engagements 0, ratio 1.0).
    """
    if not prices:
        raise AlignmentError("no price series supplied")
    for p in prices:
        if len(p) == 0:
            raise AlignmentError(f"{p.asset_id}: empty price series")
    common = set(prices[0].dates)
    for p in prices[1:]:
        common &= set(p.dates)
    if not common:
        raise AlignmentError("no dates shared by all assets")
    dates = sorted(common)
    daily_sentiment = daily_sentiment or {}

    features: dict[str, dict[str, np.ndarray]] = {}
    for p in prices:
        index = {d: i for i, d in enumerate(p.dates)}
        rows = [index[d] for d in dates]
        sent = daily_sentiment.get(p.asset_id, {})
        cols: dict[str, list[float]] = {name: [] for name in FEATURE_NAMES}
        for d, i in zip(dates, rows):
            cols["adj_close"].append(p.adj_close[i])
            cols["volume"].append(p.volume[i])
            day = sent.get(d, {})
            for name, default in NEUTRAL_SENTIMENT.items():
                cols[name].append(float(day.get(name, default)))
        features[p.asset_id] = {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    return AlignedPanel(dates=dates, assets=[p.asset_id for p in prices], features=features)


def split_chronological(
    panel: AlignedPanel, spec: SplitSpec
) -> tuple[AlignedPanel, AlignedPanel, AlignedPanel]:
    """Contiguous train -> validation -> test segments.

    Train and validation take floor(frac * N) rows; the remainder goes to test.
    """
    n = panel.n_rows
    if n == 0:
        raise InsufficientDataError("empty panel")
    n_train = int(math.floor(spec.train_frac * n))
    n_val = int(math.floor(spec.val_frac * n))
    n_test = n - n_train - n_val
    if n_train == 0 or n_val == 0 or n_test == 0:
        raise ConfigurationError(
            f"split ({spec.train_frac}, {spec.val_frac}, {spec.test_frac}) "
            f"of {n} rows yields an empty segment ({n_train}, {n_val}, {n_test})"
        )
    return (
        panel.slice(0, n_train),
        panel.slice(n_train, n_train + n_val),
        panel.slice(n_train + n_val, n),
    )
