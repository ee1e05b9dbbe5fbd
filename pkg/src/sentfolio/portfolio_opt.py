"""Monte-Carlo mean-variance selection and the benchmark allocation strategies.

Portfolio weights live on the probability simplex (long-only, fully
invested).  The optimizer draws random portfolios uniformly on the simplex,
scores each by Sharpe ratio and keeps the best.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMarketError, DimensionError, InsufficientDataError, ValidationError

WEIGHT_TOL = 1e-9
VOL_FLOOR = 1e-12
DEFAULT_SAMPLE_COUNT = 50_000
DEFAULT_COV_WINDOW = 50


@dataclass(frozen=True)
class Weights:
    values: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("weights must be a non-empty vector")
        if (arr < -WEIGHT_TOL).any():
            raise ValidationError(f"negative weight in {self.values}")
        if abs(arr.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {arr.sum()}, expected 1")

    @classmethod
    def from_array(cls, arr) -> "Weights":
        return cls(values=tuple(float(v) for v in arr))

    @classmethod
    def equal(cls, n: int) -> "Weights":
        return cls(values=tuple(1.0 / n for _ in range(n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass
class Moments:
    """Per-period expected returns and covariance of the asset universe."""

    mu: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mu.size
        if self.cov.shape != (n, n):
            raise DimensionError(f"cov shape {self.cov.shape} != ({n}, {n})")
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ValidationError("covariance matrix not symmetric")
        eigvals = np.linalg.eigvalsh(self.cov)
        if eigvals.min() < -1e-10:
            raise ValidationError(f"covariance not PSD (min eigenvalue {eigvals.min()})")


@dataclass
class FrontierSample:
    weights: Weights
    exp_return: float
    volatility: float
    sharpe: float


def sample_simplex(n_assets: int, count: int, seed: int) -> np.ndarray:
    """(count, n_assets) weights uniform on the simplex: normalized
    i.i.d. unit-exponential draws. Deterministic per seed."""
    if n_assets < 1 or count < 1:
        raise DimensionError("n_assets and count must be >= 1")
    rng = np.random.default_rng(seed)
    draws = rng.exponential(scale=1.0, size=(count, n_assets))
    return draws / draws.sum(axis=1, keepdims=True)


def estimate_moments(returns: np.ndarray) -> Moments:
    """Sample mean and (n-1)-denominator covariance from a returns window of
    shape (n_periods, n_assets)."""
    returns = np.asarray(returns, dtype=float)
    if returns.ndim != 2:
        raise DimensionError("returns window must be 2-D")
    if returns.shape[0] < 2:
        raise InsufficientDataError("need at least 2 return rows")
    mu = returns.mean(axis=0)
    centered = returns - mu
    cov = centered.T @ centered / (returns.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    return Moments(mu=mu, cov=cov)


def portfolio_stats(w: Weights, m: Moments, risk_free: float = 0.0) -> FrontierSample:
    arr = w.as_array()
    if arr.size != m.mu.size:
        raise DimensionError("weights and moments dimensions differ")
    exp_return = float(arr @ m.mu)
    variance = float(arr @ m.cov @ arr)
    volatility = math.sqrt(max(variance, 0.0))
    sharpe = 0.0 if volatility < VOL_FLOOR else (exp_return - risk_free) / volatility
    return FrontierSample(weights=w, exp_return=exp_return, volatility=volatility, sharpe=sharpe)


def frontier_samples(
    m: Moments,
    count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = 0,
    risk_free: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized stats for `count` random portfolios.

    Returns (weights (count, n), exp_return, volatility, sharpe) arrays.
    """
    W = sample_simplex(m.mu.size, count, seed)
    exp_ret = W @ m.mu
    variance = np.einsum("ij,jk,ik->i", W, m.cov, W)
    vol = np.sqrt(np.maximum(variance, 0.0))
    sharpe = np.where(vol < VOL_FLOOR, 0.0, (exp_ret - risk_free) / np.maximum(vol, VOL_FLOOR))
    return W, exp_ret, vol, sharpe


def mean_variance_select(
    m: Moments,
    count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = 0,
    risk_free: float = 0.0,
    workers: int = 1,
) -> FrontierSample:
    """Sharpe-maximal portfolio among `count` simplex samples.

    Ties break to the lowest sample index, and the argmax reduction is
    index-ordered, so the result is identical for any `workers` value.
    """
    W, exp_ret, vol, sharpe = frontier_samples(m, count, seed, risk_free)
    if (vol < VOL_FLOOR).all():
        raise DegenerateMarketError("all sampled portfolios have zero volatility")
    if workers <= 1:
        best = int(np.argmax(sharpe))
    else:
        # chunked argmax with index-ordered reduction; same answer as above
        bounds = np.linspace(0, count, workers + 1, dtype=int)
        best = 0
        best_val = -np.inf
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo:
                continue
            local = int(np.argmax(sharpe[lo:hi])) + int(lo)
            if sharpe[local] > best_val:
                best_val = sharpe[local]
                best = local
    return FrontierSample(
        weights=Weights.from_array(W[best]),
        exp_return=float(exp_ret[best]),
        volatility=float(vol[best]),
        sharpe=float(sharpe[best]),
    )


# -- allocation strategies --------------------------------------------------

STRATEGY_NAMES = ("BAH", "Rebalancing", "BestStock", "MeanVariancePredictive")


def strategy_weights(kind: str, **kwargs) -> list[Weights]:
    """Dispatch to the per-strategy weight-stream builders by name."""
    if kind == "BAH":
        return bah_weights(kwargs["gross_returns"])
    if kind == "Rebalancing":
        return rebalancing_weights(kwargs["n_assets"], kwargs["n_periods"])
    if kind == "BestStock":
        return best_stock_weights(kwargs["gross_returns"])
    if kind == "MeanVariancePredictive":
        return predictive_weights(
            kwargs["predicted_prices"],
            kwargs["last_closes"],
            kwargs["trailing_returns"],
            count=kwargs.get("count", DEFAULT_SAMPLE_COUNT),
            seed=kwargs.get("seed", 0),
            risk_free=kwargs.get("risk_free", 0.0),
        )
    raise ValidationError(f"unknown strategy kind {kind!r}")


def bah_weights(gross_returns: np.ndarray) -> list[Weights]:
    """Equal weights at t=0, then drifting with prices (never traded)."""
    T, n = gross_returns.shape
    w = np.full(n, 1.0 / n)
    out = [Weights.from_array(w)]
    for t in range(T - 1):
        w = w * gross_returns[t]
        w = w / w.sum()
        out.append(Weights.from_array(w))
    return out


def rebalancing_weights(n_assets: int, n_periods: int) -> list[Weights]:
    """Equal weights restored every period."""
    eq = Weights.equal(n_assets)
    return [eq] * n_periods


def best_stock_weights(gross_returns: np.ndarray) -> list[Weights]:
    """All capital on the best cumulative performer so far; equal weights on
    day 0 (no history), ties to the lowest index."""
    T, n = gross_returns.shape
    out = [Weights.equal(n)]
    cum = np.ones(n)
    for t in range(T - 1):
        cum = cum * gross_returns[t]
        w = np.zeros(n)
        w[int(np.argmax(cum))] = 1.0
        out.append(Weights.from_array(w))
    return out


def predictive_weights(
    predicted_prices: np.ndarray,
    last_closes: np.ndarray,
    trailing_returns: list[np.ndarray],
    count: int = DEFAULT_SAMPLE_COUNT,
    seed: int = 0,
    risk_free: float = 0.0,
) -> list[Weights]:
    """Daily mean-variance portfolios from predicted next-day returns.

    mu for day t = predicted_price / last close - 1; cov from that day's
    trailing simple-return window.  The Monte-Carlo seed advances by day index
    so runs are deterministic.
    """
    T = predicted_prices.shape[0]
    if last_closes.shape != predicted_prices.shape or len(trailing_returns) != T:
        raise DimensionError("predictive inputs misaligned")
    out = []
    for t in range(T):
        mu = predicted_prices[t] / last_closes[t] - 1.0
        m = Moments(mu=mu, cov=estimate_moments(trailing_returns[t]).cov)
        try:
            sample = mean_variance_select(m, count=count, seed=seed + t, risk_free=risk_free)
            out.append(sample.weights)
        except DegenerateMarketError:
            out.append(Weights.equal(mu.size))
    return out
