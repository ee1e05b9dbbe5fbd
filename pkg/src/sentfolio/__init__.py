"""Sentiment-aware portfolio selection toolkit.

Submodules:
    market_data    price ingestion, returns, panel alignment, splits
    sentiment      lexicon scoring and daily/weekly aggregation
    stats          correlation, Granger causality, paired t-test, t/F tails
    forecast_lstm  from-scratch stacked LSTM price forecaster
    portfolio_opt  Monte-Carlo mean-variance selection and benchmark strategies
    backtest       wealth recursion and performance metrics
    pipeline       end-to-end orchestration
    cli            command-line entry points
"""

__version__ = "0.1.0"
