"""Command-line pipeline: ingest, label, analyze, train, backtest, report,
frontier, audit.

Every artifact embeds the config hash and seed on its first line (CSV) or in a
metadata block (JSON), so identical config + seed reruns are byte-identical.
Exit codes: 0 success, 1 internal error, 2 user/config error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import pipeline, sentiment, svg
from .backtest import WealthCurve, compare_strategies
from .errors import (
    AlignmentError,
    ConfigurationError,
    InsufficientDataError,
    ParseError,
    SentfolioError,
    ValidationError,
)
from .forecast_lstm import LstmConfig, save_checkpoint
from .market_data import (
    FEATURE_NAMES,
    AlignedPanel,
    SplitSpec,
    align_panel,
    load_prices,
    split_chronological,
)
from .portfolio_opt import estimate_moments, frontier_samples, mean_variance_select
from .stats import granger, pearson

USER_ERRORS = (
    ConfigurationError,
    ParseError,
    ValidationError,
    AlignmentError,
    InsufficientDataError,
    FileNotFoundError,
)

REPORT_HEADER = ["Models", "Capital", "fAPV", "BV", "SR", "MDD(%)", "AR(%)"]


@dataclass
class RunConfig:
    assets: list[str]
    data_dir: Path
    out_dir: Path
    sentiment_file: Path | None = None
    lexicon_file: Path | None = None
    audit_file: Path | None = None
    split: SplitSpec = field(default_factory=SplitSpec)
    lstm: LstmConfig = field(default_factory=LstmConfig)
    mc_count: int = 50_000
    mc_seed: int = 0
    cov_window: int = 50
    initial_capital: float = 10_000.0
    max_lag: int = 8
    replicate_seeds: list[int] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.lstm.seed

    def hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def stamp(self) -> str:
        return f"# config={self.hash()} seed={self.seed}"


def load_config(path: str | Path, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text()) or {}
    if "assets" not in raw or not raw["assets"]:
        raise ConfigurationError("config must list assets")
    base = path.parent

    def respath(key):
        if raw.get(key) is None:
            return None
        return (base / raw[key]).resolve()

    split_raw = raw.get("split", {})
    split = SplitSpec(
        train_frac=float(split_raw.get("train", 0.7)),
        val_frac=float(split_raw.get("val", 0.1)),
        test_frac=float(split_raw.get("test", 0.2)),
    )
    lstm_raw = dict(raw.get("lstm", {}))
    if seed_override is not None:
        lstm_raw["seed"] = seed_override
        raw = dict(raw)
        raw.setdefault("lstm", {})
        raw["lstm"] = dict(raw["lstm"], seed=seed_override)
    lstm = LstmConfig(**lstm_raw)
    mc = raw.get("monte_carlo", {})
    cfg = RunConfig(
        assets=[str(a) for a in raw["assets"]],
        data_dir=(base / raw.get("data_dir", ".")).resolve(),
        out_dir=Path(out_override).resolve() if out_override
        else (base / raw.get("out_dir", "out")).resolve(),
        sentiment_file=respath("sentiment_file"),
        lexicon_file=respath("lexicon_file"),
        audit_file=respath("audit_file"),
        split=split,
        lstm=lstm,
        mc_count=int(mc.get("count", 50_000)),
        mc_seed=int(mc.get("seed", 0)),
        cov_window=int(raw.get("cov_window", 50)),
        initial_capital=float(raw.get("initial_capital", 10_000.0)),
        max_lag=int(raw.get("max_lag", 8)),
        replicate_seeds=[int(s) for s in raw.get("replicate_seeds", [])],
        raw=raw,
    )
    if not cfg.data_dir.exists():
        raise ConfigurationError(f"data_dir does not exist: {cfg.data_dir}")
    for p in (cfg.sentiment_file, cfg.lexicon_file, cfg.audit_file):
        if p is not None and not p.exists():
            raise ConfigurationError(f"configured path does not exist: {p}")
    return cfg


# -- artifact persistence ---------------------------------------------------

def _panel_path(cfg: RunConfig) -> Path:
    return cfg.out_dir / "panel.csv"


def write_panel(panel: AlignedPanel, cfg: RunConfig) -> Path:
    path = _panel_path(cfg)
    with open(path, "w", newline="") as fh:
        fh.write(cfg.stamp() + "\n")
        writer = csv.writer(fh)
        header = ["date"] + [f"{a}:{f}" for a in panel.assets for f in FEATURE_NAMES]
        writer.writerow(header)
        mat = panel.feature_matrix()
        for i, d in enumerate(panel.dates):
            writer.writerow([d.isoformat()] + [repr(float(v)) for v in mat[i]])
    return path


def read_panel(cfg: RunConfig) -> AlignedPanel:
    path = _panel_path(cfg)
    if not path.exists():
        raise ConfigurationError(f"panel artifact missing ({path}); run ingest first")
    with open(path) as fh:
        fh.readline()  # stamp
        reader = csv.reader(fh)
        header = next(reader)
        cols = header[1:]
        assets: list[str] = []
        for c in cols:
            a = c.split(":")[0]
            if a not in assets:
                assets.append(a)
        dates = []
        rows = []
        for row in reader:
            dates.append(dt.date.fromisoformat(row[0]))
            rows.append([float(v) for v in row[1:]])
    mat = np.asarray(rows, dtype=float)
    features = {}
    for ai, a in enumerate(assets):
        block = mat[:, ai * len(FEATURE_NAMES) : (ai + 1) * len(FEATURE_NAMES)]
        features[a] = {name: block[:, fi].copy() for fi, name in enumerate(FEATURE_NAMES)}
    return AlignedPanel(dates=dates, assets=assets, features=features)


def build_panel(cfg: RunConfig) -> AlignedPanel:
    series = []
    for asset in cfg.assets:
        path = cfg.data_dir / f"{asset}.csv"
        if not path.exists():
            raise ConfigurationError(f"missing asset file: {path}")
        series.append(load_prices(path, asset_id=asset))
    daily = None
    if cfg.sentiment_file is not None:
        lex = sentiment.Lexicon.from_file(cfg.lexicon_file) if cfg.lexicon_file else None
        records = sentiment.load_sentiment_csv(cfg.sentiment_file, lexicon=lex)
        all_dates = sorted({d for s in series for d in s.dates})
        daily = {}
        for asset in cfg.assets:
            recs = [r for r in records if r.asset_id == asset]
            daily[asset] = sentiment.daily_features(recs, all_dates)
    return align_panel(series, daily)


def _write_csv(path: Path, cfg: RunConfig, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(cfg.stamp() + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- subcommands ------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    panel = build_panel(cfg)
    path = write_panel(panel, cfg)
    print(f"panel: {panel.n_rows} rows x {len(panel.assets)} assets "
          f"({panel.n_features} features) -> {path}")
    return 0


def cmd_label(cfg: RunConfig) -> int:
    if cfg.sentiment_file is None or cfg.lexicon_file is None:
        raise ConfigurationError("label requires sentiment_file and lexicon_file")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    lex = sentiment.Lexicon.from_file(cfg.lexicon_file)
    records = sentiment.load_sentiment_csv(cfg.sentiment_file, lexicon=lex)
    out = cfg.out_dir / "labeled.csv"
    _write_csv(
        out, cfg,
        ["date", "asset", "text", "label", "polarity", "likes", "retweets", "comments"],
        [[r.date.isoformat(), r.asset_id, r.text, r.label, repr(r.polarity),
          r.likes, r.retweets, r.comments] for r in records],
    )
    print(f"labeled {len(records)} records -> {out}")
    return 0


def _weekly_stats_and_returns(cfg: RunConfig, panel: AlignedPanel, asset: str,
                              records) -> tuple[list, list]:
    """Per-week sentiment aggregates paired with the week's total return."""
    weeks = sentiment.weekly_windows(
        [r for r in records if r.asset_id == asset], panel.dates[0], panel.dates[-1]
    )
    prices = np.asarray(panel.features[asset]["adj_close"])
    weekly_returns = []
    kept = []
    for w in weeks:
        w_end = w.window_start + dt.timedelta(days=6)
        idx = [i for i, d in enumerate(panel.dates) if w.window_start <= d <= w_end]
        if len(idx) < 2:
            continue
        weekly_returns.append(float(prices[idx[-1]] / prices[idx[0]] - 1.0))
        kept.append(w)
    return kept, weekly_returns


def cmd_analyze(cfg: RunConfig) -> int:
    panel = read_panel(cfg)
    if cfg.sentiment_file is None:
        raise ConfigurationError("analyze requires sentiment_file")
    lex = sentiment.Lexicon.from_file(cfg.lexicon_file) if cfg.lexicon_file else None
    records = sentiment.load_sentiment_csv(cfg.sentiment_file, lexicon=lex)

    corr_rows = []
    for asset in panel.assets:
        weeks, weekly_returns = _weekly_stats_and_returns(cfg, panel, asset, records)
        row = [asset]
        for attr in ("mean_pol", "max_pol", "median_pol", "ratio"):
            series = [getattr(w, attr) for w in weeks]
            try:
                row.append(f"{pearson(series, weekly_returns).statistic:.4f}")
            except SentfolioError:
                row.append("nan")
        corr_rows.append(row)
    corr_path = cfg.out_dir / "correlation.csv"
    _write_csv(corr_path, cfg, ["asset", "mean", "max", "median", "ratio"], corr_rows)

    granger_rows = []
    for asset in panel.assets:
        prices = np.asarray(panel.features[asset]["adj_close"])
        returns = prices[1:] / prices[:-1] - 1.0
        ratio = np.asarray(panel.features[asset]["ratio"])[1:]
        report = granger(returns, ratio, cfg.max_lag)
        for entry in report.lags:
            granger_rows.append([
                asset, entry.lag, f"{entry.result.statistic:.6f}",
                entry.result.df[0], entry.result.df[1],
                f"{entry.result.p_value:.6f}",
                1 if entry.result.reject_at_005 else 0,
            ])
    granger_path = cfg.out_dir / "granger.csv"
    _write_csv(granger_path, cfg,
               ["asset", "lag", "F", "df1", "df2", "p", "significant"], granger_rows)
    print(f"wrote {corr_path} and {granger_path}")
    return 0


def _checkpoint_paths(cfg: RunConfig) -> dict[str, Path]:
    return {
        pipeline.STRATEGY_LSTM: cfg.out_dir / "lstm.json",
        pipeline.STRATEGY_LSTM_SENTIMENT: cfg.out_dir / "lstm_sentiment.json",
    }


def cmd_train(cfg: RunConfig) -> int:
    panel = read_panel(cfg)
    paths = _checkpoint_paths(cfg)
    variants = {
        pipeline.STRATEGY_LSTM: pipeline.neutralize_sentiment(panel),
        pipeline.STRATEGY_LSTM_SENTIMENT: panel,
    }
    for name, variant_panel in variants.items():
        model, report, _ = pipeline.train_forecaster(variant_panel, cfg.split, cfg.lstm)
        save_checkpoint(model, paths[name])
        loss_path = cfg.out_dir / f"loss_{paths[name].stem}.csv"
        _write_csv(loss_path, cfg, ["epoch", "train_mse", "val_mse"],
                   [[e, repr(tr), repr(va)] for e, (tr, va)
                    in enumerate(zip(report.train_mse, report.val_mse))])
        print(f"{name}: best epoch {report.best_epoch} "
              f"val MSE {report.val_mse[report.best_epoch]:.3e} -> {paths[name]}")
    return 0


def _parse_down_market(arg: str | None):
    if arg is None:
        return None
    try:
        lo, hi = arg.split(",")
        return (dt.date.fromisoformat(lo.strip()), dt.date.fromisoformat(hi.strip()))
    except ValueError as exc:
        raise ConfigurationError(f"bad --down-market value {arg!r}") from exc


def cmd_backtest(cfg: RunConfig, down_market: str | None = None) -> int:
    panel = read_panel(cfg)
    window = _parse_down_market(down_market)
    result = pipeline.run_pipeline(
        panel,
        split=cfg.split,
        lstm_config=cfg.lstm,
        mc_count=cfg.mc_count,
        mc_seed=cfg.mc_seed,
        cov_window=cfg.cov_window,
        initial_capital=cfg.initial_capital,
        test_window=window,
    )
    curves_path = cfg.out_dir / "wealth_curves.csv"
    names = list(result.curves)
    dates = result.curves[names[0]].dates
    rows = [[d.isoformat()] + [repr(result.curves[n].values[i]) for n in names]
            for i, d in enumerate(dates)]
    _write_csv(curves_path, cfg, ["date"] + names, rows)

    if len(cfg.replicate_seeds) >= 2:
        rep_rows = []
        for seed in cfg.replicate_seeds:
            seeded = LstmConfig(**dict(cfg.lstm.__dict__, seed=seed))
            rep = pipeline.run_pipeline(
                panel,
                split=cfg.split,
                lstm_config=seeded,
                mc_count=cfg.mc_count,
                mc_seed=cfg.mc_seed + seed,
                cov_window=cfg.cov_window,
                initial_capital=cfg.initial_capital,
                strategies=(pipeline.STRATEGY_BUY_HOLD, pipeline.STRATEGY_LSTM,
                            pipeline.STRATEGY_LSTM_SENTIMENT),
                test_window=window,
            )
            rep_rows.append([
                seed,
                repr(rep.curves[pipeline.STRATEGY_LSTM_SENTIMENT].final_capital),
                repr(rep.curves[pipeline.STRATEGY_LSTM].final_capital),
            ])
        _write_csv(cfg.out_dir / "replicates.csv", cfg,
                   ["seed", "lstm_sentiment_final", "lstm_final"], rep_rows)
    print(f"wrote {curves_path}")
    return 0


def _read_artifact_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise ConfigurationError(f"artifact missing ({path}); run earlier stages first")
    with open(path) as fh:
        fh.readline()
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def cmd_report(cfg: RunConfig) -> int:
    header, rows = _read_artifact_csv(cfg.out_dir / "wealth_curves.csv")
    names = header[1:]
    dates = [dt.date.fromisoformat(r[0]) for r in rows]
    curves = {
        name: WealthCurve(
            dates=dates,
            values=[float(r[i + 1]) for r in rows],
            weights=[],
        )
        for i, name in enumerate(names)
    }
    replicate_capitals = None
    rep_path = cfg.out_dir / "replicates.csv"
    if rep_path.exists():
        _, rep_rows = _read_artifact_csv(rep_path)
        replicate_capitals = (
            [float(r[1]) for r in rep_rows],
            [float(r[2]) for r in rep_rows],
        )
    reports, ttest = compare_strategies(
        curves, bh_name=pipeline.STRATEGY_BUY_HOLD,
        replicate_capitals=replicate_capitals,
    )
    table_rows = [
        [r.strategy, f"{r.final_capital:.2f}", f"{r.fapv:.2f}", f"{r.bv:.2f}",
         f"{r.sharpe_vs_bh:.2f}", f"{100 * r.mdd:.2f}",
         f"{100 * r.annualized_return:.2f}"]
        for r in reports
    ]
    report_path = cfg.out_dir / "report.csv"
    _write_csv(report_path, cfg, REPORT_HEADER, table_rows)

    payload = {
        "config": cfg.hash(),
        "seed": cfg.seed,
        "strategies": {
            r.strategy: {
                "capital": r.final_capital, "fapv": r.fapv, "bv": r.bv,
                "sr": r.sharpe_vs_bh, "mdd_pct": 100 * r.mdd,
                "ar_pct": 100 * r.annualized_return,
            } for r in reports
        },
    }
    if ttest is not None:
        payload["paired_t_test"] = {
            "t": ttest.statistic, "df": ttest.df[0], "p": ttest.p_value,
            "reject_at_005": ttest.reject_at_005,
        }
    (cfg.out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    svg.line_chart({n: c.values for n, c in curves.items()},
                   "Portfolio value over the test period", cfg.out_dir / "wealth.svg")
    print(f"wrote {report_path}")
    return 0


def cmd_frontier(cfg: RunConfig) -> int:
    panel = read_panel(cfg)
    train_panel, _, _ = split_chronological(panel, cfg.split)
    prices = train_panel.price_matrix()
    moments = estimate_moments(prices[1:] / prices[:-1] - 1.0)
    _, exp_ret, vol, sharpe = frontier_samples(moments, cfg.mc_count, cfg.mc_seed)
    best = mean_variance_select(moments, cfg.mc_count, cfg.mc_seed)
    path = cfg.out_dir / "frontier.csv"
    _write_csv(path, cfg, ["exp_return", "volatility", "sharpe"],
               [[repr(float(r)), repr(float(v)), repr(float(s))]
                for r, v, s in zip(exp_ret, vol, sharpe)])
    svg.scatter_chart(
        vol.tolist(), exp_ret.tolist(), "Random portfolios (volatility vs return)",
        cfg.out_dir / "frontier.svg",
        highlight=(best.volatility, best.exp_return),
    )
    print(f"wrote {path}")
    return 0


def cmd_audit(cfg: RunConfig) -> int:
    if cfg.audit_file is None or cfg.lexicon_file is None:
        raise ConfigurationError("audit requires audit_file and lexicon_file")
    lex = sentiment.Lexicon.from_file(cfg.lexicon_file)
    sample = []
    with open(cfg.audit_file, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            sample.append((row["text"], row["label"].strip()))
    matrix, accuracy = sentiment.audit_labels(sample, lex)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "confusion.csv"
    _write_csv(path, cfg, ["true_label"] + list(sentiment.LABELS),
               [[lab] + [repr(float(v)) for v in matrix[i]]
                for i, lab in enumerate(sentiment.LABELS)])
    print(f"accuracy {accuracy:.4f} over {len(sample)} samples -> {path}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "label": cmd_label,
    "analyze": cmd_analyze,
    "train": cmd_train,
    "backtest": cmd_backtest,
    "report": cmd_report,
    "frontier": cmd_frontier,
    "audit": cmd_audit,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sentfolio",
        description="Sentiment-aware portfolio selection pipeline",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override model seed")
    parser.add_argument("--out", default=None, help="override output directory")
    parser.add_argument("--down-market", default=None, metavar="FROM,TO",
                        help="restrict evaluation to a date sub-window")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "backtest":
            return cmd_backtest(cfg, down_market=args.down_market)
        if args.down_market is not None:
            raise ConfigurationError("--down-market only applies to backtest")
        return COMMANDS[args.command](cfg)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SentfolioError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
