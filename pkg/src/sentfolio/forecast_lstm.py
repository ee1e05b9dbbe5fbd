"""Stacked LSTM price forecaster: 6-day feature windows to next-day prices.

Forward, backward (BPTT) and Adam are implemented directly on numpy arrays so
gradients can be verified against central finite differences.  Gate layout in
each fused weight matrix is [input, forget, cell, output].
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, DivergenceError, InsufficientDataError
from .market_data import AlignedPanel

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_FORMAT = 1


@dataclass
class LstmConfig:
    input_width: int = 30
    hidden_size: int = 13
    num_layers: int = 3
    n_outputs: int = 5
    learning_rate: float = 0.004
    window: int = 6
    batch_size: int = 32
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        for name in ("input_width", "hidden_size", "num_layers", "n_outputs",
                     "window", "batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise DimensionError(f"{name} must be >= 1")
        if not self.learning_rate > 0:
            raise DimensionError("learning_rate must be positive")


@dataclass
class TrainReport:
    train_mse: list[float]
    val_mse: list[float]
    best_epoch: int
    wall_time: float

    def __post_init__(self):
        if self.val_mse:
            assert self.val_mse[self.best_epoch] == min(self.val_mse)


class MinMaxScaler:
    """Per-feature [0,1] scaling; constant features map to 0 and back exactly."""

    def __init__(self):
        self.min_: np.ndarray | None = None
        self.span_: np.ndarray | None = None

    @property
    def fitted(self) -> bool:
        return self.min_ is not None

    def fit(self, X: np.ndarray) -> "MinMaxScaler":
        X = np.asarray(X, dtype=float)
        self.min_ = X.min(axis=0)
        span = X.max(axis=0) - self.min_
        span[span < 1e-12] = 1.0
        self.span_ = span
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise DimensionError("scaler not fitted")
        return (np.asarray(X, dtype=float) - self.min_) / self.span_

    def inverse(self, X: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise DimensionError("scaler not fitted")
        return np.asarray(X, dtype=float) * self.span_ + self.min_

    def subset(self, columns: list[int]) -> "MinMaxScaler":
        out = MinMaxScaler()
        out.min_ = self.min_[columns].copy()
        out.span_ = self.span_[columns].copy()
        return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class LstmModel:
    """Joint multi-asset forecaster; one network maps the stacked feature
    window to all asset prices at once."""

    def __init__(self, config: LstmConfig):
        self.config = config
        self.scaler = MinMaxScaler()
        self.target_scaler: MinMaxScaler | None = None
        self.target_columns: list[int] = []
        rng = np.random.default_rng(config.seed)
        H = config.hidden_size
        bound = 1.0 / np.sqrt(H)
        self.W: list[np.ndarray] = []
        self.U: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        in_dim = config.input_width
        for _ in range(config.num_layers):
            self.W.append(rng.uniform(-bound, bound, size=(in_dim, 4 * H)))
            self.U.append(rng.uniform(-bound, bound, size=(H, 4 * H)))
            bias = np.zeros(4 * H)
            bias[H : 2 * H] = 1.0  # forget-gate bias
            self.b.append(bias)
            in_dim = H
        self.W_out = rng.uniform(-bound, bound, size=(H, config.n_outputs))
        self.b_out = np.zeros(config.n_outputs)
        self._adam_m = [np.zeros_like(p) for p in self.parameters()]
        self._adam_v = [np.zeros_like(p) for p in self.parameters()]
        self._adam_t = 0

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        out = []
        for l in range(self.config.num_layers):
            out.extend([self.W[l], self.U[l], self.b[l]])
        out.extend([self.W_out, self.b_out])
        return out

    def set_parameters(self, params: list[np.ndarray]) -> None:
        for dst, src in zip(self.parameters(), params):
            dst[...] = src

    def fit_scaler(self, train_features: np.ndarray, target_columns: list[int]) -> None:
        """Fit min/max on the training split only; never refit afterwards."""
        self.scaler.fit(train_features)
        self.target_columns = list(target_columns)
        self.target_scaler = self.scaler.subset(self.target_columns)

    # -- forward / backward -------------------------------------------------

    def _forward_scaled(self, X: np.ndarray, want_cache: bool = False):
        """X: (B, T, F) scaled. Returns (B, n_outputs) scaled predictions."""
        cfg = self.config
        if X.ndim != 3 or X.shape[2] != cfg.input_width:
            raise DimensionError(f"expected (B, T, {cfg.input_width}), got {X.shape}")
        B, T, _ = X.shape
        H = cfg.hidden_size
        caches = []
        inp = X
        for l in range(cfg.num_layers):
            W, U, b = self.W[l], self.U[l], self.b[l]
            h = np.zeros((B, H))
            c = np.zeros((B, H))
            cache = {k: np.empty((T, B, H)) for k in
                     ("i", "f", "g", "o", "c", "tc", "h_prev", "c_prev")}
            cache["x"] = np.transpose(inp, (1, 0, 2)).copy()
            hs = np.empty((B, T, H))
            for t in range(T):
                z = inp[:, t, :] @ W + h @ U + b
                i = _sigmoid(z[:, :H])
                f = _sigmoid(z[:, H : 2 * H])
                g = np.tanh(z[:, 2 * H : 3 * H])
                o = _sigmoid(z[:, 3 * H :])
                cache["h_prev"][t] = h
                cache["c_prev"][t] = c
                c = f * c + i * g
                tc = np.tanh(c)
                h = o * tc
                cache["i"][t], cache["f"][t] = i, f
                cache["g"][t], cache["o"][t] = g, o
                cache["c"][t], cache["tc"][t] = c, tc
                hs[:, t, :] = h
            caches.append(cache)
            inp = hs
        h_last = inp[:, -1, :]
        y = h_last @ self.W_out + self.b_out
        if want_cache:
            return y, (caches, h_last)
        return y

    def _backward(self, dY: np.ndarray, cache) -> list[np.ndarray]:
        """Gradients in parameters() order, given dLoss/dY (B, n_outputs)."""
        cfg = self.config
        caches, h_last = cache
        H = cfg.hidden_size
        T = caches[0]["i"].shape[0]
        B = dY.shape[0]
        dW_out = h_last.T @ dY
        db_out = dY.sum(axis=0)
        # dh_seq[t] = gradient wrt this layer's hidden output at step t
        dh_seq = np.zeros((T, B, H))
        dh_seq[-1] = dY @ self.W_out.T
        grads_layers: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        for l in range(cfg.num_layers - 1, -1, -1):
            cc = caches[l]
            W, U = self.W[l], self.U[l]
            in_dim = W.shape[0]
            dW = np.zeros_like(W)
            dU = np.zeros_like(U)
            db = np.zeros_like(self.b[l])
            dx_seq = np.zeros((T, B, in_dim))
            dh_next = np.zeros((B, H))
            dc_next = np.zeros((B, H))
            for t in range(T - 1, -1, -1):
                dh = dh_seq[t] + dh_next
                i, f = cc["i"][t], cc["f"][t]
                g, o = cc["g"][t], cc["o"][t]
                tc = cc["tc"][t]
                do = dh * tc * o * (1.0 - o)
                dc = dh * o * (1.0 - tc * tc) + dc_next
                di = dc * g * i * (1.0 - i)
                dg = dc * i * (1.0 - g * g)
                df = dc * cc["c_prev"][t] * f * (1.0 - f)
                dz = np.concatenate([di, df, dg, do], axis=1)
                x_t = cc["x"][t]
                dW += x_t.T @ dz
                dU += cc["h_prev"][t].T @ dz
                db += dz.sum(axis=0)
                dh_next = dz @ U.T
                dc_next = dc * f
                dx_seq[t] = dz @ W.T
            grads_layers.append((dW, dU, db))
            dh_seq = dx_seq  # becomes the lower layer's output gradient
        grads: list[np.ndarray] = []
        for dW, dU, db in reversed(grads_layers):
            grads.extend([dW, dU, db])
        grads.extend([dW_out, db_out])
        return grads

    def loss_and_grads(self, X_scaled: np.ndarray, Y_scaled: np.ndarray):
        y, cache = self._forward_scaled(X_scaled, want_cache=True)
        err = y - Y_scaled
        loss = float(np.mean(err * err))
        dY = 2.0 * err / err.size
        return loss, self._backward(dY, cache)

    def loss(self, X_scaled: np.ndarray, Y_scaled: np.ndarray) -> float:
        y = self._forward_scaled(X_scaled)
        return float(np.mean((y - Y_scaled) ** 2))

    # -- public API ---------------------------------------------------------

    def scale_inputs(self, X: np.ndarray) -> np.ndarray:
        B, T, F = X.shape
        return self.scaler.transform(X.reshape(B * T, F)).reshape(B, T, F)

    def forward(self, window: np.ndarray) -> np.ndarray:
        """One raw 6x30 window (or a batch) to unscaled next-day prices."""
        single = window.ndim == 2
        X = window[None, ...] if single else window
        if X.shape[1] != self.config.window:
            raise DimensionError(
                f"expected {self.config.window} timesteps, got {X.shape[1]}"
            )
        y_scaled = self._forward_scaled(self.scale_inputs(np.asarray(X, dtype=float)))
        y = self.target_scaler.inverse(y_scaled)
        return y[0] if single else y

    def adam_step(self, grads: list[np.ndarray]) -> None:
        self._adam_t += 1
        lr = self.config.learning_rate
        t = self._adam_t
        for p, g, m, v in zip(self.parameters(), grads, self._adam_m, self._adam_v):
            m[...] = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * g
            v[...] = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * g * g
            m_hat = m / (1.0 - ADAM_BETA1**t)
            v_hat = v / (1.0 - ADAM_BETA2**t)
            p -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def make_windows(panel: AlignedPanel, window: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """Sliding stride-1 windows: inputs (N, window, F) raw features, targets
    (N, n_assets) raw prices at the row following each window."""
    feats = panel.feature_matrix()
    prices = panel.price_matrix()
    n = feats.shape[0]
    if n < window + 1:
        raise InsufficientDataError(f"need >= {window + 1} rows, have {n}")
    count = n - window
    X = np.stack([feats[k : k + window] for k in range(count)])
    Y = np.stack([prices[k + window] for k in range(count)])
    return X, Y


def train(
    model: LstmModel,
    train_windows: tuple[np.ndarray, np.ndarray],
    val_windows: tuple[np.ndarray, np.ndarray],
    config: LstmConfig | None = None,
) -> TrainReport:
    """Mini-batch Adam on scaled-space MSE; keeps the best-validation weights.

    Bit-reproducible for a fixed config seed: batch order comes from a
    dedicated Generator and all reductions are index-ordered.
    """
    cfg = config or model.config
    X_tr, Y_tr = train_windows
    X_va, Y_va = val_windows
    if X_tr.shape[0] == 0 or X_va.shape[0] == 0:
        raise InsufficientDataError("empty train or validation window set")
    if not model.scaler.fitted:
        raise DimensionError("fit_scaler must run before train")
    Xs_tr = model.scale_inputs(X_tr)
    Ys_tr = model.target_scaler.transform(Y_tr)
    Xs_va = model.scale_inputs(X_va)
    Ys_va = model.target_scaler.transform(Y_va)

    rng = np.random.default_rng(cfg.seed + 1)
    start = time.perf_counter()
    train_mse: list[float] = []
    val_mse: list[float] = []
    best_epoch = 0
    best_val = np.inf
    best_params = [p.copy() for p in model.parameters()]
    n = Xs_tr.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            loss, grads = model.loss_and_grads(Xs_tr[idx], Ys_tr[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}")
            model.adam_step(grads)
        tr = model.loss(Xs_tr, Ys_tr)
        va = model.loss(Xs_va, Ys_va)
        if not (np.isfinite(tr) and np.isfinite(va)):
            raise DivergenceError(f"non-finite loss at epoch {epoch}")
        train_mse.append(tr)
        val_mse.append(va)
        if va < best_val:
            best_val = va
            best_epoch = epoch
            best_params = [p.copy() for p in model.parameters()]
    model.set_parameters(best_params)
    return TrainReport(
        train_mse=train_mse,
        val_mse=val_mse,
        best_epoch=best_epoch,
        wall_time=time.perf_counter() - start,
    )


def gradient_check(
    model: LstmModel,
    window: tuple[np.ndarray, np.ndarray],
    probe_count: int = 50,
    seed: int = 0,
    step: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients
    over randomly probed parameter entries of a single window's loss."""
    if probe_count < 1:
        raise ValueError("probe_count must be >= 1")
    X, Y = window
    if X.ndim == 2:
        X = X[None, ...]
        Y = Y[None, ...]
    Xs = model.scale_inputs(np.asarray(X, dtype=float))
    Ys = model.target_scaler.transform(np.asarray(Y, dtype=float))
    _, grads = model.loss_and_grads(Xs, Ys)
    params = model.parameters()
    sizes = [p.size for p in params]
    total = sum(sizes)
    rng = np.random.default_rng(seed)
    probes = rng.choice(total, size=min(probe_count, total), replace=False)
    offsets = np.cumsum([0] + sizes)
    worst = 0.0
    for flat in probes:
        pi = int(np.searchsorted(offsets, flat, side="right") - 1)
        local = int(flat - offsets[pi])
        p = params[pi].ravel()
        orig = p[local]
        p[local] = orig + step
        loss_plus = model.loss(Xs, Ys)
        p[local] = orig - step
        loss_minus = model.loss(Xs, Ys)
        p[local] = orig
        g_num = (loss_plus - loss_minus) / (2.0 * step)
        g_ana = grads[pi].ravel()[local]
        err = abs(g_ana - g_num) / max(abs(g_ana) + abs(g_num), 1e-8)
        worst = max(worst, err)
    return worst


def predict_series(model: LstmModel, panel: AlignedPanel):
    """Walk-forward predictions: date t uses rows t-6..t-1 only."""
    w = model.config.window
    feats = panel.feature_matrix()
    n = feats.shape[0]
    if n < w + 1:
        raise InsufficientDataError(f"need >= {w + 1} rows, have {n}")
    X = np.stack([feats[t - w : t] for t in range(w, n)])
    preds = model.forward(X)
    return panel.dates[w:], preds


# -- checkpointing ----------------------------------------------------------

def save_checkpoint(model: LstmModel, path: str | Path) -> None:
    cfg = model.config
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": cfg.__dict__,
        "scaler": {
            "min": model.scaler.min_.tolist(),
            "span": model.scaler.span_.tolist(),
        },
        "target_columns": model.target_columns,
        "parameters": [p.tolist() for p in model.parameters()],
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: str | Path) -> LstmModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DimensionError(f"unsupported checkpoint format {payload.get('format')}")
    model = LstmModel(LstmConfig(**payload["config"]))
    model.scaler.min_ = np.asarray(payload["scaler"]["min"], dtype=float)
    model.scaler.span_ = np.asarray(payload["scaler"]["span"], dtype=float)
    model.target_columns = list(payload["target_columns"])
    model.target_scaler = model.scaler.subset(model.target_columns)
    model.set_parameters([np.asarray(p, dtype=float) for p in payload["parameters"]])
    return model
