"""From-scratch feedforward MLP regressor.

Double precision throughout; a linear (identity) output head on top of
relu or tanh hidden layers. Initialization, batch shuffling, and the
optimizer are all driven by numpy's default_rng (PCG64) so a seed pins
the entire training trajectory.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wavefarm.preprocess import ScalerParams, inverse_transform, transform

MODEL_FORMAT_VERSION = 1

ACTIVATIONS = ("relu", "tanh")
OPTIMIZERS = ("sgd", "adam")


class TrainingError(Exception):
    """Raised when training cannot proceed (divergence, empty sets)."""


class ModelFormatError(Exception):
    """Raised for malformed or incompatible model files."""


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    learning_rate: float = 1e-3
    batch_size: int = 256
    max_epochs: int = 100
    early_stop_patience: int = 10
    optimizer: str = "adam"
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))
        if any(w < 1 for w in self.hidden_layers):
            raise ValueError("all hidden widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("batch_size and max_epochs must be positive")


@dataclass
class MlpModel:
    """Layer dimensions plus per-layer weight matrices and bias vectors."""

    layer_dims: list[int]
    weights: list[np.ndarray]  # weights[l] maps dims[l] -> dims[l+1]
    biases: list[np.ndarray]
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        dims = self.layer_dims
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ValueError("weight/bias count does not match layer_dims")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[l], dims[l + 1]) or b.shape != (dims[l + 1],):
                raise ValueError(
                    f"layer {l}: expected weight {(dims[l], dims[l + 1])} and bias "
                    f"({dims[l + 1]},), got {w.shape} and {b.shape}"
                )

    @property
    def n_inputs(self) -> int:
        return self.layer_dims[0]

    def copy(self) -> "MlpModel":
        return MlpModel(
            layer_dims=list(self.layer_dims),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activation=self.activation,
        )


@dataclass
class TrainHistory:
    """Per-epoch losses (normalized-unit MSE) and early-stopping outcome."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return {
            "train_loss": self.train_loss,
            "val_loss": self.val_loss,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _activate_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    return (z > 0).astype(float) if kind == "relu" else 1.0 - a**2


def init_model(config: MlpConfig, n_inputs: int = 32) -> MlpModel:
    """He-style fan-in-scaled normal init, zero biases, seeded PCG64."""
    rng = np.random.default_rng(config.seed)
    dims = [n_inputs, *config.hidden_layers, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))
    return MlpModel(layer_dims=dims, weights=weights, biases=biases, activation=config.activation)


def forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Predictions for a (n, d) batch or a single d-row; linear output head."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] != model.n_inputs:
        raise ValueError(f"expected {model.n_inputs} features, got {x.shape[1]}")
    a = x
    last = len(model.weights) - 1
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        a = z if l == last else _activate(z, model.activation)
    out = a[:, 0]
    return out if np.ndim(features) == 2 else float(out[0])


def loss_and_gradients(
    model: MlpModel, features: np.ndarray, targets: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Batch MSE and its reverse-mode gradients, shaped like the parameters."""
    x = np.atleast_2d(np.asarray(features, dtype=float))
    y = np.asarray(targets, dtype=float).reshape(-1)
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.shape[0] != y.shape[0]:
        raise ValueError("feature/target row mismatch")

    last = len(model.weights) - 1
    acts = [x]  # post-activation outputs, acts[0] is the input
    zs = []
    a = x
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        zs.append(z)
        a = z if l == last else _activate(z, model.activation)
        acts.append(a)

    pred = acts[-1][:, 0]
    resid = pred - y
    with np.errstate(over="ignore"):  # divergence shows up as non-finite loss
        loss = float((resid**2).mean())

    n = x.shape[0]
    delta = (2.0 / n) * resid[:, None]  # dL/dz at the linear output
    grad_w = [np.empty(0)] * len(model.weights)
    grad_b = [np.empty(0)] * len(model.biases)
    for l in range(last, -1, -1):
        grad_w[l] = acts[l].T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ model.weights[l].T) * _activate_grad(
                zs[l - 1], acts[l], model.activation
            )
    return loss, grad_w, grad_b


def mse_loss(model: MlpModel, features: np.ndarray, targets: np.ndarray) -> float:
    pred = forward(model, np.atleast_2d(features))
    return float(((pred - np.asarray(targets).reshape(-1)) ** 2).mean())


class _Adam:
    """Adaptive-moment optimizer, decay rates 0.9/0.999, epsilon 1e-8."""

    def __init__(self, model: MlpModel, lr: float):
        self.lr = lr
        self.b1, self.b2, self.eps = 0.9, 0.999, 1e-8
        self.t = 0
        self.m = [np.zeros_like(w) for w in model.weights] + [
            np.zeros_like(b) for b in model.biases
        ]
        self.v = [np.zeros_like(g) for g in self.m]

    def step(self, model: MlpModel, grad_w: list[np.ndarray], grad_b: list[np.ndarray]):
        self.t += 1
        params = model.weights + model.biases
        grads = grad_w + grad_b
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.b1 * self.m[i] + (1 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1 - self.b2) * g**2
            m_hat = self.m[i] / (1 - self.b1**self.t)
            v_hat = self.v[i] / (1 - self.b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class _Sgd:
    def __init__(self, model: MlpModel, lr: float):
        self.lr = lr

    def step(self, model: MlpModel, grad_w, grad_b):
        for p, g in zip(model.weights + model.biases, grad_w + grad_b):
            p -= self.lr * g


def train(
    model: MlpModel,
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    config: MlpConfig,
) -> tuple[MlpModel, TrainHistory]:
    """Mini-batch training with early stopping on validation MSE.

    Batches are reshuffled each epoch by a seeded PCG64 generator. Stops
    after ``early_stop_patience`` epochs without validation improvement and
    returns the parameters from the best validation epoch.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    val_x = np.atleast_2d(np.asarray(val_x, dtype=float))
    train_y = np.asarray(train_y, dtype=float).reshape(-1)
    val_y = np.asarray(val_y, dtype=float).reshape(-1)
    if train_x.shape[0] == 0 or val_x.shape[0] == 0:
        raise TrainingError("train and validation sets must be non-empty")

    model = model.copy()
    rng = np.random.default_rng(config.seed)
    opt = (_Adam if config.optimizer == "adam" else _Sgd)(model, config.learning_rate)

    history = TrainHistory()
    best = model.copy()
    best_loss = np.inf
    since_best = 0
    n = train_x.shape[0]

    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, gw, gb = loss_and_gradients(model, train_x[idx], train_y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            opt.step(model, gw, gb)

        tr = mse_loss(model, train_x, train_y)
        vl = mse_loss(model, val_x, val_y)
        if not (np.isfinite(tr) and np.isfinite(vl)):
            raise TrainingError(f"non-finite loss at epoch {epoch}")
        history.train_loss.append(tr)
        history.val_loss.append(vl)

        if vl < best_loss:
            best_loss = vl
            best = model.copy()
            history.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.early_stop_patience:
                history.stopped_early = True
                break

    return best, history


def predict_batch(
    model: MlpModel,
    feature_scaler: ScalerParams,
    target_scaler: ScalerParams,
    raw_features: np.ndarray,
) -> np.ndarray:
    """Scale raw layouts, run the model, and map predictions back to watts."""
    if feature_scaler.n_features != model.n_inputs:
        raise ValueError(
            f"feature scaler width {feature_scaler.n_features} does not match "
            f"model input width {model.n_inputs}"
        )
    x = transform(feature_scaler, np.atleast_2d(raw_features))
    pred = forward(model, x)
    return inverse_transform(target_scaler, pred.reshape(-1, 1))[:, 0]


def _encode(a: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii")


def _decode(s: str, shape: tuple[int, ...], name: str) -> np.ndarray:
    raw = base64.b64decode(s.encode("ascii"))
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise ModelFormatError(f"{name}: expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape)


def save_model(
    model: MlpModel,
    feature_scaler: ScalerParams,
    target_scaler: ScalerParams,
    path: str | Path,
) -> None:
    """Self-describing JSON envelope; parameters as base64 little-endian f8."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_dims": model.layer_dims,
        "activation": model.activation,
        "weights": [_encode(w) for w in model.weights],
        "biases": [_encode(b) for b in model.biases],
        "feature_scaler": feature_scaler.to_dict(),
        "target_scaler": target_scaler.to_dict(),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[MlpModel, ScalerParams, ScalerParams]:
    """Load a saved model; round-trip is bit-exact on all parameters."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc

    for key in ("format_version", "layer_dims", "activation", "weights", "biases",
                "feature_scaler", "target_scaler"):
        if key not in doc:
            raise ModelFormatError(f"missing field {key!r}")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format_version {doc['format_version']} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    dims = [int(d) for d in doc["layer_dims"]]
    if len(doc["weights"]) != len(dims) - 1 or len(doc["biases"]) != len(dims) - 1:
        raise ModelFormatError("weights/biases count does not match layer_dims")
    weights = [
        _decode(s, (dims[l], dims[l + 1]), f"weights[{l}]")
        for l, s in enumerate(doc["weights"])
    ]
    biases = [_decode(s, (dims[l + 1],), f"biases[{l}]") for l, s in enumerate(doc["biases"])]
    try:
        model = MlpModel(
            layer_dims=dims, weights=weights, biases=biases, activation=doc["activation"]
        )
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc
    return (
        model,
        ScalerParams.from_dict(doc["feature_scaler"]),
        ScalerParams.from_dict(doc["target_scaler"]),
    )
